//! CSV encodings for classes and samples.
//!
//! Class files have a `point_0,…,point_{m-1}` header and one hypothesis per
//! line. Sample files have a `point,label` header. Lines starting with `#`
//! and blank lines are ignored.

use std::io::{BufRead, Write};

use super::{infer_alphabet, HypothesisClass, Label, LabeledSample};
use crate::{Error, Result};

fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.to_string())))
            }
        }
    })
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

impl HypothesisClass {
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = data_lines(reader);
        let (header_line, header) = lines
            .next()
            .transpose()?
            .ok_or_else(|| parse_err(1, "empty class file"))?;
        let columns: Vec<&str> = header.split(',').map(str::trim).collect();
        for (j, col) in columns.iter().enumerate() {
            if *col != format!("point_{j}") {
                return Err(parse_err(
                    header_line,
                    format!("header column {j} is `{col}`, expected `point_{j}`"),
                ));
            }
        }

        let mut rows = Vec::new();
        let mut real_line = None;
        let mut discrete_line = None;
        for item in lines {
            let (line, text) = item?;
            let cells: Vec<&str> = text.split(',').collect();
            if cells.len() != columns.len() {
                return Err(parse_err(
                    line,
                    format!("row has {} cells, header has {}", cells.len(), columns.len()),
                ));
            }
            let row = cells
                .iter()
                .map(|c| Label::parse(c).map_err(|m| parse_err(line, m)))
                .collect::<Result<Vec<_>>>()?;
            for label in &row {
                match label {
                    Label::Real(_) => real_line = real_line.or(Some(line)),
                    _ => discrete_line = discrete_line.or(Some(line)),
                }
            }
            if let (Some(r), Some(d)) = (real_line, discrete_line) {
                return Err(parse_err(
                    line,
                    format!("mixed alphabets: decimal labels (line {r}) and integer or `*` labels (line {d})"),
                ));
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(parse_err(header_line, "class file has no hypotheses"));
        }
        let alphabet = infer_alphabet(rows.iter().flatten()).map_err(|e| parse_err(header_line, e.to_string()))?;
        HypothesisClass::new(alphabet, columns.len(), rows)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (0..self.domain_size()).map(|j| format!("point_{j}")).collect();
        writeln!(out, "{}", header.join(","))?;
        for row in self.rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|l| match l {
                    // Keep integral reals recognisable as reals.
                    Label::Real(r) if r.is_integer() => format!("{}.0", r.to_integer()),
                    other => other.to_string(),
                })
                .collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

impl LabeledSample {
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = data_lines(reader);
        let (header_line, header) = lines
            .next()
            .transpose()?
            .ok_or_else(|| parse_err(1, "empty sample file"))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["point", "label"] {
            return Err(parse_err(header_line, "sample header must be `point,label`"));
        }
        let mut entries = Vec::new();
        for item in lines {
            let (line, text) = item?;
            let (p, y) = text
                .split_once(',')
                .ok_or_else(|| parse_err(line, "expected `point,label`"))?;
            let point = p
                .trim()
                .parse::<usize>()
                .map_err(|_| parse_err(line, format!("bad point index `{}`", p.trim())))?;
            let label = Label::parse(y).map_err(|m| parse_err(line, m))?;
            entries.push((point, label));
        }
        Ok(LabeledSample::new(entries))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "point,label")?;
        for (p, y) in self.entries() {
            writeln!(out, "{p},{y}")?;
        }
        Ok(())
    }
}
