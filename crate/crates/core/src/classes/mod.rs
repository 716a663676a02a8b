//! Finite hypothesis classes, labeled samples and brute-force dimensions.
//!
//! A [`HypothesisClass`] is a deduplicated, lexicographically sorted matrix
//! of labels: one row per hypothesis, one column per domain point. Rows are
//! referred to by their index in this canonical order everywhere in the
//! crate, so tie-breaking downstream is deterministic.

mod dimensions;
mod io;

pub(crate) use dimensions::combinations;
pub use dimensions::{
    apply_threshold, candidate_levels, ds_dimension, fat_dimension, is_p_gamma_shattered,
    is_shattered, is_v_gamma_shattered, threshold_label, v_gamma_dimension, vc_dimension,
    DimensionReport,
};

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Rational, Result};

/// A single label value.
///
/// The derived order (classes ascending, then ⋆, then reals ascending) is
/// the canonical label order used for row sorting and tie-breaking.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Class(u32),
    /// The "I don't know" label of partial classes.
    Star,
    Real(Rational),
}

impl Label {
    pub fn class(&self) -> Option<u32> {
        match self {
            Label::Class(c) => Some(*c),
            _ => None,
        }
    }

    pub fn real(&self) -> Option<Rational> {
        match self {
            Label::Real(r) => Some(*r),
            _ => None,
        }
    }

    pub fn is_star(&self) -> bool {
        matches!(self, Label::Star)
    }

    /// Parses a single cell: an integer, `*`, a decimal such as `0.25`, or a
    /// fraction such as `1/3`.
    pub fn parse(cell: &str) -> std::result::Result<Label, String> {
        let cell = cell.trim();
        if cell == "*" {
            return Ok(Label::Star);
        }
        if cell.contains('.') || cell.contains('/') {
            return parse_rational(cell).map(Label::Real);
        }
        cell.parse::<u32>()
            .map(Label::Class)
            .map_err(|_| format!("cannot parse label `{cell}`"))
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Class(c) => write!(f, "{c}"),
            Label::Star => write!(f, "*"),
            Label::Real(r) => f.write_str(&format_rational(r)),
        }
    }
}

/// Parses `0.125`, `1.0`, `.5` or `2/7` into an exact rational.
pub fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| format!("bad numerator in `{s}`"))?;
        let den: i64 = den.trim().parse().map_err(|_| format!("bad denominator in `{s}`"))?;
        if den == 0 {
            return Err(format!("zero denominator in `{s}`"));
        }
        return Ok(Rational::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("cannot parse number `{s}`"));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(format!("cannot parse number `{s}`"));
    }
    if frac_part.len() > 12 {
        return Err(format!("too many decimal places in `{s}`"));
    }
    let den = 10i64.pow(frac_part.len() as u32);
    let int: i64 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| format!("number `{s}` out of range"))?
    };
    let frac: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().unwrap() };
    let num = int
        .checked_mul(den)
        .and_then(|v| v.checked_add(frac))
        .ok_or_else(|| format!("number `{s}` out of range"))?;
    Ok(Rational::new(if negative { -num } else { num }, den))
}

/// Terminating decimals print as decimals, everything else as `p/q`.
pub fn format_rational(r: &Rational) -> String {
    let mut den = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives).max(1);
    let scale = 10i64.pow(places);
    let scaled = r.numer() * (scale / r.denom());
    let sign = if scaled < 0 { "-" } else { "" };
    let scaled = scaled.abs();
    let mut frac = format!("{:0width$}", scaled % scale, width = places as usize);
    while frac.len() > 1 && frac.ends_with('0') {
        frac.pop();
    }
    format!("{sign}{}.{frac}", scaled / scale)
}

/// The label alphabet of a class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphabet {
    Binary,
    /// Labels `0..k`.
    Multiclass(u32),
    /// Labels `0`, `1` and ⋆.
    Partial,
    /// Rationals in `[0, 1]`.
    Real,
}

impl Alphabet {
    pub fn is_discrete(self) -> bool {
        !matches!(self, Alphabet::Real)
    }

    fn admits(self, label: &Label) -> bool {
        match (self, label) {
            (Alphabet::Binary, Label::Class(c)) => *c <= 1,
            (Alphabet::Multiclass(k), Label::Class(c)) => *c < k,
            (Alphabet::Partial, Label::Class(c)) => *c <= 1,
            (Alphabet::Partial, Label::Star) => true,
            (Alphabet::Real, Label::Real(r)) => *r >= Rational::zero() && *r <= Rational::one(),
            _ => false,
        }
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alphabet::Binary => write!(f, "binary"),
            Alphabet::Multiclass(k) => write!(f, "multiclass({k})"),
            Alphabet::Partial => write!(f, "partial"),
            Alphabet::Real => write!(f, "real"),
        }
    }
}

/// A finite class `H ⊆ Y^X` over the domain `{0, …, domain_size − 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HypothesisClass {
    domain_size: usize,
    alphabet: Alphabet,
    rows: Vec<Vec<Label>>,
}

impl HypothesisClass {
    /// Validates the rows against `alphabet`, then sorts and deduplicates them.
    pub fn new(alphabet: Alphabet, domain_size: usize, mut rows: Vec<Vec<Label>>) -> Result<Self> {
        if domain_size == 0 {
            return Err(Error::invalid("domain must contain at least one point"));
        }
        if rows.is_empty() {
            return Err(Error::invalid("class must contain at least one hypothesis"));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != domain_size {
                return Err(Error::invalid(format!(
                    "row {r} has {} labels, expected {domain_size}",
                    row.len()
                )));
            }
            if let Some(bad) = row.iter().find(|l| !alphabet.admits(l)) {
                return Err(Error::invalid(format!(
                    "row {r}: label `{bad}` is not in the {alphabet} alphabet"
                )));
            }
        }
        rows.sort();
        rows.dedup();
        Ok(HypothesisClass {
            domain_size,
            alphabet,
            rows,
        })
    }

    /// Builds a class, inferring the smallest alphabet that admits every label.
    pub fn from_rows(rows: Vec<Vec<Label>>) -> Result<Self> {
        let domain_size = rows.first().map_or(0, Vec::len);
        let alphabet = infer_alphabet(rows.iter().flatten())?;
        Self::new(alphabet, domain_size, rows)
    }

    /// Shorthand for discrete classes written as strings, e.g. `["01*", "110"]`.
    /// Each character is one label: a digit or `*`.
    pub fn from_strings(rows: &[&str]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|row| {
                row.chars()
                    .map(|c| match c {
                        '*' => Ok(Label::Star),
                        d if d.is_ascii_digit() => Ok(Label::Class(d as u32 - '0' as u32)),
                        other => Err(Error::invalid(format!("unexpected label character `{other}`"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(parsed)
    }

    /// A real-valued class.
    pub fn real(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let domain_size = rows.first().map_or(0, Vec::len);
        let rows = rows
            .into_iter()
            .map(|row| row.into_iter().map(Label::Real).collect())
            .collect();
        Self::new(Alphabet::Real, domain_size, rows)
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn rows(&self) -> &[Vec<Label>] {
        &self.rows
    }

    pub fn row(&self, index: usize) -> &[Label] {
        &self.rows[index]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn index_of(&self, row: &[Label]) -> Option<usize> {
        self.rows.binary_search_by(|r| r.as_slice().cmp(row)).ok()
    }

    /// `H|_U`: the deduplicated restriction to `points`, columns in ascending
    /// point order.
    pub fn project(&self, points: &[usize]) -> Result<HypothesisClass> {
        let points = self.canonical_points(points)?;
        let rows = self
            .rows
            .iter()
            .map(|row| points.iter().map(|&p| row[p].clone()).collect())
            .collect();
        HypothesisClass::new(self.alphabet, points.len(), rows)
    }

    /// Sorts and deduplicates `points`, rejecting empty or out-of-range sets.
    pub fn canonical_points(&self, points: &[usize]) -> Result<Vec<usize>> {
        if points.is_empty() {
            return Err(Error::invalid("projection needs at least one point"));
        }
        let set: BTreeSet<usize> = points.iter().copied().collect();
        if let Some(&p) = set.iter().next_back() {
            if p >= self.domain_size {
                return Err(Error::invalid(format!(
                    "point {p} outside domain of size {}",
                    self.domain_size
                )));
            }
        }
        Ok(set.into_iter().collect())
    }

    /// Indices of rows agreeing with every sample entry.
    pub fn consistent_rows(&self, sample: &LabeledSample) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&r| {
                sample
                    .entries()
                    .iter()
                    .all(|(p, y)| self.rows[r].get(*p) == Some(y))
            })
            .collect()
    }

    pub fn is_realizable(&self, sample: &LabeledSample) -> bool {
        !self.consistent_rows(sample).is_empty()
    }

    /// All distinct label values appearing in a real class, ascending.
    pub fn real_values(&self) -> Vec<Rational> {
        let set: BTreeSet<Rational> = self.rows.iter().flatten().filter_map(Label::real).collect();
        set.into_iter().collect()
    }
}

pub(crate) fn infer_alphabet<'a>(labels: impl Iterator<Item = &'a Label>) -> Result<Alphabet> {
    let (mut max_class, mut any_class, mut star, mut real) = (0u32, false, false, false);
    for label in labels {
        match label {
            Label::Class(c) => {
                any_class = true;
                max_class = max_class.max(*c);
            }
            Label::Star => star = true,
            Label::Real(_) => real = true,
        }
    }
    match (any_class, star, real) {
        (_, _, true) if any_class || star => Err(Error::invalid(
            "mixed alphabets: real-valued labels cannot be combined with integer or `*` labels",
        )),
        (_, _, true) => Ok(Alphabet::Real),
        (_, true, _) if max_class > 1 => Err(Error::invalid(
            "mixed alphabets: `*` is only allowed together with labels 0 and 1",
        )),
        (_, true, _) => Ok(Alphabet::Partial),
        _ if max_class <= 1 => Ok(Alphabet::Binary),
        _ => Ok(Alphabet::Multiclass(max_class + 1)),
    }
}

/// An ordered training sample of `(point, label)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LabeledSample {
    entries: Vec<(usize, Label)>,
}

impl LabeledSample {
    pub fn new(entries: Vec<(usize, Label)>) -> Self {
        LabeledSample { entries }
    }

    /// Labels every point with the matching entry of `row`.
    pub fn labeled_by(points: &[usize], row: &[Label]) -> Self {
        LabeledSample {
            entries: points.iter().map(|&p| (p, row[p].clone())).collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, Label)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `S^{-i}`.
    pub fn without(&self, index: usize) -> LabeledSample {
        let mut entries = self.entries.clone();
        entries.remove(index);
        LabeledSample { entries }
    }

    /// `S_{≤t}`: the first `t` entries.
    pub fn prefix(&self, t: usize) -> LabeledSample {
        LabeledSample {
            entries: self.entries[..t.min(self.entries.len())].to_vec(),
        }
    }

    /// `U_S`: the distinct points, ascending.
    pub fn unique_points(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.entries.iter().map(|(p, _)| *p).collect();
        set.into_iter().collect()
    }

    /// The sample as a set: distinct entries in canonical order.
    pub fn distinct_entries(&self) -> Vec<(usize, Label)> {
        let set: BTreeSet<(usize, Label)> = self.entries.iter().cloned().collect();
        set.into_iter().collect()
    }

    /// Reorders the sample: entry `k` of the result is entry `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> LabeledSample {
        LabeledSample {
            entries: order.iter().map(|&i| self.entries[i].clone()).collect(),
        }
    }

    pub fn check_points(&self, domain_size: usize) -> Result<()> {
        match self.entries.iter().find(|(p, _)| *p >= domain_size) {
            Some((p, _)) => Err(Error::invalid(format!(
                "sample point {p} outside domain of size {domain_size}"
            ))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thresholds4() -> HypothesisClass {
        HypothesisClass::from_strings(&["0000", "1000", "1100", "1110", "1111"]).unwrap()
    }

    #[test]
    fn rows_are_sorted_and_deduplicated() {
        let h = HypothesisClass::from_strings(&["11", "00", "11"]).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.row(0), &[Label::Class(0), Label::Class(0)]);
        assert_eq!(h.alphabet(), Alphabet::Binary);
    }

    #[test]
    fn project_single_point_of_cube() {
        let cube = HypothesisClass::from_strings(&["000", "001", "010", "011", "100", "101", "110", "111"])
            .unwrap();
        let p = cube.project(&[0]).unwrap();
        assert_eq!(p, HypothesisClass::from_strings(&["0", "1"]).unwrap());
    }

    #[test]
    fn project_constant_rows() {
        let h = HypothesisClass::from_strings(&["000", "111"]).unwrap();
        assert_eq!(h.project(&[0, 1]).unwrap(), HypothesisClass::from_strings(&["00", "11"]).unwrap());
    }

    #[test]
    fn project_thresholds_on_two_points() {
        // Rows restricted to x2, x4 (0-based 1, 3): 00, 00, 10, 10, 11.
        let p = thresholds4().project(&[3, 1]).unwrap();
        assert_eq!(p, HypothesisClass::from_strings(&["00", "10", "11"]).unwrap());
    }

    #[test]
    fn project_rejects_empty_and_out_of_range() {
        assert!(matches!(thresholds4().project(&[]), Err(Error::InvalidArgument(_))));
        assert!(matches!(thresholds4().project(&[4]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn alphabet_inference() {
        assert_eq!(HypothesisClass::from_strings(&["02"]).unwrap().alphabet(), Alphabet::Multiclass(3));
        assert_eq!(HypothesisClass::from_strings(&["0*"]).unwrap().alphabet(), Alphabet::Partial);
        assert!(HypothesisClass::from_strings(&["2*"]).is_err());
        let mixed = vec![vec![Label::Class(0), Label::Real(Rational::new(1, 2))]];
        assert!(HypothesisClass::from_rows(mixed).is_err());
    }

    #[test]
    fn real_labels_must_lie_in_unit_interval() {
        assert!(HypothesisClass::real(vec![vec![Rational::new(3, 2)]]).is_err());
        assert!(HypothesisClass::real(vec![vec![Rational::new(1, 2)]]).is_ok());
    }

    #[test]
    fn rational_round_trip() {
        for s in ["0.45", "1.0", "0.125", "0.0"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert_eq!(parse_rational(".5").unwrap(), Rational::new(1, 2));
        assert_eq!(format_rational(&Rational::new(1, 3)), "1/3");
        assert_eq!(format_rational(&Rational::new(1, 2)), "0.5");
        assert!(parse_rational("0.1.2").is_err());
    }

    #[test]
    fn sample_views() {
        let s = LabeledSample::new(vec![
            (2, Label::Class(1)),
            (0, Label::Class(0)),
            (2, Label::Class(1)),
        ]);
        assert_eq!(s.unique_points(), vec![0, 2]);
        assert_eq!(s.without(1).len(), 2);
        assert_eq!(s.prefix(1).entries(), &[(2, Label::Class(1))]);
        assert_eq!(s.distinct_entries().len(), 2);
        assert!(s.check_points(2).is_err());
    }

    #[test]
    fn realizability() {
        let h = HypothesisClass::from_strings(&["00", "11"]).unwrap();
        let ok = LabeledSample::new(vec![(0, Label::Class(1))]);
        let bad = LabeledSample::new(vec![(0, Label::Class(1)), (1, Label::Class(0))]);
        assert_eq!(h.consistent_rows(&ok), vec![1]);
        assert!(!h.is_realizable(&bad));
    }
}
