//! Suffix aggregation over prefix-trained predictors.
//!
//! For a sample of size `n ≥ 4` the predictors trained on `S_{≤t}` for
//! `t = ⌈n/4⌉, …, n − 1` are combined by plurality vote (classification)
//! or by their uniform average (regression).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{plurality_vote, OigLearner, Predictor, RegressionLearner};
use crate::classes::{Alphabet, HypothesisClass, Label, LabeledSample};
use crate::{Error, Rational, Result};

/// `t0 = ⌈n/4⌉`.
pub fn suffix_start(n: usize) -> Result<usize> {
    if n < 4 {
        return Err(Error::invalid(format!("suffix aggregation needs n ≥ 4, got {n}")));
    }
    Ok(n.div_ceil(4))
}

/// Predictions of `f̂(·; S_{≤t})` on a fixed list of points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrefixTable {
    pub t0: usize,
    pub points: Vec<usize>,
    /// `rows[t − t0][j]` is the prediction at `points[j]` after `t` examples.
    pub rows: Vec<Vec<Label>>,
}

impl PrefixTable {
    /// Evaluates `base` on every prefix `S_{≤t}` with `t0 ≤ t < n`.
    ///
    /// Set-valued predictors are only re-run when a prefix adds a new
    /// distinct entry.
    pub fn build<P: Predictor + ?Sized>(base: &P, sample: &LabeledSample, points: &[usize]) -> Result<Self> {
        let n = sample.len();
        let t0 = suffix_start(n)?;
        let entries = sample.entries();
        let mut rows: Vec<Vec<Label>> = Vec::with_capacity(n - t0);
        let mut seen: BTreeSet<(usize, Label)> = entries[..t0].iter().cloned().collect();
        for t in t0..n {
            let grew = t > t0 && seen.insert(entries[t - 1].clone());
            let reuse = base.set_valued() && t > t0 && !grew;
            let row = if reuse {
                rows[rows.len() - 1].clone()
            } else {
                let prefix = if base.set_valued() {
                    LabeledSample::new(seen.iter().cloned().collect())
                } else {
                    sample.prefix(t)
                };
                points
                    .iter()
                    .map(|&x| base.predict(&prefix, x))
                    .collect::<Result<Vec<_>>>()?
            };
            rows.push(row);
        }
        Ok(PrefixTable {
            t0,
            points: points.to_vec(),
            rows,
        })
    }

    /// Column `j`: the predictions at `points[j]` over all prefixes.
    pub fn column(&self, j: usize) -> Vec<Label> {
        self.rows.iter().map(|row| row[j].clone()).collect()
    }

    pub fn majority(&self) -> Result<Vec<Label>> {
        (0..self.points.len()).map(|j| plurality_vote(&self.column(j))).collect()
    }

    /// Uniform average of each column. The exact mean is returned when it
    /// fits in 64-bit terms, otherwise the nearest multiple of `2^-40`.
    pub fn average(&self) -> Result<Vec<Label>> {
        let k = BigInt::from(self.rows.len());
        (0..self.points.len())
            .map(|j| {
                let mut sum = BigRational::zero();
                for label in self.column(j) {
                    let v = label
                        .real()
                        .ok_or_else(|| Error::invalid("averaging needs real-valued predictions"))?;
                    sum += BigRational::new(BigInt::from(*v.numer()), BigInt::from(*v.denom()));
                }
                Ok(Label::Real(to_small(sum / BigRational::from_integer(k.clone()))))
            })
            .collect()
    }
}

fn to_small(v: BigRational) -> Rational {
    if let (Some(n), Some(d)) = (v.numer().to_i64(), v.denom().to_i64()) {
        return Rational::new(n, d);
    }
    let scale = BigInt::from(1u64 << 40);
    let twice: BigInt = v.numer() * &scale * 2 + v.denom();
    let rounded = twice.div_floor(&(v.denom() * 2));
    Rational::new(rounded.to_i64().expect("mean lies in a bounded range"), 1 << 40)
}

/// Plurality vote of the suffix predictors.
pub struct SuffixMajority<P> {
    base: P,
}

impl<P: Predictor> SuffixMajority<P> {
    pub fn new(base: P) -> Self {
        SuffixMajority { base }
    }

    pub fn base(&self) -> &P {
        &self.base
    }

    pub fn table(&self, sample: &LabeledSample, points: &[usize]) -> Result<PrefixTable> {
        PrefixTable::build(&self.base, sample, points)
    }
}

impl<P: Predictor> Predictor for SuffixMajority<P> {
    fn predict(&self, sample: &LabeledSample, x: usize) -> Result<Label> {
        let table = self.table(sample, &[x])?;
        Ok(table.majority()?.remove(0))
    }

    fn name(&self) -> String {
        format!("suffix-majority({})", self.base.name())
    }
}

/// Uniform average of the suffix predictors, weights `1/(n − t0)`.
pub struct SuffixAverage<P> {
    base: P,
}

impl<P: Predictor> SuffixAverage<P> {
    pub fn new(base: P) -> Self {
        SuffixAverage { base }
    }

    pub fn base(&self) -> &P {
        &self.base
    }

    pub fn table(&self, sample: &LabeledSample, points: &[usize]) -> Result<PrefixTable> {
        PrefixTable::build(&self.base, sample, points)
    }
}

impl<P: Predictor> Predictor for SuffixAverage<P> {
    fn predict(&self, sample: &LabeledSample, x: usize) -> Result<Label> {
        let table = self.table(sample, &[x])?;
        Ok(table.average()?.remove(0))
    }

    fn name(&self) -> String {
        format!("suffix-average({})", self.base.name())
    }
}

/// Suffix majority of one-inclusion predictors; partial classes use the
/// partial predictor.
pub fn suffix_majority_predict(class: &HypothesisClass, sample: &LabeledSample, x: usize) -> Result<Label> {
    let base = match class.alphabet() {
        Alphabet::Partial => OigLearner::partial(class.clone())?,
        _ => OigLearner::new(class.clone())?,
    };
    SuffixMajority::new(base).predict(sample, x)
}

/// Suffix average of regression predictors.
pub fn suffix_average_predict(
    class: &HypothesisClass,
    gamma: Rational,
    sample: &LabeledSample,
    x: usize,
) -> Result<Label> {
    SuffixAverage::new(RegressionLearner::new(class.clone(), gamma)?).predict(sample, x)
}
