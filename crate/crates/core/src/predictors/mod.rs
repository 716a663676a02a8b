//! Predictors, losses and leave-one-out audits.
//!
//! Every predictor maps a training sample and a test point to a label.
//! Base predictors ([`OigLearner`], [`RegressionLearner`], [`ErmLearner`])
//! are symmetric in the sample; the suffix aggregators built on them are
//! not, since they look at prefixes.

mod oig;
mod regression;
mod suffix;

pub use oig::{oig_predict, partial_oig_predict, OigLearner};
pub use regression::{regression_predict, RegressionLearner};
pub use suffix::{
    suffix_average_predict, suffix_majority_predict, suffix_start, PrefixTable, SuffixAverage, SuffixMajority,
};

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::classes::{format_rational, Alphabet, HypothesisClass, Label, LabeledSample};
use crate::{Error, Rational, Result};

/// `f̂(x; S)`.
pub trait Predictor: Send + Sync {
    fn predict(&self, sample: &LabeledSample, x: usize) -> Result<Label>;

    /// True when the prediction depends on the sample only through its set
    /// of distinct entries, so callers may pass any sample with the same set.
    fn set_valued(&self) -> bool {
        false
    }

    fn name(&self) -> String;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn predict(&self, sample: &LabeledSample, x: usize) -> Result<Label> {
        (**self).predict(sample, x)
    }

    fn set_valued(&self) -> bool {
        (**self).set_valued()
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

impl<P: Predictor + ?Sized> Predictor for Arc<P> {
    fn predict(&self, sample: &LabeledSample, x: usize) -> Result<Label> {
        (**self).predict(sample, x)
    }

    fn set_valued(&self) -> bool {
        (**self).set_valued()
    }

    fn name(&self) -> String {
        (**self).name()
    }
}

/// Loss functions, all exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// `1{ŷ ≠ y}`.
    ZeroOne,
    /// `|ŷ − y|` on real labels.
    Absolute,
    /// `1{ŷ ≠ y and y ≠ ⋆}`.
    Bounded,
}

impl Loss {
    pub fn eval(self, predicted: &Label, truth: &Label) -> Result<Rational> {
        let indicator = |b: bool| Rational::from_integer(i64::from(b));
        match self {
            Loss::ZeroOne => Ok(indicator(predicted != truth)),
            Loss::Bounded => Ok(indicator(predicted != truth && !truth.is_star())),
            Loss::Absolute => match (predicted.real(), truth.real()) {
                (Some(p), Some(y)) => Ok((p - y).abs()),
                _ => Err(Error::invalid("absolute loss needs real-valued labels")),
            },
        }
    }

    /// The natural loss for a class alphabet.
    pub fn for_alphabet(alphabet: Alphabet) -> Loss {
        match alphabet {
            Alphabet::Real => Loss::Absolute,
            Alphabet::Partial => Loss::Bounded,
            _ => Loss::ZeroOne,
        }
    }
}

/// Most frequent label; ties go to the smallest label.
pub fn plurality_vote(labels: &[Label]) -> Result<Label> {
    let mut counts: BTreeMap<&Label, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let mut best: Option<(&Label, usize)> = None;
    for (label, count) in counts {
        if best.map_or(true, |(_, c)| count > c) {
            best = Some((label, count));
        }
    }
    best.map(|(l, _)| l.clone())
        .ok_or_else(|| Error::invalid("plurality vote over no labels"))
}

fn real_labels(sample: &LabeledSample) -> Result<Vec<(usize, Rational)>> {
    sample
        .entries()
        .iter()
        .map(|(p, y)| {
            y.real()
                .map(|v| (*p, v))
                .ok_or_else(|| Error::invalid(format!("label `{y}` is not real-valued")))
        })
        .collect()
}

/// Empirical risk minimiser for absolute loss: the row with the smallest
/// `Σ |f(x_i) − y_i|`, ties to the smallest row index.
pub fn erm_regression(class: &HypothesisClass, sample: &LabeledSample) -> Result<usize> {
    if class.alphabet() != Alphabet::Real {
        return Err(Error::invalid("ERM regression needs a real-valued class"));
    }
    if sample.is_empty() {
        return Err(Error::invalid("ERM needs a nonempty sample"));
    }
    sample.check_points(class.domain_size())?;
    let labels = real_labels(sample)?;
    let mut best = (0, None::<Rational>);
    for (r, row) in class.rows().iter().enumerate() {
        let loss: Rational = labels
            .iter()
            .map(|(p, y)| (row[*p].real().expect("real class") - y).abs())
            .sum();
        if best.1.map_or(true, |b| loss < b) {
            best = (r, Some(loss));
        }
    }
    Ok(best.0)
}

/// The ERM hypothesis evaluated at the test point.
#[derive(Clone, Debug)]
pub struct ErmLearner {
    class: HypothesisClass,
}

impl ErmLearner {
    pub fn new(class: HypothesisClass) -> Result<Self> {
        if class.alphabet() != Alphabet::Real {
            return Err(Error::invalid("ERM regression needs a real-valued class"));
        }
        Ok(ErmLearner { class })
    }
}

impl Predictor for ErmLearner {
    fn predict(&self, sample: &LabeledSample, x: usize) -> Result<Label> {
        if x >= self.class.domain_size() {
            return Err(Error::invalid(format!("test point {x} outside the domain")));
        }
        let row = erm_regression(&self.class, sample)?;
        Ok(self.class.row(row)[x].clone())
    }

    fn name(&self) -> String {
        "erm".into()
    }
}

/// Leave-one-out losses `ℓ(f̂(x_i; S^{−i}), y_i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LooAudit {
    pub predictions: Vec<Label>,
    pub losses: Vec<Rational>,
    pub total: Rational,
    pub bound: Option<Rational>,
}

impl LooAudit {
    /// True when no bound was supplied or the total respects it.
    pub fn within_bound(&self) -> bool {
        self.bound.map_or(true, |b| self.total <= b)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "predictions": self.predictions.iter().map(Label::to_string).collect::<Vec<_>>(),
            "losses": self.losses.iter().map(format_rational).collect::<Vec<_>>(),
            "total": format_rational(&self.total),
            "bound": self.bound.as_ref().map(format_rational),
            "within_bound": self.within_bound(),
        })
    }
}

pub fn loo_audit(
    predictor: &dyn Predictor,
    sample: &LabeledSample,
    loss: Loss,
    bound: Option<Rational>,
) -> Result<LooAudit> {
    let mut predictions = Vec::with_capacity(sample.len());
    let mut losses = Vec::with_capacity(sample.len());
    for (i, (x, y)) in sample.entries().iter().enumerate() {
        let prediction = predictor.predict(&sample.without(i), *x)?;
        losses.push(loss.eval(&prediction, y)?);
        predictions.push(prediction);
    }
    let total = losses.iter().fold(Rational::zero(), |acc, l| acc + l);
    Ok(LooAudit {
        predictions,
        losses,
        total,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn classes(ls: &[u32]) -> Vec<Label> {
        ls.iter().map(|&c| Label::Class(c)).collect()
    }

    #[test]
    fn plurality_examples() {
        assert_eq!(plurality_vote(&classes(&[1, 1, 2])).unwrap(), Label::Class(1));
        assert_eq!(plurality_vote(&classes(&[0, 1])).unwrap(), Label::Class(0));
        assert_eq!(plurality_vote(&classes(&[1, 0])).unwrap(), Label::Class(0));
        assert_eq!(plurality_vote(&classes(&[2, 2, 2])).unwrap(), Label::Class(2));
        assert!(plurality_vote(&[]).is_err());
    }

    #[test]
    fn wrong_majority_means_half_the_voters_are_wrong() {
        // Every multiset of up to 6 votes over 3 labels, every truth.
        for len in 1..=6u32 {
            for code in 0..3u32.pow(len) {
                let votes: Vec<Label> = (0..len).map(|i| Label::Class(code / 3u32.pow(i) % 3)).collect();
                let winner = plurality_vote(&votes).unwrap();
                for truth in 0..3 {
                    let truth = Label::Class(truth);
                    let wrong = votes.iter().filter(|v| **v != truth).count();
                    if winner != truth {
                        assert!(2 * wrong >= votes.len());
                    }
                }
            }
        }
    }

    #[test]
    fn losses() {
        let (zero, one, star) = (Label::Class(0), Label::Class(1), Label::Star);
        assert_eq!(Loss::ZeroOne.eval(&zero, &one).unwrap(), r(1, 1));
        assert_eq!(Loss::Bounded.eval(&zero, &star).unwrap(), r(0, 1));
        assert_eq!(Loss::Bounded.eval(&zero, &one).unwrap(), r(1, 1));
        let (a, b) = (Label::Real(r(1, 4)), Label::Real(r(7, 10)));
        assert_eq!(Loss::Absolute.eval(&a, &b).unwrap(), r(9, 20));
        assert!(Loss::Absolute.eval(&zero, &b).is_err());
    }

    #[test]
    fn erm_examples() {
        let h = HypothesisClass::real(vec![vec![r(0, 1), r(0, 1)], vec![r(1, 1), r(1, 2)]]).unwrap();
        let s = LabeledSample::new(vec![(0, Label::Real(r(9, 10))), (1, Label::Real(r(1, 2)))]);
        assert_eq!(erm_regression(&h, &s).unwrap(), 1);
        let realizable = LabeledSample::labeled_by(&[0, 1], h.row(0));
        assert_eq!(erm_regression(&h, &realizable).unwrap(), 0);
        let tie = LabeledSample::new(vec![(0, Label::Real(r(1, 2)))]);
        assert_eq!(erm_regression(&h, &tie).unwrap(), 0);
    }

    #[test]
    fn loo_of_duplicated_point_is_zero() {
        let h = HypothesisClass::from_strings(&["00", "01", "10", "11"]).unwrap();
        let learner = OigLearner::new(h).unwrap();
        let s = LabeledSample::new(vec![(1, Label::Class(1)); 5]);
        let audit = loo_audit(&learner, &s, Loss::ZeroOne, Some(r(0, 1))).unwrap();
        assert_eq!(audit.total, r(0, 1));
        assert!(audit.within_bound());
    }
}
