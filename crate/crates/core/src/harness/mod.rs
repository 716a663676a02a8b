//! Finite-distribution simulations.
//!
//! Distributions live on the class domain and label every point with a
//! fixed target hypothesis, so every risk is a finite weighted sum and is
//! computed exactly. Randomness comes from ChaCha8 streams: trial `k` of a
//! run with master seed `s` uses stream `k` of the generator seeded with
//! `s`, which makes serial and parallel runs identical.

mod martingale;
mod pac;
mod report;

pub use martingale::{verify_martingale_bounds, MartingaleReport, Process};
pub use pac::{run_pac_experiment, run_with_rerun, ExperimentLearner, ExperimentOutcome, ExperimentStats, TrialRecord};
pub use report::{quantile_plot_svg, summary_csv, trials_csv, TRIALS_HEADER};

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classes::{HypothesisClass, Label, LabeledSample};
use crate::predictors::{Loss, OigLearner, Predictor};
use crate::{Budget, Error, Result};

/// Weights tolerance when checking that a distribution sums to one.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// `3·sqrt(δ(1 − δ)/trials)`.
pub fn binomial_slack(delta: f64, trials: usize) -> f64 {
    3.0 * (delta * (1.0 - delta) / trials as f64).sqrt()
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A distribution over the domain of a class, labelled by one of its rows.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution {
    weights: Vec<f64>,
    target: usize,
    target_row: Vec<Label>,
    sampler: WeightedIndex<f64>,
}

impl FiniteDistribution {
    /// Validates the weights (nonnegative, summing to one) and the target
    /// row. Points where the target is ⋆ must have weight zero.
    pub fn new(class: &HypothesisClass, weights: Vec<f64>, target: usize) -> Result<Self> {
        if weights.len() != class.domain_size() {
            return Err(Error::invalid(format!(
                "{} weights for a domain of size {}",
                weights.len(),
                class.domain_size()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        if target >= class.len() {
            return Err(Error::invalid(format!(
                "target row {target} out of range for a class of {} rows",
                class.len()
            )));
        }
        let target_row = class.row(target).to_vec();
        if let Some(p) = (0..weights.len()).find(|&p| weights[p] > 0.0 && target_row[p].is_star()) {
            return Err(Error::invalid(format!("target is ⋆ on point {p}, which has positive weight")));
        }
        let sampler = WeightedIndex::new(&weights).map_err(|e| Error::invalid(e.to_string()))?;
        Ok(FiniteDistribution {
            weights,
            target,
            target_row,
            sampler,
        })
    }

    /// Uniform weights over `points`.
    pub fn uniform_on(class: &HypothesisClass, points: &[usize], target: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("uniform distribution over no points"));
        }
        let mut weights = vec![0.0; class.domain_size()];
        for &p in points {
            if p >= weights.len() {
                return Err(Error::invalid(format!("point {p} outside the domain")));
            }
            weights[p] = 1.0;
        }
        let count = weights.iter().filter(|w| **w > 0.0).count() as f64;
        weights.iter_mut().for_each(|w| *w /= count);
        Self::new(class, weights, target)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn label(&self, x: usize) -> &Label {
        &self.target_row[x]
    }

    /// Points with positive weight, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&p| self.weights[p] > 0.0).collect()
    }

    /// `n` i.i.d. labelled draws.
    pub fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> LabeledSample {
        LabeledSample::new(
            (0..n)
                .map(|_| {
                    let x = self.sampler.sample(rng);
                    (x, self.target_row[x].clone())
                })
                .collect(),
        )
    }
}

/// `n` draws from stream 0 of `seed`.
pub fn sample(dist: &FiniteDistribution, n: usize, seed: u64) -> Result<LabeledSample> {
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    Ok(dist.sample(n, &mut trial_rng(seed, 0)))
}

/// `Σ_x w(x) ℓ(f̂(x), f*(x))` for predictions given on `points`, which must
/// cover the support.
pub fn exact_risk(dist: &FiniteDistribution, points: &[usize], predictions: &[Label], loss: Loss) -> Result<f64> {
    if points.len() != predictions.len() {
        return Err(Error::invalid("one prediction per point is required"));
    }
    let mut covered = 0usize;
    let mut risk = 0.0;
    for (&x, y) in points.iter().zip(predictions) {
        let w = *dist
            .weights
            .get(x)
            .ok_or_else(|| Error::invalid(format!("point {x} outside the domain")))?;
        if w > 0.0 {
            covered += 1;
            let l = loss.eval(y, dist.label(x))?;
            risk += w * (*l.numer() as f64 / *l.denom() as f64);
        }
    }
    if covered != dist.support().len() {
        return Err(Error::invalid("predictions do not cover the support"));
    }
    Ok(risk)
}

/// Risk of the one-inclusion predictor trained on `sample`.
fn oig_risk(learner: &OigLearner, dist: &FiniteDistribution, support: &[usize], sample: &LabeledSample) -> Result<f64> {
    let predictions = support
        .iter()
        .map(|&x| learner.predict(sample, x))
        .collect::<Result<Vec<_>>>()?;
    exact_risk(dist, support, &predictions, Loss::ZeroOne)
}

/// `E_{S ∼ P^n}[L_P(f̂(·; S))]` for the one-inclusion predictor, by
/// enumerating every sequence in `support^n`.
pub fn exact_expected_risk(class: &HypothesisClass, dist: &FiniteDistribution, n: usize, budget: &Budget) -> Result<f64> {
    let learner = match class.alphabet() {
        crate::classes::Alphabet::Partial => OigLearner::partial(class.clone())?,
        _ => OigLearner::new(class.clone())?,
    };
    let support = dist.support();
    let k = support.len();
    let total = (k as f64).powi(n as i32);
    if total > budget.expected_risk_samples as f64 {
        return Err(Error::budget(
            "support^n samples",
            total.min(usize::MAX as f64) as usize,
            budget.expected_risk_samples,
        ));
    }
    let mut memo: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut expected = 0.0;
    let mut digits = vec![0usize; n];
    loop {
        let points: Vec<usize> = digits.iter().map(|&d| support[d]).collect();
        let probability: f64 = points.iter().map(|&p| dist.weights[p]).product();
        let mut key = points.clone();
        key.sort_unstable();
        key.dedup();
        let risk = match memo.get(&key) {
            Some(r) => *r,
            None => {
                let s = LabeledSample::labeled_by(&key, &dist.target_row);
                let r = oig_risk(&learner, dist, &support, &s)?;
                memo.insert(key, r);
                r
            }
        };
        expected += probability * risk;

        let mut i = 0;
        loop {
            if i == n {
                return Ok(expected);
            }
            digits[i] += 1;
            if digits[i] < k {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Monte-Carlo estimate of [`exact_expected_risk`]: mean and standard
/// error over `trials` independent samples.
pub fn monte_carlo_expected_risk(
    class: &HypothesisClass,
    dist: &FiniteDistribution,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if trials < 2 {
        return Err(Error::invalid("Monte-Carlo estimation needs at least two trials"));
    }
    let learner = match class.alphabet() {
        crate::classes::Alphabet::Partial => OigLearner::partial(class.clone())?,
        _ => OigLearner::new(class.clone())?,
    };
    let support = dist.support();
    let risks = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = dist.sample(n, &mut trial_rng(seed, t));
            oig_risk(&learner, dist, &support, &LabeledSample::new(s.distinct_entries()))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mean = risks.iter().sum::<f64>() / trials as f64;
    let var = risks.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    Ok((mean, (var / trials as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thresholds(m: usize) -> HypothesisClass {
        let rows: Vec<String> = (0..=m).map(|k| "1".repeat(k) + &"0".repeat(m - k)).collect();
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        HypothesisClass::from_strings(&refs).unwrap()
    }

    #[test]
    fn distribution_validation() {
        let h = thresholds(3);
        assert!(FiniteDistribution::new(&h, vec![0.5, 0.5], 0).is_err());
        assert!(FiniteDistribution::new(&h, vec![0.5, 0.6, -0.1], 0).is_err());
        assert!(FiniteDistribution::new(&h, vec![0.5, 0.4, 0.1], 9).is_err());
        let partial = HypothesisClass::from_strings(&["0*"]).unwrap();
        assert!(FiniteDistribution::new(&partial, vec![0.5, 0.5], 0).is_err());
        assert!(FiniteDistribution::new(&partial, vec![1.0, 0.0], 0).is_ok());
    }

    #[test]
    fn point_mass_sample() {
        let h = thresholds(3);
        let d = FiniteDistribution::new(&h, vec![0.0, 1.0, 0.0], 2).unwrap();
        let s = sample(&d, 5, 7).unwrap();
        assert_eq!(s.entries(), vec![(1, Label::Class(1)); 5].as_slice());
    }

    #[test]
    fn uniform_frequency_and_determinism() {
        let h = thresholds(2);
        let d = FiniteDistribution::uniform_on(&h, &[0, 1], 0).unwrap();
        let n = 100_000;
        let s = sample(&d, n, 11).unwrap();
        let ones = s.entries().iter().filter(|(p, _)| *p == 0).count() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((ones - n as f64 / 2.0).abs() <= 3.0 * sigma);
        assert_eq!(sample(&d, 50, 11).unwrap(), sample(&d, 50, 11).unwrap());
        assert_ne!(sample(&d, 50, 11).unwrap(), sample(&d, 50, 12).unwrap());
    }

    #[test]
    fn exact_risk_examples() {
        let h = thresholds(3);
        let d = FiniteDistribution::new(&h, vec![0.3, 0.5, 0.2], 1).unwrap();
        let truth: Vec<Label> = h.row(1).to_vec();
        assert_eq!(exact_risk(&d, &[0, 1, 2], &truth, Loss::ZeroOne).unwrap(), 0.0);
        let mut wrong = truth.clone();
        wrong[0] = Label::Class(1 - wrong[0].class().unwrap());
        assert!((exact_risk(&d, &[0, 1, 2], &wrong, Loss::ZeroOne).unwrap() - 0.3).abs() < 1e-15);
        assert!(exact_risk(&d, &[0, 1], &truth[..2], Loss::ZeroOne).is_err());
    }

    #[test]
    fn trivial_class_has_zero_expected_risk() {
        let h = HypothesisClass::from_strings(&["0110"]).unwrap();
        let d = FiniteDistribution::uniform_on(&h, &[0, 1, 2, 3], 0).unwrap();
        assert_eq!(exact_expected_risk(&h, &d, 3, &Budget::default()).unwrap(), 0.0);
        let tight = Budget {
            expected_risk_samples: 10,
            ..Budget::default()
        };
        assert!(matches!(exact_expected_risk(&h, &d, 3, &tight), Err(Error::BudgetExceeded { .. })));
    }
}
