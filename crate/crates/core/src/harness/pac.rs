use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use super::{binomial_slack, exact_risk, trial_rng, FiniteDistribution};
use crate::bounds::{forward_lemma_rhs, reverse_lemma_rhs, risk_bound, BoundParams, Setting, DEFAULT_ETA, DEFAULT_LAMBDA};
use crate::classes::{v_gamma_dimension, Alphabet, HypothesisClass};
use crate::hypergraph::class_density;
use crate::predictors::{loo_audit, Loss, OigLearner, Predictor, PrefixTable, RegressionLearner};
use crate::{Budget, Error, Rational, Result};

enum Base {
    Oig(OigLearner),
    Regression(RegressionLearner),
}

/// A class, a setting and the base learner used for its suffix aggregate.
///
/// Learner caches are shared by every experiment run through the same
/// value, so sweeps over `n` and `δ` should reuse one instance.
pub struct ExperimentLearner {
    class: HypothesisClass,
    setting: Setting,
    gamma: Option<Rational>,
    budget: Budget,
    base: Base,
    caps: Mutex<HashMap<usize, f64>>,
    fat_v: Mutex<Option<usize>>,
}

impl ExperimentLearner {
    pub fn new(class: HypothesisClass, setting: Setting, gamma: Option<Rational>, budget: Budget) -> Result<Self> {
        let alphabet = class.alphabet();
        let base = match (setting, alphabet) {
            (Setting::Regression, Alphabet::Real) => {
                let gamma = gamma.ok_or_else(|| Error::invalid("the regression setting needs gamma"))?;
                Base::Regression(RegressionLearner::new(class.clone(), gamma)?.with_budget(budget.clone()))
            }
            (Setting::Partial, Alphabet::Partial | Alphabet::Binary) => {
                Base::Oig(OigLearner::partial(class.clone())?.with_budget(budget.clone()))
            }
            (Setting::Binary, Alphabet::Binary)
            | (Setting::Multiclass | Setting::Main, Alphabet::Binary | Alphabet::Multiclass(_)) => {
                Base::Oig(OigLearner::new(class.clone())?.with_budget(budget.clone()))
            }
            (Setting::Main, Alphabet::Partial) => Base::Oig(OigLearner::partial(class.clone())?.with_budget(budget.clone())),
            _ => {
                return Err(Error::invalid(format!(
                    "setting {} does not apply to a {alphabet} class",
                    setting.as_str()
                )))
            }
        };
        Ok(ExperimentLearner {
            class,
            setting,
            gamma,
            budget,
            base,
            caps: Mutex::default(),
            fat_v: Mutex::default(),
        })
    }

    pub fn class(&self) -> &HypothesisClass {
        &self.class
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    fn base(&self) -> &dyn Predictor {
        match &self.base {
            Base::Oig(l) => l,
            Base::Regression(l) => l,
        }
    }

    fn loss(&self) -> Loss {
        Loss::for_alphabet(self.class.alphabet())
    }

    /// `fat^V(γ)` for the regression setting.
    pub fn fat_v(&self) -> Result<usize> {
        let mut cached = self.fat_v.lock().expect("fat lock");
        if let Some(v) = *cached {
            return Ok(v);
        }
        let gamma = self.gamma.ok_or_else(|| Error::invalid("no margin configured"))?;
        let v = v_gamma_dimension(&self.class, gamma, &self.budget)?.value;
        *cached = Some(v);
        Ok(v)
    }

    /// The leave-one-out cap `M_n` for samples of size `n`: `⌈dens_n(H)⌉`
    /// for classification (⋆-pruned for partial classes) and
    /// `(n + 1)γ + fat^V(γ)` for regression.
    pub fn loo_cap(&self, n: usize) -> Result<f64> {
        if let Some(&c) = self.caps.lock().expect("cap lock").get(&n) {
            return Ok(c);
        }
        let cap = match &self.base {
            Base::Oig(l) => class_density(&self.class, n, l.is_partial(), &self.budget)?.ceil() as f64,
            Base::Regression(_) => {
                let gamma = self.gamma.expect("regression has a margin");
                (gamma * Rational::from_integer(n as i64 + 1)).to_f64().expect("finite") + self.fat_v()? as f64
            }
        };
        self.caps.lock().expect("cap lock").insert(n, cap);
        Ok(cap)
    }

    pub fn bound_params(&self, n: usize, delta: f64) -> Result<BoundParams> {
        let params = BoundParams::new(delta, n);
        Ok(match self.setting {
            Setting::Regression => {
                let gamma = self.gamma.expect("regression has a margin").to_f64().expect("finite");
                params.with_regression(gamma, self.fat_v()? as f64)
            }
            _ => params.with_m(self.loo_cap(n)?),
        })
    }

    pub fn bound(&self, n: usize, delta: f64) -> Result<f64> {
        risk_bound(self.setting, &self.bound_params(n, delta)?)
    }
}

/// Outcome of one simulated training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub n: usize,
    /// Exact risk of the suffix aggregate.
    pub risk: f64,
    /// Exact risks of `f̂(·; S_{≤t})` for `t = t0..n`.
    pub prefix_risks: Vec<f64>,
    /// `Σ_t ℓ(f̂(x_{t+1}; S_{≤t}), y_{t+1})` over the suffix.
    pub suffix_observed: f64,
    pub loo_total: f64,
    pub elapsed: Duration,
}

impl TrialRecord {
    pub fn suffix_risk_sum(&self) -> f64 {
        self.prefix_risks.iter().sum()
    }
}

/// Aggregate statistics of a batch of trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentStats {
    pub setting: Setting,
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub bound: f64,
    pub loo_cap: f64,
    pub mean: f64,
    pub median: f64,
    pub q90: f64,
    /// Empirical `(1 − δ)`-quantile of the risk.
    pub q_delta: f64,
    pub max: f64,
    pub violations: usize,
    pub forward_violations: usize,
    pub reverse_violations: usize,
    pub loo_violations: usize,
}

impl ExperimentStats {
    pub fn slack(&self) -> f64 {
        binomial_slack(self.delta, self.trials)
    }

    pub fn violation_rate(&self) -> f64 {
        self.violations as f64 / self.trials as f64
    }

    pub fn forward_rate(&self) -> f64 {
        self.forward_violations as f64 / self.trials as f64
    }

    pub fn reverse_rate(&self) -> f64 {
        self.reverse_violations as f64 / self.trials as f64
    }

    /// Risk, forward and reverse violation rates all within `δ + slack`.
    pub fn within_tolerance(&self) -> bool {
        let limit = self.delta + self.slack();
        self.violation_rate() <= limit && self.forward_rate() <= limit && self.reverse_rate() <= limit
    }
}

/// Trials with their summary.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub stats: ExperimentStats,
    pub records: Vec<TrialRecord>,
}

/// Lower empirical quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let k = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

fn run_trial(learner: &ExperimentLearner, dist: &FiniteDistribution, support: &[usize], n: usize, seed: u64, trial: u64) -> Result<TrialRecord> {
    let start = Instant::now();
    let sample = dist.sample(n, &mut trial_rng(seed, trial));
    let base = learner.base();
    let loss = learner.loss();
    let table = PrefixTable::build(base, &sample, support)?;
    let aggregate = match learner.setting {
        Setting::Regression => table.average()?,
        _ => table.majority()?,
    };
    let risk = exact_risk(dist, support, &aggregate, loss)?;
    let prefix_risks = table
        .rows
        .iter()
        .map(|row| exact_risk(dist, support, row, loss))
        .collect::<Result<Vec<_>>>()?;

    let mut suffix_observed = 0.0;
    for (k, row) in table.rows.iter().enumerate() {
        let (x, y) = &sample.entries()[table.t0 + k];
        let j = support.binary_search(x).expect("samples come from the support");
        suffix_observed += loss.eval(&row[j], y)?.to_f64().expect("finite");
    }
    let loo = loo_audit(base, &sample, loss, None)?;

    Ok(TrialRecord {
        trial,
        seed,
        n,
        risk,
        prefix_risks,
        suffix_observed,
        loo_total: loo.total.to_f64().expect("finite"),
        elapsed: start.elapsed(),
    })
}

/// Runs `trials` independent experiments in parallel and summarises them.
/// Records come back in trial order whatever the scheduling.
pub fn run_pac_experiment(
    learner: &ExperimentLearner,
    dist: &FiniteDistribution,
    n: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<ExperimentOutcome> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if dist.weights().len() != learner.class.domain_size() || dist.target() >= learner.class.len() {
        return Err(Error::invalid("distribution does not match the class"));
    }
    let bound = learner.bound(n, delta)?;
    let cap = learner.loo_cap(n)?;
    let support = dist.support();
    let records = (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(learner, dist, &support, n, seed, t))
        .collect::<Result<Vec<_>>>()?;

    let forward = |r: &TrialRecord| -> Result<bool> {
        Ok(r.suffix_risk_sum() > forward_lemma_rhs(DEFAULT_ETA, delta, r.suffix_observed)?)
    };
    let reverse_rhs = reverse_lemma_rhs(DEFAULT_LAMBDA, delta, cap)?;
    let mut forward_violations = 0;
    for r in &records {
        forward_violations += usize::from(forward(r)?);
    }
    let mut risks: Vec<f64> = records.iter().map(|r| r.risk).collect();
    risks.sort_by(f64::total_cmp);
    let stats = ExperimentStats {
        setting: learner.setting,
        n,
        delta,
        trials,
        seed,
        bound,
        loo_cap: cap,
        mean: risks.iter().sum::<f64>() / trials as f64,
        median: quantile(&risks, 0.5),
        q90: quantile(&risks, 0.9),
        q_delta: quantile(&risks, 1.0 - delta),
        max: risks[trials - 1],
        violations: records.iter().filter(|r| r.risk > bound).count(),
        forward_violations,
        reverse_violations: records.iter().filter(|r| r.suffix_observed > reverse_rhs).count(),
        loo_violations: records.iter().filter(|r| r.loo_total > cap + 1e-9).count(),
    };
    Ok(ExperimentOutcome { stats, records })
}

/// [`run_pac_experiment`], repeated once with four times the trials when
/// the first batch is outside tolerance.
pub fn run_with_rerun(
    learner: &ExperimentLearner,
    dist: &FiniteDistribution,
    n: usize,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<ExperimentOutcome> {
    let first = run_pac_experiment(learner, dist, n, delta, trials, seed)?;
    if first.stats.within_tolerance() {
        return Ok(first);
    }
    run_pac_experiment(learner, dist, n, delta, 4 * trials, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let data = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
        assert_eq!(quantile(&data, 0.5), 0.4);
        assert_eq!(quantile(&data, 0.9), 0.8);
        assert_eq!(quantile(&data, 1.0), 0.9);
        assert_eq!(quantile(&data, 0.0), 0.0);
    }

    #[test]
    fn trivial_class_never_errs() {
        let h = HypothesisClass::from_strings(&["0101"]).unwrap();
        let learner = ExperimentLearner::new(h.clone(), Setting::Binary, None, Budget::default()).unwrap();
        let dist = FiniteDistribution::uniform_on(&h, &[0, 1, 2, 3], 0).unwrap();
        let out = run_pac_experiment(&learner, &dist, 8, 0.1, 20, 3).unwrap();
        assert!(out.records.iter().all(|r| r.risk == 0.0 && r.loo_total == 0.0));
        assert_eq!(out.stats.violations, 0);
    }

    #[test]
    fn setting_must_fit_the_class() {
        let h = HypothesisClass::from_strings(&["0101"]).unwrap();
        assert!(ExperimentLearner::new(h.clone(), Setting::Regression, None, Budget::default()).is_err());
        let real = HypothesisClass::real(vec![vec![Rational::new(1, 2)]]).unwrap();
        assert!(ExperimentLearner::new(real.clone(), Setting::Binary, None, Budget::default()).is_err());
        assert!(ExperimentLearner::new(real, Setting::Regression, None, Budget::default()).is_err());
    }
}
