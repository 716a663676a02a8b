use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{binomial_slack, trial_rng};
use crate::bounds::{chernoff_lower_rhs, chernoff_upper_rhs};
use crate::{Error, Result};

/// An adapted `[0, 1]`-valued process with known conditional means.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Process {
    /// Independent Bernoulli(`p`) steps.
    Iid { p: f64 },
    /// Bernoulli steps whose mean is `high` after a 0 and `low` after a 1.
    MeanSwitching { low: f64, high: f64 },
    /// `W_t = value` at every step.
    Deterministic { value: f64 },
}

impl Process {
    fn validate(&self) -> Result<()> {
        let ok = |v: f64| (0.0..=1.0).contains(&v);
        let valid = match *self {
            Process::Iid { p } => ok(p),
            Process::MeanSwitching { low, high } => ok(low) && ok(high),
            Process::Deterministic { value } => ok(value),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::invalid("process parameters must lie in [0, 1]"))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Process::Iid { .. } => "iid",
            Process::MeanSwitching { .. } => "mean_switching",
            Process::Deterministic { .. } => "deterministic",
        }
    }

    /// One path of length `horizon`: `(Σ W_t, Σ E[W_t | F_{t−1}])`.
    fn simulate<R: Rng>(&self, horizon: usize, rng: &mut R) -> (f64, f64) {
        let (mut observed, mut means) = (0.0, 0.0);
        let mut last = 0.0;
        for _ in 0..horizon {
            let mean = match *self {
                Process::Iid { p } => p,
                Process::MeanSwitching { low, high } => {
                    if last > 0.5 {
                        low
                    } else {
                        high
                    }
                }
                Process::Deterministic { value } => value,
            };
            let w = match self {
                Process::Deterministic { .. } => mean,
                _ => f64::from(u8::from(rng.gen_bool(mean))),
            };
            observed += w;
            means += mean;
            last = w;
        }
        (observed, means)
    }
}

/// Violation counts of both deviation inequalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleReport {
    pub process: Process,
    pub lambda: f64,
    pub eta: f64,
    pub delta: f64,
    pub horizon: usize,
    pub trials: usize,
    pub upper_violations: usize,
    pub lower_violations: usize,
}

impl MartingaleReport {
    pub fn upper_rate(&self) -> f64 {
        self.upper_violations as f64 / self.trials as f64
    }

    pub fn lower_rate(&self) -> f64 {
        self.lower_violations as f64 / self.trials as f64
    }

    pub fn slack(&self) -> f64 {
        binomial_slack(self.delta, self.trials)
    }

    pub fn within_tolerance(&self) -> bool {
        let limit = self.delta + self.slack();
        self.upper_rate() <= limit && self.lower_rate() <= limit
    }
}

/// Simulates `trials` paths and counts how often
/// `Σ W_t > B(λ) Σ E[W_t|F] + ln(1/δ)/λ` and
/// `Σ E[W_t|F] > A(η) Σ W_t + e^η ln(1/δ)/(e^η − 1)`.
pub fn verify_martingale_bounds(
    process: Process,
    lambda: f64,
    eta: f64,
    delta: f64,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<MartingaleReport> {
    process.validate()?;
    if trials == 0 || horizon == 0 {
        return Err(Error::invalid("trials and horizon must be positive"));
    }
    chernoff_upper_rhs(lambda, delta, 0.0)?;
    chernoff_lower_rhs(eta, delta, 0.0)?;
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let (observed, means) = process.simulate(horizon, &mut trial_rng(seed, t));
            let upper = observed > chernoff_upper_rhs(lambda, delta, means).expect("validated");
            let lower = means > chernoff_lower_rhs(eta, delta, observed).expect("validated");
            (upper, lower)
        })
        .collect::<Vec<_>>();
    Ok(MartingaleReport {
        process,
        lambda,
        eta,
        delta,
        horizon,
        trials,
        upper_violations: outcomes.iter().filter(|o| o.0).count(),
        lower_violations: outcomes.iter().filter(|o| o.1).count(),
    })
}
