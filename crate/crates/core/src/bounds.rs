//! Closed-form bound evaluators.
//!
//! Writing `B(λ) = (e^λ − 1)/λ` and `A(η) = ηe^η/(e^η − 1)`, the two
//! martingale inequalities for `[0, 1]`-valued adapted processes read
//!
//! ```text
//! Σ W_t ≤ B(λ) Σ E[W_t | F_{t−1}] + ln(1/δ)/λ
//! Σ E[W_t | F_{t−1}] ≤ A(η) Σ W_t + e^η ln(1/δ)/(e^η − 1)
//! ```
//!
//! each with probability at least `1 − δ`. Chaining them over the last
//! three quarters of an online run, with `δ/2` for each, gives the risk
//! bound `C (M_n/n + ln(2/δ)/n)` where `C = max(coef_M, coef_log)` is
//! computed by [`main_constant`].

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const DEFAULT_LAMBDA: f64 = 0.82;
pub const DEFAULT_ETA: f64 = 0.78;

/// `ln 4 + 1/2`, the bound on `Σ_{i=T/4+1}^{T} 1/i`.
pub fn harmonic_cap() -> f64 {
    4f64.ln() + 0.5
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("delta must lie in (0, 1], got {delta}")))
    }
}

/// `B(λ) = (e^λ − 1)/λ`.
pub fn upper_coefficient(lambda: f64) -> f64 {
    lambda.exp_m1() / lambda
}

/// `A(η) = ηe^η/(e^η − 1)`.
pub fn lower_coefficient(eta: f64) -> f64 {
    eta * eta.exp() / eta.exp_m1()
}

/// Right-hand side of the upper deviation inequality:
/// `B(λ)·sum + ln(1/δ)/λ`.
pub fn chernoff_upper_rhs(lambda: f64, delta: f64, sum_conditional_means: f64) -> Result<f64> {
    check_unit("lambda", lambda)?;
    check_delta(delta)?;
    Ok(upper_coefficient(lambda) * sum_conditional_means + (1.0 / delta).ln() / lambda)
}

/// Right-hand side of the lower deviation inequality:
/// `A(η)·sum + e^η ln(1/δ)/(e^η − 1)`.
pub fn chernoff_lower_rhs(eta: f64, delta: f64, sum_observed: f64) -> Result<f64> {
    check_unit("eta", eta)?;
    check_delta(delta)?;
    Ok(lower_coefficient(eta) * sum_observed + eta.exp() * (1.0 / delta).ln() / eta.exp_m1())
}

/// Bound on the observed suffix losses of an online run whose per-step
/// expected loss at step `t` is at most `M/t`:
/// `(ln 4 + 1/2)·B(λ)·M + ln(1/δ)/λ`.
pub fn reverse_lemma_rhs(lambda: f64, delta: f64, m: f64) -> Result<f64> {
    chernoff_upper_rhs(lambda, delta, harmonic_cap() * m)
}

/// Bound on the suffix sum of prefix risks given the observed suffix
/// losses; the lower deviation inequality applied to the risks.
pub fn forward_lemma_rhs(eta: f64, delta: f64, sum_observed: f64) -> Result<f64> {
    chernoff_lower_rhs(eta, delta, sum_observed)
}

/// The two coefficients of the main risk bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MainConstant {
    pub coef_m: f64,
    pub coef_log: f64,
}

impl MainConstant {
    /// `C = max(coef_M, coef_log)`.
    pub fn c(&self) -> f64 {
        self.coef_m.max(self.coef_log)
    }
}

/// `coef_M = (4/3) A(η) (ln 4 + 1/2) B(λ)` and
/// `coef_log = (4/3) (A(η)/λ + e^η/(e^η − 1))`.
pub fn main_constant(lambda: f64, eta: f64) -> Result<MainConstant> {
    check_unit("lambda", lambda)?;
    check_unit("eta", eta)?;
    let a = lower_coefficient(eta);
    let b = upper_coefficient(lambda);
    Ok(MainConstant {
        coef_m: 4.0 / 3.0 * a * harmonic_cap() * b,
        coef_log: 4.0 / 3.0 * (a / lambda + eta.exp() / eta.exp_m1()),
    })
}

/// Average prefix risk bound obtained by chaining the reverse and forward
/// inequalities directly, without collecting coefficients:
/// `(4/(3n)) · forward(η, δ/2, reverse(λ, δ/2, M))`.
pub fn composed_average_risk(lambda: f64, eta: f64, delta: f64, n: usize, m: f64) -> Result<f64> {
    let observed = reverse_lemma_rhs(lambda, delta / 2.0, m)?;
    let risks = forward_lemma_rhs(eta, delta / 2.0, observed)?;
    Ok(4.0 * risks / (3.0 * n as f64))
}

/// `Σ_{i=⌊T/4⌋+1}^{T} 1/i`.
pub fn harmonic_suffix(t: usize) -> f64 {
    (t / 4 + 1..=t).map(|i| 1.0 / i as f64).sum()
}

/// Checks the harmonic cap for every `T` in `4..=max_t` in one pass and
/// returns the first `T` that violates it, if any, with the largest
/// observed suffix sum.
pub fn check_harmonic_cap(max_t: usize) -> (Option<usize>, f64) {
    // Prefix sums H_k, accumulated with compensation.
    let mut prefix = Vec::with_capacity(max_t + 1);
    prefix.push(0.0f64);
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for i in 1..=max_t {
        let y = 1.0 / i as f64 - carry;
        let s = sum + y;
        carry = (s - sum) - y;
        sum = s;
        prefix.push(sum);
    }
    let cap = harmonic_cap();
    let mut worst = 0.0f64;
    for t in 4..=max_t {
        let v = prefix[t] - prefix[t / 4];
        worst = worst.max(v);
        if v > cap {
            return (Some(t), worst);
        }
    }
    (None, worst)
}

/// Which risk bound to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setting {
    Main,
    Multiclass,
    Binary,
    Partial,
    Regression,
}

impl Setting {
    pub fn as_str(self) -> &'static str {
        match self {
            Setting::Main => "main",
            Setting::Multiclass => "multiclass",
            Setting::Binary => "binary",
            Setting::Partial => "partial",
            Setting::Regression => "regression",
        }
    }
}

impl std::str::FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "main" => Ok(Setting::Main),
            "multiclass" => Ok(Setting::Multiclass),
            "binary" => Ok(Setting::Binary),
            "partial" => Ok(Setting::Partial),
            "regression" => Ok(Setting::Regression),
            other => Err(Error::invalid(format!("unknown setting `{other}`"))),
        }
    }
}

/// Inputs of [`risk_bound`].
///
/// `m_n` is the leave-one-out cap: `M_n` itself for the main bound, and
/// `⌈dens⌉` or the (partial) VC dimension for the classification settings.
/// The regression bound uses `gamma` and `fat_v` instead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub lambda: f64,
    pub eta: f64,
    pub delta: f64,
    pub n: usize,
    pub m_n: Option<f64>,
    pub gamma: Option<f64>,
    pub fat_v: Option<f64>,
}

impl BoundParams {
    pub fn new(delta: f64, n: usize) -> Self {
        BoundParams {
            lambda: DEFAULT_LAMBDA,
            eta: DEFAULT_ETA,
            delta,
            n,
            m_n: None,
            gamma: None,
            fat_v: None,
        }
    }

    pub fn with_m(mut self, m_n: f64) -> Self {
        self.m_n = Some(m_n);
        self
    }

    pub fn with_regression(mut self, gamma: f64, fat_v: f64) -> Self {
        self.gamma = Some(gamma);
        self.fat_v = Some(fat_v);
        self
    }
}

fn required(value: Option<f64>, name: &str, setting: Setting) -> Result<f64> {
    match value {
        Some(v) if v >= 0.0 && v.is_finite() => Ok(v),
        Some(v) => Err(Error::invalid(format!("{name} must be a finite nonnegative number, got {v}"))),
        None => Err(Error::invalid(format!("the {} bound needs {name}", setting.as_str()))),
    }
}

/// Evaluates the high-probability risk bound of `setting`:
///
/// - main: `C (M_n/n + ln(2/δ)/n)`
/// - multiclass, binary, partial: `2C (M_n/n + ln(2/δ)/n)`
/// - regression: `C (γ + fat^V(γ)/n + ln(2e/δ)/n)`
pub fn risk_bound(setting: Setting, params: &BoundParams) -> Result<f64> {
    check_unit("delta", params.delta)?;
    if params.n < 4 {
        return Err(Error::invalid(format!("bounds need n ≥ 4, got {}", params.n)));
    }
    let c = main_constant(params.lambda, params.eta)?.c();
    let n = params.n as f64;
    let log_term = (2.0 / params.delta).ln() / n;
    match setting {
        Setting::Main => Ok(c * (required(params.m_n, "m_n", setting)? / n + log_term)),
        Setting::Multiclass | Setting::Binary | Setting::Partial => {
            Ok(2.0 * c * (required(params.m_n, "m_n", setting)? / n + log_term))
        }
        Setting::Regression => {
            let gamma = required(params.gamma, "gamma", setting)?;
            let fat = required(params.fat_v, "fat_v", setting)?;
            Ok(c * (gamma + fat / n + (2.0 * std::f64::consts::E / params.delta).ln() / n))
        }
    }
}
