//! The single-shot subcommands. Each prints one JSON document, except
//! `bounds`, which prints CSV.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde_json::json;

use oig_core::bounds::{risk_bound, BoundParams, Setting, DEFAULT_ETA, DEFAULT_LAMBDA};
use oig_core::classes::{
    ds_dimension, fat_dimension, format_rational, parse_rational, v_gamma_dimension, vc_dimension, Alphabet,
    HypothesisClass, LabeledSample,
};
use oig_core::harness::{verify_martingale_bounds, Process};
use oig_core::hypergraph::{class_density, max_density, OneInclusionHypergraph};
use oig_core::orientation::{canonical_orientation, min_out_degree_orientation};
use oig_core::predictors::{
    loo_audit, ErmLearner, Loss, OigLearner, Predictor, RegressionLearner, SuffixAverage, SuffixMajority,
};
use oig_core::{Budget, Error, Rational};

use crate::output::print_json;
use crate::{CliResult, Failure};

#[derive(Args, Debug)]
pub struct ClassArgs {
    /// Class file (CSV with a `point_0,…` header).
    pub class: PathBuf,
    /// Margin γ for real-valued classes, as a decimal or `p/q`.
    #[arg(long)]
    pub gamma: Option<String>,
    /// JSON file overriding search budgets.
    #[arg(long)]
    pub budget: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    /// Sample size n.
    #[arg(long)]
    pub n: usize,
    /// Prune hypotheses that put ⋆ on the chosen points (default for partial classes).
    #[arg(long)]
    pub partial: bool,
}

#[derive(Args, Debug)]
pub struct OrientArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    /// Points to project onto, comma separated; all points by default.
    #[arg(long, value_delimiter = ',')]
    pub points: Vec<usize>,
    /// Orient with out-degree at most this bound instead of the minimum.
    #[arg(long)]
    pub d: Option<usize>,
    /// Prune hypotheses that put ⋆ on the points (default for partial classes).
    #[arg(long)]
    pub partial: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Oig,
    Partial,
    Regression,
    Erm,
    SuffixMajority,
    SuffixAverage,
}

#[derive(Args, Debug)]
pub struct LooArgs {
    #[command(flatten)]
    pub class: ClassArgs,
    /// Training sample (CSV with a `point,label` header).
    pub sample: PathBuf,
    /// Predictor; chosen from the class alphabet when omitted.
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[command(flatten)]
    pub loo: LooArgs,
    /// Point to predict.
    #[arg(long)]
    pub x: usize,
    /// Add the leave-one-out table of the sample.
    #[arg(long)]
    pub audit: bool,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long, value_parser = parse_setting)]
    pub setting: Setting,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub delta: Vec<f64>,
    /// Leave-one-out caps M_n (main and classification settings).
    #[arg(long = "m-n", value_delimiter = ',')]
    pub m_n: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    #[arg(long = "fat-v", value_delimiter = ',')]
    pub fat_v: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ProcessKind {
    Iid,
    MeanSwitching,
    Deterministic,
}

#[derive(Args, Debug)]
pub struct MartingaleArgs {
    #[arg(long, value_enum)]
    pub process: ProcessKind,
    /// Step mean of the i.i.d. process.
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    /// Mean after a 1 (mean-switching process).
    #[arg(long, default_value_t = 0.1)]
    pub low: f64,
    /// Mean after a 0 (mean-switching process).
    #[arg(long, default_value_t = 0.7)]
    pub high: f64,
    /// Constant value of the deterministic process.
    #[arg(long, default_value_t = 0.5)]
    pub value: f64,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    pub lambda: f64,
    #[arg(long, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 200)]
    pub horizon: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn parse_setting(s: &str) -> Result<Setting, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::usage(format!("cannot open {}: {e}", path.display())))
}

fn with_path(path: &Path, e: Error) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{}: {}", path.display(), f.message);
    f
}

pub fn load_class(path: &Path) -> CliResult<HypothesisClass> {
    HypothesisClass::read_csv(open(path)?).map_err(|e| with_path(path, e))
}

fn load_sample(path: &Path) -> CliResult<LabeledSample> {
    LabeledSample::read_csv(open(path)?).map_err(|e| with_path(path, e))
}

pub fn load_budget(path: Option<&Path>) -> CliResult<Budget> {
    match path {
        None => Ok(Budget::default()),
        Some(p) => serde_json::from_reader(open(p)?)
            .map_err(|e| Failure::usage(format!("{}: invalid budget: {e}", p.display()))),
    }
}

fn gamma_of(args: &ClassArgs) -> CliResult<Option<Rational>> {
    args.gamma
        .as_deref()
        .map(|g| {
            let v = parse_rational(g).map_err(|e| Failure::usage(format!("--gamma: {e}")))?;
            if v <= Rational::from_integer(0) {
                return Err(Failure::usage("--gamma must be positive"));
            }
            Ok(v)
        })
        .transpose()
}

fn need_gamma(args: &ClassArgs) -> CliResult<Rational> {
    gamma_of(args)?.ok_or_else(|| Failure::usage("real-valued classes need --gamma"))
}

pub fn dims(args: &ClassArgs) -> CliResult<()> {
    let class = load_class(&args.class)?;
    let budget = load_budget(args.budget.as_deref())?;
    let mut report = json!({
        "alphabet": class.alphabet().to_string(),
        "domain_size": class.domain_size(),
        "rows": class.len(),
    });
    match class.alphabet() {
        Alphabet::Binary | Alphabet::Partial => {
            report["vc"] = vc_dimension(&class, &budget)?.to_json();
        }
        Alphabet::Multiclass(_) => {
            report["ds"] = ds_dimension(&class, &budget)?.to_json();
        }
        Alphabet::Real => {
            let gamma = need_gamma(args)?;
            report["gamma"] = json!(format_rational(&gamma));
            report["v_gamma"] = v_gamma_dimension(&class, gamma, &budget)?.to_json();
            report["fat"] = fat_dimension(&class, gamma, &budget)?.to_json();
        }
    }
    print_json(&report);
    Ok(())
}

fn build_graph(class: &HypothesisClass, points: &[usize], prune: bool) -> CliResult<OneInclusionHypergraph> {
    if prune {
        OneInclusionHypergraph::build_pruned(class, points)?
            .ok_or_else(|| Error::Realizability("every hypothesis puts ⋆ on the points".into()).into())
    } else {
        Ok(OneInclusionHypergraph::build_on(class, points)?)
    }
}

pub fn density(args: &DensityArgs) -> CliResult<()> {
    let class = load_class(&args.class.class)?;
    let budget = load_budget(args.class.budget.as_deref())?;
    let prune = args.partial || class.alphabet() == Alphabet::Partial;
    let dens = class_density(&class, args.n, prune, &budget)?;
    let g = build_graph(&class, &dens.points, prune)?;
    let report = max_density(g.graph(), &budget)?;
    print_json(&json!({
        "n": args.n,
        "pruned": prune,
        "dens_n": format_rational(&dens.value),
        "ceil": dens.ceil(),
        "points": dens.points,
        "graph": report.to_json(),
    }));
    Ok(())
}

pub fn orient(args: &OrientArgs) -> CliResult<()> {
    let class = load_class(&args.class.class)?;
    let budget = load_budget(args.class.budget.as_deref())?;
    let prune = args.partial || class.alphabet() == Alphabet::Partial;
    let points: Vec<usize> = if args.points.is_empty() {
        (0..class.domain_size()).collect()
    } else {
        args.points.clone()
    };
    let g = build_graph(&class, &points, prune)?;
    let orientation = match args.d {
        None => min_out_degree_orientation(g.graph(), &budget).to_json(),
        Some(d) => canonical_orientation(g.graph(), d)
            .ok_or_else(|| Failure::assertion(format!("no orientation has every out-degree at most {d}")))?
            .to_json(),
    };
    print_json(&json!({ "hypergraph": g.to_json(), "orientation": orientation }));
    Ok(())
}

fn default_variant(class: &HypothesisClass) -> Variant {
    match class.alphabet() {
        Alphabet::Real => Variant::Regression,
        Alphabet::Partial => Variant::Partial,
        _ => Variant::Oig,
    }
}

fn oig_for(class: &HypothesisClass, budget: &Budget) -> CliResult<OigLearner> {
    let learner = match class.alphabet() {
        Alphabet::Partial => OigLearner::partial(class.clone())?,
        _ => OigLearner::new(class.clone())?,
    };
    Ok(learner.with_budget(budget.clone()))
}

fn make_predictor(
    class: &HypothesisClass,
    variant: Variant,
    args: &ClassArgs,
    budget: &Budget,
) -> CliResult<Box<dyn Predictor>> {
    Ok(match variant {
        Variant::Oig => Box::new(OigLearner::new(class.clone())?.with_budget(budget.clone())),
        Variant::Partial => Box::new(OigLearner::partial(class.clone())?.with_budget(budget.clone())),
        Variant::Regression => {
            Box::new(RegressionLearner::new(class.clone(), need_gamma(args)?)?.with_budget(budget.clone()))
        }
        Variant::Erm => Box::new(ErmLearner::new(class.clone())?),
        Variant::SuffixMajority => Box::new(SuffixMajority::new(oig_for(class, budget)?)),
        Variant::SuffixAverage => Box::new(SuffixAverage::new(
            RegressionLearner::new(class.clone(), need_gamma(args)?)?.with_budget(budget.clone()),
        )),
    })
}

/// The leave-one-out cap of `variant` on samples of size `n`, when it is
/// known and affordable.
fn loo_cap(class: &HypothesisClass, variant: Variant, args: &ClassArgs, n: usize, budget: &Budget) -> CliResult<Option<Rational>> {
    let dens = |prune: bool| match class_density(class, n, prune, budget) {
        Ok(d) => Ok(Some(Rational::from_integer(d.ceil() as i64))),
        Err(Error::BudgetExceeded { .. }) => Ok(None),
        Err(e) => Err(Failure::from(e)),
    };
    match variant {
        Variant::Oig => dens(false),
        Variant::Partial => dens(true),
        Variant::Regression => {
            let gamma = need_gamma(args)?;
            match v_gamma_dimension(class, gamma, budget) {
                Ok(v) => Ok(Some(gamma * Rational::from_integer(n as i64 + 1) + Rational::from_integer(v.value as i64))),
                Err(Error::BudgetExceeded { .. }) => Ok(None),
                Err(e) => Err(e.into()),
            }
        }
        _ => Ok(None),
    }
}

fn audit_json(class: &HypothesisClass, variant: Variant, args: &LooArgs, sample: &LabeledSample, budget: &Budget) -> CliResult<serde_json::Value> {
    let predictor = make_predictor(class, variant, &args.class, budget)?;
    let cap = loo_cap(class, variant, &args.class, sample.len(), budget)?;
    let audit = loo_audit(predictor.as_ref(), sample, Loss::for_alphabet(class.alphabet()), cap)?;
    Ok(audit.to_json())
}

pub fn predict(args: &PredictArgs) -> CliResult<()> {
    let class = load_class(&args.loo.class.class)?;
    let sample = load_sample(&args.loo.sample)?;
    let budget = load_budget(args.loo.class.budget.as_deref())?;
    let variant = args.loo.variant.unwrap_or_else(|| default_variant(&class));
    let predictor = make_predictor(&class, variant, &args.loo.class, &budget)?;
    let label = predictor.predict(&sample, args.x)?;
    let mut report = json!({
        "variant": predictor.name(),
        "x": args.x,
        "prediction": label.to_string(),
    });
    if args.audit {
        report["audit"] = audit_json(&class, variant, &args.loo, &sample, &budget)?;
    }
    print_json(&report);
    Ok(())
}

pub fn loo(args: &LooArgs) -> CliResult<()> {
    let class = load_class(&args.class.class)?;
    let sample = load_sample(&args.sample)?;
    let budget = load_budget(args.class.budget.as_deref())?;
    let variant = args.variant.unwrap_or_else(|| default_variant(&class));
    let mut report = audit_json(&class, variant, args, &sample, &budget)?;
    report["n"] = json!(sample.len());
    print_json(&report);
    Ok(())
}

fn or_none(values: &[f64]) -> Vec<Option<f64>> {
    if values.is_empty() {
        vec![None]
    } else {
        values.iter().copied().map(Some).collect()
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn bounds(args: &BoundsArgs) -> CliResult<()> {
    let mut out = String::from("setting,n,delta,lambda,eta,m_n,gamma,fat_v,bound\n");
    let regression = args.setting == Setting::Regression;
    for &n in &args.n {
        for &delta in &args.delta {
            let mut grid = Vec::new();
            if regression {
                for gamma in or_none(&args.gamma) {
                    for fat_v in or_none(&args.fat_v) {
                        grid.push((None, gamma, fat_v));
                    }
                }
            } else {
                grid.extend(or_none(&args.m_n).into_iter().map(|m| (m, None, None)));
            }
            for (m_n, gamma, fat_v) in grid {
                let params = BoundParams {
                    lambda: args.lambda,
                    eta: args.eta,
                    delta,
                    n,
                    m_n,
                    gamma,
                    fat_v,
                };
                let bound = risk_bound(args.setting, &params)?;
                out.push_str(&format!(
                    "{},{n},{delta},{},{},{},{},{},{bound}\n",
                    args.setting.as_str(),
                    args.lambda,
                    args.eta,
                    cell(m_n),
                    cell(gamma),
                    cell(fat_v)
                ));
            }
        }
    }
    print!("{out}");
    Ok(())
}

pub fn verify_martingale(args: &MartingaleArgs) -> CliResult<()> {
    let process = match args.process {
        ProcessKind::Iid => Process::Iid { p: args.p },
        ProcessKind::MeanSwitching => Process::MeanSwitching {
            low: args.low,
            high: args.high,
        },
        ProcessKind::Deterministic => Process::Deterministic { value: args.value },
    };
    let report = verify_martingale_bounds(process, args.lambda, args.eta, args.delta, args.horizon, args.trials, args.seed)?;
    let mut value = serde_json::to_value(&report).expect("reports serialise");
    value["upper_rate"] = json!(report.upper_rate());
    value["lower_rate"] = json!(report.lower_rate());
    value["slack"] = json!(report.slack());
    value["within_tolerance"] = json!(report.within_tolerance());
    print_json(&value);
    if report.within_tolerance() {
        Ok(())
    } else {
        Err(Failure::assertion("a violation frequency exceeds δ plus slack"))
    }
}
