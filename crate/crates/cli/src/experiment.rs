//! The `experiment` subcommand: JSON configuration, the built-in demo
//! corpus and result files.

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use oig_core::bounds::Setting;
use oig_core::classes::{parse_rational, HypothesisClass};
use oig_core::harness::{
    quantile_plot_svg, run_with_rerun, summary_csv, trials_csv, ExperimentLearner, ExperimentStats,
    FiniteDistribution, TRIALS_HEADER,
};
use oig_core::Budget;

use crate::commands::load_class;
use crate::output::{config_hash, print_json, provenance, write_csv, write_svg};
use crate::{CliResult, Failure};

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// Experiment configuration (JSON).
    pub config: Option<PathBuf>,
    /// Run the built-in demo corpus instead of a configuration file.
    #[arg(long, conflicts_with = "config")]
    pub demo: bool,
    /// Output directory, created if missing.
    #[arg(long, default_value = "oig-lab-out")]
    pub out: PathBuf,
    /// Override the number of trials per (run, n, δ).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the quantile plot.
    #[arg(long)]
    pub svg: bool,
}

/// Invariants that turn into exit code 4 when violated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assertion {
    /// Risk-bound violation rate at most δ plus slack.
    Bound,
    /// Every leave-one-out total within its cap.
    Loo,
    /// Forward martingale check rate at most δ plus slack.
    Forward,
    /// Reverse martingale check rate at most δ plus slack.
    Reverse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub label: String,
    pub setting: Setting,
    /// Path of a class file, relative to the configuration file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_file: Option<PathBuf>,
    /// Inline class: one list of cells per hypothesis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_rows: Option<Vec<Vec<String>>>,
    /// Row index of the labelling hypothesis.
    pub target: usize,
    /// Point weights; uniform over the points the target labels when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Margin for the regression setting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub n: Vec<usize>,
    pub delta: Vec<f64>,
    pub runs: Vec<RunConfig>,
    #[serde(default)]
    pub assert: Vec<Assertion>,
    #[serde(default)]
    pub svg: bool,
    #[serde(default)]
    pub budget: Budget,
}

fn cells(rows: &[&str]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r.chars().map(String::from).collect()).collect()
}

/// Binary classes of VC dimension 1, 2 and 3, a three-label class, a
/// partial class and a monotone regression class.
pub fn demo_config() -> ExperimentConfig {
    let thresholds: Vec<String> = (0..=8).map(|k| "0".repeat(k) + &"1".repeat(8 - k)).collect();
    let two_sided: Vec<String> = (0..=8)
        .flat_map(|k| ["0".repeat(k) + &"1".repeat(8 - k), "1".repeat(k) + &"0".repeat(8 - k)])
        .collect();
    // Every pattern on the first three points, extended by fixed functions.
    let cube: Vec<String> = (0u32..8)
        .map(|m| {
            let (a, b, c) = (m & 1, m >> 1 & 1, m >> 2 & 1);
            [a, b, c, a & b, b | c, a ^ c].iter().map(|v| char::from(b'0' + *v as u8)).collect()
        })
        .collect();
    let mut three_labels = Vec::new();
    for a in 0..5 {
        for b in a + 1..=5 {
            three_labels.push((0..5).map(|x| if x < a { '0' } else if x < b { '1' } else { '2' }).collect::<String>());
        }
    }
    let mut partial = thresholds.clone();
    partial.extend((0..8).map(|k| "0".repeat(k) + "*" + &"1".repeat(7 - k)));
    let mut monotone = Vec::new();
    for a in 0..=4 {
        for b in a..=4 {
            for c in b..=4 {
                for d in c..=4 {
                    let up = [a, b, c, d].map(|v| format!("{:.2}", v as f64 / 4.0)).to_vec();
                    let mut down = up.clone();
                    down.reverse();
                    monotone.push(up);
                    monotone.push(down);
                }
            }
        }
    }
    monotone.sort();
    monotone.dedup();
    let refs = |v: &[String]| -> Vec<Vec<String>> { cells(&v.iter().map(String::as_str).collect::<Vec<_>>()) };
    let run = |label: &str, setting: Setting, rows: Vec<Vec<String>>, target: usize| RunConfig {
        label: label.into(),
        setting,
        class_file: None,
        class_rows: Some(rows),
        target,
        weights: None,
        gamma: None,
    };
    let mut regression = run("monotone", Setting::Regression, monotone, 9);
    regression.gamma = Some("0.1".into());
    ExperimentConfig {
        seed: 2024,
        trials: 200,
        n: vec![16, 32, 64, 128],
        delta: vec![0.05, 0.1],
        runs: vec![
            run("thresholds", Setting::Binary, refs(&thresholds), 3),
            run("two-sided", Setting::Binary, refs(&two_sided), 5),
            run("cube", Setting::Binary, refs(&cube), 5),
            run("three-labels", Setting::Multiclass, refs(&three_labels), 7),
            run("partial", Setting::Partial, refs(&partial), 4),
            regression,
        ],
        assert: vec![Assertion::Bound, Assertion::Loo, Assertion::Forward, Assertion::Reverse],
        svg: true,
        budget: Budget::default(),
    }
}

fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: invalid configuration: {e}", path.display())))
}

fn run_class(run: &RunConfig, base: &Path) -> CliResult<HypothesisClass> {
    match (&run.class_file, &run.class_rows) {
        (Some(file), None) => load_class(&base.join(file)),
        (None, Some(rows)) => {
            let width = rows.first().map_or(0, Vec::len);
            let header: Vec<String> = (0..width).map(|j| format!("point_{j}")).collect();
            let mut csv = header.join(",") + "\n";
            for row in rows {
                csv.push_str(&row.join(","));
                csv.push('\n');
            }
            HypothesisClass::read_csv(Cursor::new(csv))
                .map_err(|e| Failure::usage(format!("run `{}`: {e}", run.label)))
        }
        _ => Err(Failure::usage(format!(
            "run `{}` needs exactly one of class_file and class_rows",
            run.label
        ))),
    }
}

fn distribution(run: &RunConfig, class: &HypothesisClass) -> CliResult<FiniteDistribution> {
    if run.target >= class.len() {
        return Err(Failure::usage(format!("run `{}`: target row {} does not exist", run.label, run.target)));
    }
    let dist = match &run.weights {
        Some(w) => FiniteDistribution::new(class, w.clone(), run.target),
        None => {
            let support: Vec<usize> = (0..class.domain_size())
                .filter(|&x| !class.row(run.target)[x].is_star())
                .collect();
            FiniteDistribution::uniform_on(class, &support, run.target)
        }
    };
    dist.map_err(|e| Failure::usage(format!("run `{}`: {e}", run.label)))
}

fn failed_assertions(stats: &ExperimentStats, asserts: &[Assertion]) -> Vec<&'static str> {
    let limit = stats.delta + stats.slack();
    asserts
        .iter()
        .filter_map(|a| match a {
            Assertion::Bound if stats.violation_rate() > limit => Some("bound"),
            Assertion::Loo if stats.loo_violations > 0 => Some("loo"),
            Assertion::Forward if stats.forward_rate() > limit => Some("forward"),
            Assertion::Reverse if stats.reverse_rate() > limit => Some("reverse"),
            _ => None,
        })
        .collect()
}

pub fn run(args: &ExperimentArgs) -> CliResult<()> {
    let (mut config, base) = match (&args.config, args.demo) {
        (Some(path), false) => (load_config(path)?, path.parent().map(Path::to_path_buf).unwrap_or_default()),
        (None, true) => (demo_config(), PathBuf::new()),
        _ => return Err(Failure::usage("give a configuration file or --demo")),
    };
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    config.svg |= args.svg;
    if config.trials == 0 {
        return Err(Failure::usage("trials must be positive"));
    }
    if config.n.is_empty() || config.delta.is_empty() || config.runs.is_empty() {
        return Err(Failure::usage("the configuration needs at least one n, one delta and one run"));
    }

    let canonical = serde_json::to_string(&config).expect("configurations serialise");
    let header = provenance(config.seed, &config_hash(&canonical));

    let mut trials = format!("{TRIALS_HEADER}\n");
    let mut summaries: Vec<(String, ExperimentStats)> = Vec::new();
    let mut failures = Vec::new();
    let mut report = Vec::new();
    for run in &config.runs {
        let class = run_class(run, &base)?;
        let gamma = run
            .gamma
            .as_deref()
            .map(parse_rational)
            .transpose()
            .map_err(|e| Failure::usage(format!("run `{}`: gamma: {e}", run.label)))?;
        let dist = distribution(run, &class)?;
        let learner = ExperimentLearner::new(class, run.setting, gamma, config.budget.clone())?;
        for &n in &config.n {
            for &delta in &config.delta {
                let out = run_with_rerun(&learner, &dist, n, delta, config.trials, config.seed)?;
                trials.push_str(&trials_csv(&run.label, &out.stats, &out.records));
                let failed = failed_assertions(&out.stats, &config.assert);
                for f in &failed {
                    failures.push(format!("{} n={n} δ={delta}: {f}", run.label));
                }
                let mut entry = serde_json::to_value(&out.stats).expect("stats serialise");
                entry["run"] = json!(run.label);
                entry["failed"] = json!(failed);
                report.push(entry);
                summaries.push((run.label.clone(), out.stats));
            }
        }
    }

    fs::create_dir_all(&args.out)
        .map_err(|e| Failure::usage(format!("cannot create {}: {e}", args.out.display())))?;
    write_csv(&args.out.join("trials.csv"), &header, &trials)?;
    write_csv(&args.out.join("summary.csv"), &header, &summary_csv(&summaries))?;
    if config.svg {
        write_svg(&args.out.join("quantiles.svg"), &header, &quantile_plot_svg(&summaries))?;
    }
    print_json(&json!({ "provenance": header, "results": report }));

    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::assertion(format!("failed assertions: {}", failures.join("; "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use oig_core::classes::{vc_dimension, Alphabet};

    #[test]
    fn demo_classes_have_the_advertised_shape() {
        let config = demo_config();
        let budget = Budget::default();
        let vc: Vec<usize> = config.runs[..3]
            .iter()
            .map(|r| vc_dimension(&run_class(r, Path::new("")).unwrap(), &budget).unwrap().value)
            .collect();
        assert_eq!(vc, [1, 2, 3]);
        let alphabets: Vec<Alphabet> = config.runs[3..]
            .iter()
            .map(|r| run_class(r, Path::new("")).unwrap().alphabet())
            .collect();
        assert!(matches!(alphabets[0], Alphabet::Multiclass(3)));
        assert_eq!(alphabets[1], Alphabet::Partial);
        assert_eq!(alphabets[2], Alphabet::Real);
        for r in &config.runs {
            let class = run_class(r, Path::new("")).unwrap();
            distribution(r, &class).unwrap();
        }
    }

    #[test]
    fn config_round_trips_and_rejects_unknown_keys() {
        let config = demo_config();
        let text = serde_json::to_string(&config).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&text).unwrap(), config);
        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["colour"] = json!("blue");
        assert!(serde_json::from_value::<ExperimentConfig>(value).is_err());
    }
}
