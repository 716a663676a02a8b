//! CSV and SVG renderings of experiment results.
//!
//! Timing information is deliberately absent, so identical runs produce
//! byte-identical files.

use std::fmt::Write;

use super::{ExperimentStats, TrialRecord};

pub const TRIALS_HEADER: &str =
    "run,setting,n,delta,trial,risk,bound,violated,suffix_risk_sum,suffix_observed,loo_total,loo_cap,prefix_risks";

/// One line per trial of the run labelled `run`, with the prefix risks
/// joined by `;`. No header.
pub fn trials_csv(run: &str, stats: &ExperimentStats, records: &[TrialRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let prefix: Vec<String> = r.prefix_risks.iter().map(|v| v.to_string()).collect();
        writeln!(
            out,
            "{run},{},{},{},{},{},{},{},{},{},{},{},{}",
            stats.setting.as_str(),
            r.n,
            stats.delta,
            r.trial,
            r.risk,
            stats.bound,
            u8::from(r.risk > stats.bound),
            r.suffix_risk_sum(),
            r.suffix_observed,
            r.loo_total,
            stats.loo_cap,
            prefix.join(";"),
        )
        .expect("writing to a String");
    }
    out
}

/// One line per labelled run, with a header.
pub fn summary_csv(stats: &[(String, ExperimentStats)]) -> String {
    let mut out = String::from(
        "run,setting,n,delta,trials,seed,bound,loo_cap,mean,median,q90,q_delta,max,violations,violation_rate,slack,forward_violations,reverse_violations,loo_violations,within_tolerance\n",
    );
    for (run, s) in stats {
        writeln!(
            out,
            "{run},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            s.setting.as_str(),
            s.n,
            s.delta,
            s.trials,
            s.seed,
            s.bound,
            s.loo_cap,
            s.mean,
            s.median,
            s.q90,
            s.q_delta,
            s.max,
            s.violations,
            s.violation_rate(),
            s.slack(),
            s.forward_violations,
            s.reverse_violations,
            s.loo_violations,
            s.within_tolerance(),
        )
        .expect("writing to a String");
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLOURS: [&str; 6] = ["#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#2c3e50"];

/// Empirical `(1 − δ)`-quantile (solid) and bound (dashed) against `n`, one
/// colour per `(run, δ)` series, on log-log axes.
pub fn quantile_plot_svg(runs: &[(String, ExperimentStats)]) -> String {
    let stats: Vec<&ExperimentStats> = runs.iter().map(|(_, s)| s).collect();
    let mut series: Vec<(String, Vec<&ExperimentStats>)> = Vec::new();
    for (run, s) in runs {
        let key = format!("{run} δ={}", s.delta);
        match series.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(s),
            None => series.push((key, vec![s])),
        }
    }
    for (_, v) in &mut series {
        v.sort_by_key(|s| s.n);
    }

    let floor = 1e-4;
    let ys = stats.iter().flat_map(|s| [s.q_delta.max(floor), s.bound.max(floor)]);
    let (y_min, y_max) = ys.fold((f64::MAX, f64::MIN), |(lo, hi), y| (lo.min(y), hi.max(y)));
    let (x_min, x_max) = stats
        .iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), s| (lo.min(s.n as f64), hi.max(s.n as f64)));
    let span = |lo: f64, hi: f64| if hi > lo { (lo.ln(), hi.ln()) } else { (lo.ln() - 0.5, hi.ln() + 0.5) };
    let (lx0, lx1) = span(x_min, x_max);
    let (ly0, ly1) = span(y_min, y_max);
    let px = |x: f64| MARGIN + (x.ln() - lx0) / (lx1 - lx0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y.max(floor).ln() - ly0) / (ly1 - ly0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">n (log scale)</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">risk (log scale)</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    )
    .unwrap();
    let mut ns: Vec<usize> = stats.iter().map(|s| s.n).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{n}</text>"#,
            px(n as f64),
            HEIGHT - MARGIN + 16.0
        )
        .unwrap();
    }

    for (i, (label, points)) in series.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let path = |f: &dyn Fn(&ExperimentStats) -> f64| {
            points
                .iter()
                .map(|s| format!("{:.1},{:.1}", px(s.n as f64), py(f(s))))
                .collect::<Vec<_>>()
                .join(" ")
        };
        writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            path(&|s| s.q_delta)
        )
        .unwrap();
        writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-dasharray="6 4" points="{}"/>"#,
            path(&|s| s.bound)
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{colour}">{label}: quantile (solid), bound (dashed)</text>"#,
            MARGIN + 8.0,
            MARGIN + 14.0 * (i as f64 + 1.0)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
