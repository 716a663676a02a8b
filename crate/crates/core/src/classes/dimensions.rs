//! Exact combinatorial dimensions by exhaustive search.
//!
//! VC, V_γ and P_γ shattering share one search: every point offers a list of
//! splits (a "high" and a "low" row set), and a point sequence is shattered
//! when every high/low pattern keeps at least one row. Shattering is
//! hereditary, so a depth-first search over increasing point sequences that
//! only extends shattered prefixes visits every shattered set.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::{format_rational, Alphabet, HypothesisClass, Label};
use crate::hypergraph::{avg_degree, OneInclusionHypergraph};
use crate::{Budget, Error, Rational, Result};

/// A dimension value and the witness that certifies it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionReport {
    pub value: usize,
    /// The shattered points, ascending.
    pub points: Vec<usize>,
    /// The common level τ (V_γ dimension).
    pub level: Option<Rational>,
    /// Per-point witness levels s(x), aligned with `points` (P_γ dimension).
    pub levels: Option<Vec<Rational>>,
    /// Row indices of the witnessing subclass (DS dimension).
    pub rows: Option<Vec<usize>>,
}

impl DimensionReport {
    fn plain(value: usize, points: Vec<usize>) -> Self {
        DimensionReport {
            value,
            points,
            level: None,
            levels: None,
            rows: None,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({ "value": self.value, "points": self.points });
        if let Some(t) = &self.level {
            v["tau"] = json!(format_rational(t));
        }
        if let Some(s) = &self.levels {
            v["witness"] = json!(s.iter().map(format_rational).collect::<Vec<_>>());
        }
        if let Some(r) = &self.rows {
            v["rows"] = json!(r);
        }
        v
    }
}

/// `ψ_{γ,τ}(z)`.
pub fn threshold_label(z: Rational, gamma: Rational, tau: Rational) -> Label {
    if z <= tau - gamma {
        Label::Class(0)
    } else if z >= tau + gamma {
        Label::Class(1)
    } else {
        Label::Star
    }
}

fn check_gamma(gamma: Rational) -> Result<()> {
    if gamma <= Rational::zero() || gamma >= Rational::one() {
        return Err(Error::invalid(format!(
            "margin must lie in (0, 1), got {}",
            format_rational(&gamma)
        )));
    }
    Ok(())
}

fn require_real(class: &HypothesisClass) -> Result<()> {
    if class.alphabet() != Alphabet::Real {
        return Err(Error::invalid(format!(
            "operation needs a real-valued class, got {}",
            class.alphabet()
        )));
    }
    Ok(())
}

/// Thresholds every value of a real class into a deduplicated partial class.
pub fn apply_threshold(class: &HypothesisClass, gamma: Rational, tau: Rational) -> Result<HypothesisClass> {
    require_real(class)?;
    check_gamma(gamma)?;
    if tau < Rational::zero() || tau > Rational::one() {
        return Err(Error::invalid("threshold level must lie in [0, 1]"));
    }
    let rows = class
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .map(|l| threshold_label(l.real().expect("real class"), gamma, tau))
                .collect()
        })
        .collect();
    HypothesisClass::new(Alphabet::Partial, class.domain_size(), rows)
}

/// Candidate levels for τ and s(x): `{v − γ, v, v + γ} ∩ [0, 1]` over label
/// values `v`, plus midpoints of consecutive distinct values.
///
/// Shattering feasibility only changes at `v ± γ`, so the grid is lossless.
pub fn candidate_levels(class: &HypothesisClass, gamma: Rational) -> Vec<Rational> {
    let values = class.real_values();
    let mut grid = BTreeSet::new();
    let unit = |r: &Rational| *r >= Rational::zero() && *r <= Rational::one();
    for &v in &values {
        for c in [v - gamma, v, v + gamma] {
            if unit(&c) {
                grid.insert(c);
            }
        }
    }
    for pair in values.windows(2) {
        grid.insert((pair[0] + pair[1]) / Rational::from_integer(2));
    }
    grid.into_iter().collect()
}

#[derive(Clone, Debug)]
struct Split {
    level: Option<Rational>,
    high: FixedBitSet,
    low: FixedBitSet,
}

/// Drops splits whose high and low sets are both contained in another split's.
fn prune_dominated(splits: Vec<Split>) -> Vec<Split> {
    let mut kept: Vec<Split> = Vec::new();
    for s in splits {
        if s.high.is_clear() || s.low.is_clear() {
            continue;
        }
        if kept.iter().any(|k| s.high.is_subset(&k.high) && s.low.is_subset(&k.low)) {
            continue;
        }
        kept.retain(|k| !(k.high.is_subset(&s.high) && k.low.is_subset(&s.low)));
        kept.push(s);
    }
    kept
}

struct ShatterSearch<'a> {
    options: &'a [Vec<Split>],
    cap: usize,
    current: Vec<(usize, usize)>,
    best: Vec<(usize, usize)>,
}

impl ShatterSearch<'_> {
    fn run(options: &[Vec<Split>], rows: usize) -> Vec<(usize, usize)> {
        // 2^d patterns need 2^d distinct rows.
        let cap = (usize::BITS - 1 - rows.max(1).leading_zeros()) as usize;
        let mut search = ShatterSearch {
            options,
            cap: cap.min(options.len()),
            current: Vec::new(),
            best: Vec::new(),
        };
        let mut all = FixedBitSet::with_capacity(rows);
        all.insert_range(..);
        search.extend(0, &[all]);
        search.best
    }

    fn extend(&mut self, start: usize, patterns: &[FixedBitSet]) {
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        if self.best.len() >= self.cap {
            return;
        }
        for p in start..self.options.len() {
            if self.current.len() + (self.options.len() - p) <= self.best.len() {
                return;
            }
            for (o, split) in self.options[p].iter().enumerate() {
                let mut next = Vec::with_capacity(patterns.len() * 2);
                let ok = patterns.iter().all(|pat| {
                    let mut lo = pat.clone();
                    lo.intersect_with(&split.low);
                    let mut hi = pat.clone();
                    hi.intersect_with(&split.high);
                    let alive = !lo.is_clear() && !hi.is_clear();
                    next.push(lo);
                    next.push(hi);
                    alive
                });
                if ok {
                    self.current.push((p, o));
                    self.extend(p + 1, &next);
                    self.current.pop();
                    if self.best.len() >= self.cap {
                        return;
                    }
                }
            }
        }
    }
}

fn check_rows(class: &HypothesisClass, budget: &Budget) -> Result<()> {
    if class.len() > budget.max_rows {
        return Err(Error::budget("class size", class.len(), budget.max_rows));
    }
    Ok(())
}

fn rows_where(class: &HypothesisClass, point: usize, pred: impl Fn(&Label) -> bool) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(class.len());
    for (r, row) in class.rows().iter().enumerate() {
        if pred(&row[point]) {
            set.insert(r);
        }
    }
    set
}

/// VC dimension of a binary or partial class. For partial classes a set is
/// shattered when every 0/1 pattern appears in the projection; ⋆ never helps.
pub fn vc_dimension(class: &HypothesisClass, budget: &Budget) -> Result<DimensionReport> {
    if !matches!(class.alphabet(), Alphabet::Binary | Alphabet::Partial) {
        return Err(Error::invalid(format!(
            "VC dimension needs a binary or partial class, got {}",
            class.alphabet()
        )));
    }
    if class.domain_size() > budget.vc_domain {
        return Err(Error::budget("domain size", class.domain_size(), budget.vc_domain));
    }
    check_rows(class, budget)?;
    let options: Vec<Vec<Split>> = (0..class.domain_size())
        .map(|p| {
            prune_dominated(vec![Split {
                level: None,
                high: rows_where(class, p, |l| *l == Label::Class(1)),
                low: rows_where(class, p, |l| *l == Label::Class(0)),
            }])
        })
        .collect();
    let best = ShatterSearch::run(&options, class.len());
    Ok(DimensionReport::plain(best.len(), best.iter().map(|(p, _)| *p).collect()))
}

fn level_split(class: &HypothesisClass, point: usize, gamma: Rational, level: Rational) -> Split {
    Split {
        level: Some(level),
        high: rows_where(class, point, |l| l.real().unwrap() >= level + gamma),
        low: rows_where(class, point, |l| l.real().unwrap() <= level - gamma),
    }
}

/// V_γ dimension: the largest set shattered with margin γ around one common
/// level τ.
pub fn v_gamma_dimension(class: &HypothesisClass, gamma: Rational, budget: &Budget) -> Result<DimensionReport> {
    require_real(class)?;
    check_gamma(gamma)?;
    if class.domain_size() > budget.v_gamma_domain {
        return Err(Error::budget("domain size", class.domain_size(), budget.v_gamma_domain));
    }
    check_rows(class, budget)?;
    let mut report = DimensionReport::plain(0, Vec::new());
    for tau in candidate_levels(class, gamma) {
        let options: Vec<Vec<Split>> = (0..class.domain_size())
            .map(|p| prune_dominated(vec![level_split(class, p, gamma, tau)]))
            .collect();
        let best = ShatterSearch::run(&options, class.len());
        if best.len() > report.value {
            report = DimensionReport {
                value: best.len(),
                points: best.iter().map(|(p, _)| *p).collect(),
                level: Some(tau),
                levels: None,
                rows: None,
            };
        }
    }
    Ok(report)
}

/// P_γ (fat-shattering) dimension with per-point witness levels drawn from
/// [`candidate_levels`].
pub fn fat_dimension(class: &HypothesisClass, gamma: Rational, budget: &Budget) -> Result<DimensionReport> {
    require_real(class)?;
    check_gamma(gamma)?;
    if class.domain_size() > budget.fat_domain {
        return Err(Error::budget("domain size", class.domain_size(), budget.fat_domain));
    }
    check_rows(class, budget)?;
    let grid = candidate_levels(class, gamma);
    if grid.len() > budget.fat_grid {
        return Err(Error::budget("witness grid size", grid.len(), budget.fat_grid));
    }
    let options: Vec<Vec<Split>> = (0..class.domain_size())
        .map(|p| prune_dominated(grid.iter().map(|&s| level_split(class, p, gamma, s)).collect()))
        .collect();
    let best = ShatterSearch::run(&options, class.len());
    Ok(DimensionReport {
        value: best.len(),
        points: best.iter().map(|(p, _)| *p).collect(),
        level: None,
        levels: Some(
            best.iter()
                .map(|&(p, o)| options[p][o].level.expect("levelled split"))
                .collect(),
        ),
        rows: None,
    })
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// DS dimension of a finite-alphabet class: the largest `d` such that some
/// subclass `H'` and some `d` points give a one-inclusion hypergraph of
/// average degree exactly `d`.
pub fn ds_dimension(class: &HypothesisClass, budget: &Budget) -> Result<DimensionReport> {
    if !matches!(class.alphabet(), Alphabet::Binary | Alphabet::Multiclass(_)) {
        return Err(Error::invalid(format!(
            "DS dimension needs a finite label alphabet without ⋆, got {}",
            class.alphabet()
        )));
    }
    let row_limit = budget.ds_rows.min(30);
    if class.len() > row_limit {
        return Err(Error::budget("class size", class.len(), row_limit));
    }
    if class.domain_size() > budget.ds_domain {
        return Err(Error::budget("domain size", class.domain_size(), budget.ds_domain));
    }
    let n_rows = class.len();
    for d in (1..=class.domain_size()).rev() {
        for points in combinations(class.domain_size(), d) {
            for mask in 1u32..(1u32 << n_rows) {
                let rows: Vec<usize> = (0..n_rows).filter(|r| mask >> r & 1 == 1).collect();
                let sub = HypothesisClass::new(
                    class.alphabet(),
                    d,
                    rows.iter()
                        .map(|&r| points.iter().map(|&p| class.row(r)[p].clone()).collect())
                        .collect(),
                )?;
                let g = OneInclusionHypergraph::build(&sub)?;
                if avg_degree(g.graph()) == Rational::from_integer(d as i64) {
                    return Ok(DimensionReport {
                        rows: Some(rows),
                        ..DimensionReport::plain(d, points)
                    });
                }
            }
        }
    }
    Ok(DimensionReport::plain(0, Vec::new()))
}

/// Direct check that `points` are shattered by a binary or partial class.
pub fn is_shattered(class: &HypothesisClass, points: &[usize]) -> bool {
    all_patterns(points.len(), |pattern| {
        class.rows().iter().any(|row| {
            points
                .iter()
                .zip(pattern)
                .all(|(&p, &bit)| row[p] == Label::Class(bit as u32))
        })
    })
}

/// Direct check of V_γ shattering at level `tau`.
pub fn is_v_gamma_shattered(class: &HypothesisClass, gamma: Rational, tau: Rational, points: &[usize]) -> bool {
    let levels = vec![tau; points.len()];
    is_p_gamma_shattered(class, gamma, points, &levels)
}

/// Direct check of P_γ shattering with witness levels `levels`.
pub fn is_p_gamma_shattered(class: &HypothesisClass, gamma: Rational, points: &[usize], levels: &[Rational]) -> bool {
    all_patterns(points.len(), |pattern| {
        class.rows().iter().any(|row| {
            points.iter().zip(levels).zip(pattern).all(|((&p, &s), &bit)| {
                let z = row[p].real().unwrap();
                if bit {
                    z >= s + gamma
                } else {
                    z <= s - gamma
                }
            })
        })
    })
}

fn all_patterns(len: usize, mut realized: impl FnMut(&[bool]) -> bool) -> bool {
    (0u64..(1u64 << len)).all(|mask| {
        let pattern: Vec<bool> = (0..len).map(|i| mask >> i & 1 == 1).collect();
        realized(&pattern)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn cube(d: usize) -> HypothesisClass {
        let rows: Vec<String> = (0..1u32 << d)
            .map(|m| (0..d).map(|i| if m >> i & 1 == 1 { '1' } else { '0' }).collect())
            .collect();
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        HypothesisClass::from_strings(&refs).unwrap()
    }

    #[test]
    fn vc_of_cube_is_its_dimension() {
        for d in 1..=4 {
            let report = vc_dimension(&cube(d), &Budget::default()).unwrap();
            assert_eq!(report.value, d);
            assert!(is_shattered(&cube(d), &report.points));
        }
    }

    #[test]
    fn vc_of_thresholds_is_one() {
        let h = HypothesisClass::from_strings(&["0000", "1000", "1100", "1110", "1111"]).unwrap();
        let report = vc_dimension(&h, &Budget::default()).unwrap();
        assert_eq!(report.value, 1);
        // Brute force over all subsets: no pair is shattered.
        for pair in combinations(4, 2) {
            assert!(!is_shattered(&h, &pair));
        }
    }

    #[test]
    fn vc_of_partial_class_ignores_star() {
        let h = HypothesisClass::from_strings(&["0*", "1*"]).unwrap();
        let report = vc_dimension(&h, &Budget::default()).unwrap();
        assert_eq!(report.value, 1);
        assert_eq!(report.points, vec![0]);
    }

    #[test]
    fn vc_budget_is_enforced() {
        let budget = Budget {
            vc_domain: 3,
            ..Budget::default()
        };
        assert!(matches!(vc_dimension(&cube(4), &budget), Err(Error::BudgetExceeded { .. })));
        let h = HypothesisClass::real(vec![vec![r(1, 2)]]).unwrap();
        assert!(matches!(vc_dimension(&h, &Budget::default()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn threshold_operator() {
        assert_eq!(threshold_label(r(45, 100), r(1, 5), r(1, 2)), Label::Star);
        assert_eq!(threshold_label(r(3, 10), r(1, 5), r(1, 2)), Label::Class(0));
        assert_eq!(threshold_label(r(7, 10), r(1, 5), r(1, 2)), Label::Class(1));
        let h = HypothesisClass::real(vec![vec![r(1, 10), r(9, 10)], vec![r(9, 10), r(1, 10)]]).unwrap();
        let t = apply_threshold(&h, r(1, 5), r(1, 2)).unwrap();
        assert_eq!(t.alphabet(), Alphabet::Partial);
        assert_eq!(t.rows(), HypothesisClass::from_strings(&["01", "10"]).unwrap().rows());
        assert!(apply_threshold(&h, r(0, 1), r(1, 2)).is_err());
        assert!(apply_threshold(&h, r(1, 1), r(1, 2)).is_err());
    }

    #[test]
    fn v_gamma_of_two_constants() {
        let h = HypothesisClass::real(vec![vec![r(1, 5)], vec![r(4, 5)]]).unwrap();
        let report = v_gamma_dimension(&h, r(1, 4), &Budget::default()).unwrap();
        assert_eq!(report.value, 1);
        let tau = report.level.unwrap();
        assert!(is_v_gamma_shattered(&h, r(1, 4), tau, &report.points));
        assert!(tau >= r(9, 20) && tau <= r(11, 20));
    }

    #[test]
    fn single_function_has_zero_dimensions() {
        let h = HypothesisClass::real(vec![vec![r(1, 2), r(1, 4)]]).unwrap();
        assert_eq!(v_gamma_dimension(&h, r(1, 10), &Budget::default()).unwrap().value, 0);
        assert_eq!(fat_dimension(&h, r(1, 10), &Budget::default()).unwrap().value, 0);
    }

    #[test]
    fn fat_witness_certifies_value() {
        // Two points with different natural levels: not V_γ-shattered at a
        // single τ, but P_γ-shattered.
        let rows = vec![
            vec![r(0, 1), r(6, 10)],
            vec![r(2, 10), r(6, 10)],
            vec![r(0, 1), r(1, 1)],
            vec![r(2, 10), r(1, 1)],
        ];
        let h = HypothesisClass::real(rows).unwrap();
        let gamma = r(1, 10);
        let fat = fat_dimension(&h, gamma, &Budget::default()).unwrap();
        assert_eq!(fat.value, 2);
        assert!(is_p_gamma_shattered(&h, gamma, &fat.points, fat.levels.as_ref().unwrap()));
        assert_eq!(v_gamma_dimension(&h, gamma, &Budget::default()).unwrap().value, 1);
    }

    #[test]
    fn ds_examples() {
        assert_eq!(ds_dimension(&cube(2), &Budget::default()).unwrap().value, 2);
        let single = HypothesisClass::from_strings(&["012"]).unwrap();
        assert_eq!(ds_dimension(&single, &Budget::default()).unwrap().value, 0);
        let big = HypothesisClass::from_strings(&["0", "1", "2", "3", "4", "5", "6", "7", "8", "9"]).unwrap();
        let budget = Budget {
            ds_rows: 5,
            ..Budget::default()
        };
        assert!(matches!(ds_dimension(&big, &budget), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn candidate_grid_contains_breakpoints() {
        let h = HypothesisClass::real(vec![vec![r(1, 5)], vec![r(4, 5)]]).unwrap();
        let grid = candidate_levels(&h, r(1, 4));
        for v in [r(1, 5), r(9, 20), r(1, 2), r(11, 20), r(4, 5)] {
            assert!(grid.contains(&v), "missing {v}");
        }
        assert_eq!(grid.len(), 5);
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(4, 2), vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
    }
}
