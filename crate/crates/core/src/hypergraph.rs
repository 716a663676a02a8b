//! One-inclusion hypergraphs and their density measures.
//!
//! All densities are exact rationals. The maximum density μ is found by
//! exhaustive enumeration of vertex subsets; the per-subset edge weight
//! `Σ_e (|e ∩ W| − 1)` is built incrementally from the subset with its lowest
//! vertex removed, so each subset costs one pass over that vertex's edges.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use serde_json::{json, Value};

use crate::classes::{combinations, Alphabet, HypothesisClass, Label};
use crate::{Budget, Error, Rational, Result};

/// A plain hypergraph: vertices `0..vertex_count`, edges as sorted member lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypergraph {
    vertex_count: usize,
    edges: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Members of each edge are sorted and deduplicated; edges must be
    /// nonempty and refer to existing vertices.
    pub fn new(vertex_count: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        let mut clean = Vec::with_capacity(edges.len());
        for (i, mut e) in edges.into_iter().enumerate() {
            e.sort_unstable();
            e.dedup();
            if e.is_empty() {
                return Err(Error::invalid(format!("edge {i} is empty")));
            }
            if e[e.len() - 1] >= vertex_count {
                return Err(Error::invalid(format!("edge {i} refers to a missing vertex")));
            }
            clean.push(e);
        }
        Ok(Hypergraph {
            vertex_count,
            edges: clean,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    /// `m = Σ_e (|e| − 1)`.
    pub fn excess(&self) -> usize {
        self.edges.iter().map(|e| e.len() - 1).sum()
    }

    /// Largest number of edges of size ≥ 2 containing a single vertex.
    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.vertex_count];
        for e in self.edges.iter().filter(|e| e.len() > 1) {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg.into_iter().max().unwrap_or(0)
    }
}

/// Identifies the hyperedge `e_{i,f}`: the held-out coordinate and the
/// labels on every other coordinate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeTag {
    /// Column index `i` within the projection.
    pub coordinate: usize,
    /// Labels of the edge's vertices on all columns except `coordinate`.
    pub context: Vec<Label>,
}

/// `G(H|_U)`: projected hypotheses as vertices, one hyperedge per
/// coordinate and off-coordinate labeling.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OneInclusionHypergraph {
    points: Vec<usize>,
    vertices: Vec<Vec<Label>>,
    tags: Vec<EdgeTag>,
    graph: Hypergraph,
    lookup: HashMap<EdgeTag, usize>,
}

impl OneInclusionHypergraph {
    /// Builds the hypergraph of an already projected, discrete class; its
    /// columns are taken as points `0..m`.
    pub fn build(projected: &HypothesisClass) -> Result<Self> {
        if !projected.alphabet().is_discrete() {
            return Err(Error::invalid(
                "one-inclusion hypergraphs need a discrete alphabet; threshold real classes first",
            ));
        }
        let points = (0..projected.domain_size()).collect();
        Ok(Self::from_vertices(points, projected.rows().to_vec()))
    }

    /// Projects `class` onto `points` and builds the hypergraph, keeping the
    /// original point indices.
    pub fn build_on(class: &HypothesisClass, points: &[usize]) -> Result<Self> {
        let points = class.canonical_points(points)?;
        let projected = class.project(&points)?;
        let mut g = Self::build(&projected)?;
        g.points = points;
        Ok(g)
    }

    /// Like [`build_on`](Self::build_on), but first removes every projected
    /// hypothesis that puts ⋆ on one of the points. Returns `None` when no
    /// vertex survives.
    pub fn build_pruned(class: &HypothesisClass, points: &[usize]) -> Result<Option<Self>> {
        if !class.alphabet().is_discrete() {
            return Err(Error::invalid("one-inclusion hypergraphs need a discrete alphabet"));
        }
        let points = class.canonical_points(points)?;
        let mut rows: Vec<Vec<Label>> = class
            .rows()
            .iter()
            .map(|row| points.iter().map(|&p| row[p].clone()).collect::<Vec<_>>())
            .filter(|row| !row.iter().any(Label::is_star))
            .collect();
        if rows.is_empty() {
            return Ok(None);
        }
        rows.sort();
        rows.dedup();
        Ok(Some(Self::from_vertices(points, rows)))
    }

    /// `vertices` must be sorted and free of duplicates.
    fn from_vertices(points: Vec<usize>, vertices: Vec<Vec<Label>>) -> Self {
        let mut tags = Vec::new();
        let mut edges = Vec::new();
        for i in 0..points.len() {
            let mut groups: BTreeMap<Vec<Label>, Vec<usize>> = BTreeMap::new();
            for (v, row) in vertices.iter().enumerate() {
                let context: Vec<Label> = row
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, l)| l.clone())
                    .collect();
                groups.entry(context).or_default().push(v);
            }
            for (context, members) in groups {
                tags.push(EdgeTag {
                    coordinate: i,
                    context,
                });
                edges.push(members);
            }
        }
        let lookup = tags.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        OneInclusionHypergraph {
            points,
            graph: Hypergraph {
                vertex_count: vertices.len(),
                edges,
            },
            vertices,
            tags,
            lookup,
        }
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn vertices(&self) -> &[Vec<Label>] {
        &self.vertices
    }

    pub fn tags(&self) -> &[EdgeTag] {
        &self.tags
    }

    pub fn graph(&self) -> &Hypergraph {
        &self.graph
    }

    pub fn vertex_index(&self, row: &[Label]) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_slice().cmp(row)).ok()
    }

    pub fn edge_index(&self, tag: &EdgeTag) -> Option<usize> {
        self.lookup.get(tag).copied()
    }

    /// Debug export: points, vertices and tagged edges.
    pub fn to_json(&self) -> Value {
        let label_strings = |ls: &[Label]| ls.iter().map(Label::to_string).collect::<Vec<_>>();
        json!({
            "points": self.points,
            "vertices": self.vertices.iter().map(|v| label_strings(v)).collect::<Vec<_>>(),
            "edges": self.tags.iter().zip(self.graph.edges()).map(|(t, members)| json!({
                "coordinate": t.coordinate,
                "point": self.points[t.coordinate],
                "context": label_strings(&t.context),
                "members": members,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Exact densities of a hypergraph with the subset achieving μ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityReport {
    pub dens: Rational,
    pub mu: Rational,
    pub avgdeg: Rational,
    pub witness_subset: Vec<usize>,
}

impl DensityReport {
    pub fn to_json(&self) -> Value {
        json!({
            "dens": self.dens.to_string(),
            "mu": self.mu.to_string(),
            "avgdeg": self.avgdeg.to_string(),
            "witness_subset": self.witness_subset,
        })
    }
}

/// `Dens(G[U]) = (1/|U|) Σ_{e : |e∩U| ≥ 1} (|e ∩ U| − 1)`; the whole
/// graph when `subset` is `None`.
pub fn density(g: &Hypergraph, subset: Option<&[usize]>) -> Result<Rational> {
    let (size, in_subset) = match subset {
        None => (g.vertex_count, vec![true; g.vertex_count]),
        Some(u) => {
            let mut flags = vec![false; g.vertex_count];
            for &v in u {
                if v >= g.vertex_count {
                    return Err(Error::invalid(format!("vertex {v} not in hypergraph")));
                }
                flags[v] = true;
            }
            (flags.iter().filter(|f| **f).count(), flags)
        }
    };
    if size == 0 {
        return Err(Error::invalid("density of an empty vertex set"));
    }
    let total: usize = g
        .edges
        .iter()
        .map(|e| e.iter().filter(|&&v| in_subset[v]).count().saturating_sub(1))
        .sum();
    Ok(Rational::new(total as i64, size as i64))
}

/// `avgdeg(G) = (1/|V|) Σ_{e : |e| > 1} |e|`.
pub fn avg_degree(g: &Hypergraph) -> Rational {
    if g.vertex_count == 0 {
        return Rational::zero();
    }
    let total: usize = g.edges.iter().filter(|e| e.len() > 1).map(Vec::len).sum();
    Rational::new(total as i64, g.vertex_count as i64)
}

/// Exact `μ(G)` by exhaustive subset enumeration, with `Dens(G)` and
/// `avgdeg(G)`. Ties for μ go to the subset with the smallest bitmask.
pub fn max_density(g: &Hypergraph, budget: &Budget) -> Result<DensityReport> {
    let n = g.vertex_count;
    let limit = budget.mu_vertices.min(24);
    if n > limit {
        return Err(Error::budget("vertex count", n, limit));
    }
    if n == 0 {
        return Err(Error::invalid("hypergraph has no vertices"));
    }
    // For each vertex, the other members of every non-singleton edge it lies in.
    let mut rest: Vec<Vec<u32>> = vec![Vec::new(); n];
    for e in g.edges.iter().filter(|e| e.len() > 1) {
        let mask: u32 = e.iter().fold(0, |m, &v| m | 1 << v);
        for &v in e {
            rest[v].push(mask & !(1 << v));
        }
    }
    let mut weight = vec![0u32; 1 << n];
    let (mut best_num, mut best_den, mut best_mask) = (0u64, 1u64, 1u32);
    for w in 1u32..(1u32 << n) {
        let v = w.trailing_zeros() as usize;
        let prev = w & (w - 1);
        let gain = rest[v].iter().filter(|&&m| m & prev != 0).count() as u32;
        let f = weight[prev as usize] + gain;
        weight[w as usize] = f;
        let size = w.count_ones() as u64;
        if (f as u64) * best_den > best_num * size {
            best_num = f as u64;
            best_den = size;
            best_mask = w;
        }
    }
    Ok(DensityReport {
        dens: density(g, None)?,
        mu: Rational::new(best_num as i64, best_den as i64),
        avgdeg: avg_degree(g),
        witness_subset: (0..n).filter(|v| best_mask >> v & 1 == 1).collect(),
    })
}

/// `dens_n(H)` together with the point set attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDensity {
    pub value: Rational,
    pub points: Vec<usize>,
}

impl ClassDensity {
    /// `⌈dens_n(H)⌉`.
    pub fn ceil(&self) -> usize {
        self.value.ceil().to_integer() as usize
    }
}

/// `dens_n(H) = max_{|S| = n} μ(G(H|_{U_S}))`. Repeated points only shrink
/// `U_S`, so the search runs over point sets `U` with `1 ≤ |U| ≤ n`.
///
/// With `prune_star`, hypotheses labelling a point of `U` with ⋆ are removed
/// before the hypergraph is built, as the partial-class predictor does.
pub fn class_density(class: &HypothesisClass, n: usize, prune_star: bool, budget: &Budget) -> Result<ClassDensity> {
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    if class.alphabet() == Alphabet::Real {
        return Err(Error::invalid("class density needs a discrete alphabet"));
    }
    let m = class.domain_size();
    if m > budget.density_domain {
        return Err(Error::budget("domain size", m, budget.density_domain));
    }
    let mut best = ClassDensity {
        value: Rational::zero(),
        points: vec![0],
    };
    for k in 1..=n.min(m) {
        for points in combinations(m, k) {
            let g = if prune_star {
                match OneInclusionHypergraph::build_pruned(class, &points)? {
                    Some(g) => g,
                    None => continue,
                }
            } else {
                OneInclusionHypergraph::build_on(class, &points)?
            };
            let mu = max_density(g.graph(), budget)?.mu;
            if mu > best.value {
                best = ClassDensity { value: mu, points };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn square() -> Hypergraph {
        let cube = HypothesisClass::from_strings(&["00", "01", "10", "11"]).unwrap();
        OneInclusionHypergraph::build(&cube).unwrap().graph().clone()
    }

    fn complete(n: usize) -> Hypergraph {
        let edges = combinations(n, 2);
        Hypergraph::new(n, edges).unwrap()
    }

    fn star3() -> Hypergraph {
        Hypergraph::new(4, vec![vec![0, 1], vec![0, 2], vec![0, 3]]).unwrap()
    }

    #[test]
    fn square_from_binary_cube() {
        let cube = HypothesisClass::from_strings(&["00", "01", "10", "11"]).unwrap();
        let g = OneInclusionHypergraph::build(&cube).unwrap();
        assert_eq!(g.graph().vertex_count(), 4);
        assert_eq!(g.graph().edges().len(), 4);
        assert!(g.graph().edges().iter().all(|e| e.len() == 2));
    }

    #[test]
    fn single_hypothesis_has_singleton_edges() {
        let h = HypothesisClass::from_strings(&["010"]).unwrap();
        let g = OneInclusionHypergraph::build(&h).unwrap();
        assert_eq!(g.graph().vertex_count(), 1);
        assert_eq!(g.graph().edges(), &[vec![0], vec![0], vec![0]]);
    }

    #[test]
    fn three_labels_on_one_point_form_one_edge() {
        let h = HypothesisClass::from_strings(&["0", "1", "2"]).unwrap();
        let g = OneInclusionHypergraph::build(&h).unwrap();
        assert_eq!(g.graph().edges(), &[vec![0, 1, 2]]);
        assert_eq!(density(g.graph(), None).unwrap(), r(2, 3));
        assert_eq!(avg_degree(g.graph()), r(1, 1));
    }

    #[test]
    fn edge_members_agree_off_their_coordinate() {
        let h = HypothesisClass::from_strings(&["012", "010", "112", "202", "000"]).unwrap();
        let g = OneInclusionHypergraph::build(&h).unwrap();
        for (tag, members) in g.tags().iter().zip(g.graph().edges()) {
            for &v in members {
                let off: Vec<Label> = g.vertices()[v]
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != tag.coordinate)
                    .map(|(_, l)| l.clone())
                    .collect();
                assert_eq!(off, tag.context);
            }
        }
        let mut tags = g.tags().to_vec();
        tags.dedup();
        assert_eq!(tags.len(), g.tags().len());
    }

    #[test]
    fn real_class_is_rejected() {
        let h = HypothesisClass::real(vec![vec![r(1, 2)]]).unwrap();
        assert!(matches!(OneInclusionHypergraph::build(&h), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn densities_of_small_graphs() {
        assert_eq!(density(&square(), None).unwrap(), r(1, 1));
        assert_eq!(avg_degree(&square()), r(2, 1));
        let singletons = Hypergraph::new(1, vec![vec![0], vec![0]]).unwrap();
        assert_eq!(density(&singletons, None).unwrap(), r(0, 1));
        assert_eq!(avg_degree(&singletons), r(0, 1));
        assert!(density(&square(), Some(&[])).is_err());
        // Induced on two adjacent square vertices: one edge of size 2,
        // two edges cut down to singletons.
        assert_eq!(density(&square(), Some(&[0, 1])).unwrap(), r(1, 2));
    }

    #[test]
    fn max_density_examples() {
        let b = Budget::default();
        assert_eq!(max_density(&square(), &b).unwrap().mu, r(1, 1));
        assert_eq!(max_density(&star3(), &b).unwrap().mu, r(3, 4));
        let k4 = max_density(&complete(4), &b).unwrap();
        assert_eq!(k4.mu, r(3, 2));
        assert_eq!(density(&complete(4), Some(&k4.witness_subset)).unwrap(), k4.mu);
    }

    #[test]
    fn max_density_budget() {
        let b = Budget {
            mu_vertices: 3,
            ..Budget::default()
        };
        assert!(matches!(max_density(&square(), &b), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn class_density_of_thresholds_is_at_most_one() {
        let h = HypothesisClass::from_strings(&["0000", "1000", "1100", "1110", "1111"]).unwrap();
        for n in 1..=5 {
            let d = class_density(&h, n, false, &Budget::default()).unwrap();
            assert!(d.value <= r(1, 1));
        }
    }

    #[test]
    fn class_density_of_cube() {
        // The d-cube has 2^d vertices and d·2^(d-1) edges: density d/2.
        let h = HypothesisClass::from_strings(&["000", "001", "010", "011", "100", "101", "110", "111"]).unwrap();
        let d = class_density(&h, 3, false, &Budget::default()).unwrap();
        assert_eq!(d.value, r(3, 2));
        assert_eq!(d.points, vec![0, 1, 2]);
    }

    #[test]
    fn pruned_build_drops_star_rows() {
        let h = HypothesisClass::from_strings(&["0*", "1*", "00", "11"]).unwrap();
        let g = OneInclusionHypergraph::build_pruned(&h, &[0, 1]).unwrap().unwrap();
        assert_eq!(g.vertices().len(), 2);
        assert!(OneInclusionHypergraph::build_pruned(&HypothesisClass::from_strings(&["*"]).unwrap(), &[0])
            .unwrap()
            .is_none());
    }
}
