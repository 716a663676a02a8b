//! Bounded out-degree orientations via max-flow.
//!
//! For a hypergraph `G` and a budget `d`, the flow network has a source,
//! one node per edge, one node per vertex and a sink. The source feeds each
//! edge node `|e| − 1` units, every edge node may pass one unit to each of
//! its members, and every vertex may pass `d` units to the sink. A flow of
//! value `m = Σ_e (|e| − 1)` leaves exactly one member of each edge without
//! flow; heading the edge at that member gives an orientation whose
//! out-degrees are the vertex-to-sink flows, so all are at most `d`.
//!
//! Among all feasible orientations at the minimum budget we return the one
//! whose head vector is lexicographically smallest (edges in their stored
//! order, heads compared by vertex index). This makes the result a function
//! of the hypergraph alone.

use std::collections::VecDeque;

use serde_json::{json, Value};

use crate::hypergraph::{max_density, Hypergraph};
use crate::{Budget, Error, Result};

/// A directed arc with integer capacity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub capacity: u64,
}

/// A directed network with a designated source and sink.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowNetwork {
    node_count: usize,
    source: usize,
    sink: usize,
    arcs: Vec<Arc>,
}

impl FlowNetwork {
    pub fn new(node_count: usize, source: usize, sink: usize) -> Result<Self> {
        if source >= node_count || sink >= node_count || source == sink {
            return Err(Error::invalid("source and sink must be distinct existing nodes"));
        }
        Ok(FlowNetwork {
            node_count,
            source,
            sink,
            arcs: Vec::new(),
        })
    }

    /// Adds an arc and returns its index.
    pub fn add_arc(&mut self, from: usize, to: usize, capacity: u64) -> Result<usize> {
        if from >= self.node_count || to >= self.node_count {
            return Err(Error::invalid(format!("arc {from}->{to} refers to a missing node")));
        }
        self.arcs.push(Arc { from, to, capacity });
        Ok(self.arcs.len() - 1)
    }

    /// The orientation network of `g` with vertex capacity `d`.
    ///
    /// Node layout: source `0`, sink `1`, edge nodes `2..2+E`, vertex nodes
    /// after that. Arcs are added edge by edge (source arc, then member arcs
    /// in member order), followed by the vertex-to-sink arcs.
    pub fn for_orientation(g: &Hypergraph, d: usize) -> FlowNetwork {
        Self::orientation_layout(g, |_| true, &vec![d as u64; g.vertex_count()])
    }

    fn orientation_layout(g: &Hypergraph, include: impl Fn(usize) -> bool, vertex_caps: &[u64]) -> FlowNetwork {
        let edges = g.edges();
        let vertex_base = 2 + edges.len();
        let mut arcs = Vec::new();
        for (j, e) in edges.iter().enumerate() {
            if !include(j) {
                continue;
            }
            arcs.push(Arc {
                from: 0,
                to: 2 + j,
                capacity: (e.len() - 1) as u64,
            });
            for &v in e {
                arcs.push(Arc {
                    from: 2 + j,
                    to: vertex_base + v,
                    capacity: 1,
                });
            }
        }
        for (v, &cap) in vertex_caps.iter().enumerate() {
            arcs.push(Arc {
                from: vertex_base + v,
                to: 1,
                capacity: cap,
            });
        }
        FlowNetwork {
            node_count: vertex_base + g.vertex_count(),
            source: 0,
            sink: 1,
            arcs,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    /// Total capacity leaving the source.
    pub fn source_capacity(&self) -> u64 {
        self.arcs.iter().filter(|a| a.from == self.source).map(|a| a.capacity).sum()
    }
}

/// An integral flow: its value and the flow on every arc, indexed like
/// [`FlowNetwork::arcs`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flow {
    pub value: u64,
    pub arc_flow: Vec<u64>,
}

/// Exact integral maximum flow (Dinic). Deterministic: residual arcs are
/// scanned in insertion order.
pub fn max_flow(net: &FlowNetwork) -> Flow {
    let n = net.node_count;
    // Residual arc 2i is arc i, 2i + 1 its reverse.
    let mut to = Vec::with_capacity(2 * net.arcs.len());
    let mut cap = Vec::with_capacity(2 * net.arcs.len());
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, a) in net.arcs.iter().enumerate() {
        to.push(a.to);
        cap.push(a.capacity);
        to.push(a.from);
        cap.push(0);
        adjacency[a.from].push(2 * i);
        adjacency[a.to].push(2 * i + 1);
    }

    let mut value = 0u64;
    let mut level = vec![usize::MAX; n];
    let mut next = vec![0usize; n];
    loop {
        level.iter_mut().for_each(|l| *l = usize::MAX);
        level[net.source] = 0;
        let mut queue = VecDeque::from([net.source]);
        while let Some(u) = queue.pop_front() {
            for &r in &adjacency[u] {
                if cap[r] > 0 && level[to[r]] == usize::MAX {
                    level[to[r]] = level[u] + 1;
                    queue.push_back(to[r]);
                }
            }
        }
        if level[net.sink] == usize::MAX {
            break;
        }
        next.iter_mut().for_each(|x| *x = 0);
        loop {
            let pushed = augment(net.source, net.sink, u64::MAX, &adjacency, &to, &mut cap, &level, &mut next);
            if pushed == 0 {
                break;
            }
            value += pushed;
        }
    }

    let arc_flow = net
        .arcs
        .iter()
        .enumerate()
        .map(|(i, a)| a.capacity - cap[2 * i])
        .collect();
    Flow { value, arc_flow }
}

#[allow(clippy::too_many_arguments)]
fn augment(
    u: usize,
    sink: usize,
    limit: u64,
    adjacency: &[Vec<usize>],
    to: &[usize],
    cap: &mut [u64],
    level: &[usize],
    next: &mut [usize],
) -> u64 {
    if u == sink {
        return limit;
    }
    while next[u] < adjacency[u].len() {
        let r = adjacency[u][next[u]];
        let v = to[r];
        if cap[r] > 0 && level[v] == level[u] + 1 {
            let pushed = augment(v, sink, limit.min(cap[r]), adjacency, to, cap, level, next);
            if pushed > 0 {
                cap[r] -= pushed;
                cap[r ^ 1] += pushed;
                return pushed;
            }
        }
        next[u] += 1;
    }
    0
}

/// An orientation `σ_G`: a head for every edge and the resulting out-degrees.
///
/// Singleton edges are headed at their only member and never count towards
/// an out-degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orientation {
    heads: Vec<usize>,
    out_degree: Vec<usize>,
}

impl Orientation {
    /// Checks that every head is a member of its edge and derives the
    /// out-degrees.
    pub fn from_heads(g: &Hypergraph, heads: Vec<usize>) -> Result<Self> {
        if heads.len() != g.edges().len() {
            return Err(Error::invalid(format!(
                "{} heads for {} edges",
                heads.len(),
                g.edges().len()
            )));
        }
        let mut out_degree = vec![0usize; g.vertex_count()];
        for (j, (e, &h)) in g.edges().iter().zip(&heads).enumerate() {
            if e.binary_search(&h).is_err() {
                return Err(Error::invalid(format!("head {h} is not a member of edge {j}")));
            }
            for &v in e.iter().filter(|&&v| v != h) {
                out_degree[v] += 1;
            }
        }
        Ok(Orientation { heads, out_degree })
    }

    pub fn heads(&self) -> &[usize] {
        &self.heads
    }

    pub fn head(&self, edge: usize) -> usize {
        self.heads[edge]
    }

    pub fn out_degree(&self) -> &[usize] {
        &self.out_degree
    }

    /// `out(σ)`, the largest out-degree.
    pub fn max_out_degree(&self) -> usize {
        self.out_degree.iter().copied().max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "heads": self.heads,
            "out_degree": self.out_degree,
            "max_out_degree": self.max_out_degree(),
        })
    }
}

/// An orientation with every out-degree at most `d`, or `None` if the
/// orientation network cannot carry `m` units.
pub fn orient(g: &Hypergraph, d: usize) -> Option<Orientation> {
    let caps = vec![d as u64; g.vertex_count()];
    let heads = constrained_heads(g, &vec![None; g.edges().len()], &caps)?;
    Some(Orientation::from_heads(g, heads).expect("extracted heads are edge members"))
}

/// Feasibility with some heads fixed in advance. `caps` are the out-degree
/// allowances before the fixed edges are charged.
fn constrained_heads(g: &Hypergraph, fixed: &[Option<usize>], caps: &[u64]) -> Option<Vec<usize>> {
    let edges = g.edges();
    let mut remaining = caps.to_vec();
    for (e, head) in edges.iter().zip(fixed) {
        if let Some(h) = head {
            for &v in e.iter().filter(|&&v| v != *h) {
                remaining[v] = remaining[v].checked_sub(1)?;
            }
        }
    }
    let free = |j: usize| fixed[j].is_none() && edges[j].len() > 1;
    let net = FlowNetwork::orientation_layout(g, free, &remaining);
    let flow = max_flow(&net);
    if flow.value != net.source_capacity() {
        return None;
    }

    let mut heads = Vec::with_capacity(edges.len());
    let mut arc = 0;
    for (j, e) in edges.iter().enumerate() {
        if !free(j) {
            heads.push(fixed[j].unwrap_or(e[0]));
            continue;
        }
        let member_flow = &flow.arc_flow[arc + 1..arc + 1 + e.len()];
        let mut empty = e.iter().zip(member_flow).filter(|(_, f)| **f == 0).map(|(v, _)| *v);
        let head = empty.next().expect("a saturated edge node leaves one member without flow");
        debug_assert!(empty.next().is_none());
        heads.push(head);
        arc += 1 + e.len();
    }
    Some(heads)
}

/// The lexicographically smallest head vector among orientations with
/// out-degrees at most `d`.
pub fn canonical_orientation(g: &Hypergraph, d: usize) -> Option<Orientation> {
    let caps = vec![d as u64; g.vertex_count()];
    let mut fixed: Vec<Option<usize>> = vec![None; g.edges().len()];
    let mut witness = constrained_heads(g, &fixed, &caps)?;
    for (j, e) in g.edges().iter().enumerate() {
        for &h in e {
            // The witness agrees with every head fixed so far, so its own
            // choice for edge j is always feasible.
            fixed[j] = Some(h);
            if h == witness[j] {
                break;
            }
            if let Some(w) = constrained_heads(g, &fixed, &caps) {
                witness = w;
                break;
            }
        }
    }
    let heads = fixed.into_iter().map(|h| h.expect("every edge is fixed")).collect();
    Some(Orientation::from_heads(g, heads).expect("fixed heads are edge members"))
}

/// `d*` with its canonical orientation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinOrientation {
    pub d_star: usize,
    pub orientation: Orientation,
}

impl MinOrientation {
    pub fn to_json(&self) -> Value {
        let mut v = self.orientation.to_json();
        v["d_star"] = json!(self.d_star);
        v
    }
}

/// Binary search for the smallest feasible out-degree bound, followed by
/// the canonical orientation at that bound.
///
/// The search starts from `⌈μ(G)⌉` when `G` fits the μ budget and from the
/// maximum vertex degree otherwise.
pub fn min_out_degree_orientation(g: &Hypergraph, budget: &Budget) -> MinOrientation {
    let max_degree = g.max_degree();
    let mut high = match max_density(g, budget) {
        Ok(report) => report.mu.ceil().to_integer() as usize,
        Err(_) => max_degree,
    };
    if orient(g, high).is_none() {
        high = max_degree;
    }
    let mut low = 0;
    while low < high {
        let mid = (low + high) / 2;
        if orient(g, mid).is_some() {
            high = mid;
        } else {
            low = mid + 1;
        }
    }
    let orientation = canonical_orientation(g, high).expect("the maximum degree is always feasible");
    MinOrientation {
        d_star: high,
        orientation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::max_density;

    fn square() -> Hypergraph {
        Hypergraph::new(4, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]).unwrap()
    }

    fn complete(n: usize) -> Hypergraph {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push(vec![a, b]);
            }
        }
        Hypergraph::new(n, edges).unwrap()
    }

    fn min_cut(net: &FlowNetwork) -> u64 {
        let n = net.node_count();
        let mut best = u64::MAX;
        for mask in 0u32..(1 << n) {
            if mask >> net.source() & 1 == 0 || mask >> net.sink() & 1 == 1 {
                continue;
            }
            let cut = net
                .arcs()
                .iter()
                .filter(|a| mask >> a.from & 1 == 1 && mask >> a.to & 1 == 0)
                .map(|a| a.capacity)
                .sum();
            best = best.min(cut);
        }
        best
    }

    /// Lexicographically smallest feasible head vector by enumeration.
    fn brute_canonical(g: &Hypergraph, d: usize) -> Option<Vec<usize>> {
        let edges = g.edges();
        let mut choice = vec![0usize; edges.len()];
        loop {
            let heads: Vec<usize> = edges.iter().zip(&choice).map(|(e, &c)| e[c]).collect();
            let mut out = vec![0usize; g.vertex_count()];
            for (e, &h) in edges.iter().zip(&heads) {
                for &v in e {
                    if v != h {
                        out[v] += 1;
                    }
                }
            }
            if out.iter().all(|&o| o <= d) {
                return Some(heads);
            }
            let mut j = edges.len();
            loop {
                if j == 0 {
                    return None;
                }
                j -= 1;
                choice[j] += 1;
                if choice[j] < edges[j].len() {
                    break;
                }
                choice[j] = 0;
            }
        }
    }

    #[test]
    fn bottleneck_path() {
        let mut net = FlowNetwork::new(3, 0, 2).unwrap();
        net.add_arc(0, 1, 3).unwrap();
        net.add_arc(1, 2, 2).unwrap();
        let flow = max_flow(&net);
        assert_eq!(flow.value, 2);
        assert_eq!(flow.arc_flow, vec![2, 2]);
    }

    #[test]
    fn orientation_networks_carry_m() {
        let edge = Hypergraph::new(2, vec![vec![0, 1]]).unwrap();
        let net = FlowNetwork::for_orientation(&edge, 1);
        assert_eq!(net.source_capacity(), 1);
        assert_eq!(max_flow(&net).value, 1);

        let net = FlowNetwork::for_orientation(&square(), 1);
        assert_eq!(max_flow(&net).value, 4);
        assert_eq!(min_cut(&net), 4);
    }

    #[test]
    fn flow_matches_min_cut_on_small_networks() {
        for g in [square(), complete(3), complete(4)] {
            for d in 0..3 {
                let net = FlowNetwork::for_orientation(&g, d);
                if net.node_count() <= 12 {
                    assert_eq!(max_flow(&net).value, min_cut(&net));
                }
            }
        }
    }

    #[test]
    fn size_three_edge() {
        let g = Hypergraph::new(3, vec![vec![0, 1, 2]]).unwrap();
        let o = orient(&g, 1).unwrap();
        let head = o.head(0);
        for v in 0..3 {
            assert_eq!(o.out_degree()[v], usize::from(v != head));
        }
    }

    #[test]
    fn star_and_triangle() {
        let star = Hypergraph::new(4, vec![vec![0, 1], vec![0, 2], vec![0, 3]]).unwrap();
        assert!(orient(&star, 1).unwrap().max_out_degree() <= 1);
        assert!(orient(&complete(3), 0).is_none());
    }

    #[test]
    fn minimum_out_degrees() {
        let budget = Budget::default();
        assert_eq!(min_out_degree_orientation(&square(), &budget).d_star, 1);
        assert_eq!(min_out_degree_orientation(&complete(4), &budget).d_star, 2);
        let singles = Hypergraph::new(2, vec![vec![0], vec![1]]).unwrap();
        let m = min_out_degree_orientation(&singles, &budget);
        assert_eq!(m.d_star, 0);
        assert_eq!(m.orientation.heads(), &[0, 1]);
    }

    #[test]
    fn canonical_matches_enumeration() {
        let graphs = vec![
            square(),
            complete(4),
            Hypergraph::new(5, vec![vec![0, 1, 2], vec![2, 3], vec![3, 4], vec![1, 4], vec![0, 3, 4]]).unwrap(),
            Hypergraph::new(4, vec![vec![3, 2], vec![0, 1, 2, 3], vec![1]]).unwrap(),
        ];
        for g in graphs {
            for d in 0..3 {
                let expected = brute_canonical(&g, d);
                let got = canonical_orientation(&g, d).map(|o| o.heads().to_vec());
                assert_eq!(got, expected);
            }
        }
    }

    #[test]
    fn feasible_at_ceiling_of_mu() {
        let budget = Budget::default();
        for g in [square(), complete(4), complete(5)] {
            let mu = max_density(&g, &budget).unwrap().mu.ceil().to_integer() as usize;
            let o = orient(&g, mu).unwrap();
            assert!(o.max_out_degree() <= mu);
            assert!(min_out_degree_orientation(&g, &budget).d_star <= mu);
        }
    }

    #[test]
    fn rejects_foreign_heads() {
        assert!(Orientation::from_heads(&square(), vec![0, 0, 2, 3]).is_err());
    }
}
