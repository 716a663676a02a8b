//! The one-inclusion predictor against a from-scratch reimplementation that
//! finds the canonical orientation by enumerating every head assignment.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oig_core::classes::{HypothesisClass, Label, LabeledSample};
use oig_core::hypergraph::Hypergraph;
use oig_core::orientation::{canonical_orientation, min_out_degree_orientation};
use oig_core::predictors::{OigLearner, Predictor};
use oig_core::Budget;

/// Vertices are the sorted distinct projections; edges are ordered by
/// coordinate, then by the labels off that coordinate.
fn one_inclusion(class: &HypothesisClass, points: &[usize]) -> (Vec<Vec<Label>>, Vec<(usize, Vec<Label>, Vec<usize>)>) {
    let mut vertices: Vec<Vec<Label>> = class
        .rows()
        .iter()
        .map(|row| points.iter().map(|&p| row[p].clone()).collect())
        .collect();
    vertices.sort();
    vertices.dedup();
    let mut edges = Vec::new();
    for i in 0..points.len() {
        let mut groups: BTreeMap<Vec<Label>, Vec<usize>> = BTreeMap::new();
        for (v, row) in vertices.iter().enumerate() {
            let mut context = row.clone();
            context.remove(i);
            groups.entry(context).or_default().push(v);
        }
        edges.extend(groups.into_iter().map(|(c, m)| (i, c, m)));
    }
    (vertices, edges)
}

/// Lexicographically first head vector minimising the largest out-degree,
/// or `None` when there are too many assignments to enumerate.
fn brute_heads(vertex_count: usize, edges: &[Vec<usize>]) -> Option<(usize, Vec<usize>)> {
    let total: usize = edges.iter().map(Vec::len).try_fold(1usize, |acc, s| acc.checked_mul(s))?;
    if total > 300_000 {
        return None;
    }
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut choice = vec![0usize; edges.len()];
    loop {
        let mut out = vec![0usize; vertex_count];
        for (e, &c) in edges.iter().zip(&choice) {
            for (k, &v) in e.iter().enumerate() {
                if k != c {
                    out[v] += 1;
                }
            }
        }
        let worst = out.into_iter().max().unwrap_or(0);
        let heads: Vec<usize> = edges.iter().zip(&choice).map(|(e, &c)| e[c]).collect();
        // Enumeration runs in lexicographic order of heads, so the first
        // assignment reaching a new minimum is the canonical one.
        if best.as_ref().map_or(true, |(d, _)| worst < *d) {
            best = Some((worst, heads));
        }
        let mut i = edges.len();
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < edges[i].len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

fn random_class(rng: &mut ChaCha8Rng, labels: u32) -> HypothesisClass {
    let m = rng.gen_range(2..=5);
    let k = rng.gen_range(2..=7);
    let rows = (0..k)
        .map(|_| (0..m).map(|_| Label::Class(rng.gen_range(0..labels))).collect())
        .collect();
    HypothesisClass::from_rows(rows).unwrap()
}

#[test]
fn canonical_orientation_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut compared = 0;
    while compared < 150 {
        let class = random_class(&mut rng, 2 + compared % 2);
        let points: Vec<usize> = (0..class.domain_size()).collect();
        let (vertices, edges) = one_inclusion(&class, &points);
        let members: Vec<Vec<usize>> = edges.iter().map(|e| e.2.clone()).collect();
        let Some((d, heads)) = brute_heads(vertices.len(), &members) else { continue };
        let g = Hypergraph::new(vertices.len(), members).unwrap();
        let found = min_out_degree_orientation(&g, &Budget::default());
        assert_eq!(found.d_star, d, "{:?}", class.rows());
        assert_eq!(found.orientation.heads(), heads.as_slice(), "{:?}", class.rows());
        assert_eq!(canonical_orientation(&g, d).unwrap().heads(), heads.as_slice());
        compared += 1;
    }
}

#[test]
fn predictions_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut compared = 0;
    while compared < 300 {
        let class = random_class(&mut rng, 2 + compared % 2);
        let m = class.domain_size();
        let target = class.row(rng.gen_range(0..class.len())).to_vec();
        let sample_points: Vec<usize> = (0..rng.gen_range(0..=3)).map(|_| rng.gen_range(0..m)).collect();
        let sample = LabeledSample::labeled_by(&sample_points, &target);
        let x = rng.gen_range(0..m);

        let mut u: Vec<usize> = sample_points.clone();
        u.push(x);
        u.sort_unstable();
        u.dedup();
        let (vertices, edges) = one_inclusion(&class, &u);
        let members: Vec<Vec<usize>> = edges.iter().map(|e| e.2.clone()).collect();
        let Some((_, heads)) = brute_heads(vertices.len(), &members) else { continue };
        let coordinate = u.iter().position(|&p| p == x).unwrap();
        let context: Vec<Label> = u.iter().filter(|&&p| p != x).map(|&p| target[p].clone()).collect();
        let edge = edges.iter().position(|(i, c, _)| *i == coordinate && *c == context).unwrap();
        // A point seen in training has a unique consistent label.
        let expected = if sample_points.contains(&x) { target[x].clone() } else { vertices[heads[edge]][coordinate].clone() };

        let got = OigLearner::new(class.clone()).unwrap().predict(&sample, x).unwrap();
        assert_eq!(got, expected, "class {:?}, sample {sample_points:?}, x {x}", class.rows());
        compared += 1;
    }
}

#[test]
fn square_example() {
    let class = HypothesisClass::from_strings(&["00", "01", "10", "11"]).unwrap();
    let (vertices, edges) = one_inclusion(&class, &[0, 1]);
    let members: Vec<Vec<usize>> = edges.iter().map(|e| e.2.clone()).collect();
    let (d, heads) = brute_heads(vertices.len(), &members).unwrap();
    assert_eq!(d, 1);
    let learner = OigLearner::new(class).unwrap();
    let (_, found) = learner.orientation_on(&[0, 1]).unwrap();
    assert_eq!(found.orientation.heads(), heads.as_slice());
    let sample = LabeledSample::new(vec![(0, Label::Class(0))]);
    let edge = edges.iter().position(|(i, c, _)| *i == 1 && *c == vec![Label::Class(0)]).unwrap();
    assert_eq!(learner.predict(&sample, 1).unwrap(), vertices[heads[edge]][1]);
}
