use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use super::Predictor;
use crate::classes::{Alphabet, HypothesisClass, Label, LabeledSample};
use crate::hypergraph::{EdgeTag, OneInclusionHypergraph};
use crate::orientation::{min_out_degree_orientation, MinOrientation};
use crate::{Budget, Error, Result};

struct Oriented {
    graph: OneInclusionHypergraph,
    orientation: MinOrientation,
}

/// The one-inclusion hypergraph predictor.
///
/// The hypergraph on `U_S ∪ {x}` and its canonical minimum out-degree
/// orientation are cached by point set, so repeated predictions on the same
/// points share one max-flow computation.
pub struct OigLearner {
    class: HypothesisClass,
    partial: bool,
    budget: Budget,
    cache: Mutex<HashMap<Vec<usize>, Arc<Oriented>>>,
}

impl OigLearner {
    /// Learner for a binary or multiclass class.
    pub fn new(class: HypothesisClass) -> Result<Self> {
        match class.alphabet() {
            Alphabet::Binary | Alphabet::Multiclass(_) => Ok(Self::build(class, false)),
            other => Err(Error::invalid(format!(
                "the one-inclusion predictor needs a binary or multiclass class, got {other}"
            ))),
        }
    }

    /// Learner for a partial class. Hypotheses that put ⋆ on a point of
    /// `U_S ∪ {x}` are removed before the hypergraph is built. When every
    /// consistent hypothesis puts ⋆ on `x` the prediction is `0`.
    pub fn partial(class: HypothesisClass) -> Result<Self> {
        match class.alphabet() {
            Alphabet::Binary | Alphabet::Partial => Ok(Self::build(class, true)),
            other => Err(Error::invalid(format!(
                "the partial predictor needs a binary or partial class, got {other}"
            ))),
        }
    }

    fn build(class: HypothesisClass, partial: bool) -> Self {
        OigLearner {
            class,
            partial,
            budget: Budget::default(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn class(&self) -> &HypothesisClass {
        &self.class
    }

    pub fn is_partial(&self) -> bool {
        self.partial
    }

    fn oriented(&self, points: &[usize]) -> Result<Arc<Oriented>> {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(points) {
            return Ok(Arc::clone(hit));
        }
        let graph = if self.partial {
            OneInclusionHypergraph::build_pruned(&self.class, points)?
                .ok_or_else(|| Error::Realizability("no hypothesis avoids ⋆ on the sample".into()))?
        } else {
            OneInclusionHypergraph::build_on(&self.class, points)?
        };
        let orientation = min_out_degree_orientation(graph.graph(), &self.budget);
        let entry = Arc::new(Oriented { graph, orientation });
        self.cache
            .lock()
            .expect("cache lock")
            .insert(points.to_vec(), Arc::clone(&entry));
        Ok(entry)
    }

    /// The canonical orientation used for the point set `points`, with its
    /// hypergraph.
    pub fn orientation_on(&self, points: &[usize]) -> Result<(OneInclusionHypergraph, MinOrientation)> {
        let points = self.class.canonical_points(points)?;
        let o = self.oriented(&points)?;
        Ok((o.graph.clone(), o.orientation.clone()))
    }
}

impl Predictor for OigLearner {
    fn predict(&self, sample: &LabeledSample, x: usize) -> Result<Label> {
        let domain = self.class.domain_size();
        sample.check_points(domain)?;
        if x >= domain {
            return Err(Error::invalid(format!("test point {x} outside domain of size {domain}")));
        }
        let entries = sample.distinct_entries();
        if self.partial && entries.iter().any(|(_, y)| y.is_star()) {
            return Err(Error::invalid("training labels of the partial predictor must be 0 or 1"));
        }
        let mut labels_at: BTreeMap<usize, &Label> = BTreeMap::new();
        for (p, y) in &entries {
            if labels_at.insert(*p, y).is_some() {
                return Err(Error::Realizability(format!("point {p} carries two labels")));
            }
        }

        let consistent = self.class.consistent_rows(&LabeledSample::new(entries.clone()));
        if consistent.is_empty() {
            return Err(Error::Realizability("no hypothesis agrees with the sample".into()));
        }
        let candidates: BTreeSet<&Label> = consistent
            .iter()
            .map(|&r| &self.class.row(r)[x])
            .filter(|l| !l.is_star())
            .collect();
        match candidates.len() {
            0 => return Ok(Label::Class(0)),
            1 => return Ok(candidates.into_iter().next().expect("one label").clone()),
            _ => {}
        }

        let mut points: Vec<usize> = labels_at.keys().copied().collect();
        points.push(x);
        points.sort_unstable();
        let coordinate = points.binary_search(&x).expect("x is present");
        let context = points
            .iter()
            .filter(|&&p| p != x)
            .map(|p| labels_at[p].clone())
            .collect();
        let oriented = self.oriented(&points)?;
        let edge = oriented
            .graph
            .edge_index(&EdgeTag { coordinate, context })
            .expect("consistent hypotheses span an edge");
        let head = oriented.orientation.orientation.head(edge);
        Ok(oriented.graph.vertices()[head][coordinate].clone())
    }

    fn set_valued(&self) -> bool {
        true
    }

    fn name(&self) -> String {
        if self.partial { "partial-oig" } else { "oig" }.into()
    }
}

/// One-shot [`OigLearner`] prediction for a binary or multiclass class.
pub fn oig_predict(class: &HypothesisClass, sample: &LabeledSample, x: usize) -> Result<Label> {
    OigLearner::new(class.clone())?.predict(sample, x)
}

/// One-shot partial-class prediction.
pub fn partial_oig_predict(class: &HypothesisClass, sample: &LabeledSample, x: usize) -> Result<Label> {
    OigLearner::partial(class.clone())?.predict(sample, x)
}
