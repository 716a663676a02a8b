//! Regression by thresholding.
//!
//! For a training sample of size `n − 1` the learner uses `m = ⌈4n/γ⌉`
//! levels `τ_i = i/m`, runs the partial-class predictor on each thresholded
//! class `ψ_{γ,τ_i} ∘ H` and returns `(1/m) · #{i : ĝ_i(x) = 1}`.
//!
//! Thresholded classes only depend on how each label value of the class
//! compares with `τ_i ± γ`, so levels are grouped by that signature and one
//! partial learner is kept per group. The votes of a group depend on the
//! sample only through its distinct entries and are memoised on that basis.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_integer::Integer;

use super::{real_labels, OigLearner, Predictor};
use crate::classes::{apply_threshold, threshold_label, Alphabet, HypothesisClass, Label, LabeledSample};
use crate::{Budget, Error, Rational, Result};

struct Group {
    level: Rational,
    learner: OigLearner,
}

#[derive(Default)]
struct Groups {
    index: HashMap<Vec<Label>, usize>,
    groups: Vec<Arc<Group>>,
}

type VoteKey = (Vec<(usize, Label)>, usize);

pub struct RegressionLearner {
    class: HypothesisClass,
    gamma: Rational,
    values: Vec<Rational>,
    budget: Budget,
    groups: Mutex<Groups>,
    /// Per `m`: (group, number of levels in it).
    counts: Mutex<HashMap<i64, Arc<Vec<(usize, i64)>>>>,
    votes: Mutex<HashMap<VoteKey, Vec<Option<bool>>>>,
}

impl RegressionLearner {
    pub fn new(class: HypothesisClass, gamma: Rational) -> Result<Self> {
        if class.alphabet() != Alphabet::Real {
            return Err(Error::invalid("the regression predictor needs a real-valued class"));
        }
        if gamma <= Rational::from_integer(0) || gamma >= Rational::from_integer(1) {
            return Err(Error::invalid("margin must lie in (0, 1)"));
        }
        Ok(RegressionLearner {
            values: class.real_values(),
            class,
            gamma,
            budget: Budget::default(),
            groups: Mutex::default(),
            counts: Mutex::default(),
            votes: Mutex::default(),
        })
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn gamma(&self) -> Rational {
        self.gamma
    }

    pub fn class(&self) -> &HypothesisClass {
        &self.class
    }

    /// `m = ⌈4(|S| + 1)/γ⌉`.
    pub fn level_count(&self, sample_len: usize) -> i64 {
        let n = (sample_len as i64 + 1) * 4;
        Integer::div_ceil(&(n * self.gamma.denom()), self.gamma.numer())
    }

    fn group_of(&self, level: Rational) -> Result<usize> {
        let signature: Vec<Label> = self
            .values
            .iter()
            .map(|&v| threshold_label(v, self.gamma, level))
            .collect();
        let mut groups = self.groups.lock().expect("group lock");
        if let Some(&g) = groups.index.get(&signature) {
            return Ok(g);
        }
        let thresholded = apply_threshold(&self.class, self.gamma, level)?;
        let learner = OigLearner::partial(thresholded)?.with_budget(self.budget.clone());
        let g = groups.groups.len();
        groups.groups.push(Arc::new(Group { level, learner }));
        groups.index.insert(signature, g);
        Ok(g)
    }

    fn counts(&self, m: i64) -> Result<Arc<Vec<(usize, i64)>>> {
        if let Some(hit) = self.counts.lock().expect("count lock").get(&m) {
            return Ok(Arc::clone(hit));
        }
        let mut tally: BTreeMap<usize, i64> = BTreeMap::new();
        for i in 1..=m {
            *tally.entry(self.group_of(Rational::new(i, m))?).or_default() += 1;
        }
        let counts = Arc::new(tally.into_iter().collect::<Vec<_>>());
        self.counts.lock().expect("count lock").insert(m, Arc::clone(&counts));
        Ok(counts)
    }

    fn vote(&self, group: usize, entries: &[(usize, Label)], x: usize) -> Result<bool> {
        let group = Arc::clone(&self.groups.lock().expect("group lock").groups[group]);
        let kept: Vec<(usize, Label)> = entries
            .iter()
            .filter_map(|(p, y)| {
                let z = threshold_label(y.real().expect("checked real"), self.gamma, group.level);
                (!z.is_star()).then_some((*p, z))
            })
            .collect();
        Ok(group.learner.predict(&LabeledSample::new(kept), x)? == Label::Class(1))
    }

    /// The thresholded predictions `1{ĝ_i(x; S) = 1}` for `i = 1..=m`.
    pub fn level_votes(&self, sample: &LabeledSample, x: usize) -> Result<Vec<bool>> {
        self.check(sample, x)?;
        let entries = sample.distinct_entries();
        let m = self.level_count(sample.len());
        (1..=m)
            .map(|i| self.vote(self.group_of(Rational::new(i, m))?, &entries, x))
            .collect()
    }

    fn check(&self, sample: &LabeledSample, x: usize) -> Result<()> {
        let domain = self.class.domain_size();
        sample.check_points(domain)?;
        if x >= domain {
            return Err(Error::invalid(format!("test point {x} outside domain of size {domain}")));
        }
        real_labels(sample)?;
        if !self.class.is_realizable(&LabeledSample::new(sample.distinct_entries())) {
            return Err(Error::Realizability("no function in the class fits the sample".into()));
        }
        Ok(())
    }
}

impl Predictor for RegressionLearner {
    fn predict(&self, sample: &LabeledSample, x: usize) -> Result<Label> {
        self.check(sample, x)?;
        let m = self.level_count(sample.len());
        let counts = self.counts(m)?;
        let entries = sample.distinct_entries();
        let key = (entries, x);

        let mut known = self.votes.lock().expect("vote lock").get(&key).cloned().unwrap_or_default();
        let mut changed = false;
        let mut ones = 0i64;
        for &(group, count) in counts.iter() {
            if known.len() <= group {
                known.resize(group + 1, None);
            }
            let vote = match known[group] {
                Some(v) => v,
                None => {
                    changed = true;
                    let v = self.vote(group, &key.0, x)?;
                    known[group] = Some(v);
                    v
                }
            };
            if vote {
                ones += count;
            }
        }
        if changed {
            self.votes.lock().expect("vote lock").insert(key, known);
        }
        Ok(Label::Real(Rational::new(ones, m)))
    }

    fn name(&self) -> String {
        "regression".into()
    }
}

/// One-shot [`RegressionLearner`] prediction.
pub fn regression_predict(
    class: &HypothesisClass,
    gamma: Rational,
    sample: &LabeledSample,
    x: usize,
) -> Result<Label> {
    RegressionLearner::new(class.clone(), gamma)?.predict(sample, x)
}

#[cfg(test)]
mod tests {
    use num_traits::Signed;

    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn real(v: Rational) -> Label {
        Label::Real(v)
    }

    #[test]
    fn level_count() {
        let h = HypothesisClass::real(vec![vec![r(1, 2)]]).unwrap();
        let learner = RegressionLearner::new(h, r(1, 10)).unwrap();
        assert_eq!(learner.level_count(0), 40);
        assert_eq!(learner.level_count(3), 160);
        let h = HypothesisClass::real(vec![vec![r(1, 2)]]).unwrap();
        assert_eq!(RegressionLearner::new(h, r(3, 10)).unwrap().level_count(1), 27);
    }

    #[test]
    fn constant_class_gives_the_lower_staircase() {
        // Levels inside the margin band around 0.5 fall back to 0, so the
        // prediction counts the levels at most 0.5 − γ.
        let h = HypothesisClass::real(vec![vec![r(1, 2), r(1, 2)]]).unwrap();
        let gamma = r(1, 10);
        for sample in [
            LabeledSample::default(),
            LabeledSample::new(vec![(0, real(r(1, 2)))]),
            LabeledSample::new(vec![(0, real(r(1, 2))), (1, real(r(1, 2)))]),
        ] {
            let learner = RegressionLearner::new(h.clone(), gamma).unwrap();
            let m = learner.level_count(sample.len());
            let expected = (1..=m).filter(|&i| r(i, m) <= r(2, 5)).count() as i64;
            let got = learner.predict(&sample, 1).unwrap().real().unwrap();
            assert_eq!(got, r(expected, m));
            assert!((got - r(1, 2)).abs() <= gamma + r(1, m));
        }
    }

    #[test]
    fn two_function_staircase() {
        // f1 = (0.5, 0.2), f2 = (0.5, 0.8). After seeing point 0 both remain.
        // Level τ votes 1 exactly when τ < 0.2 + γ: below the band around
        // 0.2 both rows say 1, inside it only f2 has a label (1), and above
        // it the canonical head of the edge {·0, ·1} is the 0 vertex.
        let h = HypothesisClass::real(vec![vec![r(1, 2), r(1, 5)], vec![r(1, 2), r(4, 5)]]).unwrap();
        let gamma = r(1, 20);
        let sample = LabeledSample::new(vec![(0, real(r(1, 2)))]);
        let learner = RegressionLearner::new(h, gamma).unwrap();
        let m = learner.level_count(1);
        let expected = (1..=m).filter(|&i| r(i, m) < r(1, 5) + gamma).count() as i64;
        assert_eq!(learner.predict(&sample, 1).unwrap(), real(r(expected, m)));
        let votes = learner.level_votes(&sample, 1).unwrap();
        assert_eq!(votes.iter().filter(|v| **v).count() as i64, expected);
    }

    #[test]
    fn known_points_are_reproduced_up_to_the_band() {
        let h = HypothesisClass::real(vec![vec![r(3, 10), r(9, 10)], vec![r(7, 10), r(1, 10)]]).unwrap();
        let gamma = r(1, 10);
        let learner = RegressionLearner::new(h.clone(), gamma).unwrap();
        for row in h.rows() {
            let s = LabeledSample::labeled_by(&[0, 1], row);
            for x in 0..2 {
                let got = learner.predict(&s, x).unwrap().real().unwrap();
                let truth = row[x].real().unwrap();
                let m = learner.level_count(2);
                assert!((got - truth).abs() <= gamma + r(1, m));
            }
        }
    }

    #[test]
    fn errors() {
        let h = HypothesisClass::real(vec![vec![r(1, 2)]]).unwrap();
        assert!(RegressionLearner::new(h.clone(), r(0, 1)).is_err());
        assert!(RegressionLearner::new(HypothesisClass::from_strings(&["0"]).unwrap(), r(1, 10)).is_err());
        let bad = LabeledSample::new(vec![(0, real(r(1, 3)))]);
        assert!(matches!(
            regression_predict(&h, r(1, 10), &bad, 0),
            Err(Error::Realizability(_))
        ));
    }
}
