use num_traits::ToPrimitive;
use proptest::prelude::*;

use oig_core::bounds::Setting;
use oig_core::classes::{v_gamma_dimension, HypothesisClass, Label, LabeledSample};
use oig_core::harness::{run_pac_experiment, trials_csv, ExperimentLearner, FiniteDistribution};
use oig_core::predictors::{loo_audit, Loss, OigLearner, Predictor, RegressionLearner};
use oig_core::{Budget, Rational};

fn thresholds(m: usize) -> HypothesisClass {
    HypothesisClass::from_rows(
        (0..=m)
            .map(|k| (0..m).map(|x| Label::Class(u32::from(x >= k))).collect())
            .collect(),
    )
    .unwrap()
}

fn staircase(m: usize, steps: i64) -> HypothesisClass {
    let rows = (0..=steps)
        .flat_map(|level| {
            (0..=m).map(move |k| {
                (0..m)
                    .map(|x| if x >= k { Rational::new(level, steps) } else { Rational::new(0, 1) })
                    .collect::<Vec<_>>()
            })
        })
        .collect();
    HypothesisClass::real(rows).unwrap()
}

fn run_csv(threads: usize) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let class = thresholds(6);
        let dist = FiniteDistribution::uniform_on(&class, &[0, 1, 2, 3, 4, 5], 2).unwrap();
        let learner = ExperimentLearner::new(class, Setting::Binary, None, Budget::default()).unwrap();
        let out = run_pac_experiment(&learner, &dist, 16, 0.1, 64, 42).unwrap();
        trials_csv("thresholds", &out.stats, &out.records)
    })
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let one = run_csv(1);
    assert_eq!(one, run_csv(4));
    assert_eq!(one, run_csv(3));
}

#[test]
fn risk_shrinks_as_samples_grow() {
    let class = thresholds(8);
    let dist = FiniteDistribution::uniform_on(&class, &(0..8).collect::<Vec<_>>(), 4).unwrap();
    let learner = ExperimentLearner::new(class, Setting::Binary, None, Budget::default()).unwrap();
    let means: Vec<f64> = [4, 8, 16, 32]
        .iter()
        .map(|&n| run_pac_experiment(&learner, &dist, n, 0.1, 400, 5).unwrap().stats.mean)
        .collect();
    assert!(means[0] > 0.0, "{means:?}");
    assert!(means[2] < means[0] / 2.0, "{means:?}");
    assert!(means[3] < means[1] / 2.0, "{means:?}");
}

#[test]
fn regression_loo_respects_the_margin_cap() {
    let class = staircase(5, 5);
    let budget = Budget::default();
    for gamma in [Rational::new(1, 20), Rational::new(1, 10)] {
        let fat_v = v_gamma_dimension(&class, gamma, &budget).unwrap().value;
        let learner = RegressionLearner::new(class.clone(), gamma).unwrap();
        for target in [0, 7, 20, class.len() - 1] {
            for points in [vec![0, 1, 2, 3, 4], vec![4, 4, 1, 0, 2, 2, 3], vec![3, 1]] {
                let sample = LabeledSample::labeled_by(&points, class.row(target));
                let n = sample.len() as i64;
                let cap = gamma * Rational::from_integer(n + 1) + Rational::from_integer(fat_v as i64);
                let audit = loo_audit(&learner, &sample, Loss::Absolute, Some(cap)).unwrap();
                assert!(audit.within_bound(), "γ={gamma}, target {target}, {points:?}: {} > {cap}", audit.total);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oig_ignores_sample_order(target in 0usize..7, points in proptest::collection::vec(0usize..6, 1..7), x in 0usize..6, seed in any::<u64>()) {
        let class = thresholds(6);
        let sample = LabeledSample::labeled_by(&points, class.row(target));
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by_key(|&i| (seed.rotate_left(i as u32 * 7) ^ i as u64, i));
        let learner = OigLearner::new(class.clone()).unwrap();
        let fresh = OigLearner::new(class).unwrap();
        prop_assert_eq!(learner.predict(&sample, x).unwrap(), fresh.predict(&sample.permuted(&order), x).unwrap());
    }

    #[test]
    fn regression_output_is_a_level_fraction(target in 0usize..42, points in proptest::collection::vec(0usize..5, 1..6), x in 0usize..5) {
        let class = staircase(5, 5);
        let gamma = Rational::new(1, 10);
        let learner = RegressionLearner::new(class.clone(), gamma).unwrap();
        let sample = LabeledSample::labeled_by(&points, class.row(target % class.len()));
        let y = learner.predict(&sample, x).unwrap().real().unwrap();
        let m = learner.level_count(sample.len());
        prop_assert!(y >= Rational::new(0, 1) && y <= Rational::new(1, 1));
        prop_assert_eq!(m % y.denom(), 0);
        let truth = class.row(target % class.len())[x].real().unwrap();
        if points.contains(&x) {
            prop_assert!((y - truth).to_f64().unwrap().abs() <= (gamma + Rational::new(1, m)).to_f64().unwrap() + 1e-12);
        }
    }
}
