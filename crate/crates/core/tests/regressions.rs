//! Monte Carlo regressions of the tests on hand-built alternatives.

use manitest::manifold::{build_circle_atlas, Sample};
use manitest::rng::{derive_seed, rng_from_seed};
use manitest::testkit::{nn_test, two_step_test, NnOptions, StepStatus, TestLevel, ThresholdSpec};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;

#[test]
fn shifted_chart_law_is_caught_by_step_two() {
    let (atlas, _) = build_circle_atlas(3, 0).unwrap();
    let emb = atlas.embedding();
    let eta = TestLevel::new(0.05).unwrap();
    let n = 200;
    let mut rejected = 0;
    for seed in 0..50u64 {
        let mut rng = rng_from_seed(derive_seed(1234, seed));
        // half the points near angle 0, half near π, on both sides
        let mut draw = |shift: f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| {
                    let u: f64 = rng.random_range(-0.8..0.8);
                    let t = if i < n / 2 { u + shift } else { PI + u };
                    emb.embed_angle(t)
                })
                .collect()
        };
        let x = Sample::new(draw(0.0), seed);
        let y = Sample::new(draw(0.3), seed);
        let spec = ThresholdSpec::bootstrap(200, derive_seed(77, seed)).unwrap();
        let r = two_step_test(&atlas, &x, &y, eta, &spec).unwrap();
        assert_eq!(r.steps[0].statistic, 0.0);
        assert_eq!(r.steps[0].status, StepStatus::NotReject, "seed {seed}");
        rejected += usize::from(r.steps[1].status == StepStatus::Reject);
    }
    assert!(rejected >= 45, "step II rejected {rejected}/50");
}

#[test]
fn far_clusters_are_caught_by_the_critic() {
    let eta = TestLevel::new(0.05).unwrap();
    let opts = NnOptions::default();
    let noise = Normal::new(0.0, 0.1).unwrap();
    let n = 50;
    let mut rejected = 0;
    for seed in 0..50u64 {
        let mut rng = rng_from_seed(derive_seed(4321, seed));
        let mut cluster = |cx: f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| vec![cx + noise.sample(&mut rng), noise.sample(&mut rng)])
                .collect()
        };
        let x = Sample::new(cluster(0.8), seed);
        let y = Sample::new(cluster(-0.8), seed);
        let opts = NnOptions {
            train: manitest::critic::TrainConfig {
                seed: derive_seed(5, seed),
                ..opts.train
            },
            ..opts.clone()
        };
        let spec = ThresholdSpec::bootstrap(200, derive_seed(78, seed)).unwrap();
        let r = nn_test(&x, &y, eta, &opts, &spec).unwrap();
        rejected += usize::from(r.decision.rejects());
    }
    assert!(rejected >= 48, "rejected {rejected}/50");
}
