mod common;

use activesense::detection::{self, PbdParams, PowerModel};
use activesense::{
    di, gt, model, oracle, GroundTruth, Mode, Resource, ResourceEnsemble, TestCycle,
};
use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::Rng;

fn binomial_cdf(k: usize, n: usize, p: f64) -> f64 {
    let mut total = 0.0;
    let mut coeff = 1.0;
    for j in 0..=k {
        if j > 0 {
            coeff *= (n - j + 1) as f64 / j as f64;
        }
        total += coeff * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32);
    }
    total
}

#[test]
fn glrt_edges() {
    let ens = common::pair_example(10);
    let c = di::di_cycle(0, &ens);
    let lr0 = detection::log_glrt(0.0, c.theta0, c.theta_min);
    assert_relative_eq!(lr0, (c.theta0 / c.theta_min).ln(), max_relative = 1e-12);
    let unit = TestCycle {
        threshold: 1.0,
        ..c.clone()
    };
    assert!(!detection::glrt_decide(0.0, &unit));
    assert!(detection::glrt_decide(1e6, &c));
    assert!(detection::log_glrt(1e300, c.theta0, c.theta_min).is_finite());
}

#[test]
fn glrt_is_a_threshold_rule() {
    let mut rng = common::rng(5);
    for _ in 0..100 {
        let mode = common::random_mode(&mut rng);
        let size = rng.random_range(1..=3);
        let ens = common::random_ensemble(&mut rng, size, mode, 10);
        let members: Vec<usize> = (0..size).collect();
        let c = gt::candidate(&members, &ens).to_test_cycle();
        let mut last = f64::NEG_INFINITY;
        let mut flipped = false;
        for step in 0..4000 {
            let y = step as f64 * 0.01 * c.theta0;
            let lr = detection::log_glrt(y, c.theta0, c.theta_min);
            assert!(lr >= last - 1e-12, "LR decreased at y = {y}");
            last = lr;
            let d = detection::glrt_decide(y, &c);
            assert!(!(flipped && !d), "decision returned to H0 at y = {y}");
            flipped |= d;
        }
    }
}

#[test]
fn majority_examples() {
    assert!(detection::majority_decision(&[true]));
    assert!(!detection::majority_decision(&[true, false, false]));
    assert!(detection::majority_decision(&[true, true, false]));
    assert!(detection::majority_decision(&[true, false]));
    assert!(!detection::majority_decision(&[]));
}

#[test]
fn pbd_examples() {
    let p = PbdParams::new(vec![0.5, 0.5]).unwrap();
    assert_relative_eq!(
        detection::pbd_cdf(0, &p).unwrap(),
        0.25,
        max_relative = 1e-15
    );
    assert_eq!(detection::pbd_cdf(2, &p).unwrap(), 1.0);
    assert_eq!(
        detection::pbd_cdf(0, &PbdParams::new(vec![0.0; 4]).unwrap()).unwrap(),
        1.0
    );
    assert!(PbdParams::new(vec![1.5]).is_err());
    assert!(detection::pbd_cdf(3, &p).is_err());
}

#[test]
fn pbd_matches_enumeration() {
    let mut rng = common::rng(7);
    for _ in 0..1000 {
        let n = rng.random_range(1..=10);
        let probs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let params = PbdParams::new(probs.clone()).unwrap();
        for k in 0..=n {
            let fast = detection::pbd_cdf(k, &params).unwrap();
            let slow = oracle::pbd_enumerate(k, &probs).unwrap();
            assert!(
                (fast - slow).abs() <= 1e-12,
                "n={n} k={k}: {fast} vs {slow}"
            );
        }
    }
}

#[test]
fn pbd_matches_binomial() {
    let mut rng = common::rng(9);
    for n in 1..=20 {
        let p: f64 = rng.random();
        let params = PbdParams::new(vec![p; n]).unwrap();
        for k in 0..=n {
            let got = detection::pbd_cdf(k, &params).unwrap();
            assert!((got - binomial_cdf(k, n, p)).abs() <= 1e-12, "n={n} k={k}");
        }
    }
}

#[test]
fn single_test_resource_errors() {
    let ens = common::pair_example(10);
    let c = gt::candidate(&[0, 1], &ens).to_test_cycle();
    let (a, b) = detection::resource_error_probs_gt(std::slice::from_ref(&c), 0, &ens).unwrap();
    let (pi0, pi1) = detection::positive_probs(&c, 0, &ens);
    assert_relative_eq!(a, pi0, max_relative = 1e-12);
    assert_relative_eq!(b, c.beta_max, max_relative = 1e-12);
    assert_relative_eq!(1.0 - pi1, c.beta_max, max_relative = 1e-12);

    let d = di::di_cycle(0, &ens);
    assert_relative_eq!(
        detection::positive_probs(&d, 0, &ens).0,
        d.alpha,
        max_relative = 1e-15
    );
}

#[test]
fn three_test_coverage_matches_outcome_enumeration() {
    let ens = ResourceEnsemble::uniform(
        4,
        Resource::new(0.8, 1.0, 9.0, 1.0),
        5.0,
        Mode::SpectrumSensing,
        10,
    )
    .unwrap();
    let mut tests: Vec<TestCycle> = [[0, 1], [0, 2], [0, 3]]
        .iter()
        .map(|m| gt::candidate(m, &ens).to_test_cycle())
        .collect();
    tests[0].alpha = 0.1;
    tests[0].beta_max = 0.2;
    tests[1].alpha = 0.3;
    tests[1].beta_max = 0.05;
    tests[2].alpha = 0.25;
    tests[2].beta_max = 0.4;
    let probs: Vec<(f64, f64)> = tests
        .iter()
        .map(|t| detection::positive_probs(t, 0, &ens))
        .collect();
    let (mut alpha, mut miss) = (0.0, 0.0);
    for outcome in 0u32..8 {
        let positives = outcome.count_ones();
        let (mut p0, mut p1) = (1.0, 1.0);
        for (t, &(pi0, pi1)) in probs.iter().enumerate() {
            let hit = outcome >> t & 1 == 1;
            p0 *= if hit { pi0 } else { 1.0 - pi0 };
            p1 *= if hit { pi1 } else { 1.0 - pi1 };
        }
        if positives >= 2 {
            alpha += p0;
        } else {
            miss += p1;
        }
    }
    let (a, b) = detection::resource_error_probs_gt(&tests, 0, &ens).unwrap();
    assert!((a - alpha).abs() <= 1e-12);
    assert!((b - miss).abs() <= 1e-12);
}

#[test]
fn shared_pairs_are_rejected() {
    let ens = ResourceEnsemble::uniform(
        3,
        Resource::new(0.9, 1.0, 19.0, 1.0),
        10.0,
        Mode::SpectrumSensing,
        10,
    )
    .unwrap();
    let a = gt::candidate(&[0, 1, 2], &ens).to_test_cycle();
    let b = gt::candidate(&[0, 1], &ens).to_test_cycle();
    assert!(detection::resource_error_probs_gt(&[a, b], 0, &ens).is_err());
}

#[test]
fn posterior_examples() {
    // near-zero energy favours "all empty"
    let p = detection::posterior_marginals(1e-9, &[0.7, 0.8], &[1.0, 1.0], &[10.0, 10.0]).unwrap();
    assert!(p[0] < 0.3 && p[1] < 0.2);
    let p = detection::posterior_marginals(5.0, &[1.0, 1.0], &[1.0, 1.0], &[10.0, 10.0]).unwrap();
    assert_eq!(p, vec![0.0, 0.0]);
    let p = detection::posterior_marginals(7.0, &[0.6, 0.6, 0.6], &[1.0; 3], &[4.0; 3]).unwrap();
    assert_relative_eq!(p[0], p[1], max_relative = 1e-12);
    assert_relative_eq!(p[1], p[2], max_relative = 1e-12);
    // two-member hand enumeration
    let (w, n, phi, y) = (0.7f64, 1.0f64, 10.0f64, 1e-9f64);
    let lik = |theta: f64| (-y / theta).exp() / theta;
    let states = [
        w * w * lik(2.0 * n),
        (1.0 - w) * w * lik(2.0 * n + phi),
        w * (1.0 - w) * lik(2.0 * n + phi),
        (1.0 - w) * (1.0 - w) * lik(2.0 * n + 2.0 * phi),
    ];
    let total: f64 = states.iter().sum();
    let got = detection::posterior_states(y, &[w, w], &[n, n], &[phi, phi]).unwrap();
    for (g, s) in got.iter().zip(states) {
        assert!((g - s / total).abs() <= 1e-12);
    }
}

#[test]
fn known_power_uses_per_resource_values() {
    let ens = common::pair_example(10);
    let c = gt::candidate(&[0, 1], &ens).to_test_cycle();
    let floor = detection::exact_group_posterior(30.0, &c, &ens, PowerModel::Floor).unwrap();
    let known =
        detection::exact_group_posterior(30.0, &c, &ens, PowerModel::Known(&[10.0, 40.0])).unwrap();
    assert_relative_eq!(floor[0], floor[1], max_relative = 1e-12);
    assert!(known[1] > known[0]);
}

#[test]
fn map_decision_rules() {
    let ens = common::pair_example(10);
    // SS: use the band iff (1 - p) r > p |rho|, here p < 1/20
    assert!(!detection::map_decision(0.04, 0, &ens));
    assert!(detection::map_decision(0.06, 0, &ens));
    let radar =
        ResourceEnsemble::uniform(1, Resource::new(0.1, 1.0, 19.0, 1.0), 10.0, Mode::Radar, 10)
            .unwrap();
    assert!(detection::map_decision(0.96, 0, &radar));
    assert!(!detection::map_decision(0.94, 0, &radar));
}

#[test]
fn di_false_alarm_matches_closed_form() {
    let ens = common::pair_example(10);
    let c = di::di_cycle(0, &ens);
    let mut rng = common::rng(13);
    let n = 100_000;
    let hits = (0..n)
        .filter(|_| {
            detection::glrt_decide(model::sample_observation(c.theta0, &mut rng).unwrap(), &c)
        })
        .count();
    let rate = hits as f64 / n as f64;
    let sigma = (c.alpha * (1.0 - c.alpha) / n as f64).sqrt();
    assert!(
        (rate - c.alpha).abs() <= 3.0 * sigma,
        "{rate} vs {}",
        c.alpha
    );
}

#[test]
fn group_miss_rate_respects_bound() {
    let ens = ResourceEnsemble::uniform(
        3,
        Resource::new(0.9, 1.0, 19.0, 1.0),
        10.0,
        Mode::SpectrumSensing,
        10,
    )
    .unwrap();
    let c = gt::candidate(&[0, 1, 2], &ens).to_test_cycle();
    let mut rng = common::rng(17);
    let n = 100_000;
    // one busy member at the floor is the worst case
    let truth = GroundTruth::new(vec![false, true, false], vec![0.0, 10.0, 0.0], 10.0).unwrap();
    let theta = model::theta_of(&[0, 1, 2], &truth, &ens).unwrap();
    let misses = (0..n)
        .filter(|_| {
            !detection::glrt_decide(model::sample_observation(theta, &mut rng).unwrap(), &c)
        })
        .count();
    let rate = misses as f64 / n as f64;
    let sigma = (c.beta_max * (1.0 - c.beta_max) / n as f64).sqrt();
    assert!(rate <= c.beta_max + 3.0 * sigma);
    assert!(
        (rate - c.beta_max).abs() <= 3.0 * sigma,
        "floor-power misses should meet the bound"
    );
}

proptest! {
    #[test]
    fn posterior_is_normalized(
        y in 0.0..200.0f64,
        priors in prop::collection::vec(0.01..0.99f64, 1..=6),
        seed in any::<u64>(),
    ) {
        let m = priors.len();
        let mut rng = common::rng(seed);
        let noise: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..2.0)).collect();
        let power: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..50.0)).collect();
        let states = detection::posterior_states(y, &priors, &noise, &power).unwrap();
        prop_assert_eq!(states.len(), 1 << m);
        prop_assert!(states.iter().all(|p| (0.0..=1.0).contains(p)));
        prop_assert!((states.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let marg = detection::posterior_marginals(y, &priors, &noise, &power).unwrap();
        prop_assert!(marg.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn pbd_is_a_cdf(probs in prop::collection::vec(0.0..=1.0f64, 1..=12)) {
        let params = PbdParams::new(probs.clone()).unwrap();
        let mut last = 0.0;
        for k in 0..=probs.len() {
            let f = detection::pbd_cdf(k, &params).unwrap();
            prop_assert!(f >= last - 1e-15 && f <= 1.0);
            last = f;
        }
        prop_assert_eq!(last, 1.0);
    }
}
