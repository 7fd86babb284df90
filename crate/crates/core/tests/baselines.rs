mod common;

use activesense::baselines::{
    self, kkt_violation, lasso_objective, lasso_solve, DataWeighting, DenseSensingMatrix,
    LassoProblem,
};
use activesense::{Error, GroundTruth, Mode, Resource, ResourceEnsemble};
use proptest::prelude::*;
use rand::Rng;

fn random_problem(seed: u64, m: usize, n: usize, weighting: DataWeighting) -> LassoProblem {
    let mut rng = common::rng(seed);
    let matrix = DenseSensingMatrix::random_binary(m, n, &mut rng);
    let noise: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let phi: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random::<f64>() < 0.3 {
                rng.random_range(5.0..20.0)
            } else {
                0.0
            }
        })
        .collect();
    let total: Vec<f64> = phi.iter().zip(&noise).map(|(p, n)| p + n).collect();
    let obs: Vec<f64> = matrix
        .apply(&total)
        .iter()
        .map(|t| t * rng.random_range(0.7..1.3))
        .collect();
    let l1: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.5)).collect();
    LassoProblem::new(obs, matrix, noise, l1, weighting).unwrap()
}

/// Objective written out independently of the library.
fn objective_by_hand(phi: &[f64], p: &LassoProblem) -> f64 {
    let mut fit = 0.0;
    for (k, row) in p.matrix.rows().iter().enumerate() {
        let mut pred = 0.0;
        for j in 0..phi.len() {
            pred += row[j] * (phi[j] + p.noise[j]);
        }
        fit += p.data_weights[k] * (p.observations[k] - pred) * (p.observations[k] - pred);
    }
    let l1: f64 = p.l1_weights.iter().zip(phi).map(|(w, x)| w * x).sum();
    l1 + fit / 2.0
}

#[test]
fn noise_only_fit_has_zero_objective() {
    let matrix = DenseSensingMatrix::new(vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap();
    let noise = vec![1.0, 2.0, 3.0];
    let obs = matrix.apply(&noise);
    let p = LassoProblem::new(obs, matrix, noise, vec![1.0; 3], DataWeighting::Identity).unwrap();
    assert_eq!(lasso_objective(&[0.0; 3], &p).unwrap(), 0.0);
}

#[test]
fn objective_matches_hand_evaluation() {
    let mut rng = common::rng(3);
    for seed in 0..50 {
        let p = random_problem(seed, 4, 6, DataWeighting::InverseLinear);
        let phi: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..10.0)).collect();
        let a = lasso_objective(&phi, &p).unwrap();
        let b = objective_by_hand(&phi, &p);
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }
}

#[test]
fn matrix_validation() {
    assert!(DenseSensingMatrix::new(vec![vec![0.0, 0.0]]).is_err());
    assert!(DenseSensingMatrix::new(vec![vec![1.0], vec![1.0, 0.0]]).is_err());
    assert!(DenseSensingMatrix::new(vec![vec![-1.0, 1.0]]).is_err());
    let m = DenseSensingMatrix::random_binary(20, 5, &mut common::rng(1));
    assert!(m
        .rows()
        .iter()
        .all(|r| r.contains(&1.0) && r.iter().all(|&b| b == 0.0 || b == 1.0)));
}

#[test]
fn soft_threshold_oracle() {
    // one row, one column: argmin lambda x + w/2 (y - b(x + n))^2, x >= 0
    for &(y, b, n, w, lambda) in &[
        (12.0, 1.0, 1.0, 1.0, 2.0),
        (3.0, 2.0, 0.5, 0.25, 0.1),
        (1.0, 1.0, 1.0, 1.0, 0.5),
    ] {
        let matrix = DenseSensingMatrix::new(vec![vec![b]]).unwrap();
        let p =
            LassoProblem::with_weights(vec![y], matrix, vec![n], vec![lambda], vec![w]).unwrap();
        let sol = lasso_solve(&p, 1e-12, 100).unwrap();
        let expected = ((w * b * (y - b * n) - lambda) / (w * b * b)).max(0.0);
        assert!((sol.estimate[0] - expected).abs() <= 1e-8);
    }
}

#[test]
fn huge_penalty_shrinks_to_zero() {
    let mut p = random_problem(5, 6, 10, DataWeighting::Identity);
    p.l1_weights = vec![1e9; 10];
    assert_eq!(lasso_solve(&p, 1e-9, 100).unwrap().estimate, vec![0.0; 10]);
}

#[test]
fn identity_matrix_inverts() {
    let rows: Vec<Vec<f64>> = (0..4)
        .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let matrix = DenseSensingMatrix::new(rows).unwrap();
    let y = vec![5.0, 0.5, 3.0, 1.0];
    let noise = vec![1.0; 4];
    let p = LassoProblem::new(
        y.clone(),
        matrix,
        noise,
        vec![0.0; 4],
        DataWeighting::Identity,
    )
    .unwrap();
    let sol = lasso_solve(&p, 1e-12, 100).unwrap();
    for (est, obs) in sol.estimate.iter().zip(&y) {
        assert!((est - (obs - 1.0f64).max(0.0)).abs() <= 1e-12);
    }
}

#[test]
fn non_convergence_returns_estimate() {
    let p = random_problem(7, 8, 12, DataWeighting::Identity);
    match lasso_solve(&p, 0.0, 1) {
        Err(Error::NotConverged { estimate, .. }) => assert_eq!(estimate.len(), 12),
        other => panic!("expected NotConverged, got {other:?}"),
    }
}

#[test]
fn scoring_examples() {
    let ens = ResourceEnsemble::uniform(
        3,
        Resource::new(0.9, 2.0, 19.0, 1.0),
        10.0,
        Mode::SpectrumSensing,
        10,
    )
    .unwrap();
    let all = [0, 1, 2];
    let out = baselines::baseline_detect_and_utility(
        &[0.0; 3],
        &all,
        5.0,
        &GroundTruth::all_empty(3),
        &ens,
        2,
    )
    .unwrap();
    assert_eq!(out.realized_utility, 8.0 * 6.0);
    let truth = GroundTruth::new(vec![false, true, false], vec![0.0, 11.0, 0.0], 10.0).unwrap();
    let out =
        baselines::baseline_detect_and_utility(&[0.0; 3], &all, 5.0, &truth, &ens, 2).unwrap();
    assert_eq!(out.realized_utility, 8.0 * (4.0 - 19.0));
}

#[test]
fn mixed_means_and_sample_averages() {
    let ens = ResourceEnsemble::uniform(
        4,
        Resource::new(0.9, 1.0, 19.0, 1.0),
        10.0,
        Mode::SpectrumSensing,
        10,
    )
    .unwrap();
    let matrix = DenseSensingMatrix::random_binary(3, 4, &mut common::rng(2));
    let empty = GroundTruth::all_empty(4);
    let row_sums: Vec<f64> = matrix.rows().iter().map(|r| r.iter().sum()).collect();
    assert_eq!(
        baselines::mixed_means(&empty, &ens, &matrix).unwrap(),
        row_sums
    );

    let truth = GroundTruth::new(
        vec![true, false, true, false],
        vec![12.0, 0.0, 20.0, 0.0],
        10.0,
    )
    .unwrap();
    let theta = baselines::mixed_means(&truth, &ens, &matrix).unwrap();
    let z =
        baselines::mwc_observations(&truth, &ens, &matrix, 100_000, &mut common::rng(4)).unwrap();
    for (zm, tm) in z.iter().zip(&theta) {
        assert!((zm / tm - 1.0).abs() < 0.02);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solution_is_kkt_optimal(seed in any::<u64>(), m in 1usize..10, n in 1usize..12, w in 0usize..3) {
        let weighting = [DataWeighting::Identity, DataWeighting::InverseLinear, DataWeighting::InverseSquare][w];
        let p = random_problem(seed, m, n, weighting);
        let sol = lasso_solve(&p, 1e-10, 200_000).unwrap();
        prop_assert!(sol.estimate.iter().all(|&x| x >= 0.0));
        let scale = p.data_weights.iter().cloned().fold(0.0, f64::max).max(1.0);
        prop_assert!(kkt_violation(&sol.estimate, &p) <= 1e-6 * scale);
    }

    #[test]
    fn objective_never_increases(seed in any::<u64>(), m in 1usize..10, n in 1usize..12) {
        let p = random_problem(seed, m, n, DataWeighting::InverseLinear);
        let trace = lasso_solve(&p, 1e-10, 200_000).unwrap().objective_trace;
        for pair in trace.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-12 * pair[0].abs().max(1.0));
        }
    }

    #[test]
    fn l1_term_is_linear(seed in any::<u64>(), j in 0usize..6, delta in 0.0..10.0f64) {
        let p = random_problem(seed, 4, 6, DataWeighting::Identity);
        let mut fit_only = p.clone();
        fit_only.l1_weights = vec![0.0; 6];
        let phi: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let mut bumped = phi.clone();
        bumped[j] += delta;
        let l1 = |x: &[f64]| lasso_objective(x, &p).unwrap() - lasso_objective(x, &fit_only).unwrap();
        prop_assert!((l1(&bumped) - l1(&phi) - p.l1_weights[j] * delta).abs() <= 1e-9 * (1.0 + l1(&bumped).abs()));
    }
}
