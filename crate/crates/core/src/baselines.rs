//! Static compressive baselines.
//!
//! Both baselines recover received powers from energy measurements through a
//! non-negative weighted LASSO
//!
//! ```text
//! minimize  sum_i lambda_i phi_i + 1/2 sum_k w_k (y_k - sum_i B_ki (phi_i + n_i))^2,  phi >= 0
//! ```
//!
//! The linearized-ML variant weighs sample `k` by `1 / y_k^2` (the curvature
//! of the exponential log-likelihood at `theta = y`); the covariance (MWC)
//! variant uses identity weights on pooled sample means.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{self, GroundTruth, ResourceEnsemble};

/// Non-negative mixing matrix, rows are measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSensingMatrix {
    rows: Vec<Vec<f64>>,
    cols: usize,
}

impl DenseSensingMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {r} has {} columns, expected {cols}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::BadMatrixEntry {
                        row: r,
                        col: c,
                        value: v,
                    });
                }
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroRow(r));
            }
        }
        Ok(DenseSensingMatrix { rows, cols })
    }

    /// Random 0/1 matrix with each entry set with probability 1/2, rows
    /// redrawn until non-zero.
    pub fn random_binary<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let data = (0..rows)
            .map(|_| loop {
                let row: Vec<f64> = (0..cols)
                    .map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 })
                    .collect();
                if cols == 0 || row.iter().any(|&v| v > 0.0) {
                    break row;
                }
            })
            .collect();
        DenseSensingMatrix { rows: data, cols }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `B x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(x).map(|(b, v)| b * v).sum())
            .collect()
    }
}

/// Per-sample data weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataWeighting {
    Identity,
    /// `1 / y_k^2`, the linearized exponential likelihood.
    InverseSquare,
    /// `1 / y_k`.
    InverseLinear,
}

impl DataWeighting {
    pub fn weights(self, observations: &[f64]) -> Vec<f64> {
        const FLOOR: f64 = 1e-12;
        observations
            .iter()
            .map(|&y| match self {
                DataWeighting::Identity => 1.0,
                DataWeighting::InverseSquare => 1.0 / y.max(FLOOR).powi(2),
                DataWeighting::InverseLinear => 1.0 / y.max(FLOOR),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoProblem {
    pub observations: Vec<f64>,
    pub matrix: DenseSensingMatrix,
    /// Known noise power per column.
    pub noise: Vec<f64>,
    pub l1_weights: Vec<f64>,
    pub data_weights: Vec<f64>,
}

impl LassoProblem {
    pub fn new(
        observations: Vec<f64>,
        matrix: DenseSensingMatrix,
        noise: Vec<f64>,
        l1_weights: Vec<f64>,
        weighting: DataWeighting,
    ) -> Result<Self> {
        let data_weights = weighting.weights(&observations);
        Self::with_weights(observations, matrix, noise, l1_weights, data_weights)
    }

    pub fn with_weights(
        observations: Vec<f64>,
        matrix: DenseSensingMatrix,
        noise: Vec<f64>,
        l1_weights: Vec<f64>,
        data_weights: Vec<f64>,
    ) -> Result<Self> {
        let (m, n) = (matrix.n_rows(), matrix.n_cols());
        if observations.len() != m || data_weights.len() != m {
            return Err(Error::Dimension(format!(
                "{} observations and {} data weights for {m} rows",
                observations.len(),
                data_weights.len()
            )));
        }
        if noise.len() != n || l1_weights.len() != n {
            return Err(Error::Dimension(format!(
                "{} noise powers and {} l1 weights for {n} columns",
                noise.len(),
                l1_weights.len()
            )));
        }
        if let Some(&l) = l1_weights.iter().find(|l| !(**l >= 0.0)) {
            return Err(Error::Config(format!("l1 weight {l} must be non-negative")));
        }
        if let Some(&w) = data_weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::Config(format!("data weight {w} must be positive")));
        }
        Ok(LassoProblem {
            observations,
            matrix,
            noise,
            l1_weights,
            data_weights,
        })
    }

    fn residual(&self, phi: &[f64]) -> Vec<f64> {
        let total: Vec<f64> = phi.iter().zip(&self.noise).map(|(p, n)| p + n).collect();
        self.matrix
            .apply(&total)
            .iter()
            .zip(&self.observations)
            .map(|(fit, y)| y - fit)
            .collect()
    }
}

pub fn lasso_objective(phi: &[f64], problem: &LassoProblem) -> Result<f64> {
    if phi.len() != problem.matrix.n_cols() {
        return Err(Error::Dimension(format!(
            "estimate has {} entries for {} columns",
            phi.len(),
            problem.matrix.n_cols()
        )));
    }
    let l1: f64 = phi
        .iter()
        .zip(&problem.l1_weights)
        .map(|(p, l)| l * p)
        .sum();
    let fit: f64 = problem
        .residual(phi)
        .iter()
        .zip(&problem.data_weights)
        .map(|(r, w)| w * r * r)
        .sum();
    Ok(l1 + 0.5 * fit)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoSolution {
    pub estimate: Vec<f64>,
    pub sweeps: usize,
    /// Objective after each full sweep, starting with the initial point.
    pub objective_trace: Vec<f64>,
}

/// Cyclic coordinate descent from `phi = 0`.
pub fn lasso_solve(problem: &LassoProblem, tol: f64, max_iters: usize) -> Result<LassoSolution> {
    lasso_solve_from(problem, &vec![0.0; problem.matrix.n_cols()], tol, max_iters)
}

/// Cyclic coordinate descent from a warm start, clamping at zero.
///
/// Stops when the largest coordinate move in a sweep, measured in gradient
/// units (`|delta_j| * h_j`), falls below `tol`.
pub fn lasso_solve_from(
    problem: &LassoProblem,
    start: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<LassoSolution> {
    let n = problem.matrix.n_cols();
    if start.len() != n {
        return Err(Error::Dimension(format!(
            "warm start has {} entries, expected {n}",
            start.len()
        )));
    }
    let rows = problem.matrix.rows();
    let w = &problem.data_weights;
    // column-major copy for the coordinate sweeps
    let columns: Vec<Vec<f64>> = (0..n)
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect();
    let curvature: Vec<f64> = columns
        .iter()
        .map(|col| col.iter().zip(w).map(|(b, wk)| wk * b * b).sum())
        .collect();

    let mut phi: Vec<f64> = start.iter().map(|v| v.max(0.0)).collect();
    let mut residual = problem.residual(&phi);
    let mut trace = vec![lasso_objective(&phi, problem)?];
    let mut last_change = f64::INFINITY;

    for sweep in 1..=max_iters {
        let mut max_change: f64 = 0.0;
        for j in 0..n {
            let h = curvature[j];
            if h == 0.0 {
                phi[j] = 0.0;
                continue;
            }
            let col = &columns[j];
            let grad: f64 = col
                .iter()
                .zip(&residual)
                .zip(w)
                .map(|((b, r), wk)| wk * b * r)
                .sum();
            let updated = (phi[j] + (grad - problem.l1_weights[j]) / h).max(0.0);
            let delta = updated - phi[j];
            if delta != 0.0 {
                for (r, b) in residual.iter_mut().zip(col) {
                    *r -= b * delta;
                }
                phi[j] = updated;
            }
            max_change = max_change.max(delta.abs() * h);
        }
        trace.push(lasso_objective(&phi, problem)?);
        last_change = max_change;
        if max_change < tol {
            return Ok(LassoSolution {
                estimate: phi,
                sweeps: sweep,
                objective_trace: trace,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: max_iters,
        last_change,
        estimate: phi,
    })
}

/// Largest violation of the non-negative LASSO optimality conditions.
pub fn kkt_violation(phi: &[f64], problem: &LassoProblem) -> f64 {
    let residual = problem.residual(phi);
    let rows = problem.matrix.rows();
    (0..phi.len())
        .map(|j| {
            let grad: f64 = rows
                .iter()
                .zip(&residual)
                .zip(&problem.data_weights)
                .map(|((row, r), w)| w * row[j] * r)
                .sum();
            // derivative of the objective along +phi_j
            let d = problem.l1_weights[j] - grad;
            if phi[j] > 0.0 {
                d.abs()
            } else {
                (-d).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Pooled covariance-domain measurements: per row, the mean of
/// `num_samples` energy samples with mean `sum_i B_mi (s_i phi_i + n_i)`.
pub fn mwc_observations<R: Rng + ?Sized>(
    truth: &GroundTruth,
    ensemble: &ResourceEnsemble,
    matrix: &DenseSensingMatrix,
    num_samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let thetas = mixed_means(truth, ensemble, matrix)?;
    thetas
        .into_iter()
        .map(|theta| model::sample_mean_observation(theta, num_samples, rng))
        .collect()
}

/// Row means `B (s * phi + n)` for a matrix over all resources.
pub fn mixed_means(
    truth: &GroundTruth,
    ensemble: &ResourceEnsemble,
    matrix: &DenseSensingMatrix,
) -> Result<Vec<f64>> {
    if matrix.n_cols() != ensemble.len() || truth.len() != ensemble.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} columns for {} resources",
            matrix.n_cols(),
            ensemble.len()
        )));
    }
    let power: Vec<f64> = (0..ensemble.len())
        .map(|i| {
            ensemble.resource(i).noise_power
                + if truth.is_busy(i) {
                    truth.signal_power()[i]
                } else {
                    0.0
                }
        })
        .collect();
    Ok(matrix.apply(&power))
}

/// Support detection and realized utility of a power estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutcome {
    pub decision: Vec<bool>,
    pub realized_utility: f64,
}

/// Declares `sensed[j]` busy iff `estimate[j] > threshold`; resources not
/// sensed take the null action. Utility is `(K - kappa_used)` slots of the
/// mode's reward rule.
pub fn baseline_detect_and_utility(
    estimate: &[f64],
    sensed: &[usize],
    threshold: f64,
    truth: &GroundTruth,
    ensemble: &ResourceEnsemble,
    kappa_used: usize,
) -> Result<BaselineOutcome> {
    if estimate.len() != sensed.len() {
        return Err(Error::Dimension(format!(
            "{} estimates for {} sensed resources",
            estimate.len(),
            sensed.len()
        )));
    }
    let mut decision = vec![ensemble.mode().unsensed_decision(); ensemble.len()];
    for (&i, &phi) in sensed.iter().zip(estimate) {
        decision[i] = phi > threshold;
    }
    let realized_utility = model::realized_utility(&decision, truth, ensemble, kappa_used);
    Ok(BaselineOutcome {
        decision,
        realized_utility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Mode, Resource};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn problem(
        rows: Vec<Vec<f64>>,
        y: Vec<f64>,
        noise: Vec<f64>,
        lambda: Vec<f64>,
    ) -> LassoProblem {
        LassoProblem::new(
            y,
            DenseSensingMatrix::new(rows).unwrap(),
            noise,
            lambda,
            DataWeighting::Identity,
        )
        .unwrap()
    }

    #[test]
    fn matrix_validation() {
        assert!(matches!(
            DenseSensingMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 0.0]]),
            Err(Error::ZeroRow(1))
        ));
        assert!(DenseSensingMatrix::new(vec![vec![1.0, -1.0]]).is_err());
        assert!(DenseSensingMatrix::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DenseSensingMatrix::random_binary(20, 3, &mut rng);
        assert!(m.rows().iter().all(|r| r.contains(&1.0)));
    }

    #[test]
    fn perfect_noise_fit_is_zero() {
        let rows = vec![vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]];
        let noise = vec![1.0, 2.0, 0.5];
        let y = DenseSensingMatrix::new(rows.clone()).unwrap().apply(&noise);
        let p = problem(rows, y, noise, vec![0.3; 3]);
        assert_eq!(lasso_objective(&[0.0; 3], &p).unwrap(), 0.0);
        assert!(lasso_objective(&[0.0; 2], &p).is_err());
    }

    #[test]
    fn l1_term_is_linear() {
        let rows = vec![vec![1.0, 1.0], vec![0.0, 1.0]];
        let p = problem(rows, vec![5.0, 3.0], vec![1.0, 1.0], vec![0.7, 0.2]);
        // change in quadratic part computed separately
        let base = lasso_objective(&[1.0, 1.0], &p).unwrap();
        let bumped = lasso_objective(&[1.5, 1.0], &p).unwrap();
        let quad = |phi: [f64; 2]| {
            let r0 = 5.0 - (phi[0] + 1.0) - (phi[1] + 1.0);
            let r1 = 3.0 - (phi[1] + 1.0);
            0.5 * (r0 * r0 + r1 * r1)
        };
        let expected = 0.7 * 0.5 + quad([1.5, 1.0]) - quad([1.0, 1.0]);
        assert!((bumped - base - expected).abs() < 1e-12);
    }

    #[test]
    fn single_row_soft_threshold() {
        // 1-D: minimize lambda x + w/2 (y - b (x + n))^2, x >= 0
        let (b, n, y, w, lambda) = (2.0, 0.5, 9.0, 0.25, 0.4);
        let p = LassoProblem::with_weights(
            vec![y],
            DenseSensingMatrix::new(vec![vec![b]]).unwrap(),
            vec![n],
            vec![lambda],
            vec![w],
        )
        .unwrap();
        let sol = lasso_solve(&p, 1e-14, 100).unwrap();
        let analytic = ((w * b * (y - b * n) - lambda) / (w * b * b)).max(0.0);
        assert!((sol.estimate[0] - analytic).abs() < 1e-8);
    }

    #[test]
    fn huge_lambda_shrinks_to_zero() {
        let rows = vec![vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let p = problem(rows, vec![30.0, 20.0, 12.0], vec![1.0, 1.0], vec![1e9; 2]);
        let sol = lasso_solve(&p, 1e-12, 100).unwrap();
        assert_eq!(sol.estimate, vec![0.0, 0.0]);
    }

    #[test]
    fn identity_direct_inversion() {
        let rows = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let noise = vec![1.0, 1.0, 2.0];
        let y = vec![11.0, 0.5, 2.0];
        let p = problem(rows, y.clone(), noise.clone(), vec![0.0; 3]);
        let sol = lasso_solve(&p, 1e-14, 100).unwrap();
        for j in 0..3 {
            assert!((sol.estimate[j] - (y[j] - noise[j]).max(0.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn non_convergence_is_reported() {
        let rows = vec![vec![1.0, 0.9], vec![0.9, 1.0]];
        let p = problem(rows, vec![40.0, 35.0], vec![1.0, 1.0], vec![0.0; 2]);
        match lasso_solve(&p, 0.0, 2) {
            Err(Error::NotConverged {
                iterations: 2,
                estimate,
                ..
            }) => assert_eq!(estimate.len(), 2),
            other => panic!("{other:?}"),
        }
    }

    fn ensemble(n: usize) -> ResourceEnsemble {
        ResourceEnsemble::uniform(
            n,
            Resource::new(0.9, 1.0, 19.0, 1.0),
            10.0,
            Mode::SpectrumSensing,
            10,
        )
        .unwrap()
    }

    #[test]
    fn scoring_examples() {
        let ens = ensemble(3);
        let quiet = GroundTruth::all_empty(3);
        let out = baseline_detect_and_utility(&[0.0; 3], &[0, 1, 2], 5.0, &quiet, &ens, 4).unwrap();
        assert_eq!(out.realized_utility, 6.0 * 3.0);

        let one_busy =
            GroundTruth::new(vec![false, true, false], vec![0.0, 10.0, 0.0], 10.0).unwrap();
        let out =
            baseline_detect_and_utility(&[0.0; 3], &[0, 1, 2], 5.0, &one_busy, &ens, 4).unwrap();
        assert_eq!(out.realized_utility, 6.0 * (2.0 - 19.0));

        let out =
            baseline_detect_and_utility(&[0.0, 12.0], &[0, 1], 5.0, &one_busy, &ens, 4).unwrap();
        assert_eq!(out.decision, vec![false, true, true]);
        assert_eq!(out.realized_utility, 6.0);
    }

    #[test]
    fn mwc_means_converge() {
        let ens = ensemble(4);
        let truth = GroundTruth::new(
            vec![true, false, false, true],
            vec![10.0, 0.0, 0.0, 20.0],
            10.0,
        )
        .unwrap();
        let b = DenseSensingMatrix::new(vec![vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0, 1.0]])
            .unwrap();
        let theta = mixed_means(&truth, &ens, &b).unwrap();
        assert_eq!(theta, vec![12.0, 23.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = mwc_observations(&truth, &ens, &b, 100_000, &mut rng).unwrap();
        for (zm, tm) in z.iter().zip(&theta) {
            assert!((zm / tm - 1.0).abs() < 0.02);
        }
        let quiet = mixed_means(&GroundTruth::all_empty(4), &ens, &b).unwrap();
        assert_eq!(quiet, b.apply(&[1.0; 4]));
    }
}
