//! Detection operating points: the MWC baseline traced over its l1 weight,
//! and the planned schemes at their designed thresholds.
//!
//! Planned schemes are reported twice: with one sample per test, and with
//! the SNR raised by the channel count, which matches the total number of
//! samples the multi-channel baseline collects.

use super::config::{ExperimentConfig, Policy};
use super::monte_carlo::monte_carlo_scenario;
use super::stats::{mean_and_stderr, pooled_ratio};
use super::sweep::SweepRow;
use super::trial::{draw_truth, mwc_problem, Scenario};
use crate::baselines::{lasso_solve_from, LassoProblem};
use crate::error::{Error, Result};
use crate::model::{self, ErrorCounts};
use crate::par;
use crate::rng::{self, OBSERVATION};

#[derive(Debug, Clone, PartialEq)]
pub struct RocPoint {
    pub label: String,
    /// l1 weight for the baseline, SNR gain for planned schemes.
    pub axis: f64,
    pub p_fa: f64,
    pub p_fa_se: f64,
    pub p_d: f64,
    pub p_d_se: f64,
    pub mean_utility: f64,
    pub std_err: f64,
    pub mean_kappa: f64,
    pub trials: usize,
}

impl RocPoint {
    pub fn to_row(&self) -> SweepRow {
        SweepRow {
            axis: self.axis,
            policy: self.label.clone(),
            mean_utility: self.mean_utility,
            std_err: self.std_err,
            mean_kappa: self.mean_kappa,
            mean_alpha: self.p_fa,
            mean_beta: 1.0 - self.p_d,
            trials: self.trials,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocResult {
    /// Baseline points in decreasing l1 weight.
    pub baseline: Vec<RocPoint>,
    /// Planned schemes, one-sample points first, then matched-budget points.
    pub schemes: Vec<RocPoint>,
}

impl RocResult {
    pub fn rows(&self) -> Vec<SweepRow> {
        self.baseline
            .iter()
            .chain(&self.schemes)
            .map(RocPoint::to_row)
            .collect()
    }

    /// Planned-scheme point for `label` at SNR gain `gain`.
    pub fn scheme(&self, label: &str, gain: f64) -> Option<&RocPoint> {
        self.schemes
            .iter()
            .find(|p| p.label == label && p.axis == gain)
    }

    /// Baseline point with the false-alarm rate closest to `p_fa`.
    pub fn nearest_baseline(&self, p_fa: f64) -> Option<&RocPoint> {
        self.baseline
            .iter()
            .min_by(|a, b| (a.p_fa - p_fa).abs().total_cmp(&(b.p_fa - p_fa).abs()))
    }
}

fn rates(
    label: String,
    axis: f64,
    errors: &[ErrorCounts],
    utilities: &[f64],
    kappas: &[f64],
) -> RocPoint {
    let fa: Vec<f64> = errors.iter().map(|e| e.false_alarms as f64).collect();
    let empty: Vec<f64> = errors.iter().map(|e| e.sensed_empty as f64).collect();
    let det: Vec<f64> = errors
        .iter()
        .map(|e| (e.sensed_busy - e.misses) as f64)
        .collect();
    let busy: Vec<f64> = errors.iter().map(|e| e.sensed_busy as f64).collect();
    let (p_fa, p_fa_se) = pooled_ratio(&fa, &empty);
    let (p_d, p_d_se) = pooled_ratio(&det, &busy);
    let (mean_utility, std_err) = mean_and_stderr(utilities);
    let (mean_kappa, _) = mean_and_stderr(kappas);
    RocPoint {
        label,
        axis,
        p_fa,
        p_fa_se,
        p_d,
        p_d_se,
        mean_utility,
        std_err,
        mean_kappa,
        trials: errors.len(),
    }
}

/// Copy of `config` with every received power scaled by `gain`.
pub fn with_snr_gain(config: &ExperimentConfig, gain: f64) -> ExperimentConfig {
    let mut cfg = config.clone();
    cfg.snr_min_db += 10.0 * gain.log10();
    cfg
}

pub fn roc_points(config: &ExperimentConfig) -> Result<RocResult> {
    config.validate()?;
    let policies = config.parsed_policies()?;
    let schemes: Vec<Policy> = policies
        .iter()
        .copied()
        .filter(|p| matches!(p, Policy::Di | Policy::Gt(_) | Policy::Map(_)))
        .collect();

    let mut scheme_points = Vec::new();
    if !schemes.is_empty() {
        for gain in [1.0, config.mwc.channels as f64] {
            let cfg = with_snr_gain(config, gain);
            let run = monte_carlo_scenario(&Scenario::with_policies(&cfg, schemes.clone())?)?;
            for (p, s) in schemes.iter().zip(&run.summaries) {
                let errors = run.errors_of(*p).unwrap_or(&[]);
                let utilities = run.utilities_of(*p).unwrap_or(&[]);
                let kappas = vec![s.mean_kappa; errors.len()];
                scheme_points.push(rates(p.to_string(), gain, errors, utilities, &kappas));
            }
        }
    }

    Ok(RocResult {
        baseline: baseline_curve(config)?,
        schemes: scheme_points,
    })
}

/// Baseline curve traced along a decreasing l1 path with warm starts.
pub fn baseline_curve(config: &ExperimentConfig) -> Result<Vec<RocPoint>> {
    let scenario = Scenario::with_policies(config, vec![Policy::Mwc])?;
    let matrix = scenario
        .mwc_matrix()
        .ok_or_else(|| Error::Config("MWC matrix missing".into()))?;
    let mut lambdas = config.mwc.roc_lambdas.clone();
    if lambdas.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::Config("roc_lambdas must be non-negative".into()));
    }
    lambdas.sort_by(|a, b| b.total_cmp(a));
    lambdas.dedup();

    let per_trial = par::with_workers(config.workers, || {
        par::map_indexed(
            config.trials,
            |t| -> Result<Vec<(ErrorCounts, f64, usize)>> {
                let trial = t as u64;
                let (ens, plans) = scenario.prepare(trial)?;
                let truth = draw_truth(config, &ens, trial)?;
                let kappa = plans.get(config.mwc.budget_cycle_size)?.kappa();
                let all: Vec<usize> = (0..ens.len()).collect();
                let mut rng = rng::substream(config.master_seed, OBSERVATION, trial);
                if kappa == 0 {
                    let decision = vec![ens.mode().unsensed_decision(); ens.len()];
                    let u = model::realized_utility(&decision, &truth, &ens, 0);
                    return Ok(vec![(ErrorCounts::default(), u, 0); lambdas.len()]);
                }
                let base = mwc_problem(
                    matrix,
                    kappa,
                    vec![0.0; ens.len()],
                    &ens,
                    &truth,
                    config,
                    &mut rng,
                )?;
                let threshold = config
                    .mwc
                    .detection_threshold
                    .unwrap_or(ens.phi_min() / 2.0);
                let mut start = vec![0.0; ens.len()];
                let mut out = Vec::with_capacity(lambdas.len());
                for &lambda in &lambdas {
                    let problem = LassoProblem {
                        l1_weights: vec![lambda; ens.len()],
                        ..base.clone()
                    };
                    let estimate = match lasso_solve_from(
                        &problem,
                        &start,
                        config.mwc.tol,
                        config.mwc.max_iters,
                    ) {
                        Ok(sol) => sol.estimate,
                        Err(Error::NotConverged { estimate, .. }) => estimate,
                        Err(e) => return Err(e),
                    };
                    let decision: Vec<bool> = estimate.iter().map(|&p| p > threshold).collect();
                    out.push((
                        ErrorCounts::tally(&decision, &truth, &all),
                        model::realized_utility(&decision, &truth, &ens, kappa),
                        kappa,
                    ));
                    start = estimate;
                }
                Ok(out)
            },
        )
    });
    let mut rows = Vec::with_capacity(per_trial.len());
    for (t, r) in per_trial.into_iter().enumerate() {
        rows.push(r.map_err(|e| Error::Trial {
            trial: t,
            source: Box::new(e),
        })?);
    }

    let label = if config.mwc.sample_multiplier == 1 {
        "MWC".to_string()
    } else {
        format!("MWC(x{})", config.mwc.sample_multiplier)
    };
    Ok(lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let errors: Vec<ErrorCounts> = rows.iter().map(|r| r[k].0).collect();
            let utilities: Vec<f64> = rows.iter().map(|r| r[k].1).collect();
            let kappas: Vec<f64> = rows.iter().map(|r| r[k].2 as f64).collect();
            rates(label.clone(), lambda, &errors, &utilities, &kappas)
        })
        .collect())
}

pub fn roc(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    Ok(roc_points(config)?.rows())
}
