//! Repeated trials and per-policy aggregation.

use super::config::{ExperimentConfig, Policy};
use super::stats::{compensated_sum, mean_and_stderr};
use super::trial::{run_policies, Scenario};
use crate::error::{Error, Result};
use crate::model::{ErrorCounts, TrialRecord};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySummary {
    pub policy: Policy,
    pub mean_utility: f64,
    pub std_err: f64,
    pub mean_kappa: f64,
    /// Pooled false-alarm rate over sensed empty resources.
    pub mean_alpha: f64,
    /// Pooled missed-detection rate over sensed busy resources.
    pub mean_beta: f64,
    pub mean_expected_utility: f64,
    pub errors: ErrorCounts,
    pub trials: usize,
}

/// Summaries plus the per-trial utilities they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloRun {
    pub summaries: Vec<PolicySummary>,
    /// `utilities[p][t]`, policies in configuration order.
    pub utilities: Vec<Vec<f64>>,
    /// Per-trial error tallies, same layout as `utilities`.
    pub errors: Vec<Vec<ErrorCounts>>,
}

impl MonteCarloRun {
    fn index_of(&self, policy: Policy) -> Option<usize> {
        self.summaries.iter().position(|s| s.policy == policy)
    }

    pub fn summary(&self, policy: Policy) -> Option<&PolicySummary> {
        self.index_of(policy).map(|i| &self.summaries[i])
    }

    pub fn utilities_of(&self, policy: Policy) -> Option<&[f64]> {
        self.index_of(policy).map(|i| self.utilities[i].as_slice())
    }

    pub fn errors_of(&self, policy: Policy) -> Option<&[ErrorCounts]> {
        self.index_of(policy).map(|i| self.errors[i].as_slice())
    }
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    utility: f64,
    expected: f64,
    kappa: usize,
    errors: ErrorCounts,
}

impl From<TrialRecord> for Outcome {
    fn from(r: TrialRecord) -> Self {
        Outcome {
            utility: r.realized_utility,
            expected: r.expected_utility,
            kappa: r.kappa,
            errors: r.errors,
        }
    }
}

pub fn monte_carlo(config: &ExperimentConfig) -> Result<MonteCarloRun> {
    monte_carlo_scenario(&Scenario::new(config)?)
}

/// Runs `config.trials` trials of every scenario policy. Trials are mapped
/// in parallel and reduced in trial order, so aggregates do not depend on
/// the worker count.
pub fn monte_carlo_scenario(scenario: &Scenario) -> Result<MonteCarloRun> {
    let cfg = &scenario.config;
    let results = par::with_workers(cfg.workers, || {
        par::map_indexed(cfg.trials, |t| {
            run_policies(scenario, t as u64)
                .map(|recs| recs.into_iter().map(Outcome::from).collect::<Vec<_>>())
                .map_err(|e| Error::Trial {
                    trial: t,
                    source: Box::new(e),
                })
        })
    });
    let mut per_trial = Vec::with_capacity(results.len());
    for r in results {
        per_trial.push(r?);
    }

    let n_pol = scenario.policies.len();
    let mut summaries = Vec::with_capacity(n_pol);
    let mut utilities = Vec::with_capacity(n_pol);
    let mut errors = Vec::with_capacity(n_pol);
    for (p, &policy) in scenario.policies.iter().enumerate() {
        let column: Vec<Outcome> = per_trial.iter().map(|row| row[p]).collect();
        let u: Vec<f64> = column.iter().map(|o| o.utility).collect();
        let (mean_utility, std_err) = mean_and_stderr(&u);
        let mut pooled = ErrorCounts::default();
        for o in &column {
            pooled.merge(&o.errors);
        }
        let n = column.len() as f64;
        summaries.push(PolicySummary {
            policy,
            mean_utility,
            std_err,
            mean_kappa: compensated_sum(column.iter().map(|o| o.kappa as f64)) / n,
            mean_alpha: pooled.false_alarm_rate(),
            mean_beta: pooled.miss_rate(),
            mean_expected_utility: compensated_sum(column.iter().map(|o| o.expected)) / n,
            errors: pooled,
            trials: column.len(),
        });
        errors.push(column.iter().map(|o| o.errors).collect());
        utilities.push(u);
    }
    Ok(MonteCarloRun {
        summaries,
        utilities,
        errors,
    })
}
