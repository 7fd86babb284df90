//! One Monte-Carlo trial: ensemble and ground-truth draws, plan execution,
//! decisions and realized utility.
//!
//! All policies of a trial see the same ensemble and ground truth, and each
//! restarts the same observation substream, so policy comparisons use common
//! random numbers.

use std::borrow::Cow;
use std::collections::BTreeMap;

use rand::Rng;

use super::config::{db_to_linear, ExperimentConfig, MapPower, Policy, PriorSpec, RewardSpec};
use crate::baselines::{self, DataWeighting, DenseSensingMatrix, LassoProblem};
use crate::detection::{self, PowerModel};
use crate::di;
use crate::error::{Error, Result};
use crate::gt;
use crate::model::{
    self, ErrorCounts, GroundTruth, Mode, Resource, ResourceEnsemble, SensingPlan, TrialRecord,
};
use crate::rng::{self, HARDWARE, OBSERVATION, TRUTH};

/// Stream index of the MWC mixing matrix, shared by all trials.
const MWC_MATRIX_INDEX: u64 = u64::MAX;

/// Draws the ensemble for `trial` from the configured distributions.
pub fn draw_ensemble(cfg: &ExperimentConfig, trial: u64) -> Result<ResourceEnsemble> {
    let mut rng = rng::substream(cfg.master_seed, rng::ENSEMBLE, trial);
    let mut resources = Vec::with_capacity(cfg.n_resources);
    for _ in 0..cfg.n_resources {
        let reward = match cfg.reward {
            RewardSpec::Fixed { value } => value,
            RewardSpec::Rate {
                snr_db_lo,
                snr_db_hi,
            } => {
                let db = uniform(&mut rng, snr_db_lo, snr_db_hi);
                (1.0 + db_to_linear(db)).log2()
            }
        };
        let penalty = cfg.penalty_ratio * reward;
        let prior = draw_prior(cfg.mode, &cfg.prior, reward, penalty, &mut rng)?;
        resources.push(Resource::new(prior, reward, penalty, cfg.noise_power));
    }
    ResourceEnsemble::new(resources, cfg.phi_min(), cfg.mode, cfg.horizon)
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

fn draw_prior<R: Rng + ?Sized>(
    mode: Mode,
    spec: &PriorSpec,
    reward: f64,
    penalty: f64,
    rng: &mut R,
) -> Result<f64> {
    let bound = mode.prior_bound(reward, penalty);
    match *spec {
        PriorSpec::Fixed { value } => Ok(value),
        PriorSpec::Boundary { margin } => Ok(match mode {
            Mode::SpectrumSensing => bound * (1.0 - margin),
            Mode::Radar => bound * (1.0 + margin),
        }),
        PriorSpec::Uniform { lo, hi } => {
            let (lo, hi) = (lo.unwrap_or(bound), hi.unwrap_or(bound));
            let admissible = |w: f64| match mode {
                Mode::SpectrumSensing => w < bound,
                Mode::Radar => w > bound,
            };
            let (lo, hi) = match mode {
                Mode::SpectrumSensing => (lo, hi.min(bound)),
                Mode::Radar => (lo.max(bound), hi),
            };
            if !(lo < hi) {
                return Err(Error::Config(format!(
                    "uniform prior support ({lo}, {hi}) is empty under the sensing bound {bound}"
                )));
            }
            // the open end at the bound has probability zero, redraw if hit
            loop {
                let w = rng.random_range(lo..hi);
                if admissible(w) && w > 0.0 {
                    return Ok(w);
                }
            }
        }
    }
}

/// Occupancy and received powers for `trial`.
pub fn draw_truth(
    cfg: &ExperimentConfig,
    ensemble: &ResourceEnsemble,
    trial: u64,
) -> Result<GroundTruth> {
    Ok(draw_truth_latent(cfg, ensemble, trial)?.0)
}

/// Ground truth plus the power every resource would be received at if
/// busy, drawn whether or not it is.
pub fn draw_truth_latent(
    cfg: &ExperimentConfig,
    ensemble: &ResourceEnsemble,
    trial: u64,
) -> Result<(GroundTruth, Vec<f64>)> {
    let mut rng = rng::substream(cfg.master_seed, TRUTH, trial);
    let n = ensemble.len();
    let mut occupied = Vec::with_capacity(n);
    let mut latent = Vec::with_capacity(n);
    for res in ensemble.resources() {
        let busy = rng.random::<f64>() >= res.prior_empty;
        let db = cfg.snr_min_db + cfg.snr_span_db * rng.random::<f64>();
        occupied.push(busy);
        latent.push(res.noise_power * db_to_linear(db));
    }
    let power = occupied
        .iter()
        .zip(&latent)
        .map(|(&b, &p)| if b { p } else { 0.0 })
        .collect();
    Ok((
        GroundTruth::new(occupied, power, ensemble.phi_min())?,
        latent,
    ))
}

/// Plans computed once per ensemble, keyed by cycle size.
#[derive(Debug, Clone, Default)]
pub struct PlanSet {
    plans: BTreeMap<usize, SensingPlan>,
}

impl PlanSet {
    /// Builds every plan the policies need.
    pub fn for_policies(
        ensemble: &ResourceEnsemble,
        policies: &[Policy],
        cfg: &ExperimentConfig,
    ) -> Result<Self> {
        let mut set = PlanSet::default();
        for p in policies {
            let l = match p {
                Policy::Mwc => cfg.mwc.budget_cycle_size,
                other => other.cycle_size().unwrap_or(1),
            };
            set.ensure(ensemble, l)?;
        }
        Ok(set)
    }

    fn ensure(&mut self, ensemble: &ResourceEnsemble, l: usize) -> Result<()> {
        if let std::collections::btree_map::Entry::Vacant(e) = self.plans.entry(l) {
            let plan = if l == 1 {
                di::di_plan(ensemble)
            } else {
                gt::greedy_plan(ensemble, l)?
            };
            e.insert(plan);
        }
        Ok(())
    }

    pub fn get(&self, l: usize) -> Result<&SensingPlan> {
        self.plans
            .get(&l)
            .ok_or_else(|| Error::Config(format!("no plan prepared for cycle size {l}")))
    }
}

/// Shared read-only inputs of a Monte-Carlo run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ExperimentConfig,
    pub policies: Vec<Policy>,
    fixed: Option<(ResourceEnsemble, PlanSet)>,
    mwc_matrix: Option<DenseSensingMatrix>,
}

impl Scenario {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let policies = config.parsed_policies()?;
        Self::with_policies(config, policies)
    }

    pub fn with_policies(config: &ExperimentConfig, policies: Vec<Policy>) -> Result<Self> {
        let fixed = if config.ensemble_is_fixed() {
            let ens = draw_ensemble(config, 0)?;
            let plans = PlanSet::for_policies(&ens, &policies, config)?;
            Some((ens, plans))
        } else {
            None
        };
        let mwc_matrix = policies.contains(&Policy::Mwc).then(|| {
            let mut hw = rng::substream(config.master_seed, HARDWARE, MWC_MATRIX_INDEX);
            DenseSensingMatrix::random_binary(config.mwc.channels, config.n_resources, &mut hw)
        });
        Ok(Scenario {
            config: config.clone(),
            policies,
            fixed,
            mwc_matrix,
        })
    }

    /// Ensemble and plans for `trial`.
    pub fn prepare(&self, trial: u64) -> Result<(Cow<'_, ResourceEnsemble>, Cow<'_, PlanSet>)> {
        match &self.fixed {
            Some((ens, plans)) => Ok((Cow::Borrowed(ens), Cow::Borrowed(plans))),
            None => {
                let ens = draw_ensemble(&self.config, trial)?;
                let plans = PlanSet::for_policies(&ens, &self.policies, &self.config)?;
                Ok((Cow::Owned(ens), Cow::Owned(plans)))
            }
        }
    }

    pub fn mwc_matrix(&self) -> Option<&DenseSensingMatrix> {
        self.mwc_matrix.as_ref()
    }
}

/// Runs every scenario policy on `trial`, in policy order.
pub fn run_policies(scenario: &Scenario, trial: u64) -> Result<Vec<TrialRecord>> {
    let (ens, plans) = scenario.prepare(trial)?;
    let (truth, latent) = draw_truth_latent(&scenario.config, &ens, trial)?;
    scenario
        .policies
        .iter()
        .map(|&p| run_policy(p, scenario, &ens, &plans, &truth, &latent, trial))
        .collect()
}

/// Runs one policy on `trial`. Deterministic in `(config, policy, trial)`.
pub fn run_trial(policy: Policy, config: &ExperimentConfig, trial: u64) -> Result<TrialRecord> {
    let scenario = Scenario::with_policies(config, vec![policy])?;
    let mut records = run_policies(&scenario, trial)?;
    Ok(records.remove(0))
}

pub fn run_policy(
    policy: Policy,
    scenario: &Scenario,
    ensemble: &ResourceEnsemble,
    plans: &PlanSet,
    truth: &GroundTruth,
    latent_power: &[f64],
    trial: u64,
) -> Result<TrialRecord> {
    let cfg = &scenario.config;
    let mut obs_rng = rng::substream(cfg.master_seed, OBSERVATION, trial);
    match policy {
        Policy::Di => execute_plan(plans.get(1)?, ensemble, truth, &mut obs_rng),
        Policy::Gt(l) => execute_plan(plans.get(l)?, ensemble, truth, &mut obs_rng),
        Policy::Map(l) => {
            let power = match cfg.map.power {
                MapPower::True => PowerModel::Known(latent_power),
                MapPower::Floor => PowerModel::Floor,
            };
            execute_map(plans.get(l)?, ensemble, truth, power, &mut obs_rng)
        }
        Policy::Lasso(l) => {
            let mut hw = rng::substream(cfg.master_seed, HARDWARE, trial);
            execute_dense_lasso(plans.get(l)?, ensemble, truth, cfg, &mut hw, &mut obs_rng)
        }
        Policy::Mwc => {
            let matrix = scenario
                .mwc_matrix()
                .ok_or_else(|| Error::Config("MWC matrix missing".into()))?;
            let kappa = plans.get(cfg.mwc.budget_cycle_size)?.kappa();
            execute_mwc(
                matrix,
                kappa,
                cfg.mwc.lambda,
                ensemble,
                truth,
                cfg,
                &mut obs_rng,
            )
        }
    }
}

/// Senses each cycle once and applies its GLRT to every member.
pub fn execute_plan<R: Rng + ?Sized>(
    plan: &SensingPlan,
    ensemble: &ResourceEnsemble,
    truth: &GroundTruth,
    rng: &mut R,
) -> Result<TrialRecord> {
    let mut decision = vec![ensemble.mode().unsensed_decision(); ensemble.len()];
    let mut observations = Vec::with_capacity(plan.kappa());
    let mut test_positive = Vec::with_capacity(plan.kappa());
    for cycle in &plan.cycles {
        let theta = model::theta_of(&cycle.members, truth, ensemble)?;
        let y = model::sample_observation(theta, rng)?;
        let positive = detection::glrt_decide(y, cycle);
        for &m in &cycle.members {
            decision[m] = positive;
        }
        observations.push(y);
        test_positive.push(positive);
    }
    Ok(finish(
        plan,
        observations,
        test_positive,
        decision,
        ensemble,
        truth,
    ))
}

/// Same observations as [`execute_plan`], decisions from per-member
/// posterior marginals.
pub fn execute_map<R: Rng + ?Sized>(
    plan: &SensingPlan,
    ensemble: &ResourceEnsemble,
    truth: &GroundTruth,
    power: PowerModel<'_>,
    rng: &mut R,
) -> Result<TrialRecord> {
    let mut decision = vec![ensemble.mode().unsensed_decision(); ensemble.len()];
    let mut observations = Vec::with_capacity(plan.kappa());
    let mut test_positive = Vec::with_capacity(plan.kappa());
    for cycle in &plan.cycles {
        let theta = model::theta_of(&cycle.members, truth, ensemble)?;
        let y = model::sample_observation(theta, rng)?;
        let marginals = detection::exact_group_posterior(y, cycle, ensemble, power)?;
        for (&m, &p) in cycle.members.iter().zip(&marginals) {
            decision[m] = detection::map_decision(p, m, ensemble);
        }
        observations.push(y);
        test_positive.push(detection::glrt_decide(y, cycle));
    }
    Ok(finish(
        plan,
        observations,
        test_positive,
        decision,
        ensemble,
        truth,
    ))
}

fn finish(
    plan: &SensingPlan,
    observations: Vec<f64>,
    test_positive: Vec<bool>,
    decision: Vec<bool>,
    ensemble: &ResourceEnsemble,
    truth: &GroundTruth,
) -> TrialRecord {
    let kappa = plan.kappa();
    TrialRecord {
        errors: ErrorCounts::tally(&decision, truth, &plan.sensed()),
        realized_utility: model::realized_utility(&decision, truth, ensemble, kappa),
        expected_utility: plan.expected_utility,
        kappa,
        observations,
        test_positive,
        decision,
    }
}

/// Dense 0/1 mixing of the plan's sensed set with as many measurements as
/// the plan has tests, each the mean of several energy samples.
pub fn execute_dense_lasso<R: Rng + ?Sized, S: Rng + ?Sized>(
    plan: &SensingPlan,
    ensemble: &ResourceEnsemble,
    truth: &GroundTruth,
    cfg: &ExperimentConfig,
    hardware: &mut R,
    rng: &mut S,
) -> Result<TrialRecord> {
    let mut sensed = plan.sensed();
    sensed.sort_unstable();
    let kappa = plan.kappa();
    let settings = &cfg.lasso;
    let mut decision = vec![ensemble.mode().unsensed_decision(); ensemble.len()];
    let mut observations = Vec::with_capacity(kappa);
    if kappa > 0 {
        let matrix = DenseSensingMatrix::random_binary(kappa, sensed.len(), hardware);
        let power: Vec<f64> = sensed
            .iter()
            .map(|&i| {
                ensemble.resource(i).noise_power
                    + if truth.is_busy(i) {
                        truth.signal_power()[i]
                    } else {
                        0.0
                    }
            })
            .collect();
        for theta in matrix.apply(&power) {
            observations.push(model::sample_mean_observation(
                theta,
                settings.samples_per_test,
                rng,
            )?);
        }
        let noise: Vec<f64> = sensed
            .iter()
            .map(|&i| ensemble.resource(i).noise_power)
            .collect();
        let l1: Vec<f64> = match settings.lambda {
            Some(l) => vec![l; sensed.len()],
            None => sensed
                .iter()
                .map(|&i| di::di_threshold(i, ensemble))
                .collect(),
        };
        let problem = LassoProblem::new(
            observations.clone(),
            matrix,
            noise,
            l1,
            settings.weighting.to_data_weighting(),
        )?;
        let estimate = solve_or_last(&problem, settings.tol, settings.max_iters)?;
        let threshold = settings
            .detection_threshold
            .unwrap_or(ensemble.phi_min() / 2.0);
        let out = baselines::baseline_detect_and_utility(
            &estimate, &sensed, threshold, truth, ensemble, kappa,
        )?;
        decision = out.decision;
    }
    Ok(TrialRecord {
        errors: ErrorCounts::tally(&decision, truth, &sensed),
        realized_utility: model::realized_utility(&decision, truth, ensemble, kappa),
        expected_utility: 0.0,
        kappa,
        test_positive: Vec::new(),
        observations,
        decision,
    })
}

// The last iterate is still a valid non-negative estimate.
fn solve_or_last(problem: &LassoProblem, tol: f64, max_iters: usize) -> Result<Vec<f64>> {
    match baselines::lasso_solve(problem, tol, max_iters) {
        Ok(sol) => Ok(sol.estimate),
        Err(Error::NotConverged { estimate, .. }) => Ok(estimate),
        Err(e) => Err(e),
    }
}

/// Covariance-domain measurements over all resources with
/// `kappa * sample_multiplier` samples per channel, support by LASSO.
pub fn execute_mwc<R: Rng + ?Sized>(
    matrix: &DenseSensingMatrix,
    kappa: usize,
    lambda: f64,
    ensemble: &ResourceEnsemble,
    truth: &GroundTruth,
    cfg: &ExperimentConfig,
    rng: &mut R,
) -> Result<TrialRecord> {
    let all: Vec<usize> = (0..ensemble.len()).collect();
    if kappa == 0 {
        let decision = vec![ensemble.mode().unsensed_decision(); ensemble.len()];
        return Ok(TrialRecord {
            realized_utility: model::realized_utility(&decision, truth, ensemble, 0),
            decision,
            ..TrialRecord::default()
        });
    }
    let problem = mwc_problem(
        matrix,
        kappa,
        vec![lambda; ensemble.len()],
        ensemble,
        truth,
        cfg,
        rng,
    )?;
    let estimate = solve_or_last(&problem, cfg.mwc.tol, cfg.mwc.max_iters)?;
    let threshold = cfg
        .mwc
        .detection_threshold
        .unwrap_or(ensemble.phi_min() / 2.0);
    let out =
        baselines::baseline_detect_and_utility(&estimate, &all, threshold, truth, ensemble, kappa)?;
    Ok(TrialRecord {
        errors: ErrorCounts::tally(&out.decision, truth, &all),
        realized_utility: out.realized_utility,
        expected_utility: 0.0,
        kappa,
        observations: problem.observations.clone(),
        test_positive: Vec::new(),
        decision: out.decision,
    })
}

pub(crate) fn mwc_problem<R: Rng + ?Sized>(
    matrix: &DenseSensingMatrix,
    kappa: usize,
    l1: Vec<f64>,
    ensemble: &ResourceEnsemble,
    truth: &GroundTruth,
    cfg: &ExperimentConfig,
    rng: &mut R,
) -> Result<LassoProblem> {
    let samples = kappa * cfg.mwc.sample_multiplier;
    let z = baselines::mwc_observations(truth, ensemble, matrix, samples, rng)?;
    let noise: Vec<f64> = ensemble.resources().iter().map(|r| r.noise_power).collect();
    LassoProblem::new(z, matrix.clone(), noise, l1, DataWeighting::Identity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::presets;

    #[test]
    fn draws_are_deterministic_and_admissible() {
        let cfg = presets::preset("fig4_k10").unwrap();
        let a = draw_ensemble(&cfg, 3).unwrap();
        let b = draw_ensemble(&cfg, 3).unwrap();
        assert_eq!(a, b);
        for r in a.resources() {
            assert!(r.prior_empty >= 0.7 && r.prior_empty < 5.0 / 6.0);
            assert!(r.reward >= (1.0f64 + 10.0).log2() && r.reward < (1.0f64 + 100.0).log2());
            assert!((r.penalty - 5.0 * r.reward).abs() < 1e-12);
        }
        let t = draw_truth(&cfg, &a, 3).unwrap();
        for i in 0..t.len() {
            if t.is_busy(i) {
                let p = t.signal_power()[i];
                assert!((10.0..=100.0).contains(&p));
            }
        }
    }

    #[test]
    fn boundary_prior_is_admissible_in_both_modes() {
        for name in ["fig3_ss", "fig3_radar"] {
            let cfg = presets::preset(name).unwrap();
            for v in cfg.grid() {
                assert!(
                    draw_ensemble(&cfg.at(v).unwrap(), 0).is_ok(),
                    "{name} at {v}"
                );
            }
        }
    }

    #[test]
    fn all_empty_truth_with_perfect_decisions() {
        let cfg = presets::preset("fig3_ss").unwrap().at(10.0).unwrap();
        let ens = draw_ensemble(&cfg, 0).unwrap();
        let plan = di::di_plan(&ens);
        let truth = GroundTruth::all_empty(ens.len());
        let mut decision = vec![true; ens.len()];
        for c in &plan.cycles {
            decision[c.members[0]] = false;
        }
        let u = model::realized_utility(&decision, &truth, &ens, plan.kappa());
        let expected: f64 = plan
            .sensed()
            .iter()
            .map(|&i| ens.resource(i).reward)
            .sum::<f64>()
            * (ens.horizon() - plan.kappa()) as f64;
        assert!((u - expected).abs() < 1e-9);
    }

    #[test]
    fn same_trial_same_record() {
        let mut cfg = presets::preset("fig5_k10").unwrap().at(10.0).unwrap();
        cfg.policies = vec![
            "DI".into(),
            "GT(2)".into(),
            "MAP(2)".into(),
            "LASSO(2)".into(),
            "MWC".into(),
        ];
        for p in cfg.parsed_policies().unwrap() {
            let a = run_trial(p, &cfg, 11).unwrap();
            let b = run_trial(p, &cfg, 11).unwrap();
            assert_eq!(a, b, "{p}");
        }
    }
}
