//! Domain types shared by every planner: the resource ensemble and its
//! validation, realized ground truth, test cycles, plans and trial records,
//! plus the energy-detector observation law.
//!
//! Each test mixes a set of sub-bands with unit (binary) coefficients. Given
//! the occupancy state, the squared magnitude of the filtered sample is
//! exponentially distributed with mean
//!
//! ```text
//! theta = sum_{i in members} (s_i * phi_i + n_i)
//! ```
//!
//! Penalties are stored as positive magnitudes; every utility expression
//! carries its own minus sign.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which decision accrues utility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Spectrum sensing: reward for using a sub-band declared empty.
    #[serde(rename = "SS")]
    SpectrumSensing,
    /// RADAR-like: reward for acting on a resource declared busy.
    #[serde(rename = "R")]
    Radar,
}

impl Mode {
    /// Decision applied to a resource that is never sensed (the null action).
    pub fn unsensed_decision(self) -> bool {
        match self {
            Mode::SpectrumSensing => true,
            Mode::Radar => false,
        }
    }

    /// Prior bound that forces every resource to be sensed before use.
    ///
    /// SS requires `prior_empty < bound`, R requires `prior_empty > bound`.
    pub fn prior_bound(self, reward: f64, penalty: f64) -> f64 {
        match self {
            Mode::SpectrumSensing => penalty / (penalty + reward),
            Mode::Radar => reward / (penalty + reward),
        }
    }

    fn admits(self, prior: f64, bound: f64) -> bool {
        match self {
            Mode::SpectrumSensing => prior < bound,
            Mode::Radar => prior > bound,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::SpectrumSensing => f.write_str("SS"),
            Mode::Radar => f.write_str("R"),
        }
    }
}

/// Parameters of a single sub-band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    /// Prior probability that the resource is empty.
    pub prior_empty: f64,
    /// Reward per exploitation slot for a correct actionable decision.
    pub reward: f64,
    /// Penalty magnitude per slot for a wrong actionable decision.
    pub penalty: f64,
    /// Average noise power.
    pub noise_power: f64,
}

impl Resource {
    pub fn new(prior_empty: f64, reward: f64, penalty: f64, noise_power: f64) -> Self {
        Resource {
            prior_empty,
            reward,
            penalty,
            noise_power,
        }
    }

    pub fn prior_busy(&self) -> f64 {
        1.0 - self.prior_empty
    }
}

/// Unvalidated ensemble parameters, e.g. as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawEnsemble {
    pub prior_empty: Vec<f64>,
    pub reward: Vec<f64>,
    pub penalty: Vec<f64>,
    pub noise_power: Vec<f64>,
    pub phi_min: f64,
    pub mode: Mode,
    pub horizon: usize,
}

/// A validated set of resources sharing one horizon, SNR floor and mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceEnsemble {
    resources: Vec<Resource>,
    phi_min: f64,
    mode: Mode,
    horizon: usize,
}

fn check_positive(index: usize, field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive {
            index,
            field,
            value,
        })
    }
}

impl ResourceEnsemble {
    pub fn new(resources: Vec<Resource>, phi_min: f64, mode: Mode, horizon: usize) -> Result<Self> {
        if resources.is_empty() {
            return Err(Error::EmptyEnsemble);
        }
        if !(phi_min.is_finite() && phi_min > 0.0) {
            return Err(Error::PhiMin(phi_min));
        }
        if horizon < 2 {
            return Err(Error::HorizonTooShort(horizon));
        }
        for (index, res) in resources.iter().enumerate() {
            let w = res.prior_empty;
            if !(w > 0.0 && w < 1.0) {
                return Err(Error::PriorOutOfRange { index, value: w });
            }
            check_positive(index, "reward", res.reward)?;
            check_positive(index, "penalty", res.penalty)?;
            check_positive(index, "noise_power", res.noise_power)?;
            let bound = mode.prior_bound(res.reward, res.penalty);
            if !mode.admits(w, bound) {
                return Err(Error::SensingBound {
                    index,
                    prior: w,
                    bound,
                    mode,
                });
            }
        }
        Ok(ResourceEnsemble {
            resources,
            phi_min,
            mode,
            horizon,
        })
    }

    /// Ensemble of `n` identical resources.
    pub fn uniform(
        n: usize,
        resource: Resource,
        phi_min: f64,
        mode: Mode,
        horizon: usize,
    ) -> Result<Self> {
        Self::new(vec![resource; n], phi_min, mode, horizon)
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn resource(&self, index: usize) -> &Resource {
        &self.resources[index]
    }

    pub fn phi_min(&self) -> f64 {
        self.phi_min
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Same resources with a different horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        if horizon < 2 {
            return Err(Error::HorizonTooShort(horizon));
        }
        Ok(ResourceEnsemble {
            horizon,
            ..self.clone()
        })
    }

    /// Checks that `members` is a non-empty set of distinct, in-range indices.
    pub fn check_members(&self, members: &[usize]) -> Result<()> {
        if members.is_empty() {
            return Err(Error::InvalidMembers(members.to_vec()));
        }
        for (pos, &m) in members.iter().enumerate() {
            if m >= self.len() {
                return Err(Error::IndexOutOfBounds {
                    index: m,
                    n: self.len(),
                });
            }
            if members[..pos].contains(&m) {
                return Err(Error::InvalidMembers(members.to_vec()));
            }
        }
        Ok(())
    }

    /// Mean of the test statistic when every member is empty.
    pub fn noise_sum(&self, members: &[usize]) -> f64 {
        members.iter().map(|&i| self.resources[i].noise_power).sum()
    }
}

impl TryFrom<RawEnsemble> for ResourceEnsemble {
    type Error = Error;

    fn try_from(raw: RawEnsemble) -> Result<Self> {
        validate_ensemble(raw)
    }
}

/// Validates raw per-resource vectors into an ensemble.
pub fn validate_ensemble(raw: RawEnsemble) -> Result<ResourceEnsemble> {
    let n = raw.prior_empty.len();
    for (field, len) in [
        ("reward", raw.reward.len()),
        ("penalty", raw.penalty.len()),
        ("noise_power", raw.noise_power.len()),
    ] {
        if len != n {
            return Err(Error::LengthMismatch {
                field,
                found: len,
                expected: n,
            });
        }
    }
    let resources = (0..n)
        .map(|i| {
            Resource::new(
                raw.prior_empty[i],
                raw.reward[i],
                raw.penalty[i],
                raw.noise_power[i],
            )
        })
        .collect();
    ResourceEnsemble::new(resources, raw.phi_min, raw.mode, raw.horizon)
}

/// Realized occupancy and received powers for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    occupied: Vec<bool>,
    signal_power: Vec<f64>,
}

impl GroundTruth {
    pub fn new(occupied: Vec<bool>, signal_power: Vec<f64>, phi_min: f64) -> Result<Self> {
        if occupied.len() != signal_power.len() {
            return Err(Error::LengthMismatch {
                field: "signal_power",
                found: signal_power.len(),
                expected: occupied.len(),
            });
        }
        for (index, (&s, &p)) in occupied.iter().zip(&signal_power).enumerate() {
            if s {
                if !(p.is_finite() && p >= phi_min) {
                    return Err(Error::SignalBelowFloor {
                        index,
                        power: p,
                        phi_min,
                    });
                }
            } else if p != 0.0 {
                return Err(Error::SignalOnEmpty { index, power: p });
            }
        }
        Ok(GroundTruth {
            occupied,
            signal_power,
        })
    }

    /// Every resource empty.
    pub fn all_empty(n: usize) -> Self {
        GroundTruth {
            occupied: vec![false; n],
            signal_power: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn occupied(&self) -> &[bool] {
        &self.occupied
    }

    pub fn signal_power(&self) -> &[f64] {
        &self.signal_power
    }

    pub fn is_busy(&self, i: usize) -> bool {
        self.occupied[i]
    }
}

/// One scheduled measurement: binary mixing of `members`, its GLRT threshold,
/// and the design error probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCycle {
    pub members: Vec<usize>,
    /// Likelihood-ratio threshold.
    pub threshold: f64,
    /// False-alarm probability of the group test.
    pub alpha: f64,
    /// Missed-detection upper bound (evaluated at the SNR floor).
    pub beta_max: f64,
    /// Expected utility per exploitation slot.
    pub unit_utility: f64,
    /// Mean of the statistic under "all empty".
    pub theta0: f64,
    /// Smallest mean under "at least one busy".
    pub theta_min: f64,
}

impl TestCycle {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }
}

/// A collection of tests with its expected utility.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SensingPlan {
    pub cycles: Vec<TestCycle>,
    pub expected_utility: f64,
}

impl SensingPlan {
    pub fn empty() -> Self {
        SensingPlan::default()
    }

    /// Number of tests (sensing slots).
    pub fn kappa(&self) -> usize {
        self.cycles.len()
    }

    /// Largest cycle size, 1 for an empty plan.
    pub fn largest_cycle(&self) -> usize {
        self.cycles.iter().map(TestCycle::len).max().unwrap_or(1)
    }

    /// True when no resource appears in two cycles.
    pub fn is_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.cycles
            .iter()
            .flat_map(|c| c.members.iter())
            .all(|&m| seen.insert(m))
    }

    /// Resources covered by at least one test, in plan order.
    pub fn sensed(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for m in self.cycles.iter().flat_map(|c| c.members.iter()) {
            if !out.contains(m) {
                out.push(*m);
            }
        }
        out
    }
}

/// Outcome of one Monte-Carlo trial for one policy.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrialRecord {
    pub observations: Vec<f64>,
    pub test_positive: Vec<bool>,
    pub decision: Vec<bool>,
    pub realized_utility: f64,
    /// Planner's closed-form expected utility, 0 for static baselines.
    pub expected_utility: f64,
    pub kappa: usize,
    pub errors: ErrorCounts,
}

/// Decision error tallies over sensed resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErrorCounts {
    pub sensed_empty: u64,
    pub false_alarms: u64,
    pub sensed_busy: u64,
    pub misses: u64,
}

impl ErrorCounts {
    pub fn tally(decision: &[bool], truth: &GroundTruth, sensed: &[usize]) -> Self {
        let mut c = ErrorCounts::default();
        for &i in sensed {
            if truth.is_busy(i) {
                c.sensed_busy += 1;
                c.misses += u64::from(!decision[i]);
            } else {
                c.sensed_empty += 1;
                c.false_alarms += u64::from(decision[i]);
            }
        }
        c
    }

    pub fn merge(&mut self, other: &ErrorCounts) {
        self.sensed_empty += other.sensed_empty;
        self.false_alarms += other.false_alarms;
        self.sensed_busy += other.sensed_busy;
        self.misses += other.misses;
    }

    pub fn false_alarm_rate(&self) -> f64 {
        ratio(self.false_alarms, self.sensed_empty)
    }

    pub fn miss_rate(&self) -> f64 {
        ratio(self.misses, self.sensed_busy)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-slot realized utility of a decision vector against the truth.
pub fn slot_utility(decision: &[bool], truth: &GroundTruth, ensemble: &ResourceEnsemble) -> f64 {
    let mode = ensemble.mode();
    ensemble
        .resources()
        .iter()
        .zip(decision)
        .zip(truth.occupied())
        .map(|((res, &busy_declared), &busy)| match mode {
            Mode::SpectrumSensing if !busy_declared => {
                if busy {
                    -res.penalty
                } else {
                    res.reward
                }
            }
            Mode::Radar if busy_declared => {
                if busy {
                    res.reward
                } else {
                    -res.penalty
                }
            }
            _ => 0.0,
        })
        .sum()
}

/// `(K - kappa)` times the per-slot realized utility.
pub fn realized_utility(
    decision: &[bool],
    truth: &GroundTruth,
    ensemble: &ResourceEnsemble,
    kappa: usize,
) -> f64 {
    let slots = ensemble.horizon().saturating_sub(kappa) as f64;
    slots * slot_utility(decision, truth, ensemble)
}

/// Mean of the energy statistic for a binary-mixing test over `members`.
pub fn theta_of(
    members: &[usize],
    truth: &GroundTruth,
    ensemble: &ResourceEnsemble,
) -> Result<f64> {
    let n = ensemble.len();
    let mut theta = 0.0;
    for &i in members {
        if i >= n || i >= truth.len() {
            return Err(Error::IndexOutOfBounds { index: i, n });
        }
        let signal = if truth.is_busy(i) {
            truth.signal_power()[i]
        } else {
            0.0
        };
        theta += signal + ensemble.resource(i).noise_power;
    }
    Ok(theta)
}

/// Draws `y ~ Exp` with mean `theta`.
pub fn sample_observation<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> Result<f64> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::NonPositiveTheta(theta));
    }
    let e: f64 = Exp1.sample(rng);
    Ok(theta * e)
}

/// Sample mean of `samples` independent `Exp(theta)` draws.
///
/// The mean of `P` such draws is `Gamma(P, theta / P)`, which is sampled
/// directly instead of drawing `P` exponentials.
pub fn sample_mean_observation<R: Rng + ?Sized>(
    theta: f64,
    samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if samples <= 1 {
        return sample_observation(theta, rng);
    }
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::NonPositiveTheta(theta));
    }
    let p = samples as f64;
    let gamma = Gamma::new(p, theta / p).map_err(|e| Error::Config(e.to_string()))?;
    Ok(gamma.sample(rng))
}
