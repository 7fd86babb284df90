//! Group Testing: tests that mix up to `L` sub-bands with binary coefficients.
//!
//! A group test decides between "every member empty" (mean `theta0`, the sum
//! of member noise powers) and "at least one member busy" (mean at least
//! `theta_min = theta0 + phi_min`). All members share the test outcome.
//!
//! Unit utility of a cycle `C` groups the `2^|C|` joint states into the
//! all-empty state and the rest, with the missed-detection bound applied to
//! every non-empty state. With `P0 = prod(w_i)`:
//!
//! ```text
//! SS:  u = P0 * sum(r) * (1 - alpha) + beta * (E_ss - P0 * sum(r))
//!      E_ss = sum(w_i r_i - (1 - w_i) |rho_i|)
//!      gamma = P0 sum(r) / (P0 sum(r) - E_ss)
//!
//! R:   u = -alpha * P0 * sum(|rho|) + (1 - beta) * D
//!      D = sum((1 - w_i) r_i - w_i |rho_i|) + P0 * sum(|rho|)
//!      gamma = P0 sum(|rho|) / D    (no positive test if D <= 0)
//! ```
//!
//! For one member both reduce to the DI quantities.

use std::cmp::Ordering;

use crate::di;
use crate::error::{Error, Result};
use crate::model::{Mode, ResourceEnsemble, SensingPlan, TestCycle};
use crate::par;

/// Largest cycle size the planner accepts without the uncapped entry point.
pub const DEFAULT_MAX_CYCLE_SIZE: usize = 4;

/// A possible test with its optimized threshold and design error rates.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleCandidate {
    pub members: Vec<usize>,
    pub theta0: f64,
    pub theta_min: f64,
    pub ratio: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub beta_max: f64,
    pub unit_utility: f64,
}

impl CycleCandidate {
    pub fn to_test_cycle(&self) -> TestCycle {
        TestCycle {
            members: self.members.clone(),
            threshold: self.gamma,
            alpha: self.alpha,
            beta_max: self.beta_max,
            unit_utility: self.unit_utility,
            theta0: self.theta0,
            theta_min: self.theta_min,
        }
    }
}

/// Penalty weight for overlapping cycles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    pub weight: f64,
}

impl PenaltyConfig {
    /// `K * max_u * (1 + 1e-6)`, just above the bound that makes the
    /// penalized and constrained problems share their maximizers.
    pub fn for_utilities(horizon: usize, max_unit_utility: f64) -> Self {
        PenaltyConfig {
            weight: horizon as f64 * max_unit_utility * (1.0 + 1e-6),
        }
    }
}

/// Excess cycle degree: `max(n - 1, 0)`.
pub fn upsilon(degree: usize) -> f64 {
    degree.saturating_sub(1) as f64
}

/// False alarm and missed-detection bound of a group GLRT with threshold
/// `gamma` and `ratio = theta_min / theta0`.
pub fn group_error_probs(ratio: f64, gamma: f64) -> Result<(f64, f64)> {
    if !(ratio > 1.0) {
        return Err(Error::RatioNotAboveOne(ratio));
    }
    if !(gamma > 0.0) {
        return Err(Error::NonPositiveGamma(gamma));
    }
    if gamma.is_infinite() {
        return Ok((0.0, 1.0));
    }
    let scaled = gamma * ratio;
    if scaled <= 1.0 {
        return Ok((1.0, 0.0));
    }
    let alpha = scaled.powf(-ratio / (ratio - 1.0)).clamp(0.0, 1.0);
    let beta_max = (1.0 - alpha.powf(1.0 / ratio)).clamp(0.0, 1.0);
    Ok((alpha, beta_max))
}

struct CycleAggregates {
    p_all_empty: f64,
    reward_sum: f64,
    penalty_sum: f64,
    // sum of per-resource expected values under the mode's action
    expected_action_value: f64,
}

fn aggregates(members: &[usize], ensemble: &ResourceEnsemble) -> CycleAggregates {
    let mut agg = CycleAggregates {
        p_all_empty: 1.0,
        reward_sum: 0.0,
        penalty_sum: 0.0,
        expected_action_value: 0.0,
    };
    for &i in members {
        let res = ensemble.resource(i);
        let w = res.prior_empty;
        agg.p_all_empty *= w;
        agg.reward_sum += res.reward;
        agg.penalty_sum += res.penalty;
        agg.expected_action_value += match ensemble.mode() {
            Mode::SpectrumSensing => w * res.reward - (1.0 - w) * res.penalty,
            Mode::Radar => (1.0 - w) * res.reward - w * res.penalty,
        };
    }
    agg
}

/// Optimized likelihood-ratio threshold of a test over `members`.
///
/// Single-member tests use the DI threshold. In R mode the threshold is
/// `+inf` when no positive outcome can pay off.
pub fn cycle_threshold(members: &[usize], ensemble: &ResourceEnsemble) -> f64 {
    if members.len() == 1 {
        return di::di_threshold(members[0], ensemble);
    }
    let agg = aggregates(members, ensemble);
    match ensemble.mode() {
        Mode::SpectrumSensing => {
            let num = agg.p_all_empty * agg.reward_sum;
            let den = num - agg.expected_action_value;
            debug_assert!(den > 0.0, "sensing bound guarantees a positive denominator");
            num / den
        }
        Mode::Radar => {
            let num = agg.p_all_empty * agg.penalty_sum;
            let den = agg.expected_action_value + num;
            if den > 0.0 {
                num / den
            } else {
                f64::INFINITY
            }
        }
    }
}

/// `(theta0, theta_min)` for binary mixing of `members`.
pub fn cycle_means(members: &[usize], ensemble: &ResourceEnsemble) -> (f64, f64) {
    let theta0 = ensemble.noise_sum(members);
    (theta0, theta0 + ensemble.phi_min())
}

/// Unit utility at an arbitrary threshold, without flooring.
pub fn cycle_utility_at(members: &[usize], ensemble: &ResourceEnsemble, gamma: f64) -> f64 {
    let (theta0, theta_min) = cycle_means(members, ensemble);
    let (alpha, beta) = match group_error_probs(theta_min / theta0, gamma) {
        Ok(p) => p,
        Err(_) => return 0.0,
    };
    utility_from_probs(members, ensemble, alpha, beta)
}

fn utility_from_probs(
    members: &[usize],
    ensemble: &ResourceEnsemble,
    alpha: f64,
    beta: f64,
) -> f64 {
    let agg = aggregates(members, ensemble);
    match ensemble.mode() {
        Mode::SpectrumSensing => {
            let all_empty_value = agg.p_all_empty * agg.reward_sum;
            all_empty_value * (1.0 - alpha) + beta * (agg.expected_action_value - all_empty_value)
        }
        Mode::Radar => {
            let false_alarm_cost = agg.p_all_empty * agg.penalty_sum;
            -alpha * false_alarm_cost
                + (1.0 - beta) * (agg.expected_action_value + false_alarm_cost)
        }
    }
}

/// Builds the candidate for `members` with its optimized threshold.
pub fn candidate(members: &[usize], ensemble: &ResourceEnsemble) -> CycleCandidate {
    if let [i] = members {
        let c = di::di_cycle(*i, ensemble);
        return CycleCandidate {
            members: c.members,
            theta0: c.theta0,
            theta_min: c.theta_min,
            ratio: c.theta_min / c.theta0,
            gamma: c.threshold,
            alpha: c.alpha,
            beta_max: c.beta_max,
            unit_utility: c.unit_utility,
        };
    }
    let (theta0, theta_min) = cycle_means(members, ensemble);
    let ratio = theta_min / theta0;
    let gamma = cycle_threshold(members, ensemble);
    let (alpha, beta_max) = group_error_probs(ratio, gamma).unwrap_or((1.0, 0.0));
    let unit_utility = utility_from_probs(members, ensemble, alpha, beta_max).max(0.0);
    CycleCandidate {
        members: members.to_vec(),
        theta0,
        theta_min,
        ratio,
        gamma,
        alpha,
        beta_max,
        unit_utility,
    }
}

/// Expected per-slot utility of the test over `members` (never negative).
pub fn cycle_unit_utility(members: &[usize], ensemble: &ResourceEnsemble) -> f64 {
    candidate(members, ensemble).unit_utility
}

/// All index sets of size `1..=max_size`, sizes ascending, each in
/// lexicographic order.
pub fn enumerate_member_sets(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=max_size.min(n) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            out.push(combo.clone());
            // advance to the next combination
            let mut pos = size;
            while pos > 0 && combo[pos - 1] == n - size + pos - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            combo[pos - 1] += 1;
            for j in pos..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    out
}

/// Every candidate cycle of size at most `max_size`, evaluated in parallel.
pub fn enumerate_candidates(ensemble: &ResourceEnsemble, max_size: usize) -> Vec<CycleCandidate> {
    let sets = enumerate_member_sets(ensemble.len(), max_size);
    par::map_slice(&sets, |m| candidate(m, ensemble))
}

fn candidate_order(a: &CycleCandidate, b: &CycleCandidate) -> Ordering {
    b.unit_utility
        .partial_cmp(&a.unit_utility)
        .unwrap_or(Ordering::Equal)
        .then(a.members.len().cmp(&b.members.len()))
        .then_with(|| a.members.cmp(&b.members))
}

/// Greedy maximization over disjoint cycles of size at most `max_size`.
///
/// Sizes above [`DEFAULT_MAX_CYCLE_SIZE`] are refused; see
/// [`greedy_plan_uncapped`].
pub fn greedy_plan(ensemble: &ResourceEnsemble, max_size: usize) -> Result<SensingPlan> {
    if max_size > DEFAULT_MAX_CYCLE_SIZE {
        return Err(Error::CycleSizeCap {
            requested: max_size,
            cap: DEFAULT_MAX_CYCLE_SIZE,
        });
    }
    greedy_plan_uncapped(ensemble, max_size)
}

pub fn greedy_plan_uncapped(ensemble: &ResourceEnsemble, max_size: usize) -> Result<SensingPlan> {
    if max_size == 0 {
        return Err(Error::ZeroCycleSize);
    }
    let mut candidates = enumerate_candidates(ensemble, max_size);
    candidates.retain(|c| c.unit_utility > 0.0);
    candidates.sort_by(candidate_order);
    Ok(greedy_from_sorted(
        &candidates,
        ensemble.len(),
        ensemble.horizon(),
    ))
}

/// Runs the greedy loop over candidates already sorted best-first.
pub fn greedy_from_sorted(
    sorted: &[CycleCandidate],
    n_resources: usize,
    horizon: usize,
) -> SensingPlan {
    let k = horizon as f64;
    let mut used = vec![false; n_resources];
    let mut cycles = Vec::new();
    let mut sum = 0.0;
    for cand in sorted {
        if cand.members.iter().any(|&m| used[m]) {
            continue;
        }
        // the first disjoint candidate carries the largest marginal; once it
        // fails, every remaining one fails too
        let marginal = (k - cycles.len() as f64 - 1.0) * cand.unit_utility - sum;
        if marginal <= 0.0 {
            break;
        }
        for &m in &cand.members {
            used[m] = true;
        }
        sum += cand.unit_utility;
        cycles.push(cand.to_test_cycle());
    }
    let expected_utility = (k - cycles.len() as f64) * sum;
    SensingPlan {
        cycles,
        expected_utility,
    }
}

/// `(K - kappa) * sum(u_C)` for a plan.
pub fn plan_expected_utility(cycles: &[TestCycle], horizon: usize) -> Result<f64> {
    if !cycles.is_empty() && cycles.len() >= horizon {
        return Err(Error::PlanExceedsHorizon {
            kappa: cycles.len(),
            horizon,
        });
    }
    let sum: f64 = cycles.iter().map(|c| c.unit_utility).sum();
    Ok((horizon as f64 - cycles.len() as f64) * sum)
}

/// Penalized objective over a possibly overlapping cycle collection:
/// `(K - |C|) * sum(u_C) - M * sum_i upsilon(deg(i))`.
pub fn penalized_objective(
    cycles: &[TestCycle],
    n_resources: usize,
    horizon: usize,
    penalty: PenaltyConfig,
) -> f64 {
    let mut degree = vec![0usize; n_resources];
    for c in cycles {
        for &m in &c.members {
            degree[m] += 1;
        }
    }
    let sum: f64 = cycles.iter().map(|c| c.unit_utility).sum();
    let excess: f64 = degree.iter().map(|&d| upsilon(d)).sum();
    (horizon as f64 - cycles.len() as f64) * sum - penalty.weight * excess
}

/// Constant-factor guarantee of the greedy plan, with `l_eff` the largest
/// cycle size it returned.
pub fn approximation_factor(l_eff: usize, horizon: usize) -> f64 {
    let k = horizon as f64;
    let m = (l_eff.max(1) as f64).min(k / 2.0);
    (1.0 / m) * (k - 1.0) / (k - m)
}
