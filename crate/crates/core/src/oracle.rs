//! Brute-force references for planners, error analysis and thresholds.
//!
//! Every oracle refuses instances above its size guard instead of
//! truncating the search.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::di;
use crate::error::{Error, Result};
use crate::gt;
use crate::model::{Mode, ResourceEnsemble, SensingPlan, TestCycle};

pub const MAX_PLAN_RESOURCES: usize = 8;
pub const MAX_PLAN_CYCLE: usize = 3;
pub const MAX_DI_RESOURCES: usize = 12;
pub const MAX_PBD_TRIALS: usize = 12;
pub const MAX_PENALIZED_CANDIDATES: usize = 24;
pub const MAX_ENUMERATED_MEMBERS: usize = 16;

/// Exact optimum over disjoint cycle collections with cycles of size at
/// most `max_size`.
pub fn brute_force_plan(ensemble: &ResourceEnsemble, max_size: usize) -> Result<SensingPlan> {
    let n = ensemble.len();
    if n > MAX_PLAN_RESOURCES || max_size > MAX_PLAN_CYCLE {
        return Err(Error::OracleTooLarge(format!(
            "brute-force plan limited to N <= {MAX_PLAN_RESOURCES}, L <= {MAX_PLAN_CYCLE}; got N = {n}, L = {max_size}"
        )));
    }
    if max_size == 0 {
        return Err(Error::ZeroCycleSize);
    }
    let candidates: Vec<TestCycle> = gt::enumerate_member_sets(n, max_size)
        .iter()
        .map(|m| gt::candidate(m, ensemble).to_test_cycle())
        .collect();

    let mut search = PlanSearch {
        candidates: &candidates,
        horizon: ensemble.horizon(),
        chosen: Vec::new(),
        best: Vec::new(),
        best_value: 0.0,
    };
    search.descend(0, &mut vec![false; n]);
    let best = search.best.clone();
    let cycles: Vec<TestCycle> = best.iter().map(|&c| candidates[c].clone()).collect();
    Ok(SensingPlan {
        cycles,
        expected_utility: search.best_value,
    })
}

struct PlanSearch<'a> {
    candidates: &'a [TestCycle],
    horizon: usize,
    chosen: Vec<usize>,
    best: Vec<usize>,
    best_value: f64,
}

impl PlanSearch<'_> {
    // Assigns the lowest unassigned resource: left out, or the smallest
    // member of a new cycle.
    fn descend(&mut self, from: usize, used: &mut Vec<bool>) {
        let n = used.len();
        let next = (from..n).find(|&i| !used[i]);
        let Some(lead) = next else {
            self.score();
            return;
        };
        used[lead] = true;
        self.descend(lead + 1, used);
        if self.chosen.len() + 1 < self.horizon {
            for c in 0..self.candidates.len() {
                let members = &self.candidates[c].members;
                if members[0] != lead || members[1..].iter().any(|&m| used[m]) {
                    continue;
                }
                for &m in &members[1..] {
                    used[m] = true;
                }
                self.chosen.push(c);
                self.descend(lead + 1, used);
                self.chosen.pop();
                for &m in &members[1..] {
                    used[m] = false;
                }
            }
        }
        used[lead] = false;
    }

    fn score(&mut self) {
        let mut sum = 0.0;
        for &c in &self.chosen {
            sum += self.candidates[c].unit_utility;
        }
        let value = (self.horizon - self.chosen.len()) as f64 * sum;
        if value > self.best_value {
            self.best_value = value;
            self.best = self.chosen.clone();
        }
    }
}

/// Best DI subset by exhaustive search: `(members, utility)`.
///
/// Subset sums are accumulated in descending-utility order (ties by index),
/// so the optimum is bit-identical to a prefix sum in the same order.
pub fn exhaustive_di_optimum(ensemble: &ResourceEnsemble) -> Result<(Vec<usize>, f64)> {
    let n = ensemble.len();
    if n > MAX_DI_RESOURCES {
        return Err(Error::OracleTooLarge(format!(
            "exhaustive DI search limited to N <= {MAX_DI_RESOURCES}; got {n}"
        )));
    }
    let units: Vec<f64> = (0..n).map(|i| di::di_unit_utility(i, ensemble)).collect();
    let mut canonical: Vec<usize> = (0..n).collect();
    canonical.sort_by(|&a, &b| units[b].total_cmp(&units[a]).then(a.cmp(&b)));
    let k = ensemble.horizon();

    let mut best = (Vec::new(), 0.0);
    for mask in 1u32..(1u32 << n) {
        let size = mask.count_ones() as usize;
        if size >= k {
            continue;
        }
        let members: Vec<usize> = canonical
            .iter()
            .copied()
            .filter(|&i| mask & (1 << i) != 0)
            .collect();
        let mut sum = 0.0;
        for &i in &members {
            sum += units[i];
        }
        let value = (k - size) as f64 * sum;
        if value > best.1 {
            best = (members, value);
        }
    }
    Ok(best)
}

/// `P(X <= k)` for independent Bernoulli trials, summed over all `2^n`
/// outcome vectors.
pub fn pbd_enumerate(k: usize, probs: &[f64]) -> Result<f64> {
    let n = probs.len();
    if n > MAX_PBD_TRIALS {
        return Err(Error::OracleTooLarge(format!(
            "outcome enumeration limited to n <= {MAX_PBD_TRIALS}; got {n}"
        )));
    }
    let mut total = 0.0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let mut p = 1.0;
        for (j, &pj) in probs.iter().enumerate() {
            p *= if mask & (1 << j) != 0 { pj } else { 1.0 - pj };
        }
        total += p;
    }
    Ok(total)
}

/// Result of random diminishing-returns probes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub probes: usize,
    pub violations: usize,
    /// Largest `f(A+a+b) + f(A) - f(A+a) - f(A+b)` seen.
    pub worst_excess: f64,
    /// `(A, a, b)` of the worst violation.
    pub witness: Option<(Vec<usize>, usize, usize)>,
}

impl ProbeReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

pub const PROBE_TOLERANCE: f64 = 1e-9;

/// Checks `f(A+a) + f(A+b) >= f(A+a+b) + f(A)` on random `(A, a, b)` drawn
/// from `0..universe`, with `a != b` outside `A`.
pub fn submodularity_probe<F, R>(f: F, universe: usize, trials: usize, rng: &mut R) -> ProbeReport
where
    F: Fn(&[usize]) -> f64,
    R: Rng + ?Sized,
{
    let mut report = ProbeReport {
        probes: 0,
        violations: 0,
        worst_excess: f64::NEG_INFINITY,
        witness: None,
    };
    if universe < 2 {
        return report;
    }
    let mut items: Vec<usize> = (0..universe).collect();
    for _ in 0..trials {
        items.shuffle(rng);
        let (a, b) = (items[0], items[1]);
        let size = rng.random_range(0..=universe - 2);
        let mut base: Vec<usize> = items[2..2 + size].to_vec();
        base.sort_unstable();

        let with = |extra: &[usize]| {
            let mut s = base.clone();
            s.extend_from_slice(extra);
            s.sort_unstable();
            s
        };
        let excess = f(&with(&[a, b])) + f(&base) - f(&with(&[a])) - f(&with(&[b]));
        report.probes += 1;
        let scale = 1.0f64.max(f(&with(&[a, b])).abs()).max(f(&base).abs());
        if excess > PROBE_TOLERANCE * scale {
            report.violations += 1;
        }
        if excess > report.worst_excess {
            report.worst_excess = excess;
            if excess > PROBE_TOLERANCE * scale {
                report.witness = Some((base.clone(), a, b));
            }
        }
    }
    report
}

/// DI plan utility of an arbitrary resource subset.
pub fn di_set_utility(subset: &[usize], ensemble: &ResourceEnsemble) -> f64 {
    let sum: f64 = subset
        .iter()
        .map(|&i| di::di_unit_utility(i, ensemble))
        .sum();
    (ensemble.horizon() as f64 - subset.len() as f64) * sum
}

/// Log-spaced grid over `[1e-3, 1e3]` with `grid_size` points.
pub fn log_grid(grid_size: usize) -> Vec<f64> {
    let (lo, hi) = (-3.0f64, 3.0f64);
    if grid_size < 2 {
        return vec![1.0];
    }
    (0..grid_size)
        .map(|g| 10f64.powf(lo + (hi - lo) * g as f64 / (grid_size - 1) as f64))
        .collect()
}

/// Grid argmax of the cycle's unit utility over the threshold.
pub fn threshold_grid_opt(members: &[usize], ensemble: &ResourceEnsemble, grid_size: usize) -> f64 {
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for gamma in log_grid(grid_size) {
        let u = gt::cycle_utility_at(members, ensemble, gamma);
        if u > best.1 {
            best = (gamma, u);
        }
    }
    best.0
}

/// Penalized-objective maximizer over every subset of `candidates`:
/// `(selected indices, value)`.
pub fn penalized_maximizer(
    candidates: &[TestCycle],
    n_resources: usize,
    horizon: usize,
    penalty: gt::PenaltyConfig,
) -> Result<(Vec<usize>, f64)> {
    let m = candidates.len();
    if m > MAX_PENALIZED_CANDIDATES {
        return Err(Error::OracleTooLarge(format!(
            "penalized search limited to {MAX_PENALIZED_CANDIDATES} candidates; got {m}"
        )));
    }
    let mut best = (Vec::new(), 0.0);
    let mut degree = vec![0usize; n_resources];
    for mask in 1u64..(1u64 << m) {
        degree.iter_mut().for_each(|d| *d = 0);
        let mut sum = 0.0;
        let mut count = 0usize;
        for (c, cand) in candidates.iter().enumerate() {
            if mask & (1 << c) != 0 {
                count += 1;
                sum += cand.unit_utility;
                for &i in &cand.members {
                    degree[i] += 1;
                }
            }
        }
        let excess: usize = degree.iter().map(|&d| d.saturating_sub(1)).sum();
        let value = (horizon as f64 - count as f64) * sum - penalty.weight * excess as f64;
        if value > best.1 {
            best = ((0..m).filter(|&c| mask & (1 << c) != 0).collect(), value);
        }
    }
    Ok(best)
}

/// Unit utility of a group test by explicit enumeration of the `2^|C|`
/// occupancy states, with the missed-detection bound applied to every
/// non-empty state.
pub fn enumerated_cycle_utility(
    members: &[usize],
    ensemble: &ResourceEnsemble,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    let c = members.len();
    if c > MAX_ENUMERATED_MEMBERS {
        return Err(Error::OracleTooLarge(format!(
            "state enumeration over {c} members"
        )));
    }
    let mut total = 0.0;
    for state in 0u32..(1u32 << c) {
        let mut p = 1.0;
        let mut payoff_empty_decl = 0.0;
        let mut payoff_busy_decl = 0.0;
        for (j, &i) in members.iter().enumerate() {
            let res = ensemble.resource(i);
            let busy = state & (1 << j) != 0;
            p *= if busy {
                1.0 - res.prior_empty
            } else {
                res.prior_empty
            };
            match ensemble.mode() {
                // reward only from declaring empty
                Mode::SpectrumSensing => {
                    payoff_empty_decl += if busy { -res.penalty } else { res.reward }
                }
                // reward only from declaring busy
                Mode::Radar => payoff_busy_decl += if busy { res.reward } else { -res.penalty },
            }
        }
        let p_negative = if state == 0 { 1.0 - alpha } else { beta };
        total += p * (p_negative * payoff_empty_decl + (1.0 - p_negative) * payoff_busy_decl);
    }
    Ok(total)
}

/// Pairwise threshold and utility written with signed penalties
/// `rho = -|rho|`, SS mode: `(gamma_ij, u_ij)`.
pub fn pairwise_reference(i: usize, j: usize, ensemble: &ResourceEnsemble) -> (f64, f64) {
    let (a, b) = (ensemble.resource(i), ensemble.resource(j));
    let (wi, wj) = (a.prior_empty, b.prior_empty);
    let (ri, rj) = (a.reward, b.reward);
    let (rho_i, rho_j) = (-a.penalty, -b.penalty);

    let gamma = wi * wj * (ri + rj)
        / ((1.0 - wi) * (rho_i.abs() - wj * rj) + (1.0 - wj) * (rho_j.abs() - wi * ri));

    let theta0 = a.noise_power + b.noise_power;
    let ratio = (theta0 + ensemble.phi_min()) / theta0;
    let alpha = if gamma * ratio <= 1.0 {
        1.0
    } else {
        (1.0 / (gamma * ratio)).powf(ratio / (ratio - 1.0))
    };
    let beta = 1.0 - alpha.powf(1.0 / ratio);

    let u = wi * wj * (ri + rj) * (1.0 - alpha)
        + (wi * (1.0 - wj) * (ri + rho_j)
            + wj * (1.0 - wi) * (rj + rho_i)
            + (1.0 - wi) * (1.0 - wj) * (rho_i + rho_j))
            * beta;
    (gamma, u)
}
