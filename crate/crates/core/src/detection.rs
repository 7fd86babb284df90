//! Runtime decisions: the per-test GLRT, majority voting over the tests a
//! resource takes part in, Poisson-Binomial error analysis of that vote, and
//! an exact posterior used as the MAP benchmark.

use crate::error::{Error, Result};
use crate::model::{Mode, ResourceEnsemble, TestCycle};

/// Log generalized likelihood ratio `max_{theta >= theta_min} f_theta(y) / f_theta0(y)`.
pub fn log_glrt(y: f64, theta0: f64, theta_min: f64) -> f64 {
    let y = y.max(0.0);
    if y <= theta_min {
        (theta0 / theta_min).ln() + y * (1.0 / theta0 - 1.0 / theta_min)
    } else {
        (theta0 / y).ln() + y / theta0 - 1.0
    }
}

/// `true` (declare "at least one busy") iff the GLRT reaches the threshold.
pub fn glrt_decide(y: f64, cycle: &TestCycle) -> bool {
    log_glrt(y, cycle.theta0, cycle.theta_min) >= cycle.threshold.ln()
}

/// Majority vote; even splits resolve to busy.
pub fn majority_decision(outcomes: &[bool]) -> bool {
    let positives = outcomes.iter().filter(|&&o| o).count();
    positives >= outcomes.len().div_ceil(2) && !outcomes.is_empty()
}

/// Success probabilities of independent, non-identical Bernoulli trials.
#[derive(Debug, Clone, PartialEq)]
pub struct PbdParams {
    probs: Vec<f64>,
}

impl PbdParams {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some(&p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::ProbabilityOutOfRange(p));
        }
        Ok(PbdParams { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Probability mass over success counts `0..=n`.
    pub fn pmf(&self) -> Vec<f64> {
        let mut mass = vec![0.0; self.probs.len() + 1];
        mass[0] = 1.0;
        for (j, &p) in self.probs.iter().enumerate() {
            for count in (1..=j + 1).rev() {
                mass[count] = mass[count] * (1.0 - p) + mass[count - 1] * p;
            }
            mass[0] *= 1.0 - p;
        }
        mass
    }
}

/// `P(X <= k)` for a Poisson-Binomial `X`.
pub fn pbd_cdf(k: usize, params: &PbdParams) -> Result<f64> {
    if k > params.len() {
        return Err(Error::PbdIndex { k, n: params.len() });
    }
    if k == params.len() {
        return Ok(1.0);
    }
    let mass = params.pmf();
    Ok(mass[..=k].iter().sum::<f64>().min(1.0))
}

/// Rejects sensing structures where two tests share two or more resources.
pub fn check_no_shared_pairs(tests: &[TestCycle]) -> Result<()> {
    for (a, first) in tests.iter().enumerate() {
        for (b, second) in tests.iter().enumerate().skip(a + 1) {
            let shared = first
                .members
                .iter()
                .filter(|m| second.members.contains(m))
                .count();
            if shared > 1 {
                return Err(Error::SharedPair {
                    first: a,
                    second: b,
                });
            }
        }
    }
    Ok(())
}

/// Probability that one test containing `i` is positive when `s_i = 0`
/// (`pi0`) and when `s_i = 1` (`pi1`), using the missed-detection bound.
pub fn positive_probs(test: &TestCycle, i: usize, ensemble: &ResourceEnsemble) -> (f64, f64) {
    let others_empty: f64 = test
        .members
        .iter()
        .filter(|&&j| j != i)
        .map(|&j| ensemble.resource(j).prior_empty)
        .product();
    let pi0 = (1.0 - others_empty) * (1.0 - test.beta_max) + test.alpha * others_empty;
    let pi1 = 1.0 - test.beta_max;
    (pi0, pi1)
}

/// Per-resource `(alpha_i, beta_i)` of the majority rule over the tests
/// containing `i`.
pub fn resource_error_probs_gt(
    tests: &[TestCycle],
    i: usize,
    ensemble: &ResourceEnsemble,
) -> Result<(f64, f64)> {
    check_no_shared_pairs(tests)?;
    let (pi0, pi1): (Vec<f64>, Vec<f64>) = tests
        .iter()
        .filter(|t| t.contains(i))
        .map(|t| positive_probs(t, i, ensemble))
        .unzip();
    if pi0.is_empty() {
        return Err(Error::NotCovered(i));
    }
    let cut = pi0.len().div_ceil(2) - 1;
    let alpha = 1.0 - pbd_cdf(cut, &PbdParams::new(pi0)?)?;
    let beta = pbd_cdf(cut, &PbdParams::new(pi1)?)?;
    Ok((alpha, beta))
}

/// Signal power assumed for a busy member when evaluating the posterior.
#[derive(Debug, Clone, Copy)]
pub enum PowerModel<'a> {
    /// Every busy member at the SNR floor.
    Floor,
    /// Per-resource power when busy, indexed by resource (the genie-aided
    /// benchmark).
    Known(&'a [f64]),
}

/// Largest cycle for posterior enumeration.
pub const MAX_POSTERIOR_MEMBERS: usize = 16;

/// Posterior over the `2^m` joint member states (bit `j` set = member `j`
/// busy) given one observation `y`.
pub fn posterior_states(
    y: f64,
    prior_empty: &[f64],
    noise: &[f64],
    power: &[f64],
) -> Result<Vec<f64>> {
    let m = prior_empty.len();
    if noise.len() != m || power.len() != m {
        return Err(Error::Dimension(
            "posterior inputs must have equal length".into(),
        ));
    }
    if m > MAX_POSTERIOR_MEMBERS {
        return Err(Error::OracleTooLarge(format!(
            "{m} members for posterior enumeration"
        )));
    }
    let y = y.max(0.0);
    let noise_sum: f64 = noise.iter().sum();
    let mut logw = Vec::with_capacity(1 << m);
    for state in 0u32..(1u32 << m) {
        let mut lw = 0.0;
        let mut theta = noise_sum;
        for j in 0..m {
            if state >> j & 1 == 1 {
                lw += (1.0 - prior_empty[j]).ln();
                theta += power[j];
            } else {
                lw += prior_empty[j].ln();
            }
        }
        lw += -theta.ln() - y / theta;
        logw.push(lw);
    }
    let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logw.iter().map(|&l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Posterior busy probabilities from raw priors, noise and assumed powers of
/// the members of one test.
pub fn posterior_marginals(
    y: f64,
    prior_empty: &[f64],
    noise: &[f64],
    power: &[f64],
) -> Result<Vec<f64>> {
    let states = posterior_states(y, prior_empty, noise, power)?;
    let mut marginals = vec![0.0; prior_empty.len()];
    for (state, p) in states.iter().enumerate() {
        for (j, mj) in marginals.iter_mut().enumerate() {
            if state >> j & 1 == 1 {
                *mj += p;
            }
        }
    }
    Ok(marginals)
}

/// `P(s_i = 1 | y)` for each member of `cycle`, in member order.
pub fn exact_group_posterior(
    y: f64,
    cycle: &TestCycle,
    ensemble: &ResourceEnsemble,
    power: PowerModel<'_>,
) -> Result<Vec<f64>> {
    let priors: Vec<f64> = cycle
        .members
        .iter()
        .map(|&i| ensemble.resource(i).prior_empty)
        .collect();
    let noise: Vec<f64> = cycle
        .members
        .iter()
        .map(|&i| ensemble.resource(i).noise_power)
        .collect();
    let powers: Vec<f64> = cycle
        .members
        .iter()
        .map(|&i| match power {
            PowerModel::Floor => ensemble.phi_min(),
            PowerModel::Known(p) => p[i].max(ensemble.phi_min()),
        })
        .collect();
    posterior_marginals(y, &priors, &noise, &powers)
}

/// Bayes decision on one resource from its posterior busy probability.
pub fn map_decision(p_busy: f64, i: usize, ensemble: &ResourceEnsemble) -> bool {
    let res = ensemble.resource(i);
    match ensemble.mode() {
        // use the band only if expected reward beats expected penalty
        Mode::SpectrumSensing => (1.0 - p_busy) * res.reward <= p_busy * res.penalty,
        Mode::Radar => p_busy * res.reward > (1.0 - p_busy) * res.penalty,
    }
}
