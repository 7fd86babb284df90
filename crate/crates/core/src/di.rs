//! Direct Inspection: one sub-band per test.
//!
//! Each resource gets an energy-detector GLRT with the Bayes threshold
//! `gamma_i`; its unit utility is evaluated with the missed-detection bound at
//! the SNR floor. The plan is the best prefix of resources sorted by unit
//! utility, stopped as soon as the marginal gain turns non-positive.

use std::cmp::Ordering;

use crate::model::{Mode, ResourceEnsemble, SensingPlan, TestCycle};

/// Per-resource DI quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiAssessment {
    pub alpha: Vec<f64>,
    pub beta_max: Vec<f64>,
    pub unit_utility: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// Bayes threshold of the single-resource test.
pub fn di_threshold(i: usize, ensemble: &ResourceEnsemble) -> f64 {
    let res = ensemble.resource(i);
    let w = res.prior_empty;
    match ensemble.mode() {
        Mode::SpectrumSensing => res.reward * w / (res.penalty * (1.0 - w)),
        Mode::Radar => res.penalty * w / (res.reward * (1.0 - w)),
    }
}

/// `(alpha, beta_max)` of the DI test on resource `i`.
pub fn di_error_probs(i: usize, ensemble: &ResourceEnsemble) -> (f64, f64) {
    let res = ensemble.resource(i);
    let snr = ensemble.phi_min() / res.noise_power;
    let inner = 1.0 / (di_threshold(i, ensemble) * (1.0 + snr));
    if inner >= 1.0 {
        return (1.0, 0.0);
    }
    let alpha = inner.powf((1.0 + snr) / snr).min(1.0);
    let beta_max = (1.0 - inner.powf(1.0 / snr)).clamp(0.0, 1.0);
    (alpha, beta_max)
}

/// Unit utility from given error probabilities, not floored.
pub fn di_utility_from(i: usize, ensemble: &ResourceEnsemble, alpha: f64, beta: f64) -> f64 {
    let res = ensemble.resource(i);
    let w = res.prior_empty;
    match ensemble.mode() {
        Mode::SpectrumSensing => w * res.reward * (1.0 - alpha) - (1.0 - w) * res.penalty * beta,
        Mode::Radar => (1.0 - w) * res.reward * (1.0 - beta) - w * res.penalty * alpha,
    }
}

/// Expected per-slot utility of sensing resource `i` alone (never negative).
pub fn di_unit_utility(i: usize, ensemble: &ResourceEnsemble) -> f64 {
    let (alpha, beta) = di_error_probs(i, ensemble);
    di_utility_from(i, ensemble, alpha, beta).max(0.0)
}

/// The DI test as a plan entry.
pub fn di_cycle(i: usize, ensemble: &ResourceEnsemble) -> TestCycle {
    let (alpha, beta_max) = di_error_probs(i, ensemble);
    let noise = ensemble.resource(i).noise_power;
    TestCycle {
        members: vec![i],
        threshold: di_threshold(i, ensemble),
        alpha,
        beta_max,
        unit_utility: di_utility_from(i, ensemble, alpha, beta_max).max(0.0),
        theta0: noise,
        theta_min: noise + ensemble.phi_min(),
    }
}

pub fn assess(ensemble: &ResourceEnsemble) -> DiAssessment {
    let n = ensemble.len();
    let mut out = DiAssessment {
        alpha: Vec::with_capacity(n),
        beta_max: Vec::with_capacity(n),
        unit_utility: Vec::with_capacity(n),
        gamma: Vec::with_capacity(n),
    };
    for i in 0..n {
        let (a, b) = di_error_probs(i, ensemble);
        out.alpha.push(a);
        out.beta_max.push(b);
        out.unit_utility
            .push(di_utility_from(i, ensemble, a, b).max(0.0));
        out.gamma.push(di_threshold(i, ensemble));
    }
    out
}

/// Resource indices sorted by unit utility, descending; ties by lower index.
pub fn utility_order(units: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..units.len()).collect();
    order.sort_by(|&a, &b| {
        units[b]
            .partial_cmp(&units[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Optimal DI plan for the ensemble's horizon.
pub fn di_plan(ensemble: &ResourceEnsemble) -> SensingPlan {
    let k = ensemble.horizon() as f64;
    let cycles: Vec<TestCycle> = (0..ensemble.len()).map(|i| di_cycle(i, ensemble)).collect();
    let units: Vec<f64> = cycles.iter().map(|c| c.unit_utility).collect();
    let order = utility_order(&units);

    let mut chosen = Vec::new();
    let mut sum = 0.0;
    for &idx in &order {
        let taken = chosen.len() as f64;
        // gain of extending the prefix of size `taken` by one more resource
        let marginal = (k - taken - 1.0) * units[idx] - sum;
        if marginal <= 0.0 {
            break;
        }
        sum += units[idx];
        chosen.push(idx);
    }
    let expected_utility = (k - chosen.len() as f64) * sum;
    SensingPlan {
        cycles: chosen.into_iter().map(|i| cycles[i].clone()).collect(),
        expected_utility,
    }
}
