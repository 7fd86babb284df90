#![allow(dead_code)]

use activesense::sim::config::{ExperimentConfig, PriorSpec, RewardSpec};
use activesense::{Mode, Resource, ResourceEnsemble};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random admissible resource: the prior sits strictly inside the mode's
/// sensing region.
pub fn random_resource<R: Rng + ?Sized>(rng: &mut R, mode: Mode) -> Resource {
    let reward = rng.random_range(0.5..5.0);
    let penalty = rng.random_range(0.5..20.0);
    let bound = mode.prior_bound(reward, penalty);
    let u: f64 = rng.random_range(0.02..0.98);
    let prior = match mode {
        Mode::SpectrumSensing => bound * u,
        Mode::Radar => bound + (1.0 - bound) * u,
    };
    Resource::new(prior, reward, penalty, rng.random_range(0.5..2.0))
}

pub fn random_ensemble<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    mode: Mode,
    horizon: usize,
) -> ResourceEnsemble {
    let resources = (0..n).map(|_| random_resource(rng, mode)).collect();
    let phi_min = 10f64.powf(rng.random_range(-0.3..1.5));
    ResourceEnsemble::new(resources, phi_min, mode, horizon).unwrap()
}

pub fn random_mode<R: Rng + ?Sized>(rng: &mut R) -> Mode {
    if rng.random::<bool>() {
        Mode::SpectrumSensing
    } else {
        Mode::Radar
    }
}

/// The two-resource example: w = 0.9, r = 1, |rho| = 19, n = 1, phi_min = 10.
pub fn pair_example(horizon: usize) -> ResourceEnsemble {
    ResourceEnsemble::uniform(
        2,
        Resource::new(0.9, 1.0, 19.0, 1.0),
        10.0,
        Mode::SpectrumSensing,
        horizon,
    )
    .unwrap()
}

/// Small fixed-ensemble configuration.
pub fn fixed_config(
    mode: Mode,
    n: usize,
    horizon: usize,
    prior: f64,
    policies: &[&str],
) -> ExperimentConfig {
    let text =
        format!(
        "mode = \"{}\"\nn_resources = {n}\nhorizon = {horizon}\ntrials = 1000\nmaster_seed = 7\n\
         policies = [{}]\nsnr_min_db = 10.0\nsnr_span_db = 10.0\npenalty_ratio = 19.0\n\
         [reward]\nkind = \"fixed\"\nvalue = 1.0\n[prior]\nkind = \"fixed\"\nvalue = {prior}\n",
        mode,
        policies.iter().map(|p| format!("\"{p}\"")).collect::<Vec<_>>().join(", ")
    );
    let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
    assert!(matches!(cfg.reward, RewardSpec::Fixed { .. }));
    assert!(matches!(cfg.prior, PriorSpec::Fixed { .. }));
    cfg
}
