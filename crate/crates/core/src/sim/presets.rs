//! Named experiment setups.
//!
//! | preset | sweep | setup |
//! |---|---|---|
//! | `fig3_ss`, `fig3_radar` | `rho_over_r` | K=30, N=60, r=1, SNR fixed at 10 dB, prior at the sensing bound |
//! | `fig4_k10`, `fig4_k30` | `k_over_n` | SNR 10..20 dB, r=log2(1+SNR_S), rho=5r, prior U(0.7, bound) |
//! | `fig5_k10`, `fig5_k30` | `snr_min_db` | N=20, SNR_min..SNR_min+10 dB, same rewards and priors |
//! | `fig6_10db`, `fig6_20db` | none (use `roc`) | N=150, w=0.95 bound, r=1, rho=19, 30 channels |

use super::config::{
    ExperimentConfig, LassoSettings, MapSettings, MwcSettings, PriorSpec, RewardSpec, SweepAxis,
    SweepSpec,
};
use crate::error::{Error, Result};
use crate::model::Mode;

pub const PRESET_NAMES: [&str; 8] = [
    "fig3_ss",
    "fig3_radar",
    "fig4_k10",
    "fig4_k30",
    "fig5_k10",
    "fig5_k30",
    "fig6_10db",
    "fig6_20db",
];

const TRIALS: usize = 10_000;

fn base(mode: Mode, n: usize, k: usize, policies: &[&str]) -> ExperimentConfig {
    ExperimentConfig {
        mode,
        n_resources: n,
        horizon: k,
        trials: TRIALS,
        master_seed: 1,
        policies: policies.iter().map(|s| s.to_string()).collect(),
        noise_power: 1.0,
        snr_min_db: 10.0,
        snr_span_db: 10.0,
        reward: RewardSpec::Rate {
            snr_db_lo: 10.0,
            snr_db_hi: 20.0,
        },
        penalty_ratio: 5.0,
        prior: PriorSpec::Uniform {
            lo: Some(0.7),
            hi: None,
        },
        sweep: SweepSpec::default(),
        lasso: LassoSettings::default(),
        mwc: MwcSettings::default(),
        map: MapSettings::default(),
        workers: None,
        output_path: None,
    }
}

fn fig3(mode: Mode) -> ExperimentConfig {
    let mut cfg = base(mode, 60, 30, &["DI", "GT(2)", "GT(3)", "MAP(2)"]);
    cfg.snr_span_db = 0.0;
    cfg.reward = RewardSpec::Fixed { value: 1.0 };
    cfg.prior = PriorSpec::Boundary { margin: 1e-9 };
    cfg.sweep = SweepSpec {
        axis: SweepAxis::RhoOverR,
        values: vec![0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0],
    };
    cfg
}

fn fig4(k: usize) -> ExperimentConfig {
    let policies: &[&str] = if k <= 10 {
        &["DI", "GT(2)", "GT(3)", "MAP(2)"]
    } else {
        &["DI", "GT(2)", "MAP(2)"]
    };
    let mut cfg = base(Mode::SpectrumSensing, 2 * k, k, policies);
    cfg.sweep = SweepSpec {
        axis: SweepAxis::KOverN,
        values: vec![0.25, 0.5, 0.75, 1.0, 1.25, 1.5],
    };
    cfg
}

fn fig5(k: usize) -> ExperimentConfig {
    let mut cfg = base(
        Mode::SpectrumSensing,
        20,
        k,
        &["DI", "GT(2)", "GT(3)", "MAP(2)", "LASSO(2)"],
    );
    cfg.sweep = SweepSpec {
        axis: SweepAxis::SnrMinDb,
        values: vec![0.0, 5.0, 10.0, 15.0, 20.0],
    };
    cfg
}

fn fig6(snr_db: f64) -> ExperimentConfig {
    let mut cfg = base(Mode::SpectrumSensing, 150, 40, &["DI", "GT(2)"]);
    cfg.snr_min_db = snr_db;
    cfg.snr_span_db = 0.0;
    cfg.reward = RewardSpec::Fixed { value: 1.0 };
    cfg.penalty_ratio = 19.0;
    cfg.prior = PriorSpec::Boundary { margin: 1e-9 };
    cfg
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let cfg = match name {
        "fig3_ss" => fig3(Mode::SpectrumSensing),
        "fig3_radar" => fig3(Mode::Radar),
        "fig4_k10" => fig4(10),
        "fig4_k30" => fig4(30),
        "fig5_k10" => fig5(10),
        "fig5_k30" => fig5(30),
        "fig6_10db" => fig6(10.0),
        "fig6_20db" => fig6(20.0),
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    cfg.validate()?;
    Ok(cfg)
}
