//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gt::DEFAULT_MAX_CYCLE_SIZE;
use crate::model::Mode;

/// A decision policy to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    /// One sub-band per test.
    Di,
    /// Greedy group tests of size at most `L`.
    Gt(usize),
    /// GT(L) plan and observations, decisions from the exact posterior.
    Map(usize),
    /// Dense random mixing over the GT(L) sensed set, weighted LASSO.
    Lasso(usize),
    /// Static multi-channel covariance system over all resources.
    Mwc,
}

impl Policy {
    /// Cycle size of the plan the policy builds on, if any.
    pub fn cycle_size(self) -> Option<usize> {
        match self {
            Policy::Di => Some(1),
            Policy::Gt(l) | Policy::Map(l) | Policy::Lasso(l) => Some(l),
            Policy::Mwc => None,
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::Di => write!(f, "DI"),
            Policy::Gt(l) => write!(f, "GT({l})"),
            Policy::Map(l) => write!(f, "MAP({l})"),
            Policy::Lasso(l) => write!(f, "LASSO({l})"),
            Policy::Mwc => write!(f, "MWC"),
        }
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        match t.as_str() {
            "DI" => return Ok(Policy::Di),
            "MWC" => return Ok(Policy::Mwc),
            _ => {}
        }
        let bad = || Error::UnknownPolicy(s.to_string());
        let (name, rest) = t.split_once('(').ok_or_else(bad)?;
        let l: usize = rest
            .strip_suffix(')')
            .ok_or_else(bad)?
            .trim()
            .parse()
            .map_err(|_| bad())?;
        if l == 0 {
            return Err(bad());
        }
        match name.trim() {
            "GT" => Ok(Policy::Gt(l)),
            "MAP" => Ok(Policy::Map(l)),
            "LASSO" => Ok(Policy::Lasso(l)),
            _ => Err(bad()),
        }
    }
}

pub fn parse_policies(list: &str) -> Result<Vec<Policy>> {
    // commas inside parentheses are not expected, so a plain split suffices
    list.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// Per-resource reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardSpec {
    Fixed {
        value: f64,
    },
    /// `log2(1 + SNR)` with the SNR uniform in dB.
    Rate {
        snr_db_lo: f64,
        snr_db_hi: f64,
    },
}

/// Per-resource prior probability of being empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorSpec {
    Fixed {
        value: f64,
    },
    /// Uniform on `(lo, hi)`; a missing end defaults to the sensing bound.
    Uniform {
        lo: Option<f64>,
        hi: Option<f64>,
    },
    /// The sensing bound moved inside the admissible region by a relative
    /// `margin`.
    Boundary {
        #[serde(default = "default_margin")]
        margin: f64,
    },
}

fn default_margin() -> f64 {
    1e-9
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    RhoOverR,
    KOverN,
    SnrMinDb,
    #[default]
    None,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::RhoOverR => "rho_over_r",
            SweepAxis::KOverN => "k_over_n",
            SweepAxis::SnrMinDb => "snr_min_db",
            SweepAxis::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub axis: SweepAxis,
    #[serde(default)]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Identity,
    Inverse,
    InverseSquare,
}

impl Weighting {
    pub fn to_data_weighting(self) -> crate::baselines::DataWeighting {
        use crate::baselines::DataWeighting;
        match self {
            Weighting::Identity => DataWeighting::Identity,
            Weighting::Inverse => DataWeighting::InverseLinear,
            Weighting::InverseSquare => DataWeighting::InverseSquare,
        }
    }
}

/// Dense-matrix LASSO baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LassoSettings {
    /// Energy samples averaged per measurement.
    pub samples_per_test: usize,
    pub weighting: Weighting,
    /// Constant l1 weight; `None` uses each resource's DI threshold.
    pub lambda: Option<f64>,
    /// Support threshold; `None` means `phi_min / 2`.
    pub detection_threshold: Option<f64>,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for LassoSettings {
    fn default() -> Self {
        LassoSettings {
            samples_per_test: 10,
            weighting: Weighting::Inverse,
            lambda: None,
            detection_threshold: None,
            tol: 1e-9,
            max_iters: 10_000,
        }
    }
}

/// Multi-channel covariance baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MwcSettings {
    pub channels: usize,
    /// Cycle size of the GT plan whose kappa sets the MWC time budget.
    pub budget_cycle_size: usize,
    /// Samples per channel as a multiple of that kappa.
    pub sample_multiplier: usize,
    /// l1 weight for `simulate` and `sweep`.
    pub lambda: f64,
    /// l1 weights traced by `roc`.
    pub roc_lambdas: Vec<f64>,
    pub detection_threshold: Option<f64>,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for MwcSettings {
    fn default() -> Self {
        MwcSettings {
            channels: 30,
            budget_cycle_size: 2,
            sample_multiplier: 1,
            lambda: 1.0,
            roc_lambdas: vec![
                0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0, 10000.0,
            ],
            detection_threshold: None,
            tol: 1e-6,
            max_iters: 2_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MapPower {
    /// Posterior evaluated at the power each resource has when busy.
    #[default]
    True,
    /// Posterior evaluated at the SNR floor.
    Floor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct MapSettings {
    pub power: MapPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub n_resources: usize,
    pub horizon: usize,
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub policies: Vec<String>,
    #[serde(default = "default_noise")]
    pub noise_power: f64,
    pub snr_min_db: f64,
    /// Busy sub-band SNR is uniform on `[snr_min_db, snr_min_db + span]` dB.
    #[serde(default)]
    pub snr_span_db: f64,
    pub reward: RewardSpec,
    /// `|rho_i| = penalty_ratio * r_i`.
    pub penalty_ratio: f64,
    pub prior: PriorSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub lasso: LassoSettings,
    #[serde(default)]
    pub mwc: MwcSettings,
    #[serde(default)]
    pub map: MapSettings,
    /// Worker threads; unset uses the global pool.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output_path: Option<String>,
}

fn default_noise() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn parsed_policies(&self) -> Result<Vec<Policy>> {
        self.policies.iter().map(|p| p.parse()).collect()
    }

    pub fn phi_min(&self) -> f64 {
        self.noise_power * db_to_linear(self.snr_min_db)
    }

    /// True when every trial sees the same ensemble.
    pub fn ensemble_is_fixed(&self) -> bool {
        matches!(self.reward, RewardSpec::Fixed { .. })
            && !matches!(self.prior, PriorSpec::Uniform { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.n_resources == 0 {
            return Err(Error::EmptyEnsemble);
        }
        if self.horizon < 2 {
            return Err(Error::HorizonTooShort(self.horizon));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return fail(format!("noise_power {} must be positive", self.noise_power));
        }
        if !self.snr_min_db.is_finite() || !(self.snr_span_db >= 0.0) {
            return fail("snr_min_db must be finite and snr_span_db non-negative".into());
        }
        if !(self.penalty_ratio > 0.0 && self.penalty_ratio.is_finite()) {
            return fail(format!(
                "penalty_ratio {} must be positive",
                self.penalty_ratio
            ));
        }
        if self.workers == Some(0) {
            return fail("workers must be at least 1".into());
        }
        let policies = self.parsed_policies()?;
        if let Some(&p) = policies
            .iter()
            .find(|p| p.cycle_size().is_some_and(|l| l > DEFAULT_MAX_CYCLE_SIZE))
        {
            return Err(Error::CycleSizeCap {
                requested: p.cycle_size().unwrap_or(0),
                cap: DEFAULT_MAX_CYCLE_SIZE,
            });
        }
        match self.reward {
            RewardSpec::Fixed { value } if !(value > 0.0) => {
                return fail(format!("reward {value} must be positive"))
            }
            RewardSpec::Rate {
                snr_db_lo,
                snr_db_hi,
            } if !(snr_db_lo <= snr_db_hi) => return fail("reward SNR range is empty".into()),
            _ => {}
        }
        self.validate_prior()?;
        if self.lasso.samples_per_test == 0
            || self.mwc.channels == 0
            || self.mwc.sample_multiplier == 0
        {
            return fail("sample counts and channel count must be positive".into());
        }
        if self.mwc.budget_cycle_size == 0 || self.mwc.budget_cycle_size > DEFAULT_MAX_CYCLE_SIZE {
            return fail(format!(
                "mwc budget_cycle_size {} out of range",
                self.mwc.budget_cycle_size
            ));
        }
        if self.sweep.axis == SweepAxis::KOverN && self.sweep.values.iter().any(|v| !(*v > 0.0)) {
            return fail("k_over_n values must be positive".into());
        }
        if self.sweep.axis == SweepAxis::RhoOverR && self.sweep.values.iter().any(|v| !(*v > 0.0)) {
            return fail("rho_over_r values must be positive".into());
        }
        Ok(())
    }

    // Admissible supports only: SS needs priors below the bound, R above.
    fn validate_prior(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        match self.prior {
            PriorSpec::Fixed { value } if !in_unit(value) => {
                fail(format!("prior {value} outside (0, 1)"))
            }
            PriorSpec::Uniform { lo, hi } => {
                match self.mode {
                    Mode::SpectrumSensing if lo.is_none() => {
                        return fail("SS uniform prior needs lo".into())
                    }
                    Mode::Radar if hi.is_none() => return fail("R uniform prior needs hi".into()),
                    _ => {}
                }
                if lo.is_some_and(|v| !in_unit(v)) || hi.is_some_and(|v| !in_unit(v)) {
                    return fail("uniform prior ends must lie in (0, 1)".into());
                }
                if let (Some(a), Some(b)) = (lo, hi) {
                    if a >= b {
                        return fail(format!("uniform prior support ({a}, {b}) is empty"));
                    }
                }
                Ok(())
            }
            PriorSpec::Boundary { margin } if !(margin > 0.0 && margin < 1.0) => {
                fail(format!("boundary margin {margin} outside (0, 1)"))
            }
            _ => Ok(()),
        }
    }

    /// The configuration at one point of its sweep axis.
    pub fn at(&self, axis_value: f64) -> Result<ExperimentConfig> {
        let mut cfg = self.clone();
        match self.sweep.axis {
            SweepAxis::RhoOverR => cfg.penalty_ratio = axis_value,
            SweepAxis::KOverN => {
                let n = (self.horizon as f64 / axis_value).round();
                if !(n >= 1.0) {
                    return Err(Error::Config(format!(
                        "k_over_n {axis_value} gives no resources"
                    )));
                }
                cfg.n_resources = n as usize;
            }
            SweepAxis::SnrMinDb => cfg.snr_min_db = axis_value,
            SweepAxis::None => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Grid values, or a single `0` for an unswept configuration.
    pub fn grid(&self) -> Vec<f64> {
        match self.sweep.axis {
            SweepAxis::None => vec![0.0],
            _ => self.sweep.values.clone(),
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
