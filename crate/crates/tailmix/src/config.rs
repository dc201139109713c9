//! Run configuration shared by the CLI and the summary echo.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use tailmix_core::sampler::{Blocks, ProposalScales};
use tailmix_core::{BulkKind, McmcConfig, PriorSpec, SigmaPrior};

use crate::io::DataFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Bulk {
    Geometric,
    Powerlaw,
}

impl From<Bulk> for BulkKind {
    fn from(b: Bulk) -> Self {
        match b {
            Bulk::Geometric => BulkKind::Geometric,
            Bulk::Powerlaw => BulkKind::PowerLaw,
        }
    }
}

/// Which constraint variants the chain may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Both,
    Constrained,
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaParam {
    Scale,
    Rate,
}

/// Serializable mirror of [`PriorSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorConfig {
    pub xi1_lo: f64,
    pub xi1_hi: f64,
    pub xi2_mean: f64,
    pub xi2_sd: f64,
    pub sigma_shape: f64,
    pub sigma_scale: f64,
    pub sigma_param: SigmaParam,
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub prior_m1: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorSpec::default().into()
    }
}

impl From<PriorSpec> for PriorConfig {
    fn from(p: PriorSpec) -> Self {
        PriorConfig {
            xi1_lo: p.xi1_lo,
            xi1_hi: p.xi1_hi,
            xi2_mean: p.xi2_mean,
            xi2_sd: p.xi2_sd,
            sigma_shape: p.sigma_shape,
            sigma_scale: p.sigma_scale,
            sigma_param: match p.sigma_param {
                SigmaPrior::Scale => SigmaParam::Scale,
                SigmaPrior::Rate => SigmaParam::Rate,
            },
            phi_lo: p.phi_lo,
            phi_hi: p.phi_hi,
            prior_m1: p.prior_m1,
        }
    }
}

impl From<PriorConfig> for PriorSpec {
    fn from(p: PriorConfig) -> Self {
        PriorSpec {
            xi1_lo: p.xi1_lo,
            xi1_hi: p.xi1_hi,
            xi2_mean: p.xi2_mean,
            xi2_sd: p.xi2_sd,
            sigma_shape: p.sigma_shape,
            sigma_scale: p.sigma_scale,
            sigma_param: match p.sigma_param {
                SigmaParam::Scale => SigmaPrior::Scale,
                SigmaParam::Rate => SigmaPrior::Rate,
            },
            phi_lo: p.phi_lo,
            phi_hi: p.phi_hi,
            prior_m1: p.prior_m1,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown prior field `{0}`")]
    UnknownPrior(String),
    #[error("bad value {value:?} for prior.{name}")]
    BadValue { name: String, value: String },
    #[error(transparent)]
    Invalid(#[from] tailmix_core::Error),
    #[error("band level must lie in (0, 1), got {0}")]
    Level(f64),
    #[error("need at least one chain")]
    Chains,
}

impl PriorConfig {
    pub const FIELDS: [&'static str; 10] = [
        "xi1_lo",
        "xi1_hi",
        "xi2_mean",
        "xi2_sd",
        "sigma_shape",
        "sigma_scale",
        "sigma_param",
        "phi_lo",
        "phi_hi",
        "prior_m1",
    ];

    /// Applies one `name=value` override.
    pub fn set(&mut self, name: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue { name: name.to_owned(), value: value.to_owned() };
        if name == "sigma_param" {
            self.sigma_param = match value {
                "scale" => SigmaParam::Scale,
                "rate" => SigmaParam::Rate,
                _ => return Err(bad()),
            };
            return Ok(());
        }
        let v: f64 = value.parse().map_err(|_| bad())?;
        let slot = match name {
            "xi1_lo" => &mut self.xi1_lo,
            "xi1_hi" => &mut self.xi1_hi,
            "xi2_mean" => &mut self.xi2_mean,
            "xi2_sd" => &mut self.xi2_sd,
            "sigma_shape" => &mut self.sigma_shape,
            "sigma_scale" => &mut self.sigma_scale,
            "phi_lo" => &mut self.phi_lo,
            "phi_hi" => &mut self.phi_hi,
            "prior_m1" => &mut self.prior_m1,
            _ => return Err(ConfigError::UnknownPrior(name.to_owned())),
        };
        *slot = v;
        Ok(())
    }
}

/// Chain settings as given on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub iterations: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub seed: u64,
    pub chains: usize,
    pub u_step: u64,
    pub adapt: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        let m = McmcConfig::default();
        ChainConfig {
            iterations: m.iterations,
            burn_in: m.burn_in,
            thin: m.thin,
            seed: m.seed,
            chains: 1,
            u_step: m.u_step,
            adapt: m.adapt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: PathBuf,
    pub format: DataFormat,
    pub bulk: Bulk,
    pub mode: Mode,
    pub priors: PriorConfig,
    pub mcmc: ChainConfig,
    pub out: PathBuf,
    pub level: f64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(ConfigError::Level(self.level));
        }
        if self.mcmc.chains == 0 {
            return Err(ConfigError::Chains);
        }
        self.prior_spec().validate()?;
        self.mcmc_config().validate()?;
        Ok(())
    }

    /// Priors with the model probability pinned by `mode`.
    pub fn prior_spec(&self) -> PriorSpec {
        let mut p = PriorSpec::from(self.priors);
        match self.mode {
            Mode::Both => {}
            Mode::Constrained => p.prior_m1 = 1.0,
            Mode::Unconstrained => p.prior_m1 = 0.0,
        }
        p
    }

    pub fn mcmc_config(&self) -> McmcConfig {
        let c = &self.mcmc;
        McmcConfig {
            iterations: c.iterations,
            burn_in: c.burn_in,
            thin: c.thin,
            seed: c.seed,
            scales: ProposalScales::default(),
            adapt: c.adapt,
            u_step: c.u_step,
            blocks: Blocks::default(),
            ..McmcConfig::default()
        }
    }
}
