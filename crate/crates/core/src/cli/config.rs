//! Run configuration read from a TOML file; command-line flags take precedence.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::orbit::{ConstructionMode, OrbitParams};

/// Every field is optional; unset fields fall back to the library defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    /// Boundary point as `re,im;re,im`.
    pub zeta: Option<String>,
    pub lambda: Option<f64>,
    pub k_min: Option<u32>,
    pub k_max: Option<u32>,
    pub n_max: Option<usize>,
    pub eps_sigma: Option<f64>,
    pub dist_target: Option<f64>,
    pub rho_cluster: Option<f64>,
    pub tol_cluster: Option<f64>,
    pub eps_plateau: Option<f64>,
    pub mode: Option<String>,
    /// Where `orbit` writes its CSV.
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda", self.lambda),
            ("eps_sigma", self.eps_sigma),
            ("dist_target", self.dist_target),
            ("rho_cluster", self.rho_cluster),
            ("tol_cluster", self.tol_cluster),
            ("eps_plateau", self.eps_plateau),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if let (Some(lo), Some(hi)) = (self.k_min, self.k_max) {
            if lo > hi {
                return Err(Error::Config(format!("k_min = {lo} exceeds k_max = {hi}")));
            }
        }
        if let Some(m) = &self.mode {
            m.parse::<ConstructionMode>()?;
        }
        Ok(())
    }

    /// Orbit parameters with the configured overrides applied.
    pub fn orbit_params(&self) -> Result<OrbitParams> {
        let mut p = OrbitParams::default();
        if let Some(v) = self.k_min {
            p.k_min = v;
        }
        if let Some(v) = self.k_max {
            p.k_max = v;
        }
        if let Some(v) = self.n_max {
            p.n_max = v;
        }
        if let Some(v) = self.eps_sigma {
            p.eps_sigma = v;
        }
        if let Some(v) = self.dist_target {
            p.dist_target = v;
        }
        if let Some(v) = self.rho_cluster {
            p.rho_cluster = v;
        }
        if let Some(v) = self.tol_cluster {
            p.tol_cluster = v;
        }
        if let Some(m) = &self.mode {
            p.mode = m.parse()?;
        }
        Ok(p)
    }
}
