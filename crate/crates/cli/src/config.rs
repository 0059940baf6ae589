//! Run configurations. Every experiment reads one JSON object; unknown keys
//! are rejected so that typos surface as configuration errors.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;
use vortex_core::analysis::SectionSpec;
use vortex_core::dynamics::RhsKind;
use vortex_core::surface::{ConformalConfig, LatticeConfig};
use vortex_core::{ConformalFactor, Lattice, SurfaceConfig};

use crate::{CliError, CliResult};

/// Tolerances accepted by the integrator.
pub const TOL_RANGE: (f64, f64) = (1e-14, 1e-2);

fn default_rel_tol() -> f64 {
    1e-10
}

fn default_abs_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexConfig {
    pub x: f64,
    pub y: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub experiment: Option<String>,
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub conformal: ConformalConfig,
    pub vortices: Vec<VortexConfig>,
    #[serde(default)]
    pub eta: [f64; 2],
    pub t_end: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    pub sample_dt: f64,
    #[serde(default = "default_rhs")]
    pub rhs: RhsKind,
    pub seed: Option<u64>,
}

fn default_rhs() -> RhsKind {
    RhsKind::Complete
}

fn default_position() -> [f64; 2] {
    [0.0, 0.5]
}

fn default_gamma() -> f64 {
    1.0
}

fn default_crossings() -> usize {
    2000
}

fn default_bins() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionConfig {
    pub experiment: Option<String>,
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub conformal: ConformalConfig,
    /// Energy level of every orbit.
    pub energy: f64,
    /// Starting position shared by the family.
    #[serde(default = "default_position")]
    pub position: [f64; 2],
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// One orbit per entry; `η_x ≥ 0` is completed from the energy.
    pub eta_y: Vec<f64>,
    pub t_end: f64,
    #[serde(default = "default_crossings")]
    pub max_crossings: usize,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    /// Grid size for the occupancy statistic.
    #[serde(default = "default_bins")]
    pub bins: usize,
    pub section: Option<SectionSpec>,
    pub seed: Option<u64>,
}

fn default_seeds() -> usize {
    4
}

fn default_newton_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriaConfig {
    pub experiment: Option<String>,
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub conformal: ConformalConfig,
    /// Seeds per axis.
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    /// When set, each seed is jittered within its cell by a generator
    /// seeded with this value.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Green,
    Robin,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreensTableConfig {
    pub experiment: Option<String>,
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub conformal: ConformalConfig,
    pub kind: TableKind,
    /// Second slot of the Green function; required for `green`.
    pub source: Option<[f64; 2]>,
    /// Grid points along the two generators.
    pub nx: usize,
    pub ny: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusConfig {
    pub experiment: Option<String>,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    /// Inner-boundary circulation; the impulsive-start value when absent.
    pub p: Option<f64>,
    pub vortices: Vec<VortexConfig>,
    pub t_end: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    pub sample_dt: f64,
    pub seed: Option<u64>,
}

/// Experiment name, checked against the subcommand when present.
pub trait Experiment {
    fn experiment(&self) -> Option<&str>;
    fn validate(&self) -> CliResult<()>;
}

fn check_tolerances(rel: f64, abs: f64) -> CliResult<()> {
    for (key, v) in [("rel_tol", rel), ("abs_tol", abs)] {
        if !(v > TOL_RANGE.0 && v < TOL_RANGE.1) {
            return Err(CliError::Config {
                message: format!("{key} = {v:e} is outside ({:e}, {:e})", TOL_RANGE.0, TOL_RANGE.1),
                key: Some(key.into()),
            });
        }
    }
    Ok(())
}

fn positive(key: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config {
            message: format!("{key} must be positive and finite, got {v}"),
            key: Some(key.into()),
        })
    }
}

fn nonzero(key: &str, v: usize) -> CliResult<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(CliError::Config {
            message: format!("{key} must be positive"),
            key: Some(key.into()),
        })
    }
}

impl Experiment for SimulateConfig {
    fn experiment(&self) -> Option<&str> {
        self.experiment.as_deref()
    }

    fn validate(&self) -> CliResult<()> {
        check_tolerances(self.rel_tol, self.abs_tol)?;
        positive("t_end", self.t_end)?;
        positive("sample_dt", self.sample_dt)?;
        if self.vortices.is_empty() {
            return Err(CliError::Config {
                message: "at least one vortex is required".into(),
                key: Some("vortices".into()),
            });
        }
        Ok(())
    }
}

impl Experiment for SectionConfig {
    fn experiment(&self) -> Option<&str> {
        self.experiment.as_deref()
    }

    fn validate(&self) -> CliResult<()> {
        check_tolerances(self.rel_tol, self.abs_tol)?;
        positive("t_end", self.t_end)?;
        nonzero("max_crossings", self.max_crossings)?;
        nonzero("bins", self.bins)?;
        if self.eta_y.is_empty() {
            return Err(CliError::Config {
                message: "eta_y must list at least one orbit".into(),
                key: Some("eta_y".into()),
            });
        }
        Ok(())
    }
}

impl Experiment for EquilibriaConfig {
    fn experiment(&self) -> Option<&str> {
        self.experiment.as_deref()
    }

    fn validate(&self) -> CliResult<()> {
        nonzero("seeds", self.seeds)?;
        positive("newton_tol", self.newton_tol)
    }
}

impl Experiment for GreensTableConfig {
    fn experiment(&self) -> Option<&str> {
        self.experiment.as_deref()
    }

    fn validate(&self) -> CliResult<()> {
        nonzero("nx", self.nx)?;
        nonzero("ny", self.ny)?;
        if self.kind == TableKind::Green && self.source.is_none() {
            return Err(CliError::Config {
                message: "a green table needs a source point".into(),
                key: Some("source".into()),
            });
        }
        Ok(())
    }
}

impl Experiment for AnnulusConfig {
    fn experiment(&self) -> Option<&str> {
        self.experiment.as_deref()
    }

    fn validate(&self) -> CliResult<()> {
        check_tolerances(self.rel_tol, self.abs_tol)?;
        positive("t_end", self.t_end)?;
        positive("sample_dt", self.sample_dt)?;
        if self.vortices.is_empty() {
            return Err(CliError::Config {
                message: "at least one vortex is required".into(),
                key: Some("vortices".into()),
            });
        }
        Ok(())
    }
}

/// Builds the torus geometry shared by the torus experiments.
pub fn surface(lattice: &LatticeConfig, conformal: &ConformalConfig) -> CliResult<(Lattice, ConformalFactor)> {
    let cfg = SurfaceConfig {
        lattice: lattice.clone(),
        conformal: conformal.clone(),
    };
    Ok(cfg.build()?)
}

/// `missing field `x`` and `unknown field `x`` messages name the key.
fn offending_key(message: &str) -> Option<String> {
    for marker in ["missing field `", "unknown field `"] {
        if let Some(start) = message.find(marker) {
            let rest = &message[start + marker.len()..];
            return rest.find('`').map(|end| rest[..end].to_string());
        }
    }
    None
}

pub fn parse<T: DeserializeOwned + Experiment>(text: &str, expected: &str) -> CliResult<T> {
    let cfg: T = serde_json::from_str(text).map_err(|e| {
        let message = e.to_string();
        CliError::Config {
            key: offending_key(&message),
            message,
        }
    })?;
    if let Some(name) = cfg.experiment() {
        if name != expected {
            return Err(CliError::Config {
                message: format!("config is for experiment `{name}`, not `{expected}`"),
                key: Some("experiment".into()),
            });
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load<T: DeserializeOwned + Experiment>(path: &Path, expected: &str) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, expected)
}
