use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::automaton::{BoundaryMode, ScanMode};
use crate::lattice::{layers_for_size, DEFAULT_STATE_BUDGET_BYTES};
use crate::noise_mc::{DiffusionConfig, ExperimentConfig, NoiseModel, PolarizationConvention, SeedChoice};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Initial flip probability used when neither `eps0` nor `polarization` is given
/// (90% polarization, population reading).
pub const DEFAULT_EPS0: f64 = 0.1;

/// Monte Carlo sweep document. Lists expand to their cartesian product, sizes
/// outermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub schema_version: u32,
    /// Target site counts; each becomes the smallest pyramid holding at least
    /// that many sites.
    #[serde(default)]
    pub sizes: Option<Vec<u64>>,
    #[serde(default)]
    pub layers: Option<Vec<u64>>,
    /// `null` runs `L − 2` phases.
    #[serde(default)]
    pub phases: Option<u64>,
    #[serde(default)]
    pub eps0: Option<f64>,
    #[serde(default)]
    pub polarization: Option<f64>,
    #[serde(default)]
    pub convention: PolarizationConvention,
    #[serde(default = "default_eps1")]
    pub eps1: Vec<f64>,
    #[serde(default)]
    pub spurious: f64,
    #[serde(default)]
    pub seed_value: SeedChoice,
    #[serde(default)]
    pub plus_one_rule: bool,
    #[serde(default)]
    pub diffusion: DiffusionConfig,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub boundary: BoundaryMode,
    #[serde(default = "default_budget")]
    pub memory_budget_bytes: u64,
}

fn default_eps1() -> Vec<f64> {
    vec![0.0]
}

fn default_trials() -> u64 {
    1
}

fn default_budget() -> u64 {
    DEFAULT_STATE_BUDGET_BYTES
}

/// One point of an expanded sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Requested site count, when the point came from `sizes`.
    pub requested_size: Option<u64>,
    pub config: ExperimentConfig,
}

/// A validated sweep with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSweep {
    pub schema_version: u32,
    pub convention: PolarizationConvention,
    pub polarization: Option<f64>,
    pub points: Vec<SweepPoint>,
}

pub fn parse_sweep(text: &str) -> Result<SweepFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path.is_empty() || path == "." { "<root>".to_string() } else { path };
        Error::config(field, e.into_inner().to_string())
    })
}

pub fn load_sweep(path: &Path) -> Result<SweepFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sweep(&text)
}

impl SweepFile {
    pub fn resolve(&self, scan: ScanMode) -> Result<ResolvedSweep> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version),
            ));
        }
        let sizes: Vec<(Option<u64>, u64)> = match (&self.sizes, &self.layers) {
            (Some(_), Some(_)) => return Err(Error::config("sizes", "give either `sizes` or `layers`, not both")),
            (None, None) => return Err(Error::config("sizes", "one of `sizes` or `layers` is required")),
            (Some(s), None) => {
                if let Some(i) = s.iter().position(|n| *n == 0) {
                    return Err(Error::config(format!("sizes[{i}]"), "must be positive"));
                }
                s.iter().map(|n| (Some(*n), layers_for_size(*n))).collect()
            }
            (None, Some(l)) => l.iter().map(|n| (None, *n)).collect(),
        };
        if sizes.is_empty() {
            return Err(Error::config("sizes", "must not be empty"));
        }
        if self.eps1.is_empty() {
            return Err(Error::config("eps1", "must not be empty"));
        }
        let eps0 = match (self.eps0, self.polarization) {
            (Some(_), Some(_)) => {
                return Err(Error::config("eps0", "give either `eps0` or `polarization`, not both"))
            }
            (Some(e), None) => e,
            (None, Some(p)) => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::config("polarization", format!("must lie in [0, 1], got {p}")));
                }
                self.convention.eps0(p)
            }
            (None, None) => DEFAULT_EPS0,
        };
        for (i, e) in self.eps1.iter().enumerate() {
            if !(0.0..=1.0).contains(e) {
                return Err(Error::config(format!("eps1[{i}]"), format!("must lie in [0, 1], got {e}")));
            }
        }

        let mut points = Vec::new();
        for (requested_size, layers) in sizes {
            for &eps1 in &self.eps1 {
                let phases = self.phases.unwrap_or(layers.saturating_sub(2));
                let config = ExperimentConfig {
                    layers,
                    phases,
                    seed_value: self.seed_value,
                    noise: NoiseModel {
                        eps0,
                        eps1,
                        spurious: self.spurious,
                        rng_seed: self.rng_seed,
                    },
                    plus_one_rule: self.plus_one_rule,
                    diffusion: self.diffusion.clone(),
                    trials: self.trials,
                    boundary: self.boundary,
                    scan,
                    memory_budget_bytes: self.memory_budget_bytes,
                };
                config.validate()?;
                points.push(SweepPoint { requested_size, config });
            }
        }
        Ok(ResolvedSweep {
            schema_version: self.schema_version,
            convention: self.convention,
            polarization: self.polarization,
            points,
        })
    }
}
