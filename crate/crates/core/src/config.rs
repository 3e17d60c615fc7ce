//! JSON run configuration for the command-line experiment runner.

use crate::error::{Error, Result};
use crate::exprlang::{parse_field, FieldExpr};
use crate::mesh::DomainSpec;
use crate::recovery::{self, MeasurementSet};
use serde::{Deserialize, Serialize};
use std::path::Path;

fn default_s() -> f64 {
    1.0
}

fn default_f() -> String {
    "0".into()
}

fn default_d() -> f64 {
    0.25
}

fn default_tau() -> f64 {
    crate::linalg::DEFAULT_TAU_REL
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasurementsConfig {
    /// Points on the sides of [0.1, 0.9]^2, four per index.
    Box(usize),
    /// Uniform interior lattice of a perfect-square count.
    Grid(usize),
    Points {
        points: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Levels {
    pub k_min: usize,
    pub k_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainSpec,
    /// Boundary smoothness exponent; only s = 1 is supported.
    #[serde(default = "default_s")]
    pub s: f64,
    /// Source term expression.
    #[serde(default = "default_f")]
    pub f: String,
    /// Analytic field measurements are sampled from and errors are taken
    /// against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurements: Option<MeasurementsConfig>,
    pub levels: Levels,
    /// Single measurement point for the representer study.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub proximity_points: Vec<[f64; 2]>,
    /// Boundary-distance cutoff for the restricted max norm.
    #[serde(default = "default_d")]
    pub d: f64,
    #[serde(default = "default_tau")]
    pub tau_rel: f64,
    /// Amplitude of uniform measurement noise; 0 disables it.
    #[serde(default)]
    pub noise: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s != 1.0 {
            return Err(Error::Config(format!(
                "s = {}: fractional boundary smoothness is out of scope, only s = 1 is supported",
                self.s
            )));
        }
        if self.levels.k_min > self.levels.k_max {
            return Err(Error::Config(format!(
                "levels: k_min {} exceeds k_max {}",
                self.levels.k_min, self.levels.k_max
            )));
        }
        if !(0.0..1.0).contains(&self.tau_rel) {
            return Err(Error::Config(format!(
                "tau_rel = {} must lie in [0, 1)",
                self.tau_rel
            )));
        }
        if self.d < 0.0 {
            return Err(Error::Config(format!("d = {} must be nonnegative", self.d)));
        }
        if self.noise < 0.0 {
            return Err(Error::Config(format!("noise = {} must be nonnegative", self.noise)));
        }
        parse_field(&self.f).map_err(|e| Error::Config(format!("f: {e}")))?;
        if let Some(expr) = &self.exact_field {
            parse_field(expr).map_err(|e| Error::Config(format!("exact_field: {e}")))?;
        }
        Ok(())
    }

    pub fn source(&self) -> Result<FieldExpr> {
        parse_field(&self.f).map_err(Error::from)
    }

    pub fn exact(&self) -> Result<FieldExpr> {
        let text = self
            .exact_field
            .as_deref()
            .ok_or_else(|| Error::Config("exact_field is required for this command".into()))?;
        parse_field(text).map_err(Error::from)
    }

    pub fn surrogate_level(&self) -> Result<usize> {
        self.levels
            .surrogate
            .ok_or_else(|| Error::Config("levels.surrogate is required for this command".into()))
    }

    /// Resolve the measurement block to a concrete set, synthesizing values
    /// from `exact_field` when they are not given explicitly.
    pub fn measurement_set(&self, seed: u64) -> Result<MeasurementSet> {
        let spec = self
            .measurements
            .as_ref()
            .ok_or_else(|| Error::Config("measurements block is required for this command".into()))?;
        let (points, values) = match spec {
            MeasurementsConfig::Box(m) => (recovery::box_formation(*m)?, None),
            MeasurementsConfig::Grid(m) => (recovery::grid_formation(*m)?, None),
            MeasurementsConfig::Points { points, values } => (points.clone(), values.clone()),
        };
        match values {
            Some(values) => {
                if self.noise > 0.0 {
                    return Err(Error::Config(
                        "noise applies only to synthesized measurements".into(),
                    ));
                }
                MeasurementSet::new(points, values)
            }
            None => {
                let field = self.exact()?;
                if self.noise > 0.0 {
                    recovery::synthesize_noisy_measurements(&field, &points, self.noise, seed)
                } else {
                    recovery::synthesize_measurements(&field, &points)
                }
            }
        }
    }
}
