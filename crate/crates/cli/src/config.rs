//! Scenario configuration: JSON with a schema version; unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use sgdefect::defect::{bt_kink_from_vacuum, bt_vacuum_from_kink, vacuum_pair, DefectPair, DefectParams};
use sgdefect::fields::{make_kink, make_vacuum};
use sgdefect::{FieldEvaluator, ModelParams};

use crate::suites::Suite;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub model: ModelConfig,
    pub solution: SolutionConfig,
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    pub suites: Vec<String>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub m: f64,
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum DefectSeed {
    /// Vacuum on the left, kink created on the right.
    Vacuum,
    /// Kink on the left, vacuum on the right.
    Kink,
    /// Vacuum on both sides.
    Trivial,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SolutionConfig {
    Vacuum,
    Kink {
        v: f64,
        #[serde(default)]
        x0: f64,
        #[serde(default = "default_orientation")]
        orientation: i8,
    },
    Defect {
        sigma: f64,
        seed: DefectSeed,
        #[serde(default)]
        x0: f64,
    },
}

fn default_orientation() -> i8 {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    #[serde(default)]
    pub lambda_list: Option<Vec<f64>>,
    #[serde(default)]
    pub sweep: Option<Sweep>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    /// Half-width of space-picture windows.
    pub half_width: f64,
    /// Half-width of time-picture windows (slow kinks settle late in t).
    pub time_half_width: f64,
    /// Integration steps per unit length per unit of max(|k0|, |k1|, m).
    pub steps_per_unit: f64,
    /// Lattice sites for bracket checks (the coarse level uses half).
    pub lattice_sites: usize,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            half_width: 30.0,
            time_half_width: 60.0,
            steps_per_unit: 200.0,
            lattice_sites: 800,
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

/// Quadrature points along x and along t.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub nx: usize,
    pub nt: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { nx: 12001, nt: 24001 }
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub lax_residual: f64,
    pub conservation: f64,
    pub charges: f64,
    pub energy: f64,
    pub appendix: f64,
    pub defect: f64,
    pub rmatrix: f64,
    /// Allowed distance of the bracket refinement ratio from 1/2.
    pub bracket_ratio: f64,
    pub involution: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lax_residual: 1e-5,
            conservation: 1e-6,
            charges: 1e-6,
            energy: 1e-4,
            appendix: 1e-6,
            defect: 1e-5,
            rmatrix: 1e-12,
            bracket_ratio: 0.15,
            involution: 5e-3,
        }
    }
}

/// The fields a scenario describes: a single solution or a defect pair.
#[derive(Clone, Debug)]
pub enum Scenario {
    Bulk(FieldEvaluator),
    Defect(DefectPair),
}

impl Scenario {
    /// Bulk fields with a side label: the solution itself, or both sides of a defect.
    pub fn sides(&self) -> Vec<(&'static str, &FieldEvaluator)> {
        match self {
            Scenario::Bulk(f) => vec![("bulk", f)],
            Scenario::Defect(p) => vec![("left", &p.left), ("right", &p.right)],
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if self.suites.is_empty() {
            return bad("no suites selected".into());
        }
        for s in &self.suites {
            if Suite::from_name(s).is_none() {
                return bad(format!("unknown suite '{s}' (see list-suites)"));
            }
        }
        ModelParams::new(self.model.m, self.model.beta).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        match self.solution {
            SolutionConfig::Vacuum => {}
            SolutionConfig::Kink { v, orientation, .. } => {
                if !(v.abs() < 1.0) {
                    return bad(format!("kink velocity must satisfy |v| < 1, got {v}"));
                }
                if orientation != 1 && orientation != -1 {
                    return bad(format!("kink orientation must be ±1, got {orientation}"));
                }
            }
            SolutionConfig::Defect { sigma, .. } => {
                if !(sigma > 0.0) {
                    return bad(format!("defect sigma must be positive, got {sigma}"));
                }
            }
        }
        self.lambdas()?;
        let n = &self.numerics;
        for (name, v) in [
            ("half_width", n.half_width),
            ("time_half_width", n.time_half_width),
            ("steps_per_unit", n.steps_per_unit),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("numerics.{name} must be positive"));
            }
        }
        if n.lattice_sites < 4 || n.grid.nx < 3 || n.grid.nt < 3 {
            return bad("numerics.lattice_sites must be ≥ 4 and grid sizes ≥ 3".into());
        }
        let t = &n.tolerances;
        for v in [
            t.lax_residual,
            t.conservation,
            t.charges,
            t.energy,
            t.appendix,
            t.defect,
            t.rmatrix,
            t.bracket_ratio,
            t.involution,
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad("tolerances must be finite and non-negative".into());
            }
        }
        Ok(())
    }

    /// Spectral parameters: the explicit list, or a geometric sweep.
    pub fn lambdas(&self) -> Result<Vec<f64>, ConfigError> {
        let bad = |msg: &str| Err(ConfigError::Invalid(msg.into()));
        let list = match (&self.spectral.lambda_list, &self.spectral.sweep) {
            (Some(l), None) => l.clone(),
            (None, Some(s)) => {
                if !(s.min > 0.0 && s.max > s.min) || s.count < 2 {
                    return bad("sweep needs 0 < min < max and count ≥ 2");
                }
                let r = (s.max / s.min).ln() / (s.count - 1) as f64;
                (0..s.count).map(|k| s.min * (r * k as f64).exp()).collect()
            }
            _ => return bad("spectral needs exactly one of lambda_list or sweep"),
        };
        if list.is_empty() || list.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return bad("spectral parameters must be positive and finite");
        }
        Ok(list)
    }

    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.model.m, self.model.beta).expect("validated")
    }

    pub fn suites(&self) -> Vec<Suite> {
        self.suites.iter().filter_map(|s| Suite::from_name(s)).collect()
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let p = self.params();
        let err = |e: sgdefect::Error| ConfigError::Invalid(e.to_string());
        Ok(match self.solution {
            SolutionConfig::Vacuum => Scenario::Bulk(make_vacuum(p)),
            SolutionConfig::Kink { v, x0, orientation } => Scenario::Bulk(make_kink(p, v, x0, orientation).map_err(err)?),
            SolutionConfig::Defect { sigma, seed, x0 } => {
                let d = DefectParams::new(sigma).map_err(err)?;
                let pair = match seed {
                    DefectSeed::Trivial => vacuum_pair(p, d),
                    DefectSeed::Vacuum => bt_kink_from_vacuum(p, d, x0).map_err(err)?,
                    DefectSeed::Kink => bt_vacuum_from_kink(p, d, x0).map_err(err)?,
                };
                Scenario::Defect(pair)
            }
        })
    }
}
