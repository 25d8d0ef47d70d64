//! Run configuration shared by the library entry points and the CLI.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::acs::{AcsRef, OctonionicAcs, RotatedAcs};
use crate::algebra::AlgebraLevel;
use crate::error::{usage, LabError, Result};
use crate::geometry::{FdParams, DEFAULT_EPS_POLE, DEFAULT_H};

/// Almost complex structures available from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Right multiplication on S⁶ ⊂ Im 𝕆.
    Octonion,
    /// Right multiplication on S² ⊂ Im ℍ.
    Quaternion,
    /// The octonionic structure conjugated by a seeded rotation of ℝ⁷.
    Rotated,
}

impl Model {
    pub fn level(self) -> AlgebraLevel {
        match self {
            Model::Quaternion => AlgebraLevel::QUATERNION,
            Model::Octonion | Model::Rotated => AlgebraLevel::OCTONION,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Octonion => "octonion",
            Model::Quaternion => "quaternion",
            Model::Rotated => "rotated",
        }
    }

    /// True when J comes from right multiplication, so σ̃ₓ = R_x exactly.
    pub fn is_algebraic(self) -> bool {
        !matches!(self, Model::Rotated)
    }

    pub fn acs(self, rotation_seed: u64) -> AcsRef {
        let base = Arc::new(OctonionicAcs::new(self.level()).expect("level 2 or 3"));
        match self {
            Model::Rotated => Arc::new(RotatedAcs::random(base, rotation_seed)),
            _ => base,
        }
    }
}

impl FromStr for Model {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "octonion" => Ok(Model::Octonion),
            "quaternion" => Ok(Model::Quaternion),
            "rotated" => Ok(Model::Rotated),
            other => usage(format!("unknown model '{other}' (octonion|quaternion|rotated)")),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub level: u8,
    pub model: Model,
    pub h: f64,
    pub eps_pole: f64,
    pub tolerance_overrides: BTreeMap<String, f64>,
    pub samples: usize,
    pub seed: u64,
    pub rotation_seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            level: 3,
            model: Model::Octonion,
            h: DEFAULT_H,
            eps_pole: DEFAULT_EPS_POLE,
            tolerance_overrides: BTreeMap::new(),
            samples: 200,
            seed: 42,
            rotation_seed: 1,
            out: None,
            format: Format::Json,
        }
    }
}

impl RunConfig {
    pub fn for_model(model: Model) -> Self {
        RunConfig {
            level: model.level().get(),
            model,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        AlgebraLevel::new(self.level)?;
        if self.samples == 0 {
            return usage("--samples must be positive");
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return usage("--h must be positive");
        }
        if !(self.eps_pole > 0.0 && self.eps_pole < 1.0) {
            return usage("--eps-pole must lie in (0, 1)");
        }
        for (name, tol) in &self.tolerance_overrides {
            if !(*tol > 0.0 && tol.is_finite()) {
                return usage(format!("tolerance override {name} must be positive"));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> FdParams {
        FdParams {
            h: self.h,
            eps_pole: self.eps_pole,
        }
    }

    pub fn acs(&self) -> AcsRef {
        self.model.acs(self.rotation_seed)
    }
}
