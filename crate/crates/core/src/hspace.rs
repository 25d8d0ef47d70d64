//! Multiplications induced by a Kirchhoff frame.
//!
//! m̂(x, y) = σ̃ₓ(y) on ℝ^{n+2} and m(x, y) = m̂(x, y)/‖m̂(x, y)‖ on S^{n+1}.
//! Both have e as a two-sided identity. For a hermitian structure m̂
//! satisfies ‖m̂(x, y)‖ = ‖x‖‖y‖ and m is its restriction.
//!
//! The defect samplers only measure; a vanishing landscape is evidence of
//! strict associativity, not a decision about homotopy associativity.

use serde::Serialize;

use crate::acs::AcsRef;
use crate::error::{usage, LabError, Result};
use crate::geometry::{Matrix, Vector};
use crate::kirchhoff::sigma_tilde;
use crate::sampling::{par_sample, random_unit};

/// Number of uniform histogram bins on [0, max].
pub const HIST_BINS: usize = 32;
/// Below this norm m cannot normalise.
pub const NORMALIZE_MIN: f64 = 1e-12;

#[derive(Clone)]
pub struct HMultiplication {
    pub acs: AcsRef,
    /// true → m on the sphere, false → m̂ on ambient space.
    pub normalize: bool,
}

impl HMultiplication {
    pub fn sphere(acs: AcsRef) -> Self {
        HMultiplication { acs, normalize: true }
    }

    pub fn ambient(acs: AcsRef) -> Self {
        HMultiplication { acs, normalize: false }
    }

    pub fn ambient_dim(&self) -> usize {
        self.acs.ambient_dim() + 1
    }

    /// L_x = m̂(x, ·) = σ̃ₓ.
    pub fn left_translation(&self, x: &Vector) -> Result<Matrix> {
        Ok(sigma_tilde(self.acs.as_ref(), x)?.sigma_tilde)
    }

    pub fn multiply(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        multiply_h(self, x, y)
    }
}

pub fn multiply_h(mult: &HMultiplication, x: &Vector, y: &Vector) -> Result<Vector> {
    let dim = mult.ambient_dim();
    if x.len() != dim || y.len() != dim {
        return usage(format!("multiplication acts on R^{dim}"));
    }
    let frame = sigma_tilde(mult.acs.as_ref(), x)?;
    let prod = frame.apply(y);
    if !mult.normalize {
        return Ok(prod);
    }
    let n = prod.norm();
    if n < NORMALIZE_MIN {
        return Err(LabError::Degenerate {
            point: x.as_slice().to_vec(),
            detail: format!("|σ̃ₓ(y)| = {n:e} cannot be normalised"),
        });
    }
    Ok(prod / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectOp {
    /// ‖m(m(x,y),z) − m(x,m(y,z))‖
    Assoc,
    /// ‖m(m(x,y),m(z,x)) − m(m(x,m(y,z)),x)‖
    Moufang,
}

impl DefectOp {
    pub fn name(self) -> &'static str {
        match self {
            DefectOp::Assoc => "assoc",
            DefectOp::Moufang => "moufang",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub op: DefectOp,
    pub seed: u64,
    pub n: usize,
    pub max: f64,
    pub mean: f64,
    /// Counts in [`HIST_BINS`] uniform bins on [0, max].
    pub hist: Vec<u64>,
}

/// Defect of `op` at one triple.
pub fn defect_at(mult: &HMultiplication, op: DefectOp, x: &Vector, y: &Vector, z: &Vector) -> Result<f64> {
    let m = |a: &Vector, b: &Vector| multiply_h(mult, a, b);
    let d = match op {
        DefectOp::Assoc => m(&m(x, y)?, z)? - m(x, &m(y, z)?)?,
        DefectOp::Moufang => m(&m(x, y)?, &m(z, x)?)? - m(&m(x, &m(y, z)?)?, x)?,
    };
    Ok(d.norm())
}

/// Samples `op` over `n` uniform unit triples.
pub fn sample_defect(mult: &HMultiplication, op: DefectOp, n: usize, seed: u64) -> Result<DefectReport> {
    if n == 0 {
        return usage("defect sampler needs at least one sample");
    }
    let dim = mult.ambient_dim();
    let values: Vec<f64> = par_sample(n, seed, |rng, _| {
        let x = random_unit(rng, dim);
        let y = random_unit(rng, dim);
        let z = random_unit(rng, dim);
        defect_at(mult, op, &x, &y, &z)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let max = values.iter().cloned().fold(0.0, f64::max);
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut hist = vec![0u64; HIST_BINS];
    for v in &values {
        let bin = if max > 0.0 {
            ((v / max) * HIST_BINS as f64).floor() as usize
        } else {
            0
        };
        hist[bin.min(HIST_BINS - 1)] += 1;
    }
    Ok(DefectReport {
        op,
        seed,
        n,
        max,
        mean,
        hist,
    })
}

pub fn associativity_defect(mult: &HMultiplication, n: usize, seed: u64) -> Result<DefectReport> {
    sample_defect(mult, DefectOp::Assoc, n, seed)
}

pub fn moufang_defect(mult: &HMultiplication, n: usize, seed: u64) -> Result<DefectReport> {
    sample_defect(mult, DefectOp::Moufang, n, seed)
}
