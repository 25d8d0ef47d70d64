//! Numerical laboratory for frames on spheres built from almost complex
//! structures.
//!
//! The crate is organised bottom-up:
//!
//! - [`algebra`]: Cayley–Dickson arithmetic for ℂ, ℍ and 𝕆.
//! - [`geometry`]: sphere points, tangent vectors, stereographic charts and
//!   finite-difference calculus on ambient-valued vector fields.
//! - [`acs`]: almost complex structures on S² and S⁶ together with the
//!   Nijenhuis, Calabi and Calabi–Spencer integrability tensors.
//! - [`kirchhoff`]: the frame σ̃ₓ = α·Id + β·J̃_y on S^{n+1} and the frame
//!   fields it induces.
//! - [`parallelism`]: structure functions of global frames and the
//!   constancy diagnostic.
//! - [`hspace`]: the multiplications m and m̂ and their defect samplers.
//! - [`verify`]: the aggregated identity suite used by the CLI.
//!
//! Ambient layout for the frame sphere S^{n+1} ⊂ ℝ^{n+2}: coordinates
//! `0..=n` span ℝ^{n+1} ⊃ Sⁿ and the last coordinate is the distinguished
//! unit vector `e`. Under the algebra identification, coordinate `c < n+1`
//! is the imaginary unit e_{c+1} and the last coordinate is `1`.

pub mod acs;
pub mod algebra;
pub mod config;
pub mod error;
pub mod geometry;
pub mod hspace;
pub mod kirchhoff;
pub mod parallelism;
pub mod report;
pub mod sampling;
pub mod verify;

pub use error::{LabError, Result};

/// Crate version embedded in every emitted report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
