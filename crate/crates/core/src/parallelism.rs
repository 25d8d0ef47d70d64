//! Structure functions of global frames.
//!
//! For a frame X₁..X_k the flat connection that makes every Xᵢ parallel has
//! torsion T(X_j, X_k) = Σᵢ T^i_jk Xᵢ = −[X_j, X_k]; its connection forms
//! vanish identically in the frame, so the structure functions are the only
//! invariants. They are computed two ways: by finite-difference brackets
//! solved against the frame ([`structure_functions_fd`]) and by the chart
//! formula T^i_jk = Σ X^r_j X^s_k (∂_r θ^i_s − ∂_s θ^i_r)
//! ([`structure_functions_chart`]).
//!
//! Sign convention: with [X, Y] = dY(X) − dX(Y) the classical fields
//! Xᵢ(x) = eᵢx satisfy [Xᵢ, Xⱼ](x) = eⱼ(eᵢx) − eᵢ(eⱼx), so
//! T^k_ij = 2(a_ijk − ⟨[eᵢ, eⱼ, x], e_k x⟩) and T^k_ij(±1) = +2a_ijk.

use serde::Serialize;

use crate::algebra::{associator, AlgebraLevel, Element, StructureConstants};
use crate::error::{usage, LabError, Result};
use crate::geometry::{
    chart_components, gram, lie_bracket_fd, Chart, FdParams, FieldRef, Matrix, SpherePoint,
    TangentVector, Tensor3, Vector, VectorField,
};
use crate::kirchhoff::{from_algebra, pole, to_algebra};
use crate::sampling::{par_sample, random_point_outside_caps};

/// Least-squares residual above which a sample is flagged.
pub const RESIDUAL_FLAG: f64 = 1e-6;
/// Gram determinant below which a frame counts as degenerate.
pub const FRAME_DET_MIN: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    FdBracket,
    ChartFormula,
    ClosedForm,
}

/// T^i_jk at one point; `t.get(i, j, k)` with 0-based frame indices.
#[derive(Debug, Clone)]
pub struct StructureSample {
    pub point: SpherePoint,
    pub t: Tensor3,
    pub method: Method,
    /// Least-squares residual of the component solve (zero for other methods).
    pub residual: f64,
    pub flagged: bool,
}

fn frame_matrix(frame: &[FieldRef], p: &Vector) -> Result<Matrix> {
    let cols: Vec<Vector> = frame.iter().map(|f| f.eval(p)).collect();
    let det = gram(&cols).determinant();
    if !(det > FRAME_DET_MIN) {
        return Err(LabError::Degenerate {
            point: p.as_slice().to_vec(),
            detail: format!("frame Gram determinant {det:e}"),
        });
    }
    Ok(Matrix::from_columns(&cols))
}

fn check_frame(frame: &[FieldRef], p: &SpherePoint) -> Result<()> {
    if frame.is_empty() {
        return usage("empty frame");
    }
    if frame.iter().any(|f| f.ambient_dim() != p.ambient_dim()) {
        return usage("frame fields and point live in different ambient spaces");
    }
    Ok(())
}

/// Structure functions from finite-difference brackets solved in least
/// squares against the frame matrix.
pub fn structure_functions_fd(frame: &[FieldRef], p: &SpherePoint, params: &FdParams) -> Result<StructureSample> {
    check_frame(frame, p)?;
    let k = frame.len();
    let f = frame_matrix(frame, p.as_vector())?;
    let normal = f.tr_mul(&f);
    let chol = normal.cholesky().ok_or_else(|| LabError::Degenerate {
        point: p.as_vector().as_slice().to_vec(),
        detail: "normal equations not positive definite".into(),
    })?;
    let mut t = Tensor3::zeros(k);
    let mut residual: f64 = 0.0;
    for a in 0..k {
        for b in (a + 1)..k {
            let br = lie_bracket_fd(frame[a].as_ref(), frame[b].as_ref(), p, params)?;
            let rhs = -&br.v;
            let c = chol.solve(&f.tr_mul(&rhs));
            residual = residual.max((&f * &c - &rhs).norm());
            for i in 0..k {
                t.set(i, a, b, c[i]);
                t.set(i, b, a, -c[i]);
            }
        }
    }
    Ok(StructureSample {
        point: p.clone(),
        t,
        method: Method::FdBracket,
        residual,
        flagged: residual > RESIDUAL_FLAG,
    })
}

/// Structure functions from the chart formula with finite-difference
/// derivatives of the coframe.
pub fn structure_functions_chart(frame: &[FieldRef], chart: &Chart, u: &Vector, params: &FdParams) -> Result<StructureSample> {
    params.check()?;
    let m = chart.dim();
    let p = SpherePoint::new(chart.inverse(u))?;
    check_frame(frame, &p)?;
    if !chart.contains(p.as_vector(), params.eps_pole) {
        return Err(LabError::Degenerate {
            point: p.as_vector().as_slice().to_vec(),
            detail: "chart point inside the excluded cap around the pole".into(),
        });
    }
    let cf = chart_components(frame, chart, u)?;
    let h = params.h;
    let mut dtheta = Vec::with_capacity(m);
    for r in 0..m {
        let mut up = u.clone();
        let mut dn = u.clone();
        up[r] += h;
        dn[r] -= h;
        let plus = chart_components(frame, chart, &up)?.theta;
        let minus = chart_components(frame, chart, &dn)?.theta;
        dtheta.push((plus - minus) / (2.0 * h));
    }
    let x = &cf.x;
    let mut t = Tensor3::zeros(m);
    for i in 0..m {
        // curl[r][s] = ∂_r θ^i_s − ∂_s θ^i_r
        let curl = Matrix::from_fn(m, m, |r, s| dtheta[r][(i, s)] - dtheta[s][(i, r)]);
        let ti = x.transpose() * curl * x;
        for j in 0..m {
            for k in 0..m {
                t.set(i, j, k, ti[(j, k)]);
            }
        }
    }
    Ok(StructureSample {
        point: p,
        t,
        method: Method::ChartFormula,
        residual: 0.0,
        flagged: false,
    })
}

fn check_classical(level: AlgebraLevel, x: &SpherePoint) -> Result<()> {
    if x.ambient_dim() != level.dim() {
        return usage(format!(
            "classical {} frame lives on S^{}",
            level.name(),
            level.dim() - 1
        ));
    }
    Ok(())
}

/// Coefficients c_k(x) = a_ijk − ⟨[eᵢ, eⱼ, x], e_k x⟩ for imaginary i, j (1-based).
fn classical_coefficients(level: AlgebraLevel, i: usize, j: usize, x: &Vector) -> Vec<f64> {
    let sc = StructureConstants::frozen(level);
    let xa = to_algebra(level, x);
    let ei = Element::basis(level, i);
    let ej = Element::basis(level, j);
    let assoc = from_algebra(&associator(&ei, &ej, &xa).expect("same level"));
    (1..level.dim())
        .map(|k| {
            let ekx = from_algebra(&(&Element::basis(level, k) * &xa));
            f64::from(sc.get(i, j, k)) - assoc.dot(&ekx)
        })
        .collect()
}

/// [Xᵢ, Xⱼ](x) = −2 Σ_k (a_ijk − ⟨[eᵢ, eⱼ, x], e_k x⟩) X_k(x) for the fields
/// Xᵢ(x) = eᵢx; `i`, `j` are 0-based frame indices (unit e_{i+1}).
pub fn classical_bracket_closed_form(level: AlgebraLevel, i: usize, j: usize, x: &SpherePoint) -> Result<TangentVector> {
    check_classical(level, x)?;
    let m = level.imaginary_dim();
    if i >= m || j >= m {
        return usage(format!("frame index out of range 1..={m}"));
    }
    let xv = x.as_vector();
    let xa = to_algebra(level, xv);
    let mut out = Vector::zeros(level.dim());
    if i != j {
        for (k, c) in classical_coefficients(level, i + 1, j + 1, xv).into_iter().enumerate() {
            let xk = from_algebra(&(&Element::basis(level, k + 1) * &xa));
            out -= xk * (2.0 * c);
        }
    }
    Ok(TangentVector {
        base: x.clone(),
        v: out,
    })
}

/// T^k_ij = 2(a_ijk − ⟨[eᵢ, eⱼ, x], e_k x⟩) for the classical frame.
pub fn structure_functions_closed_form(level: AlgebraLevel, x: &SpherePoint) -> Result<StructureSample> {
    check_classical(level, x)?;
    let m = level.imaginary_dim();
    let mut t = Tensor3::zeros(m);
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            for (k, c) in classical_coefficients(level, i + 1, j + 1, x.as_vector()).into_iter().enumerate() {
                t.set(k, i, j, 2.0 * c);
            }
        }
    }
    Ok(StructureSample {
        point: x.clone(),
        t,
        method: Method::ClosedForm,
        residual: 0.0,
        flagged: false,
    })
}

/// Z(f) at p, differentiating the radial extension f(x/‖x‖).
pub fn directional_derivative<F>(f: F, z: &dyn VectorField, p: &Vector, h: f64) -> f64
where
    F: Fn(&Vector) -> f64,
{
    let zv = z.eval(p);
    let g = |x: &Vector| f(&(x / x.norm()));
    (g(&(p + &zv * h)) - g(&(p - &zv * h))) / (2.0 * h)
}

/// ∇_Z W = Σ Z(fⁱ)Xᵢ for W = Σ fⁱXᵢ.
pub fn covariant_derivative(
    frame: &[FieldRef],
    z: &dyn VectorField,
    coefficients: &[&dyn Fn(&Vector) -> f64],
    p: &SpherePoint,
    params: &FdParams,
) -> Result<TangentVector> {
    params.check()?;
    check_frame(frame, p)?;
    if coefficients.len() != frame.len() {
        return usage(format!(
            "{} coefficient functions for a frame of {} fields",
            coefficients.len(),
            frame.len()
        ));
    }
    let pv = p.as_vector();
    let f = frame_matrix(frame, pv)?;
    let zf = Vector::from_iterator(
        coefficients.len(),
        coefficients.iter().map(|c| directional_derivative(c, z, pv, params.h)),
    );
    Ok(TangentVector {
        base: p.clone(),
        v: f * zf,
    })
}

/// Spread of one structure function over a scan; indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentStat {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub mean: f64,
    pub max_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstancyReport {
    pub samples: usize,
    pub eps_pole: f64,
    pub h: f64,
    /// Largest max_dev over all components.
    pub max_dev: f64,
    /// Samples whose least-squares residual exceeded the flag threshold.
    pub flagged: usize,
    pub min_torsion_norm: f64,
    pub max_torsion_norm: f64,
    /// T^i_jk for every i and j < k.
    pub components: Vec<ComponentStat>,
}

/// Samples [`structure_functions_fd`] on S^{n+1} outside the caps around ±e
/// and reports per-component mean and maximal deviation.
pub fn constancy_scan(frame: &[FieldRef], samples: usize, seed: u64, params: &FdParams) -> Result<ConstancyReport> {
    params.check()?;
    if samples == 0 {
        return usage("constancy scan needs at least one sample");
    }
    let Some(first) = frame.first() else {
        return usage("empty frame");
    };
    let e = pole(first.ambient_dim());
    let results = par_sample(samples, seed, |rng, _| {
        let p = random_point_outside_caps(rng, &e, params.eps_pole);
        structure_functions_fd(frame, &p, params)
    });
    let samples_t: Vec<StructureSample> = results.into_iter().collect::<Result<_>>()?;
    Ok(summarize(&samples_t, params))
}

fn summarize(samples: &[StructureSample], params: &FdParams) -> ConstancyReport {
    let k = samples[0].t.dim();
    let count = samples.len() as f64;
    let mut components = Vec::new();
    let mut max_dev: f64 = 0.0;
    for i in 0..k {
        for a in 0..k {
            for b in (a + 1)..k {
                let mean = samples.iter().map(|s| s.t.get(i, a, b)).sum::<f64>() / count;
                let dev = samples
                    .iter()
                    .map(|s| (s.t.get(i, a, b) - mean).abs())
                    .fold(0.0, f64::max);
                max_dev = max_dev.max(dev);
                components.push(ComponentStat {
                    i: i + 1,
                    j: a + 1,
                    k: b + 1,
                    mean,
                    max_dev: dev,
                });
            }
        }
    }
    let norms: Vec<f64> = samples.iter().map(|s| s.t.norm()).collect();
    ConstancyReport {
        samples: samples.len(),
        eps_pole: params.eps_pole,
        h: params.h,
        max_dev,
        flagged: samples.iter().filter(|s| s.flagged).count(),
        min_torsion_norm: norms.iter().cloned().fold(f64::INFINITY, f64::min),
        max_torsion_norm: norms.iter().cloned().fold(0.0, f64::max),
        components,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kirchhoff::classical_frame;

    #[test]
    fn closed_form_at_identity_is_structure_constants() {
        let level = AlgebraLevel::OCTONION;
        let sc = StructureConstants::frozen(level);
        for x in [pole(8), -pole(8)] {
            let s = structure_functions_closed_form(level, &SpherePoint::new(x).unwrap()).unwrap();
            for i in 0..7 {
                for j in 0..7 {
                    for k in 0..7 {
                        let want = if i == j { 0.0 } else { 2.0 * f64::from(sc.get(i + 1, j + 1, k + 1)) };
                        assert!((s.t.get(k, i, j) - want).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn single_sample_scan_has_zero_deviation() {
        let frame = classical_frame(AlgebraLevel::QUATERNION).unwrap();
        let r = constancy_scan(&frame, 1, 42, &FdParams::default()).unwrap();
        assert_eq!(r.max_dev, 0.0);
        assert!(constancy_scan(&frame, 0, 42, &FdParams::default()).is_err());
    }

    #[test]
    fn antisymmetry_by_construction() {
        let frame = classical_frame(AlgebraLevel::OCTONION).unwrap();
        let p = SpherePoint::from_slice(&[0.3, -0.1, 0.2, 0.5, -0.4, 0.1, 0.6, 0.2]).unwrap();
        let s = structure_functions_fd(&frame, &p, &FdParams::default()).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                for k in 0..7 {
                    assert_eq!(s.t.get(i, j, k), -s.t.get(i, k, j));
                }
            }
        }
        assert!(!s.flagged);
    }
}
