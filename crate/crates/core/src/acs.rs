//! Almost complex structures on Sⁿ ⊂ ℝ^{n+1} and their integrability tensors.
//!
//! A structure is exposed through [`AcsField::matrix`]: an (n+1)×(n+1)
//! matrix that annihilates y and restricts to J_y on T_ySⁿ. Sphere
//! coordinate c corresponds to the imaginary unit e_{c+1}.
//!
//! Three routes to integrability are provided and cross-checked:
//! [`nijenhuis_fd`] differentiates ambient fields, [`nijenhuis_chart`] and
//! [`tau_chart`] work with chart components of J, and [`calabi_defect`]
//! evaluates (dJdJ − JdJd)f on a test function.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{right_matrix, AlgebraLevel, Element};
use crate::error::{usage, LabError, Result};
use crate::geometry::{
    directional_fd, fd_partial_matrix, project, tangent_projector, Chart, FdParams, FieldRef,
    FnField, Matrix, SpherePoint, TangentVector, Tensor3, Vector, VectorField,
};
use crate::sampling::{random_orthogonal, random_tangent, random_unit};

/// Tolerance on J² = −Id and tangency for validated structures.
pub const ACS_TOL: f64 = 1e-10;

/// Field y ↦ J_y of complex structures on the tangent spaces of Sⁿ.
pub trait AcsField: Send + Sync {
    /// n + 1.
    fn ambient_dim(&self) -> usize;

    /// J_y extended by J_y(y) = 0. `y` need not be normalised.
    fn matrix(&self, y: &Vector) -> Matrix;

    fn label(&self) -> String;

    fn sphere_dim(&self) -> usize {
        self.ambient_dim() - 1
    }
}

pub type AcsRef = Arc<dyn AcsField>;

/// J_y(v) = v·y in Im A, for A = ℍ (S²) or 𝕆 (S⁶).
#[derive(Debug, Clone, Copy)]
pub struct OctonionicAcs {
    level: AlgebraLevel,
}

impl OctonionicAcs {
    pub fn new(level: AlgebraLevel) -> Result<Self> {
        if level < AlgebraLevel::QUATERNION {
            return usage("right-multiplication structures need level 2 (S²) or 3 (S⁶)");
        }
        Ok(OctonionicAcs { level })
    }

    pub fn level(&self) -> AlgebraLevel {
        self.level
    }
}

impl AcsField for OctonionicAcs {
    fn ambient_dim(&self) -> usize {
        self.level.imaginary_dim()
    }

    fn matrix(&self, y: &Vector) -> Matrix {
        let y = y / y.norm();
        let m = self.ambient_dim();
        let ya = Element::imaginary(self.level, y.as_slice()).expect("dimension fixed by level");
        let r = right_matrix(&ya);
        r.view((1, 1), (m, m)) * tangent_projector(&y)
    }

    fn label(&self) -> String {
        format!("{}-right-multiplication", self.level.name())
    }
}

/// J^g_y = g ∘ J_{g⁻¹y} ∘ g⁻¹ for an orthogonal g.
#[derive(Clone)]
pub struct RotatedAcs {
    base: AcsRef,
    g: Matrix,
}

impl RotatedAcs {
    pub fn new(base: AcsRef, g: Matrix) -> Result<Self> {
        let m = base.ambient_dim();
        if g.nrows() != m || g.ncols() != m {
            return usage(format!("rotation must be {m}x{m}"));
        }
        let defect = (g.tr_mul(&g) - Matrix::identity(m, m)).amax();
        if defect > 1e-10 {
            return Err(LabError::Validation(format!(
                "rotation is not orthogonal (|gᵀg − I| = {defect:e})"
            )));
        }
        Ok(RotatedAcs { base, g })
    }

    /// Rotation drawn from the seeded Haar-like QR construction.
    pub fn random(base: AcsRef, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_orthogonal(&mut rng, base.ambient_dim());
        RotatedAcs { base, g }
    }

    pub fn rotation(&self) -> &Matrix {
        &self.g
    }
}

impl AcsField for RotatedAcs {
    fn ambient_dim(&self) -> usize {
        self.base.ambient_dim()
    }

    fn matrix(&self, y: &Vector) -> Matrix {
        let pulled = self.g.tr_mul(y);
        &self.g * self.base.matrix(&pulled) * self.g.transpose()
    }

    fn label(&self) -> String {
        format!("rotated({})", self.base.label())
    }
}

/// Any structure that passed [`validate_acs`].
pub struct ValidatedAcs {
    inner: AcsRef,
    pub residuals: AcsResiduals,
}

impl ValidatedAcs {
    /// Accepts `inner` only if J² = −Id and tangency hold to [`ACS_TOL`] at
    /// `samples` seeded random points.
    pub fn new(inner: AcsRef, samples: usize, seed: u64) -> Result<Self> {
        let residuals = validate_acs(inner.as_ref(), samples, seed);
        if residuals.square > ACS_TOL || residuals.tangency > ACS_TOL {
            return Err(LabError::Validation(format!(
                "{}: |J² + Id| = {:e}, tangency = {:e}",
                inner.label(),
                residuals.square,
                residuals.tangency
            )));
        }
        Ok(ValidatedAcs { inner, residuals })
    }
}

impl AcsField for ValidatedAcs {
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }
    fn matrix(&self, y: &Vector) -> Matrix {
        self.inner.matrix(y)
    }
    fn label(&self) -> String {
        self.inner.label()
    }
}

/// Largest violations of the defining identities over a sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct AcsResiduals {
    /// max |J_y² + P_y|.
    pub square: f64,
    /// max of |J_y y| and |yᵀJ_y|.
    pub tangency: f64,
    /// max |J_yᵀJ_y − P_y|; zero for hermitian structures.
    pub hermitian: f64,
}

pub fn residuals_at(j: &dyn AcsField, y: &Vector) -> AcsResiduals {
    let y = y / y.norm();
    let jm = j.matrix(&y);
    let p = tangent_projector(&y);
    AcsResiduals {
        square: (&jm * &jm + &p).amax(),
        tangency: (&jm * &y).amax().max((y.transpose() * &jm).amax()),
        hermitian: (jm.tr_mul(&jm) - p).amax(),
    }
}

pub fn validate_acs(j: &dyn AcsField, samples: usize, seed: u64) -> AcsResiduals {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = AcsResiduals::default();
    for _ in 0..samples {
        let y = random_unit(&mut rng, j.ambient_dim());
        let r = residuals_at(j, &y);
        worst.square = worst.square.max(r.square);
        worst.tangency = worst.tangency.max(r.tangency);
        worst.hermitian = worst.hermitian.max(r.hermitian);
    }
    worst
}

/// True when J_y is orthogonal on T_y at every sampled point.
pub fn is_hermitian(j: &dyn AcsField, samples: usize, seed: u64) -> bool {
    validate_acs(j, samples, seed).hermitian <= ACS_TOL
}

/// J_y(v) for v ∈ T_ySⁿ.
pub fn acs_apply(j: &dyn AcsField, v: &TangentVector) -> Result<TangentVector> {
    let y = v.base.as_vector();
    if y.len() != j.ambient_dim() {
        return usage(format!(
            "structure lives in R^{}, vector in R^{}",
            j.ambient_dim(),
            y.len()
        ));
    }
    TangentVector::new(v.base.clone(), j.matrix(y) * &v.v)
}

/// p ↦ J_p X(p).
struct JField<'a> {
    j: &'a dyn AcsField,
    x: &'a dyn VectorField,
}

impl VectorField for JField<'_> {
    fn ambient_dim(&self) -> usize {
        self.x.ambient_dim()
    }
    fn eval(&self, p: &Vector) -> Vector {
        self.j.matrix(p) * self.x.eval(p)
    }
}

/// Field p ↦ (I − ppᵀ)w.
pub fn projected_constant_field(w: Vector) -> FieldRef {
    let dim = w.len();
    Arc::new(FnField::new(dim, move |p: &Vector| project(p, &w)))
}

/// N(b, c) at a, extending b and c by constant ambient vectors projected to
/// the tangent spaces.
pub fn nijenhuis_fd(
    j: &dyn AcsField,
    a: &SpherePoint,
    b: &TangentVector,
    c: &TangentVector,
    params: &FdParams,
) -> Result<TangentVector> {
    let x = projected_constant_field(b.v.clone());
    let y = projected_constant_field(c.v.clone());
    nijenhuis_fd_fields(j, a, x.as_ref(), y.as_ref(), params)
}

/// N(X, Y) = [JX,JY] − [X,Y] − J[X,JY] − J[JX,Y] at a, expanded as
///
/// ```text
/// d(JY)(JX) − d(JX)(JY) − dY(X) + dX(Y)
///   − J(d(JY)(X) − dX(JY)) − J(dY(JX) − d(JX)(Y))
/// ```
///
/// with every differential a central difference of the radial extension.
pub fn nijenhuis_fd_fields(
    j: &dyn AcsField,
    a: &SpherePoint,
    x: &dyn VectorField,
    y: &dyn VectorField,
    params: &FdParams,
) -> Result<TangentVector> {
    params.check()?;
    let p = a.as_vector();
    if p.len() != j.ambient_dim() || x.ambient_dim() != p.len() || y.ambient_dim() != p.len() {
        return usage("dimension mismatch between structure, point and fields");
    }
    let h = params.h;
    let jx = JField { j, x };
    let jy = JField { j, x: y };
    let ja = j.matrix(p);
    let xv = x.eval(p);
    let yv = y.eval(p);
    let jxv = &ja * &xv;
    let jyv = &ja * &yv;
    let d = |f: &dyn VectorField, v: &Vector| directional_fd(f, p, v, h);

    let n = d(&jy, &jxv) - d(&jx, &jyv) - d(y, &xv) + d(x, &yv)
        - &ja * (d(&jy, &xv) - d(x, &jyv))
        - &ja * (d(y, &jxv) - d(&jx, &yv));
    Ok(TangentVector {
        base: a.clone(),
        v: project(p, &n),
    })
}

/// Chart components J^i_j(u) = (dφ J_x dψ)(u).
pub fn acs_chart_matrix(j: &dyn AcsField, chart: &Chart, u: &Vector) -> Matrix {
    let x = chart.inverse(u);
    chart.jacobian_forward(&x) * j.matrix(&x) * chart.jacobian_inverse(u)
}

fn check_chart_point(chart: &Chart, u: &Vector, params: &FdParams) -> Result<()> {
    params.check()?;
    let x = chart.inverse(u);
    if !u.iter().all(|c| c.is_finite()) || !chart.contains(&x, params.eps_pole) {
        return Err(LabError::Degenerate {
            point: x.as_slice().to_vec(),
            detail: "chart point inside the excluded cap around the pole".into(),
        });
    }
    Ok(())
}

/// ∂J/∂u_l for every chart direction l.
fn chart_derivatives(j: &dyn AcsField, chart: &Chart, u: &Vector, h: f64) -> Vec<Matrix> {
    (0..chart.dim())
        .map(|l| fd_partial_matrix(|w| acs_chart_matrix(j, chart, w), u, l, h))
        .collect()
}

/// N^i_jk = Σ_l J^l_j(∂_l J^i_k − ∂_k J^i_l) − J^l_k(∂_l J^i_j − ∂_j J^i_l).
pub fn nijenhuis_chart(j: &dyn AcsField, chart: &Chart, u: &Vector, params: &FdParams) -> Result<Tensor3> {
    check_chart_point(chart, u, params)?;
    let m = chart.dim();
    let jm = acs_chart_matrix(j, chart, u);
    let dj = chart_derivatives(j, chart, u, params.h);
    let mut n = Tensor3::zeros(m);
    for i in 0..m {
        for jj in 0..m {
            for k in 0..m {
                let mut s = 0.0;
                for l in 0..m {
                    s += jm[(l, jj)] * (dj[l][(i, k)] - dj[k][(i, l)])
                        - jm[(l, k)] * (dj[l][(i, jj)] - dj[jj][(i, l)]);
                }
                n.set(i, jj, k, s);
            }
        }
    }
    Ok(n)
}

/// τ^i_jk = Σ_{p,q} (δ^p_j δ^q_k − J^p_j J^q_k)(∂_p J^i_q − ∂_q J^i_p).
pub fn tau_chart(j: &dyn AcsField, chart: &Chart, u: &Vector, params: &FdParams) -> Result<Tensor3> {
    check_chart_point(chart, u, params)?;
    let m = chart.dim();
    let jm = acs_chart_matrix(j, chart, u);
    let dj = chart_derivatives(j, chart, u, params.h);
    let mut tau = Tensor3::zeros(m);
    for i in 0..m {
        let curl = Matrix::from_fn(m, m, |p, q| dj[p][(i, q)] - dj[q][(i, p)]);
        let t = &curl - jm.transpose() * &curl * &jm;
        for jj in 0..m {
            for k in 0..m {
                tau.set(i, jj, k, t[(jj, k)]);
            }
        }
    }
    Ok(tau)
}

/// −Σ_r J^r_j N^i_rk.
pub fn tau_from_nijenhuis(jm: &Matrix, n: &Tensor3) -> Tensor3 {
    let m = n.dim();
    let mut out = Tensor3::zeros(m);
    for i in 0..m {
        for jj in 0..m {
            for k in 0..m {
                let s: f64 = (0..m).map(|r| jm[(r, jj)] * n.get(i, r, k)).sum();
                out.set(i, jj, k, -s);
            }
        }
    }
    out
}

/// Components (w(∂_j, ∂_k)) of the 2-form (dJdJ − JdJd)f at u, where J acts
/// on forms by (Jw)(X₁, …) = w(JX₁, …) and fixes functions.
pub fn calabi_defect<F>(j: &dyn AcsField, f: F, chart: &Chart, u: &Vector, params: &FdParams) -> Result<Matrix>
where
    F: Fn(&Vector) -> f64,
{
    check_chart_point(chart, u, params)?;
    let m = chart.dim();
    let h = params.h;
    let grad = |w: &Vector| {
        Vector::from_fn(m, |i, _| {
            let mut up = w.clone();
            let mut dn = w.clone();
            up[i] += h;
            dn[i] -= h;
            (f(&up) - f(&dn)) / (2.0 * h)
        })
    };
    // J(df): α_q = Σ_i ∂_i f J^i_q.
    let alpha = |w: &Vector| acs_chart_matrix(j, chart, w).tr_mul(&grad(w));
    let dalpha_cols: Vec<Vector> = (0..m)
        .map(|p| {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[p] += h;
            dn[p] -= h;
            (alpha(&up) - alpha(&dn)) / (2.0 * h)
        })
        .collect();
    // dα_pq = ∂_p α_q − ∂_q α_p.
    let d_alpha = Matrix::from_fn(m, m, |p, q| dalpha_cols[p][q] - dalpha_cols[q][p]);
    let jm = acs_chart_matrix(j, chart, u);
    Ok(&d_alpha - jm.transpose() * &d_alpha * &jm)
}

/// Evaluates a chart tensor N on ambient tangent vectors b, c at x and pushes
/// the result back to the ambient space.
pub fn tensor_to_ambient(chart: &Chart, x: &Vector, t: &Tensor3, b: &Vector, c: &Vector) -> Vector {
    let df = chart.jacobian_forward(x);
    let bu = &df * b;
    let cu = &df * c;
    let m = t.dim();
    let out = Vector::from_fn(m, |i, _| {
        let mut s = 0.0;
        for jj in 0..m {
            for k in 0..m {
                s += t.get(i, jj, k) * bu[jj] * cu[k];
            }
        }
        s
    });
    chart.jacobian_inverse(&chart.forward(x)) * out
}

/// Random tangent pair at a random point, for samplers.
pub fn random_tangent_triple<R: rand::Rng>(rng: &mut R, dim: usize) -> (SpherePoint, TangentVector, TangentVector) {
    let a = SpherePoint::new(random_unit(rng, dim)).expect("unit vector");
    let b = random_tangent(rng, &a);
    let c = random_tangent(rng, &a);
    (a, b, c)
}
