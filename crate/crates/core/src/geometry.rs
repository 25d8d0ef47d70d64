//! Points, tangent vectors, stereographic charts and finite-difference
//! calculus on unit spheres embedded in Euclidean space.
//!
//! Vector fields are ambient-valued maps. For differentiation every field is
//! extended radially, X̃(x) = X(x/‖x‖), so that central differences taken
//! slightly off the sphere see the same values as on it. Lie brackets use
//! [X, Y] = dY(X) − dX(Y).

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{usage, LabError, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Default central-difference step for first derivatives.
pub const DEFAULT_H: f64 = 1e-5;
/// Default radius of the excluded caps around ±e on the frame sphere.
pub const DEFAULT_EPS_POLE: f64 = 1e-3;
/// Tolerance for [`TangentVector::new`].
pub const TANGENCY_TOL: f64 = 1e-10;
/// Below this β the decomposition x = αe + βy falls back to y = e₁.
pub const POLE_FALLBACK: f64 = 1e-14;

/// Finite-difference step and pole-exclusion radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdParams {
    pub h: f64,
    pub eps_pole: f64,
}

impl Default for FdParams {
    fn default() -> Self {
        FdParams {
            h: DEFAULT_H,
            eps_pole: DEFAULT_EPS_POLE,
        }
    }
}

impl FdParams {
    pub fn with_h(h: f64) -> Self {
        FdParams {
            h,
            ..Default::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return usage(format!("finite-difference step must be positive, got {}", self.h));
        }
        if !(self.eps_pole >= 0.0 && self.eps_pole.is_finite()) {
            return usage(format!("eps_pole must be nonnegative, got {}", self.eps_pole));
        }
        Ok(())
    }
}

pub fn unit_vector(dim: usize, index: usize) -> Vector {
    let mut v = Vector::zeros(dim);
    v[index] = 1.0;
    v
}

/// Unit vector of ℝ^{n+1}; renormalised on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(Vector);

impl SpherePoint {
    pub fn new(x: Vector) -> Result<Self> {
        let n = x.norm();
        if !(n > 0.0 && n.is_finite()) {
            return usage("cannot place the zero vector on the sphere");
        }
        Ok(SpherePoint(x / n))
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        Self::new(Vector::from_column_slice(x))
    }

    pub fn as_vector(&self) -> &Vector {
        &self.0
    }

    pub fn into_vector(self) -> Vector {
        self.0
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.len()
    }

    /// Great-circle distance.
    pub fn angle_to(&self, other: &Vector) -> f64 {
        let c = self.0.dot(other) / other.norm();
        c.clamp(-1.0, 1.0).acos()
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| format!("{c:.6}")).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Ambient vector tangent to the sphere at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: SpherePoint,
    pub v: Vector,
}

impl TangentVector {
    pub fn new(base: SpherePoint, v: Vector) -> Result<Self> {
        if v.len() != base.ambient_dim() {
            return usage(format!(
                "tangent vector has {} components, base point has {}",
                v.len(),
                base.ambient_dim()
            ));
        }
        let d = v.dot(base.as_vector());
        if d.abs() > TANGENCY_TOL * v.norm().max(1.0) {
            return usage(format!("vector is not tangent: <v, x> = {d:e}"));
        }
        Ok(TangentVector { base, v })
    }

    pub fn norm(&self) -> f64 {
        self.v.norm()
    }
}

/// v = w − ⟨w, x⟩x.
pub fn project_tangent(x: &SpherePoint, w: &Vector) -> TangentVector {
    TangentVector {
        base: x.clone(),
        v: project(x.as_vector(), w),
    }
}

pub(crate) fn project(x: &Vector, w: &Vector) -> Vector {
    w - x * x.dot(w)
}

/// Orthogonal projector I − xxᵀ onto T_xSⁿ.
pub fn tangent_projector(x: &Vector) -> Matrix {
    Matrix::identity(x.len(), x.len()) - x * x.transpose()
}

/// x = αe + βy with β ≥ 0 and y a unit vector orthogonal to e.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub alpha: f64,
    pub beta: f64,
    pub y: Vector,
    /// True when β was too small to define y and the fallback e₁ was used.
    pub fallback: bool,
}

/// Splits `x` along the distinguished unit vector `e`. Total: at β = 0 the
/// direction y is meaningless and is set to the first coordinate vector not
/// parallel to `e`; every consumer multiplies y by β, so the choice is inert.
pub fn decompose(x: &Vector, e: &Vector) -> Decomposition {
    let alpha = x.dot(e);
    let rest = x - e * alpha;
    let beta = rest.norm();
    if beta <= POLE_FALLBACK * x.norm().max(1.0) {
        let first = if e[0].abs() > 0.5 { 1 } else { 0 };
        let y = project(e, &unit_vector(x.len(), first)).normalize();
        return Decomposition {
            alpha,
            beta: 0.0,
            y,
            fallback: true,
        };
    }
    Decomposition {
        alpha,
        beta,
        y: rest / beta,
        fallback: false,
    }
}

/// Orthonormal basis of n^⊥ as matrix columns. For ±(coordinate vector) the
/// remaining coordinate vectors are returned in order.
pub fn orthonormal_complement(n: &Vector) -> Matrix {
    let dim = n.len();
    let nn = n.normalize();
    if let Some(k) = (0..dim).find(|&k| (nn[k].abs() - 1.0).abs() < 1e-15) {
        let cols: Vec<Vector> = (0..dim).filter(|&c| c != k).map(|c| unit_vector(dim, c)).collect();
        return Matrix::from_columns(&cols);
    }
    // Householder reflection sending the last coordinate vector to n.
    let v = unit_vector(dim, dim - 1) - &nn;
    let h = Matrix::identity(dim, dim) - (&v * v.transpose()) * (2.0 / v.norm_squared());
    h.columns(0, dim - 1).into_owned()
}

/// Ambient-valued vector field on a sphere.
pub trait VectorField: Send + Sync {
    /// Dimension of the ambient space.
    fn ambient_dim(&self) -> usize;

    /// Value at a point of the sphere.
    fn eval(&self, p: &Vector) -> Vector;

    /// Points where the field is not smooth.
    fn singular_points(&self) -> Vec<Vector> {
        Vec::new()
    }

    /// Radial extension X̃(x) = X(x/‖x‖).
    fn eval_radial(&self, x: &Vector) -> Vector {
        self.eval(&(x / x.norm()))
    }
}

pub type FieldRef = Arc<dyn VectorField>;

/// Closure-backed vector field.
pub struct FnField<F> {
    dim: usize,
    f: F,
    singular: Vec<Vector>,
}

impl<F> FnField<F>
where
    F: Fn(&Vector) -> Vector + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnField {
            dim,
            f,
            singular: Vec::new(),
        }
    }

    pub fn with_singular_points(mut self, points: Vec<Vector>) -> Self {
        self.singular = points;
        self
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(&Vector) -> Vector + Send + Sync,
{
    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, p: &Vector) -> Vector {
        (self.f)(p)
    }

    fn singular_points(&self) -> Vec<Vector> {
        self.singular.clone()
    }
}

/// Tangential restriction of a linear map: p ↦ (I − ppᵀ)Ap.
pub fn linear_field(a: Matrix) -> FnField<impl Fn(&Vector) -> Vector + Send + Sync> {
    let dim = a.nrows();
    FnField::new(dim, move |p: &Vector| project(p, &(&a * p)))
}

/// Central-difference derivative of the radially extended field along v.
pub fn directional_fd(field: &dyn VectorField, p: &Vector, v: &Vector, h: f64) -> Vector {
    let plus = field.eval_radial(&(p + v * h));
    let minus = field.eval_radial(&(p - v * h));
    (plus - minus) / (2.0 * h)
}

fn check_singular(fields: &[&dyn VectorField], p: &SpherePoint, eps: f64) -> Result<()> {
    for f in fields {
        for s in f.singular_points() {
            if p.angle_to(&s) <= eps {
                return usage(format!(
                    "point {p} lies within eps_pole = {eps} of a singular point"
                ));
            }
        }
    }
    Ok(())
}

/// [X, Y](p) = dY(X) − dX(Y), projected to T_pSⁿ.
pub fn lie_bracket_fd(
    x: &dyn VectorField,
    y: &dyn VectorField,
    p: &SpherePoint,
    params: &FdParams,
) -> Result<TangentVector> {
    params.check()?;
    check_singular(&[x, y], p, params.eps_pole)?;
    let pv = p.as_vector();
    let xv = x.eval(pv);
    let yv = y.eval(pv);
    let raw = directional_fd(y, pv, &xv, params.h) - directional_fd(x, pv, &yv, params.h);
    Ok(project_tangent(p, &raw))
}

/// Central difference (f(u + h·dir) − f(u − h·dir)) / 2h.
pub fn fd_partial<F>(f: F, u: &Vector, dir: &Vector, h: f64) -> f64
where
    F: Fn(&Vector) -> f64,
{
    (f(&(u + dir * h)) - f(&(u - dir * h))) / (2.0 * h)
}

/// ∂M/∂u_axis for a matrix-valued chart function.
pub fn fd_partial_matrix<F>(f: F, u: &Vector, axis: usize, h: f64) -> Matrix
where
    F: Fn(&Vector) -> Matrix,
{
    let mut up = u.clone();
    let mut dn = u.clone();
    up[axis] += h;
    dn[axis] -= h;
    (f(&up) - f(&dn)) / (2.0 * h)
}

/// Stereographic chart of S^m ⊂ ℝ^{m+1} from `pole`, with coordinates taken
/// in an orthonormal basis of pole^⊥.
#[derive(Debug, Clone)]
pub struct Chart {
    pole: Vector,
    basis: Matrix,
}

impl Chart {
    pub fn stereographic(pole: &SpherePoint) -> Self {
        let pole = pole.as_vector().clone();
        let basis = orthonormal_complement(&pole);
        Chart { pole, basis }
    }

    /// Projection from the last coordinate vector.
    pub fn north(ambient_dim: usize) -> Self {
        Self::stereographic(&SpherePoint(unit_vector(ambient_dim, ambient_dim - 1)))
    }

    /// Projection from minus the last coordinate vector.
    pub fn south(ambient_dim: usize) -> Self {
        Self::stereographic(&SpherePoint(-unit_vector(ambient_dim, ambient_dim - 1)))
    }

    pub fn pole(&self) -> &Vector {
        &self.pole
    }

    /// Chart dimension m.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// False inside the cap of angular radius `eps` around the pole.
    pub fn contains(&self, x: &Vector, eps: f64) -> bool {
        let c = x.dot(&self.pole) / x.norm();
        c.clamp(-1.0, 1.0).acos() > eps
    }

    pub fn forward(&self, x: &Vector) -> Vector {
        let s = x.dot(&self.pole);
        self.basis.tr_mul(x) / (1.0 - s)
    }

    pub fn inverse(&self, u: &Vector) -> Vector {
        let r2 = u.norm_squared();
        (&self.basis * u * 2.0 + &self.pole * (r2 - 1.0)) / (r2 + 1.0)
    }

    /// dφ at x as an m × (m+1) matrix.
    pub fn jacobian_forward(&self, x: &Vector) -> Matrix {
        let s = x.dot(&self.pole);
        let bt = self.basis.transpose();
        &bt / (1.0 - s) + (&bt * x) * self.pole.transpose() / ((1.0 - s) * (1.0 - s))
    }

    /// dψ at u as an (m+1) × m matrix.
    pub fn jacobian_inverse(&self, u: &Vector) -> Matrix {
        let r2 = u.norm_squared();
        let x = self.inverse(u);
        let mut jac = Matrix::zeros(self.pole.len(), self.dim());
        for a in 0..self.dim() {
            let col = (self.basis.column(a) * 2.0 + &self.pole * (2.0 * u[a])) / (r2 + 1.0)
                - &x * (2.0 * u[a] / (r2 + 1.0));
            jac.set_column(a, &col);
        }
        jac
    }

    /// Chart components of an ambient tangent vector at x.
    pub fn push_vector(&self, x: &Vector, v: &Vector) -> Vector {
        self.jacobian_forward(x) * v
    }
}

/// Frame components in a chart: `x[(l, j)] = X_jˡ`, `theta = x⁻¹` (rows are coframe elements).
#[derive(Debug, Clone)]
pub struct ChartFrame {
    pub x: Matrix,
    pub theta: Matrix,
}

/// Smallest singular value of the chart frame matrix accepted as nondegenerate.
pub const CHART_DEGENERACY_TOL: f64 = 1e-10;

/// Pushforward components X_jˡ of every frame field at chart point `u`, and
/// the dual coframe θ = (X_jˡ)⁻¹.
pub fn chart_components(frame: &[FieldRef], chart: &Chart, u: &Vector) -> Result<ChartFrame> {
    let m = chart.dim();
    if frame.len() != m {
        return usage(format!("{} fields cannot frame a {m}-dimensional chart", frame.len()));
    }
    let p = chart.inverse(u);
    let df = chart.jacobian_forward(&p);
    let mut x = Matrix::zeros(m, m);
    for (j, field) in frame.iter().enumerate() {
        x.set_column(j, &(&df * field.eval(&p)));
    }
    let sv = x.clone().svd(false, false).singular_values;
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if !(smin > CHART_DEGENERACY_TOL * smax.max(1.0)) {
        return Err(LabError::Degenerate {
            point: p.as_slice().to_vec(),
            detail: format!("chart frame matrix singular (min singular value {smin:e})"),
        });
    }
    let theta = x.clone().try_inverse().ok_or_else(|| LabError::Degenerate {
        point: p.as_slice().to_vec(),
        detail: "chart frame matrix not invertible".into(),
    })?;
    Ok(ChartFrame { x, theta })
}

/// Chart components of a single field.
pub fn chart_vector(field: &dyn VectorField, chart: &Chart, u: &Vector) -> Vector {
    let p = chart.inverse(u);
    chart.push_vector(&p, &field.eval(&p))
}

/// Dense rank-3 array `t[i][j][k]`, all indices in 0..n.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Self {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    /// The vector (t[·][j][k]).
    pub fn fiber(&self, j: usize, k: usize) -> Vector {
        Vector::from_fn(self.n, |i, _| self.get(i, j, k))
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

/// Gram matrix of a list of vectors.
pub fn gram(vectors: &[Vector]) -> Matrix {
    let k = vectors.len();
    Matrix::from_fn(k, k, |a, b| vectors[a].dot(&vectors[b]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    #[test]
    fn projection_examples() {
        let x = SpherePoint::from_slice(&[0.0, 0.6, 0.8]).unwrap();
        assert!(project_tangent(&x, x.as_vector()).v.norm() < 1e-15);
        let t = v(&[1.0, 0.8, -0.6]);
        assert_eq!(project_tangent(&x, &t).v, t);
        let w = v(&[1.0, 2.0, 3.0]);
        let p = project_tangent(&x, &w);
        let d = w.dot(x.as_vector());
        assert!((p.v.norm_squared() - (w.norm_squared() - d * d)).abs() < 1e-12);
        let pp = project_tangent(&x, &p.v);
        assert!((pp.v - &p.v).norm() < 1e-15);
    }

    #[test]
    fn tangent_vector_rejects_normal_component() {
        let x = SpherePoint::from_slice(&[1.0, 0.0]).unwrap();
        assert!(TangentVector::new(x.clone(), v(&[0.0, 1.0])).is_ok());
        assert!(TangentVector::new(x, v(&[0.1, 1.0])).is_err());
    }

    #[test]
    fn decompose_examples() {
        let e = unit_vector(4, 3);
        let d = decompose(&e, &e);
        assert_eq!((d.alpha, d.beta, d.fallback), (1.0, 0.0, true));
        assert_eq!(d.y, unit_vector(4, 0));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = v(&[s, 0.0, 0.0, s]);
        let d = decompose(&x, &e);
        assert!((d.alpha - s).abs() < 1e-15 && (d.beta - s).abs() < 1e-15);
        assert!((d.y - unit_vector(4, 0)).norm() < 1e-15);
        assert!((d.alpha * d.alpha + d.beta * d.beta - 1.0).abs() < 1e-15);
    }

    #[test]
    fn step_must_be_positive() {
        let f = linear_field(Matrix::zeros(3, 3));
        let p = SpherePoint::from_slice(&[1.0, 0.0, 0.0]).unwrap();
        for h in [0.0, -1e-5] {
            let r = lie_bracket_fd(&f, &f, &p, &FdParams::with_h(h));
            assert!(matches!(r, Err(LabError::Usage(_))));
        }
    }

    #[test]
    fn bracket_refuses_singular_neighbourhood() {
        let s = unit_vector(3, 2);
        let f = FnField::new(3, |p: &Vector| project(p, &unit_vector(3, 0)))
            .with_singular_points(vec![s.clone()]);
        let p = SpherePoint::new(v(&[1e-4, 0.0, 1.0])).unwrap();
        assert!(lie_bracket_fd(&f, &f, &p, &FdParams::default()).is_err());
    }

    #[test]
    fn fd_partial_examples() {
        let u = v(&[3.0, -1.0]);
        let d0 = unit_vector(2, 0);
        assert_eq!(fd_partial(|_| 7.0, &u, &d0, 1e-5), 0.0);
        let c = v(&[2.5, -4.0]);
        assert!((fd_partial(|w| c.dot(w), &u, &d0, 1e-5) - 2.5).abs() < 1e-9);
        assert!((fd_partial(|w| w[0] * w[0], &u, &d0, 1e-5) - 6.0).abs() < 1e-9);
    }

    #[test]
    fn chart_roundtrip_and_jacobians() {
        for chart in [Chart::north(4), Chart::south(4), Chart::stereographic(&SpherePoint::from_slice(&[1.0, 2.0, -0.5, 0.3]).unwrap())] {
            let u = v(&[0.3, -1.2, 0.7]);
            let x = chart.inverse(&u);
            assert!((x.norm() - 1.0).abs() < 1e-14);
            assert!((chart.forward(&x) - &u).norm() < 1e-12);
            let prod = chart.jacobian_forward(&x) * chart.jacobian_inverse(&u);
            assert!((prod - Matrix::identity(3, 3)).norm() < 1e-12);
            for a in 0..3 {
                let fd = (chart.inverse(&(&u + unit_vector(3, a) * 1e-6))
                    - chart.inverse(&(&u - unit_vector(3, a) * 1e-6)))
                    / 2e-6;
                assert!((fd - chart.jacobian_inverse(&u).column(a)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn coordinate_field_has_unit_components() {
        let chart = Chart::north(3);
        let field = FnField::new(3, {
            let chart = chart.clone();
            move |p: &Vector| {
                let u = chart.forward(p);
                chart.jacobian_inverse(&u).column(0).into_owned()
            }
        });
        let comps = chart_vector(&field, &chart, &v(&[0.4, -0.3]));
        assert!((comps - unit_vector(2, 0)).norm() < 1e-12);
    }

    #[test]
    fn orthonormal_complement_is_orthonormal() {
        for n in [unit_vector(5, 0), -unit_vector(5, 4), v(&[0.1, -0.2, 0.3, 0.9, 0.2])] {
            let b = orthonormal_complement(&n);
            assert!((b.tr_mul(&b) - Matrix::identity(4, 4)).norm() < 1e-14);
            assert!((b.tr_mul(&n.normalize())).norm() < 1e-14);
        }
    }
}
