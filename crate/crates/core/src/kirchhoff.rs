//! Frames on S^{n+1} built from an almost complex structure on Sⁿ.
//!
//! In ℝ^{n+2} = ℝ^{n+1} ⊕ ℝe (e is the last coordinate) every x splits as
//! x = αe + βy with β ≥ 0 and y ∈ Sⁿ. The structure J_y is extended to
//! J̃_y on ℝ^{n+2} by J̃_y(e) = y and J̃_y(y) = −e, and the frame at x is
//! σ̃ₓ = α·Id + β·J̃_y. Restricted to ℝ^{n+1} it gives n+1 tangent fields
//! on S^{n+1}, smooth away from ±e.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::acs::{AcsField, AcsRef};
use crate::algebra::{AlgebraElement, AlgebraLevel, Element};
use crate::error::{usage, LabError, Result};
use crate::geometry::{
    decompose, gram, orthonormal_complement, project, unit_vector, FieldRef, Matrix, SpherePoint,
    TangentVector, Vector, VectorField,
};
use crate::sampling::random_unit;

/// Tolerance on J̃_y² = −Id accepted by [`extend_j`].
pub const EXTEND_TOL: f64 = 1e-9;
/// Smallest Gram determinant accepted by [`frame_from_multiplication`].
pub const GRAM_DET_MIN: f64 = 1e-8;
/// Points sampled by the independence check of [`frame_from_multiplication`].
pub const INDEPENDENCE_SAMPLES: usize = 100;

/// The distinguished vector e of ℝ^{dim}.
pub fn pole(dim: usize) -> Vector {
    unit_vector(dim, dim - 1)
}

/// J̃_y on ℝ^{n+2}.
#[derive(Debug, Clone)]
pub struct ExtendedJ {
    pub y: Vector,
    pub matrix: Matrix,
}

pub fn extend_j(j: &dyn AcsField, y: &Vector) -> Result<ExtendedJ> {
    let m = j.ambient_dim();
    if y.len() != m {
        return usage(format!("point of S^{} expected, got {} coordinates", m - 1, y.len()));
    }
    if (y.norm() - 1.0).abs() > 1e-10 {
        return usage("extend_j needs a unit vector y");
    }
    let jy = j.matrix(y);
    let mut mat = Matrix::zeros(m + 1, m + 1);
    mat.view_mut((0, 0), (m, m)).copy_from(&jy);
    for c in 0..m {
        mat[(c, m)] = y[c];
        mat[(m, c)] = -y[c];
    }
    let sq = (&mat * &mat + Matrix::identity(m + 1, m + 1)).amax();
    if sq > EXTEND_TOL {
        return Err(LabError::Validation(format!(
            "{} fails J² = −Id at y (residual {sq:e})",
            j.label()
        )));
    }
    Ok(ExtendedJ {
        y: y.clone(),
        matrix: mat,
    })
}

/// σ̃ₓ together with the pieces of the decomposition x = αe + βy.
#[derive(Debug, Clone)]
pub struct KirchhoffFrame {
    pub x: Vector,
    pub alpha: f64,
    pub beta: f64,
    pub y: Vector,
    /// y was set to the fallback because β vanished.
    pub fallback: bool,
    pub j_tilde: ExtendedJ,
    pub sigma_tilde: Matrix,
}

impl KirchhoffFrame {
    /// σ̃ₓ is an isomorphism iff α² + β² = ‖x‖² > 0.
    pub fn is_invertible(&self) -> bool {
        self.alpha * self.alpha + self.beta * self.beta > 0.0
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        &self.sigma_tilde * v
    }
}

/// σ̃ₓ = α·Id + β·J̃_y for any x ∈ ℝ^{n+2}; x = 0 gives the zero map.
pub fn sigma_tilde(j: &dyn AcsField, x: &Vector) -> Result<KirchhoffFrame> {
    let dim = j.ambient_dim() + 1;
    if x.len() != dim {
        return usage(format!("frame sphere lives in R^{dim}, got {} coordinates", x.len()));
    }
    let e = pole(dim);
    let d = decompose(x, &e);
    let y = d.y.rows(0, dim - 1).into_owned();
    let j_tilde = extend_j(j, &y)?;
    let sigma = Matrix::identity(dim, dim) * d.alpha + &j_tilde.matrix * d.beta;
    Ok(KirchhoffFrame {
        x: x.clone(),
        alpha: d.alpha,
        beta: d.beta,
        y,
        fallback: d.fallback,
        j_tilde,
        sigma_tilde: sigma,
    })
}

/// α·Id − β·J̃_y; valid only for x on the unit sphere.
pub fn sigma_inverse(frame: &KirchhoffFrame) -> Result<Matrix> {
    let r = frame.x.norm();
    if (r - 1.0).abs() > 1e-10 {
        return usage(format!("inverse formula needs |x| = 1, got {r}"));
    }
    let dim = frame.x.len();
    Ok(Matrix::identity(dim, dim) * frame.alpha - &frame.j_tilde.matrix * frame.beta)
}

/// Xᵢ(x) = x_{n+2}eᵢ − xᵢe + β·J_y(eᵢ − ⟨y, eᵢ⟩y), for index i in 0..=n.
pub fn frame_field(j: &dyn AcsField, index: usize, x: &SpherePoint) -> Result<TangentVector> {
    let m = j.ambient_dim();
    if index >= m {
        return usage(format!("frame index {} out of range 1..={m}", index + 1));
    }
    if x.ambient_dim() != m + 1 {
        return usage(format!("frame sphere lives in R^{}, got {}", m + 1, x.ambient_dim()));
    }
    Ok(TangentVector {
        base: x.clone(),
        v: frame_field_value(j, index, x.as_vector()),
    })
}

fn frame_field_value(j: &dyn AcsField, index: usize, x: &Vector) -> Vector {
    let m = j.ambient_dim();
    let d = decompose(x, &pole(m + 1));
    let y = d.y.rows(0, m).into_owned();
    let mut out = Vector::zeros(m + 1);
    out[index] += x[m];
    out[m] -= x[index];
    if d.beta > 0.0 {
        let w = unit_vector(m, index) - &y * y[index];
        let jw = j.matrix(&y) * w * d.beta;
        let mut top = out.rows_mut(0, m);
        top += &jw;
    }
    out
}

/// The i-th Kirchhoff frame field as a [`VectorField`] on S^{n+1}.
pub struct KirchhoffField {
    acs: AcsRef,
    index: usize,
}

impl KirchhoffField {
    pub fn new(acs: AcsRef, index: usize) -> Result<Self> {
        if index >= acs.ambient_dim() {
            return usage(format!("frame index {} out of range", index + 1));
        }
        Ok(KirchhoffField { acs, index })
    }
}

impl VectorField for KirchhoffField {
    fn ambient_dim(&self) -> usize {
        self.acs.ambient_dim() + 1
    }

    fn eval(&self, p: &Vector) -> Vector {
        frame_field_value(self.acs.as_ref(), self.index, p)
    }

    fn singular_points(&self) -> Vec<Vector> {
        let e = pole(self.ambient_dim());
        vec![e.clone(), -e]
    }
}

/// All n+1 Kirchhoff fields of `acs`.
pub fn kirchhoff_frame(acs: &AcsRef) -> Vec<FieldRef> {
    (0..acs.ambient_dim())
        .map(|i| Arc::new(KirchhoffField { acs: acs.clone(), index: i }) as FieldRef)
        .collect()
}

/// Map ν(v, z), linear in v.
pub type Multiplication = Arc<dyn Fn(&Vector, &Vector) -> Vector + Send + Sync>;

struct MultiplicationField {
    nu: Multiplication,
    direction: Vector,
    dim: usize,
    singular: Vec<Vector>,
}

impl VectorField for MultiplicationField {
    fn ambient_dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, p: &Vector) -> Vector {
        project(p, &(self.nu)(&self.direction, p))
    }

    fn singular_points(&self) -> Vec<Vector> {
        self.singular.clone()
    }
}

/// The k fields z ↦ ν(bᵢ, z) projected to T_zSⁿ, where b₁..b_k span the
/// orthogonal complement of the identity `e` of ν.
///
/// ν(e, z) = z and linear independence (Gram determinant above
/// [`GRAM_DET_MIN`]) are checked at [`INDEPENDENCE_SAMPLES`] seeded points;
/// a failure reports the witness point.
pub fn frame_from_multiplication(
    nu: Multiplication,
    identity: &Vector,
    target_dim: usize,
    k: usize,
    singular_points: &[Vector],
    seed: u64,
) -> Result<Vec<FieldRef>> {
    if identity.len() != k + 1 {
        return usage(format!(
            "identity lives in R^{}, expected R^{} for k = {k}",
            identity.len(),
            k + 1
        ));
    }
    if (identity.norm() - 1.0).abs() > 1e-12 {
        return usage("identity of the multiplication must be a unit vector");
    }
    let basis = orthonormal_complement(identity);
    let fields: Vec<FieldRef> = (0..k)
        .map(|i| {
            Arc::new(MultiplicationField {
                nu: nu.clone(),
                direction: basis.column(i).into_owned(),
                dim: target_dim,
                singular: singular_points.to_vec(),
            }) as FieldRef
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    while checked < INDEPENDENCE_SAMPLES {
        let z = random_unit(&mut rng, target_dim);
        if singular_points.iter().any(|s| (s - &z).norm() < 1e-6) {
            continue;
        }
        checked += 1;
        let ez = nu(identity, &z);
        if (&ez - &z).amax() > 1e-10 {
            return Err(LabError::Validation(format!(
                "ν(e, z) ≠ z at {:?} (deviation {:e})",
                z.as_slice(),
                (&ez - &z).amax()
            )));
        }
        let values: Vec<Vector> = fields.iter().map(|f| f.eval(&z)).collect();
        let det = gram(&values).determinant();
        if !(det > GRAM_DET_MIN) {
            return Err(LabError::Degenerate {
                point: z.as_slice().to_vec(),
                detail: format!("Gram determinant {det:e} of the {k} fields"),
            });
        }
    }
    Ok(fields)
}

/// Layout vector of ℝ^{dim} as an algebra element: last coordinate ↦ 1,
/// coordinate c ↦ e_{c+1}.
pub fn to_algebra(level: AlgebraLevel, x: &Vector) -> AlgebraElement {
    let d = level.dim();
    let mut coords = Vec::with_capacity(d);
    coords.push(x[d - 1]);
    coords.extend(x.iter().take(d - 1));
    Element::from_coords(level, coords).expect("layout dimension equals algebra dimension")
}

pub fn from_algebra(a: &AlgebraElement) -> Vector {
    let c = a.coords();
    let d = c.len();
    Vector::from_fn(d, |i, _| if i + 1 == d { c[0] } else { c[i + 1] })
}

/// An algebra-coordinate matrix rewritten in the layout basis.
pub fn algebra_matrix_to_layout(m: &Matrix) -> Matrix {
    let d = m.nrows();
    let to_alg = |i: usize| if i + 1 == d { 0 } else { i + 1 };
    Matrix::from_fn(d, d, |r, c| m[(to_alg(r), to_alg(c))])
}

/// ν(v, z) = v·z in the layout coordinates.
pub fn classical_multiplication(level: AlgebraLevel) -> Multiplication {
    Arc::new(move |v: &Vector, z: &Vector| {
        from_algebra(&(&to_algebra(level, v) * &to_algebra(level, z)))
    })
}

/// ν(v, z) = σ̃_z(v).
pub fn kirchhoff_multiplication(acs: AcsRef) -> Multiplication {
    Arc::new(move |v: &Vector, z: &Vector| {
        sigma_tilde(acs.as_ref(), z)
            .map(|f| f.apply(v))
            .expect("dimension checked by caller")
    })
}

/// Left-multiplication frame Xᵢ(x) = eᵢx on S^{dim−1}.
pub fn classical_frame(level: AlgebraLevel) -> Result<Vec<FieldRef>> {
    let d = level.dim();
    frame_from_multiplication(classical_multiplication(level), &pole(d), d, d - 1, &[], 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acs::OctonionicAcs;

    fn octonionic() -> OctonionicAcs {
        OctonionicAcs::new(AlgebraLevel::OCTONION).unwrap()
    }

    #[test]
    fn extended_j_examples() {
        let j = octonionic();
        let y = Vector::from_column_slice(&[0.0, 0.6, 0.0, 0.8, 0.0, 0.0, 0.0]);
        let jt = extend_j(&j, &y).unwrap();
        let e = pole(8);
        let mut y8 = Vector::zeros(8);
        y8.rows_mut(0, 7).copy_from(&y);
        assert!((&jt.matrix * &e - &y8).norm() < 1e-15);
        assert!((&jt.matrix * &y8 + &e).norm() < 1e-15);
        assert!((&jt.matrix * &jt.matrix + Matrix::identity(8, 8)).amax() < 1e-10);
    }

    #[test]
    fn frame_at_pole_is_identity() {
        let j = octonionic();
        let f = sigma_tilde(&j, &pole(8)).unwrap();
        assert!(f.fallback);
        assert_eq!(f.sigma_tilde, Matrix::identity(8, 8));
        assert_eq!(sigma_inverse(&f).unwrap(), Matrix::identity(8, 8));
        let e = SpherePoint::new(pole(8)).unwrap();
        for i in 0..7 {
            assert_eq!(frame_field(&j, i, &e).unwrap().v, unit_vector(8, i));
        }
    }

    #[test]
    fn zero_vector_gives_zero_map() {
        let j = octonionic();
        let f = sigma_tilde(&j, &Vector::zeros(8)).unwrap();
        assert!(!f.is_invertible());
        assert_eq!(f.sigma_tilde.amax(), 0.0);
        assert!(sigma_inverse(&f).is_err());
    }

    #[test]
    fn inverse_at_equator_is_minus_j_tilde() {
        let j = octonionic();
        let mut x = Vector::zeros(8);
        x[2] = 1.0;
        let f = sigma_tilde(&j, &x).unwrap();
        assert_eq!((f.alpha, f.beta), (0.0, 1.0));
        assert!((sigma_inverse(&f).unwrap() + &f.j_tilde.matrix).amax() < 1e-15);
    }

    #[test]
    fn inverse_requires_unit_point() {
        let j = octonionic();
        let f = sigma_tilde(&j, &(pole(8) * 2.0)).unwrap();
        assert!(matches!(sigma_inverse(&f), Err(LabError::Usage(_))));
    }

    #[test]
    fn frame_index_out_of_range() {
        let j = octonionic();
        let x = SpherePoint::new(pole(8)).unwrap();
        assert!(frame_field(&j, 7, &x).is_err());
    }

    #[test]
    fn degenerate_multiplication_reports_witness() {
        // ν(v, z) = v₀-component only: all non-identity fields vanish.
        let nu: Multiplication = Arc::new(|v: &Vector, z: &Vector| z * v[3]);
        let r = frame_from_multiplication(nu, &pole(4), 4, 3, &[], 1);
        assert!(matches!(r, Err(LabError::Degenerate { .. })));
    }

    #[test]
    fn layout_roundtrip() {
        let x = Vector::from_column_slice(&[1.0, 2.0, 3.0, 4.0]);
        let a = to_algebra(AlgebraLevel::QUATERNION, &x);
        assert_eq!(a.coords(), &[4.0, 1.0, 2.0, 3.0]);
        assert_eq!(from_algebra(&a), x);
    }
}
