use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kirchhoff_core::acs::{AcsRef, OctonionicAcs, RotatedAcs};
use kirchhoff_core::algebra::AlgebraLevel;
use kirchhoff_core::geometry::{gram, Matrix, SpherePoint, Vector};
use kirchhoff_core::kirchhoff::{
    classical_frame, extend_j, frame_from_multiplication, kirchhoff_frame, kirchhoff_multiplication,
    pole, sigma_inverse, sigma_tilde, Multiplication,
};
use kirchhoff_core::sampling::{random_gaussian, random_unit};
use kirchhoff_core::LabError;

fn models() -> Vec<AcsRef> {
    let o: AcsRef = Arc::new(OctonionicAcs::new(AlgebraLevel::OCTONION).unwrap());
    vec![
        Arc::new(OctonionicAcs::new(AlgebraLevel::QUATERNION).unwrap()),
        o.clone(),
        Arc::new(RotatedAcs::random(o, 3)),
    ]
}

#[test]
fn extended_structure_squares_to_minus_identity() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for acs in models() {
        let m = acs.ambient_dim();
        for _ in 0..100 {
            let y = random_unit(&mut r, m);
            let jt = extend_j(acs.as_ref(), &y).unwrap();
            assert!((&jt.matrix * &jt.matrix + Matrix::identity(m + 1, m + 1)).amax() < 1e-12);
            let mut e_image = Vector::zeros(m + 1);
            e_image.rows_mut(0, m).copy_from(&y);
            assert!((&jt.matrix * pole(m + 1) - e_image).amax() < 1e-15);
        }
    }
}

#[test]
fn frames_are_orthonormal_for_hermitian_structures() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    for acs in models() {
        let dim = acs.ambient_dim() + 1;
        let frame = kirchhoff_frame(&acs);
        for _ in 0..200 {
            let x = random_unit(&mut r, dim);
            let cols: Vec<Vector> = frame.iter().map(|f| f.eval(&x)).collect();
            assert!((gram(&cols) - Matrix::identity(dim - 1, dim - 1)).amax() < 1e-10);
            for c in &cols {
                assert!(c.dot(&x).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn sigma_scales_norms_and_inverts_on_the_sphere() {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    for acs in models() {
        let dim = acs.ambient_dim() + 1;
        for _ in 0..100 {
            let x = random_gaussian(&mut r, dim);
            let v = random_gaussian(&mut r, dim);
            let f = sigma_tilde(acs.as_ref(), &x).unwrap();
            assert!(f.is_invertible());
            assert!((f.apply(&v).norm() - x.norm() * v.norm()).abs() < 1e-12);
            assert!(sigma_inverse(&f).is_err() || (x.norm() - 1.0).abs() < 1e-10);
            let unit = sigma_tilde(acs.as_ref(), &x.normalize()).unwrap();
            let inv = sigma_inverse(&unit).unwrap();
            assert!((inv * unit.apply(&v) - &v).amax() < 1e-12);
        }
    }
}

#[test]
fn octonionic_kirchhoff_frame_is_the_left_multiplication_frame() {
    let level = AlgebraLevel::OCTONION;
    let acs: AcsRef = Arc::new(OctonionicAcs::new(level).unwrap());
    let kf = kirchhoff_frame(&acs);
    let cf = classical_frame(level).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let x = random_unit(&mut r, 8);
        for (a, b) in kf.iter().zip(&cf) {
            assert!((a.eval(&x) - b.eval(&x)).amax() < 1e-12);
        }
    }
}

#[test]
fn multiplication_route_reproduces_the_frame() {
    for acs in models() {
        let dim = acs.ambient_dim() + 1;
        let e = pole(dim);
        let fields = frame_from_multiplication(
            kirchhoff_multiplication(acs.clone()),
            &e,
            dim,
            dim - 1,
            &[e.clone(), -e.clone()],
            42,
        )
        .unwrap();
        let direct = kirchhoff_frame(&acs);
        let x = random_unit(&mut ChaCha8Rng::seed_from_u64(5), dim);
        for (a, b) in fields.iter().zip(&direct) {
            assert!((a.eval(&x) - b.eval(&x)).amax() < 1e-12);
        }
    }
}

#[test]
fn degenerate_multiplications_are_rejected() {
    // ν(v, z) = ⟨v, e⟩z has e as identity but spans nothing else.
    let dim = 4;
    let e = pole(dim);
    let e2 = e.clone();
    let nu: Multiplication = Arc::new(move |v: &Vector, z: &Vector| z * v.dot(&e2));
    let r = frame_from_multiplication(nu, &e, dim, dim - 1, &[], 1);
    assert!(matches!(r, Err(LabError::Degenerate { .. })));

    let shifted: Multiplication = Arc::new(|v: &Vector, _z: &Vector| v.clone());
    let r = frame_from_multiplication(shifted, &e, dim, dim - 1, &[], 1);
    assert!(matches!(r, Err(LabError::Validation(_))));
}

#[test]
fn frame_is_defined_at_the_poles() {
    for acs in models() {
        let dim = acs.ambient_dim() + 1;
        for sign in [1.0, -1.0] {
            let p = SpherePoint::new(pole(dim) * sign).unwrap();
            let f = sigma_tilde(acs.as_ref(), p.as_vector()).unwrap();
            assert!(f.fallback);
            assert!((f.sigma_tilde - Matrix::identity(dim, dim) * sign).amax() == 0.0);
        }
    }
}
