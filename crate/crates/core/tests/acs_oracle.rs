use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use kirchhoff_core::acs::{
    acs_chart_matrix, calabi_defect, nijenhuis_chart, nijenhuis_fd, nijenhuis_fd_fields,
    projected_constant_field, random_tangent_triple, residuals_at, tau_chart, tau_from_nijenhuis,
    tensor_to_ambient, validate_acs, AcsField, AcsRef, OctonionicAcs, RotatedAcs, ValidatedAcs,
};
use kirchhoff_core::algebra::{associator, AlgebraLevel, Element};
use kirchhoff_core::geometry::{Chart, FdParams, FieldRef, FnField, Matrix, Tensor3, Vector};
use kirchhoff_core::sampling::{random_tangent, random_unit};
use kirchhoff_core::LabError;

fn octonionic() -> AcsRef {
    Arc::new(OctonionicAcs::new(AlgebraLevel::OCTONION).unwrap())
}

fn fixture() -> Value {
    serde_json::from_str(include_str!("fixtures/oracle.json")).unwrap()
}

fn tensor(v: &Value) -> Tensor3 {
    let nested: Vec<Vec<Vec<f64>>> = serde_json::from_value(v.clone()).unwrap();
    let m = nested.len();
    let mut t = Tensor3::zeros(m);
    for (i, a) in nested.iter().enumerate() {
        for (j, b) in a.iter().enumerate() {
            for (k, c) in b.iter().enumerate() {
                t.set(i, j, k, *c);
            }
        }
    }
    t
}

fn regression_point() -> Vector {
    let u: Vec<f64> = serde_json::from_value(fixture()["tau_point_u"].clone()).unwrap();
    Vector::from_vec(u)
}

fn twice_associator(a: &Vector, b: &Vector, c: &Vector) -> Vector {
    let el = |v: &Vector| Element::imaginary(AlgebraLevel::OCTONION, v.as_slice()).unwrap();
    Vector::from_column_slice(associator(&el(a), &el(b), &el(c)).unwrap().imaginary_part()) * 2.0
}

#[test]
fn structures_square_to_minus_identity() {
    for level in [AlgebraLevel::QUATERNION, AlgebraLevel::OCTONION] {
        let j = OctonionicAcs::new(level).unwrap();
        let r = validate_acs(&j, 500, 42);
        assert!(r.square < 1e-12 && r.tangency < 1e-12 && r.hermitian < 1e-12, "{r:?}");
    }
}

#[test]
fn rotated_structure_is_valid_and_distinct() {
    let j = RotatedAcs::random(octonionic(), 1);
    let r = validate_acs(&j, 200, 42);
    assert!(r.square < 1e-10 && r.hermitian < 1e-10);
    let y = random_unit(&mut ChaCha8Rng::seed_from_u64(0), 7);
    assert!((j.matrix(&y) - octonionic().matrix(&y)).amax() > 1e-3);
}

#[test]
fn validated_wrapper_rejects_non_structures() {
    struct Zero;
    impl AcsField for Zero {
        fn ambient_dim(&self) -> usize {
            3
        }
        fn matrix(&self, _: &Vector) -> Matrix {
            Matrix::zeros(3, 3)
        }
        fn label(&self) -> String {
            "zero".into()
        }
    }
    let r = ValidatedAcs::new(Arc::new(Zero), 10, 1);
    assert!(matches!(r, Err(LabError::Validation(_))));
    assert!(residuals_at(&Zero, &Vector::from_column_slice(&[1.0, 0.0, 0.0])).square > 0.5);
}

#[test]
fn nijenhuis_is_twice_the_associator() {
    let j = octonionic();
    let mut r = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..200 {
        let (a, b, c) = random_tangent_triple(&mut r, 7);
        let n = nijenhuis_fd(j.as_ref(), &a, &b, &c, &FdParams::default()).unwrap();
        assert!((n.v - twice_associator(a.as_vector(), &b.v, &c.v)).amax() < 1e-6);
    }
}

#[test]
fn quaternionic_structure_is_integrable() {
    let j = OctonionicAcs::new(AlgebraLevel::QUATERNION).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let (a, b, c) = random_tangent_triple(&mut r, 3);
        let n = nijenhuis_fd(&j, &a, &b, &c, &FdParams::default()).unwrap();
        assert!(n.v.amax() < 1e-8);
    }
}

#[test]
fn nijenhuis_is_tensorial() {
    let j = octonionic();
    let params = FdParams::default();
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let (a, b, c) = random_tangent_triple(&mut r, 7);
    let base = nijenhuis_fd(j.as_ref(), &a, &b, &c, &params).unwrap().v;
    let y = projected_constant_field(c.v.clone());
    for lambda in [2.0, -3.0] {
        let w = b.v.clone();
        let a0 = a.as_vector().clone();
        let x: FieldRef = Arc::new(FnField::new(7, move |p: &Vector| {
            // f·X with f(a) = λ and a nonzero gradient.
            let f = lambda + (p - &a0).sum() * 3.0;
            (&w - p * p.dot(&w)) * f
        }));
        let scaled = nijenhuis_fd_fields(j.as_ref(), &a, x.as_ref(), y.as_ref(), &params).unwrap().v;
        assert!((scaled - &base * lambda).amax() < 1e-6, "λ = {lambda}");
    }
}

#[test]
fn chart_nijenhuis_matches_brackets_and_charts_overlap() {
    let j = octonionic();
    let params = FdParams::default();
    let mut r = ChaCha8Rng::seed_from_u64(8);
    let north = Chart::north(7);
    let south = Chart::south(7);
    for _ in 0..30 {
        let mut x = random_unit(&mut r, 7);
        x[6] *= 0.3;
        let x = x.normalize();
        let p = kirchhoff_core::geometry::SpherePoint::new(x.clone()).unwrap();
        let b = random_tangent(&mut r, &p);
        let c = random_tangent(&mut r, &p);
        let fd = nijenhuis_fd(j.as_ref(), &p, &b, &c, &params).unwrap().v;
        for chart in [&north, &south] {
            let t = nijenhuis_chart(j.as_ref(), chart, &chart.forward(&x), &params).unwrap();
            assert!((tensor_to_ambient(chart, &x, &t, &b.v, &c.v) - &fd).amax() < 1e-6);
        }
    }
}

#[test]
fn tau_regression_against_oracle() {
    let o = fixture();
    let j = octonionic();
    let chart = Chart::north(7);
    let u = regression_point();
    let tau = tau_chart(j.as_ref(), &chart, &u, &FdParams::default()).unwrap();
    let want = tensor(&o["tau_exact"]);
    assert!(tau.max_abs_diff(&want) < 1e-6, "{}", tau.max_abs_diff(&want));

    let n = nijenhuis_chart(j.as_ref(), &chart, &u, &FdParams::default()).unwrap();
    let want_n = tensor(&o["N_chart_exact"]);
    assert!(n.max_abs_diff(&want_n) < 1e-6);
    let jm = acs_chart_matrix(j.as_ref(), &chart, &u);
    assert!(tau_from_nijenhuis(&jm, &want_n).max_abs_diff(&want) < 1e-12);
}

#[test]
fn calabi_defect_regression_against_oracle() {
    let o = fixture();
    let j = octonionic();
    let chart = Chart::north(7);
    let u = regression_point();
    let d = calabi_defect(j.as_ref(), |w: &Vector| w[0], &chart, &u, &FdParams::default()).unwrap();
    let want: Vec<f64> = serde_json::from_value(o["calabi_first_coord"].clone()).unwrap();
    let want = Matrix::from_row_slice(6, 6, &want);
    assert!((&d - want).amax() < 1e-4, "{}", d);
    let max = o["calabi_first_coord_max_abs"].as_f64().unwrap();
    assert!((d.amax() - max).abs() < 1e-4);
}

#[test]
fn calabi_defect_vanishes_in_the_quaternionic_case() {
    let j = OctonionicAcs::new(AlgebraLevel::QUATERNION).unwrap();
    let chart = Chart::north(3);
    let u = Vector::from_column_slice(&[0.4, -0.3]);
    let f = |w: &Vector| (w[0] * 1.3).sin() + w[1] * w[0];
    let d = calabi_defect(&j, f, &chart, &u, &FdParams::default()).unwrap();
    assert!(d.amax() < 1e-4);
}

#[test]
fn chart_points_near_the_pole_are_refused() {
    let j = octonionic();
    let chart = Chart::north(7);
    let u = Vector::from_element(6, 1e4);
    let r = tau_chart(j.as_ref(), &chart, &u, &FdParams::default());
    assert!(matches!(r, Err(LabError::Degenerate { .. })));
}
