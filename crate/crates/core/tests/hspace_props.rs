use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kirchhoff_core::acs::{AcsRef, OctonionicAcs, RotatedAcs};
use kirchhoff_core::algebra::AlgebraLevel;
use kirchhoff_core::hspace::{
    associativity_defect, defect_at, moufang_defect, DefectOp, HMultiplication, HIST_BINS,
};
use kirchhoff_core::kirchhoff::pole;
use kirchhoff_core::sampling::{random_gaussian, random_unit};

fn octonionic() -> AcsRef {
    Arc::new(OctonionicAcs::new(AlgebraLevel::OCTONION).unwrap())
}

fn quaternionic() -> AcsRef {
    Arc::new(OctonionicAcs::new(AlgebraLevel::QUATERNION).unwrap())
}

#[test]
fn ambient_product_multiplies_norms() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for acs in [quaternionic(), octonionic(), Arc::new(RotatedAcs::random(octonionic(), 4)) as AcsRef] {
        let m = HMultiplication::ambient(acs.clone());
        let dim = m.ambient_dim();
        for _ in 0..200 {
            let x = random_gaussian(&mut r, dim);
            let y = random_gaussian(&mut r, dim);
            let p = m.multiply(&x, &y).unwrap();
            assert!((p.norm() - x.norm() * y.norm()).abs() < 1e-12);
            assert!((m.left_translation(&x).unwrap() * &y - p).amax() < 1e-15);
        }
    }
}

#[test]
fn sphere_product_restricts_ambient_product() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let s = HMultiplication::sphere(octonionic());
    let a = HMultiplication::ambient(octonionic());
    for _ in 0..100 {
        let x = random_unit(&mut r, 8);
        let y = random_unit(&mut r, 8);
        assert!((s.multiply(&x, &y).unwrap() - a.multiply(&x, &y).unwrap()).amax() < 1e-14);
    }
}

#[test]
fn identity_is_two_sided_for_every_model() {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    for acs in [quaternionic(), octonionic(), Arc::new(RotatedAcs::random(octonionic(), 4)) as AcsRef] {
        let m = HMultiplication::sphere(acs);
        let dim = m.ambient_dim();
        let e = pole(dim);
        for _ in 0..100 {
            let x = random_unit(&mut r, dim);
            assert!((m.multiply(&e, &x).unwrap() - &x).amax() < 1e-14);
            assert!((m.multiply(&x, &e).unwrap() - &x).amax() < 1e-14);
        }
    }
}

#[test]
fn defect_landscapes() {
    let q = HMultiplication::sphere(quaternionic());
    let o = HMultiplication::sphere(octonionic());
    let rot = HMultiplication::sphere(Arc::new(RotatedAcs::random(octonionic(), 5)));
    assert!(associativity_defect(&q, 2000, 42).unwrap().max < 1e-12);
    assert!(moufang_defect(&q, 2000, 42).unwrap().max < 1e-12);
    assert!(associativity_defect(&o, 2000, 42).unwrap().max > 0.5);
    assert!(moufang_defect(&o, 2000, 42).unwrap().max < 1e-12);
    assert!(moufang_defect(&rot, 2000, 42).unwrap().max < 1e-12);
}

#[test]
fn defect_reports_are_deterministic() {
    let o = HMultiplication::sphere(octonionic());
    let a = associativity_defect(&o, 500, 7).unwrap();
    let b = associativity_defect(&o, 500, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.hist.len(), HIST_BINS);
    assert_eq!(a.hist.iter().sum::<u64>(), 500);
    assert!(a.hist[HIST_BINS - 1] >= 1);
    assert_ne!(a, associativity_defect(&o, 500, 8).unwrap());
}

#[test]
fn basis_triple_defect_matches_associator() {
    // m(x, y) = y·x, so m(m(e₁,e₂),e₄) − m(e₁,m(e₂,e₄)) = e₄(e₂e₁) − (e₄e₂)e₁ = [e₄, e₂, e₁].
    let m = HMultiplication::ambient(octonionic());
    let e = |i: usize| {
        let mut v = nalgebra::DVector::zeros(8);
        v[i - 1] = 1.0;
        v
    };
    let d = defect_at(&m, DefectOp::Assoc, &e(1), &e(2), &e(4)).unwrap();
    assert!((d - 2.0).abs() < 1e-14);
}
