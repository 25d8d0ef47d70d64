use proptest::prelude::*;
use serde_json::Value;

use kirchhoff_core::algebra::{
    associator, commutator, inner, multiply, AlgebraLevel, Element, StructureConstants,
};

fn fixture() -> Value {
    serde_json::from_str(include_str!("fixtures/oracle.json")).unwrap()
}

fn octonion(coords: Vec<i64>) -> Element<i64> {
    Element::from_coords(AlgebraLevel::OCTONION, coords).unwrap()
}

fn int_octonion() -> impl Strategy<Value = Element<i64>> {
    prop::collection::vec(-30i64..=30, 8).prop_map(octonion)
}

fn mul(a: &Element<i64>, b: &Element<i64>) -> Element<i64> {
    multiply(a, b).unwrap()
}

proptest! {
    #[test]
    fn moufang_holds_exactly(a in int_octonion(), b in int_octonion(), c in int_octonion()) {
        prop_assert_eq!(mul(&mul(&a, &b), &mul(&c, &a)), mul(&mul(&a, &mul(&b, &c)), &a));
        prop_assert_eq!(mul(&a, &mul(&b, &mul(&a, &c))), mul(&mul(&mul(&a, &b), &a), &c));
    }

    #[test]
    fn alternativity_holds_exactly(a in int_octonion(), b in int_octonion()) {
        prop_assert_eq!(mul(&mul(&a, &a), &b), mul(&a, &mul(&a, &b)));
        prop_assert_eq!(mul(&mul(&b, &a), &a), mul(&b, &mul(&a, &a)));
        prop_assert_eq!(mul(&mul(&a, &b), &a), mul(&a, &mul(&b, &a)));
    }

    #[test]
    fn norm_is_multiplicative(a in int_octonion(), b in int_octonion()) {
        prop_assert_eq!(mul(&a, &b).norm_sq(), a.norm_sq() * b.norm_sq());
    }

    #[test]
    fn conjugation_reverses_products(a in int_octonion(), b in int_octonion()) {
        prop_assert_eq!(mul(&a, &b).conjugate(), mul(&b.conjugate(), &a.conjugate()));
    }

    #[test]
    fn associator_is_alternating(a in int_octonion(), b in int_octonion(), c in int_octonion()) {
        let abc = associator(&a, &b, &c).unwrap();
        prop_assert_eq!(associator(&b, &a, &c).unwrap(), abc.scale(-1));
        prop_assert_eq!(associator(&a, &c, &b).unwrap(), abc.scale(-1));
    }

    #[test]
    fn quaternions_associate(v in prop::collection::vec(-30i64..=30, 12)) {
        let q = |s: &[i64]| Element::from_coords(AlgebraLevel::QUATERNION, s.to_vec()).unwrap();
        let (a, b, c) = (q(&v[0..4]), q(&v[4..8]), q(&v[8..12]));
        prop_assert_eq!(associator(&a, &b, &c).unwrap(), Element::zero(AlgebraLevel::QUATERNION));
    }
}

#[test]
fn basis_examples_match_oracle() {
    let o = fixture();
    let level = AlgebraLevel::OCTONION;
    let e = |i| Element::<f64>::basis(level, i);
    let want: Vec<f64> = serde_json::from_value(o["e1e2_level3"].clone()).unwrap();
    assert_eq!((&e(1) * &e(2)).coords(), want.as_slice());
    let want: Vec<f64> = serde_json::from_value(o["assoc_e1_e2_e4"].clone()).unwrap();
    assert_eq!(associator(&e(1), &e(2), &e(4)).unwrap().coords(), want.as_slice());
    let comm = commutator(&e(1), &e(2)).unwrap();
    assert_eq!(comm.coords()[3], 2.0);
}

#[test]
fn octonion_triples_match_oracle() {
    let mut ours = StructureConstants::frozen(AlgebraLevel::OCTONION).triples();
    let mut oracle: Vec<[i64; 4]> = serde_json::from_value(fixture()["triples_level3"].clone()).unwrap();
    ours.sort();
    oracle.sort();
    assert_eq!(ours, oracle);
}

#[test]
fn structure_constants_are_antisymmetric_and_cyclic() {
    for level in [AlgebraLevel::QUATERNION, AlgebraLevel::OCTONION] {
        let sc = StructureConstants::frozen(level);
        let m = level.imaginary_dim();
        for i in 1..=m {
            for j in 1..=m {
                for k in 1..=m {
                    assert_eq!(sc.get(i, j, k), -sc.get(j, i, k));
                    assert_eq!(sc.get(i, j, k), sc.get(j, k, i));
                }
            }
        }
    }
}

#[test]
fn every_imaginary_unit_squares_to_minus_one() {
    for level in 1..=3 {
        let level = AlgebraLevel::new(level).unwrap();
        for i in 1..level.dim() {
            let e = Element::<i64>::basis(level, i);
            assert_eq!(mul(&e, &e), Element::one(level).scale(-1));
        }
    }
}

#[test]
fn inner_product_of_basis_is_kronecker() {
    let level = AlgebraLevel::OCTONION;
    for i in 0..8 {
        for j in 0..8 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert_eq!(inner(&Element::basis(level, i), &Element::basis(level, j)).unwrap(), want);
        }
    }
}

#[test]
fn mixed_levels_are_rejected() {
    let a = Element::<f64>::one(AlgebraLevel::QUATERNION);
    let b = Element::<f64>::one(AlgebraLevel::OCTONION);
    assert!(multiply(&a, &b).is_err());
    assert!(inner(&a, &b).is_err());
}
