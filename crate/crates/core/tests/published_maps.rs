//! Rational maps induced by lattice multipliers, fitted from samples and
//! compared with closed forms.

use sphere_edit::conformal::{LatticeNormalization, LatticeSpec, LatticeTwist, SphereMap};
use sphere_edit::geometry::ProjectivePoint;
use sphere_edit::rational::{
    coefficient_distance, fit_rational_auto, rational_equiv, Equivalence, RationalMap,
};
use sphere_edit::{Error, C64};

mod common;
use common::*;

fn twist(lattice: LatticeSpec, m: C64, norm: LatticeNormalization) -> LatticeTwist {
    LatticeTwist::new(lattice, m, norm).unwrap()
}

fn fresh_points(f: &dyn SphereMap) -> Vec<ProjectivePoint> {
    (0..100)
        .map(|k| {
            let r = 0.2 + 2.5 * ((k as f64 * 0.618034) % 1.0);
            ProjectivePoint::finite(C64::from_polar(r, 2.399963 * k as f64))
        })
        .filter(|&z| f.distance_to_singular(z) > 0.05)
        .collect()
}

fn check_strict(f: &LatticeTwist, published: &RationalMap) {
    let n = f.degree();
    let fit = fit_rational_auto(f, n, 11).unwrap();
    let d = coefficient_distance(&fit.map.coefficient_vector(), &published.coefficient_vector());
    assert!(d < 1e-6, "coefficient distance {d}");
    assert!(rational_equiv(&fit.map, published, 1e-6, Equivalence::Strict));
    for z in fresh_points(f) {
        let a = fit.map.eval(z);
        assert!(a.chordal_distance(&f.eval(z).unwrap()) < 1e-6);
        assert!(a.chordal_distance(&published.eval(z)) < 1e-6);
    }
}

#[test]
fn multiplier_one_plus_i() {
    check_strict(&twist(LatticeSpec::square(), c(1.0, 1.0), Default::default()), &gaussian_1_plus_i());
}

#[test]
fn multiplier_two() {
    check_strict(&twist(LatticeSpec::square(), c(2.0, 0.0), Default::default()), &gaussian_2());
}

#[test]
fn multiplier_two_plus_i() {
    check_strict(&twist(LatticeSpec::square(), c(2.0, 1.0), Default::default()), &gaussian_2_plus_i());
}

#[test]
fn multiplier_one_plus_omega_with_scaled_normalization() {
    let norm = LatticeNormalization::Scaled { e1_image: c(-0.5f64.sqrt(), 0.0) };
    check_strict(&twist(LatticeSpec::hexagonal(), 1.0 + omega(), norm), &eisenstein_1_plus_omega());
}

#[test]
fn multiplier_one_plus_omega_with_default_anchors_is_mobius_equivalent() {
    let f = twist(LatticeSpec::hexagonal(), 1.0 + omega(), Default::default());
    let fit = fit_rational_auto(&f, 3, 11).unwrap();
    let published = eisenstein_1_plus_omega();
    assert!(!rational_equiv(&fit.map, &published, 1e-6, Equivalence::Strict));
    assert!(rational_equiv(&fit.map, &published, 1e-6, Equivalence::Relaxed));
}

#[test]
fn degree_is_norm_of_multiplier() {
    let cases = [
        (LatticeSpec::square(), c(1.0, 1.0), 2),
        (LatticeSpec::square(), c(2.0, 0.0), 4),
        (LatticeSpec::square(), c(2.0, 1.0), 5),
        (LatticeSpec::hexagonal(), 1.0 + omega(), 3),
    ];
    for (lattice, m, n) in cases {
        let f = twist(lattice, m, Default::default());
        assert_eq!(f.degree(), n);
        assert!(fit_rational_auto(&f, n, 5).is_ok());
        assert!(matches!(fit_rational_auto(&f, n - 1, 5), Err(Error::DegreeTooLow { .. })));
        assert!(matches!(fit_rational_auto(&f, n + 1, 5), Err(Error::RankDeficient { .. })));
    }
}

#[test]
fn fits_agree_across_sample_sets() {
    let f = twist(LatticeSpec::square(), c(2.0, 1.0), Default::default());
    let a = fit_rational_auto(&f, 5, 1).unwrap().map;
    let b = fit_rational_auto(&f, 5, 2).unwrap().map;
    assert!(rational_equiv(&a, &b, 1e-8, Equivalence::Strict));
}
