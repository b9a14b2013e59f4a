use std::f64::consts::PI;

use nalgebra::SVector;
use proptest::prelude::*;

use super::*;
use crate::ambient::{AlmostKahlerPair, FlatSpace, KahlerPotential};
use crate::immersion::presets;

fn flat_torus() -> FlatSpace {
    FlatSpace { periodic: true }
}

#[test]
fn zero_probe_gives_zero_on_both_sides() {
    let grid = TorusGrid::<2>::uniform(16).unwrap();
    let imm = presets::sheared(grid, 1.0, 0.2, SVector::zeros());
    let fv = first_variation_check(&imm, &FlatSpace::default(), &VariationProbe::zero(&grid), 1e-4, 1e-6).unwrap();
    assert!(fv.finite_difference.abs() < 1e-10 && fv.predicted.abs() < 1e-14);
}

#[test]
fn rotation_of_product_torus_matches() {
    let grid = TorusGrid::<2>::uniform(128).unwrap();
    let imm = presets::product_circles::<2, 4>(grid, [1.0, 1.5], SVector::zeros());
    let probe = VariationProbe::from_fn(&grid, |_| SVector::from([1.0, 0.0]));
    let fv = first_variation_check(&imm, &FlatSpace::default(), &probe, 1e-4, 1e-6).unwrap();
    // J∂φ₁ points radially inwards, so the first circle shrinks at unit rate.
    assert!((fv.finite_difference + 4.0 * PI * PI * 1.5).abs() < 1e-4, "{fv:?}");
    assert!(fv.residual <= 1e-6, "{fv:?}");
}

#[test]
fn random_probe_in_curved_and_almost_kahler_models() {
    let grid = TorusGrid::<2>::uniform(96).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let probe = VariationProbe::from_field(&grid, &TrigField::random(&mut rng, 2, 0.5));
    let imm = presets::sheared(grid, 0.5, 0.2, SVector::zeros());
    let ch = KahlerPotential::<4>::complex_hyperbolic();
    let fv = first_variation_check(&imm, &ch, &probe, 1e-4, 1e-6).unwrap();
    assert!(fv.residual <= 1e-5, "{fv:?}");
    let imm = presets::sheared(grid, 1.0, 0.2, SVector::zeros());
    let ak = AlmostKahlerPair::<4>::new(0.1, SVector::from([1.0, 0.0, 1.0, 0.0]), 0.7).unwrap();
    let fv = first_variation_check(&imm, &ak, &probe, 1e-4, 1e-6).unwrap();
    assert!(fv.residual <= 1e-4, "{fv:?}");
}

#[test]
fn straight_torus_second_variation_is_two_pi_squared() {
    let grid = TorusGrid::<2>::uniform(64).unwrap();
    let imm = presets::straight::<2, 4>(grid);
    let probe = VariationProbe::from_fn(&grid, |p| SVector::from([p[0].sin(), 0.0]));
    let sv = second_variation_at_critical(&imm, &flat_torus(), &probe, 1e-2, 1e-6).unwrap();
    let exact = 2.0 * PI * PI;
    assert!((sv.finite_difference - exact).abs() <= 1e-4 * exact, "{sv:?}");
    assert!(sv.residual <= 1e-4, "{sv:?}");
    let doubled = second_variation_at_critical(&imm, &flat_torus(), &probe.scaled(2.0), 1e-2, 1e-6).unwrap();
    assert!((doubled.finite_difference / sv.finite_difference - 4.0).abs() < 1e-6);
}

#[test]
fn translations_cost_nothing() {
    let grid = TorusGrid::<2>::uniform(16).unwrap();
    let imm = presets::straight::<2, 4>(grid);
    let probe = VariationProbe::from_fn(&grid, |_| SVector::from([0.3, -0.7]));
    let sv = second_variation_at_critical(&imm, &flat_torus(), &probe, 1e-2, 1e-6).unwrap();
    assert!(sv.finite_difference.abs() < 1e-8 && sv.predicted.abs() < 1e-20, "{sv:?}");
}

#[test]
fn second_variation_refused_off_criticality() {
    let grid = TorusGrid::<2>::uniform(16).unwrap();
    let probe = VariationProbe::zero(&grid);
    let imm = presets::sheared(grid, 1.0, 0.2, SVector::zeros());
    assert!(matches!(
        second_variation_at_critical(&imm, &flat_torus(), &probe, 1e-2, 1e-6),
        Err(VariationError::NotCritical { .. })
    ));
    let imm = presets::straight::<2, 4>(grid);
    let ch = KahlerPotential::<4>::complex_hyperbolic();
    assert_eq!(second_variation_at_critical(&imm, &ch, &probe, 1e-2, 1e-6), Err(VariationError::NotFlat));
}

#[test]
fn localized_bumps_recover_the_gradient() {
    let grid = TorusGrid::<2>::uniform(64).unwrap();
    let imm = presets::sheared(grid, 1.0, 0.2, SVector::zeros());
    for node in [0, 700, 2100] {
        let rec = reconstruct_gradient(&imm, &FlatSpace::default(), node, 0.15, 1e-4, 1e-6).unwrap();
        assert!(rec.relative_error <= 0.05, "{rec:?}");
    }
}

#[test]
fn probe_specs_build() {
    let grid = TorusGrid::<2>::uniform(16).unwrap();
    let spec: ProbeSpec = serde_json::from_str(r#"{"sine": {"mode": [1, 0], "axis": 0, "amplitude": 1.0}}"#).unwrap();
    let p = spec.build(&grid).unwrap();
    assert!((p.coefficients[grid.index([4, 0])][0] - 1.0).abs() < 1e-15);
    assert!(serde_json::from_str::<ProbeSpec>(r#"{"constant": {"value": [1.0], "extra": 1}}"#).is_err());
    assert!(ProbeSpec::Constant { value: vec![1.0] }.build(&grid).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn straight_torus_is_stable(seed in 0u64..1000) {
        let grid = TorusGrid::<2>::uniform(16).unwrap();
        let imm = presets::straight::<2, 4>(grid);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let probe = VariationProbe::from_field(&grid, &TrigField::random(&mut rng, 2, 0.5));
        let sv = second_variation_at_critical(&imm, &flat_torus(), &probe, 1e-2, 1e-6).unwrap();
        prop_assert!(sv.finite_difference >= -1e-6);
    }
}
