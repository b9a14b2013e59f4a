use nalgebra::SVector;

use super::*;
use crate::ambient::{AlmostKahlerPair, AmbientModel, FlatSpace, KahlerPotential};
use crate::grid::TorusGrid;
use crate::immersion::{frame_field, presets, DEFAULT_MARGIN};

fn grid(n: usize) -> TorusGrid<2> {
    TorusGrid::uniform(n).unwrap()
}

#[test]
fn product_circles_have_radial_mean_curvature() {
    let radii = [1.0, 1.3];
    let imm = presets::product_circles::<2, 4>(grid(64), radii, SVector::zeros());
    let ff = frame_field(&imm, &FlatSpace::default(), DEFAULT_MARGIN).unwrap();
    let mut worst = 0.0f64;
    for (f, s) in ff.frames.iter().zip(&ff.seconds) {
        let x = f.position;
        let expected = -SVector::<f64, 4>::new(
            x[0] / radii[0].powi(2),
            x[1] / radii[0].powi(2),
            x[2] / radii[1].powi(2),
            x[3] / radii[1].powi(2),
        );
        let t = node_tensors(f, s);
        worst = worst.max((t.mean_curvature - expected).amax());
        worst = worst.max((t.h_j - expected).amax());
        assert!(t.t_j.amax() < 1e-14 && t.s_j.amax() < 1e-14);
    }
    assert!(worst < 2e-5, "{worst:e}");
}

#[test]
fn definition_and_trace_forms_of_h_j_agree() {
    let ch = KahlerPotential::<4>::complex_hyperbolic();
    let err = |n: usize| {
        let imm = presets::sheared(grid(n), 0.5, 0.2, SVector::zeros());
        let ff = frame_field(&imm, &ch, DEFAULT_MARGIN).unwrap();
        let by_def = h_j_by_definition(&ff);
        ff.frames
            .iter()
            .zip(&ff.seconds)
            .zip(&by_def)
            .map(|((f, s), d)| (h_j(f, &chern_hessian(f, s)) - d).amax())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(32), err(64));
    assert!(fine < 1e-4, "{fine:e}");
    assert!((coarse / fine).log2() > 2.0, "{coarse:e} -> {fine:e}");
}

#[test]
fn maslov_identity_converges_in_flat_and_almost_kahler_models() {
    let ak = AmbientModel::AlmostKahler(
        AlmostKahlerPair::new(0.05, SVector::from([1.0, 0.0, 1.2, 0.0]), 0.8).unwrap(),
    );
    for model in [AmbientModel::flat(), ak] {
        let res = |n: usize| {
            let imm = presets::sheared(grid(n), 1.0, 0.2, SVector::zeros());
            maslov_identity_residual(&frame_field(&imm, &model, DEFAULT_MARGIN).unwrap())
        };
        let (coarse, fine) = (res(32), res(64));
        assert!(fine < 1e-4 && (coarse / fine).log2() > 2.0, "{coarse:e} -> {fine:e}");
    }
}

#[test]
fn torsion_collapses_in_kahler_models() {
    let imm = presets::sheared(grid(16), 0.5, 0.2, SVector::zeros());
    for model in [KahlerPotential::<4>::complex_hyperbolic(), KahlerPotential::fubini_study()] {
        let t = torsion_fields(&frame_field(&imm, &model, DEFAULT_MARGIN).unwrap());
        assert!(t.t_j < 1e-8 && t.s_j < 1e-8, "{t:?}");
    }
}

#[test]
fn projection_identity_is_pointwise() {
    let ch = KahlerPotential::<4>::complex_hyperbolic();
    let imm = presets::sheared(grid(16), 0.5, 0.3, SVector::zeros());
    assert!(projection_identity_residual(&frame_field(&imm, &ch, DEFAULT_MARGIN).unwrap()) < 1e-12);
}

#[test]
fn alternative_mean_curvatures_need_a_lagrangian() {
    let imm = presets::sheared(grid(16), 1.0, 0.2, SVector::zeros());
    let ff = frame_field(&imm, &FlatSpace::default(), DEFAULT_MARGIN).unwrap();
    assert!(matches!(alternative_mean_curvatures(&ff, 1e-8), Err(TensorError::NotLagrangian { .. })));
}

#[test]
fn symbol_is_rank_one_with_metric_eigenvalue() {
    let ch = KahlerPotential::<4>::complex_hyperbolic();
    let imm = presets::sheared(grid(16), 0.5, 0.2, SVector::zeros());
    let ff = frame_field(&imm, &ch, DEFAULT_MARGIN).unwrap();
    let r = symbol_report(&ff.frames[5], &SVector::from([1.0, -0.4])).unwrap();
    assert_eq!(r.rank, 1);
    assert!((r.eigenvalue - r.expected_eigenvalue).abs() < 1e-12 * r.expected_eigenvalue.max(1.0));
    assert!(r.composition_residual < 1e-12);
    assert_eq!(symbol_report(&ff.frames[5], &SVector::zeros()), Err(TensorError::ZeroCovector));
}
