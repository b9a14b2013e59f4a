use nalgebra::SVector;

use super::*;
use crate::ambient::{FlatSpace, KahlerPotential};
use crate::grid::TorusGrid;
use crate::immersion::presets;

#[test]
fn straight_torus_is_stationary() {
    let grid = TorusGrid::<2>::uniform(16).unwrap();
    let imm = presets::straight::<2, 4>(grid);
    let flat = FlatSpace { periodic: true };
    for kind in [FlowKind::Mcf, FlowKind::Jmcf, FlowKind::Maslov] {
        let mut flow = Flow::new(imm.clone(), &flat, FlowConfig { kind, steps: 3, ..FlowConfig::default() });
        for _ in 0..3 {
            flow.step().unwrap();
        }
        let moved = flow.immersion().positions().iter().zip(imm.positions()).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
        assert!(moved <= 1e-12, "{kind:?} moved by {moved}");
    }
}

#[test]
fn maslov_and_jmcf_agree_in_kahler_models() {
    let grid = TorusGrid::<2>::uniform(32).unwrap();
    let imm = presets::sheared(grid, 0.5, 0.2, SVector::zeros());
    let ch = KahlerPotential::<4>::complex_hyperbolic();
    let a = velocity(&imm, &ch, FlowKind::Maslov, 1e-6).unwrap();
    let b = velocity(&imm, &ch, FlowKind::Jmcf, 1e-6).unwrap();
    let diff = a.iter().zip(&b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max);
    assert!(diff <= 1e-10, "{diff}");
}

#[test]
fn lagrangian_velocities_coincide_to_stencil_order() {
    let mut errs = Vec::new();
    for n in [32, 64] {
        let grid = TorusGrid::<2>::uniform(n).unwrap();
        let imm = presets::product_circles::<2, 4>(grid, [1.0, 1.3], SVector::zeros());
        let a = velocity(&imm, &FlatSpace::default(), FlowKind::Mcf, 1e-6).unwrap();
        let b = velocity(&imm, &FlatSpace::default(), FlowKind::Maslov, 1e-6).unwrap();
        errs.push(a.iter().zip(&b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max));
    }
    assert!(errs[1] <= 1e-6 && (errs[1] <= 1e-12 || errs[0] / errs[1] > 4.0), "{errs:?}");
}

#[test]
fn csv_has_fixed_columns_and_header() {
    let r = Record {
        t: 0.0,
        vol_g: 1.0,
        vol_j: 1.0,
        sup_omega: 0.0,
        min_rho_j: 1.0,
        theta_min: None,
        theta_max: Some(0.5),
        integrability_residual: 0.0,
        status: FlowStatus::Completed,
    };
    let mut buf = Vec::new();
    write_csv(&mut buf, &[("lambda".into(), "-3".into())], &[r]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# lambda: -3");
    assert_eq!(lines[1], CSV_COLUMNS.join(","));
    assert!(lines[2].contains(",nan,") && lines[2].ends_with(",completed"));
}

#[test]
fn degenerate_start_is_reported() {
    let grid = TorusGrid::<2>::uniform(16).unwrap();
    let basis = nalgebra::SMatrix::<f64, 4, 2>::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0);
    let imm = presets::linear::<2, 4>(grid, basis);
    let flat = FlatSpace { periodic: true };
    let mut flow = Flow::new(imm, &flat, FlowConfig::default());
    assert!(matches!(flow.step(), Err(FlowError::Degenerate { .. })));
    assert_eq!(flow.status(), FlowStatus::Degenerate);
}

#[test]
fn j_volume_decreases_along_jmcf_in_kahler_models() {
    let grid = TorusGrid::<2>::uniform(32).unwrap();
    let imm = presets::sheared(grid, 0.5, 0.3, SVector::zeros());
    let ch = KahlerPotential::<4>::complex_hyperbolic();
    let config = FlowConfig { kind: FlowKind::Jmcf, dt: 1e-3, steps: 40, diagnostics_every: 1, ..FlowConfig::default() };
    let records = Flow::new(imm, &ch, config).run();
    assert_eq!(records.len(), 41);
    for w in records.windows(2) {
        assert!(w[1].vol_j <= w[0].vol_j + 1e-12, "{} -> {}", w[0].vol_j, w[1].vol_j);
    }
    assert!(records[40].vol_j < records[0].vol_j);
}
