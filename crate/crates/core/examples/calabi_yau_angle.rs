//! Lagrangian angle of a perturbed product torus by two routes, its Maslov
//! class, and the angle's agreement with `ξ_J`.

use nalgebra::SVector;
use trflow::ambient::FlatSpace;
use trflow::calibration::{xi_j_vs_maslov_residual, AngleField, CalabiYau};
use trflow::grid::TorusGrid;
use trflow::immersion::{frame_field, presets, DEFAULT_MARGIN};

fn main() {
    let cy = CalabiYau::default();
    for n in [32, 64] {
        let imm = presets::product_circles::<2, 4>(TorusGrid::uniform(n).unwrap(), [1.0, 1.5], SVector::zeros());
        let ff = frame_field(&imm, &FlatSpace::default(), DEFAULT_MARGIN).unwrap();
        let angle = AngleField::new(&imm, &cy).unwrap();
        let routes = ff
            .frames
            .iter()
            .map(|f| {
                let (a, b) = (cy.angle_intrinsic(&f.tangents).unwrap(), cy.angle_polar(&f.tangents).unwrap());
                (a - b).sin().abs()
            })
            .fold(0.0, f64::max);
        let loops = angle.generator_integrals(imm.grid());
        println!(
            "{n}²: routes agree to {routes:.1e}, windings {:?}, ∮dθ = [{:.10}, {:.10}], |ξ_J + dθ| = {:.2e}",
            angle.windings,
            loops[0],
            loops[1],
            xi_j_vs_maslov_residual(&ff, &angle)
        );
    }
}
