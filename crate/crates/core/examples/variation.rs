//! First and second variation of the J-volume against finite differences.

use std::f64::consts::PI;

use nalgebra::SVector;
use trflow::ambient::{AmbientModel, KahlerPotential};
use trflow::grid::TorusGrid;
use trflow::immersion::{presets, DEFAULT_MARGIN};
use trflow::variation::{first_variation_check, second_variation_at_critical, ProbeSpec, VariationProbe};

fn main() {
    let grid = TorusGrid::<2>::uniform(64).unwrap();
    let model = KahlerPotential::<4>::complex_hyperbolic();
    let imm = presets::sheared(grid, 0.5, 0.2, SVector::zeros());
    for seed in 0..3 {
        let probe = ProbeSpec::Random { seed, max_mode: 2, amplitude: 0.1 }.build(&grid).unwrap();
        let r = first_variation_check(&imm, &model, &probe, 1e-4, DEFAULT_MARGIN).unwrap();
        println!("random probe {seed}: fd {:+.8e}  formula {:+.8e}  residual {:.1e}", r.finite_difference, r.predicted, r.residual);
    }

    let straight = presets::straight::<2, 4>(grid);
    let probe = VariationProbe::from_fn(&grid, |p| SVector::from([p[0].sin(), 0.0]));
    let r = second_variation_at_critical(&straight, &AmbientModel::flat_torus(), &probe, 1e-2, DEFAULT_MARGIN).unwrap();
    println!("second variation: fd {:.8}  ∫(Div Y)² {:.8}  2π² {:.8}", r.finite_difference, r.predicted, 2.0 * PI * PI);
}
