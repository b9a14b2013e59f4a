//! The totally real density along a family of sheared tori: `ρ_J` drops
//! below one as the torus tilts away from being Lagrangian.

use nalgebra::SVector;
use trflow::ambient::FlatSpace;
use trflow::grid::TorusGrid;
use trflow::immersion::{frame_field, presets, DEFAULT_MARGIN};

fn main() {
    let grid = TorusGrid::<2>::uniform(64).unwrap();
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "delta", "sup|ω|", "min ρ_J", "Vol_g", "Vol_J");
    for delta in [0.0, 0.1, 0.2, 0.4, 0.8] {
        let imm = presets::sheared(grid, 1.0, delta, SVector::zeros());
        let ff = frame_field(&imm, &FlatSpace::default(), DEFAULT_MARGIN).unwrap();
        println!(
            "{delta:>6.2} {:>10.4} {:>10.6} {:>10.5} {:>10.5}",
            ff.sup_omega(),
            ff.min_rho_j(),
            ff.vol_g(),
            ff.vol_j()
        );
    }
}
