//! Special totally real graphs over the straight torus: closed-form roots of
//! affine families and the J-volume of nearby graphs in the same class.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trflow::calibration::{excess_exponent, homology_comparison, solve_str_family, AffineFamily};
use trflow::fields::TrigField;
use trflow::grid::TorusGrid;
use trflow::immersion::DEFAULT_MARGIN;

fn main() {
    for (name, family, s0) in [
        ("diagonal(0.3)", AffineFamily::diagonal(0.3), 0.0),
        ("nilpotent", AffineFamily::nilpotent(), 0.4),
    ] {
        let root = solve_str_family(&family, s0).unwrap();
        println!("{name}: s = {:+.12}, identically {}, {} iterations", root.s, root.identically_satisfied, root.iterations);
    }

    let grid = TorusGrid::<2>::uniform(48).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fields: Vec<TrigField<2, 2>> = (0..5).map(|_| TrigField::random_mean_free(&mut rng, 3, 0.05)).collect();
    let cmp = homology_comparison::<2, 4>(grid, &fields, DEFAULT_MARGIN).unwrap();
    println!("Vol_J(straight) = {:.10} (4π² = {:.10})", cmp.base, 4.0 * std::f64::consts::PI.powi(2));
    for v in &cmp.perturbed {
        println!("  perturbed {v:.10}  excess {:.3e}", v - cmp.base);
    }
    let p = excess_exponent::<2, 4>(grid, &fields[0], &[0.01, 0.02, 0.04], DEFAULT_MARGIN).unwrap();
    println!("excess ~ amplitude^{p:.3}");
}
