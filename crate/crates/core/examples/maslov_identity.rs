//! Residuals of the identities linking `H_J`, `T_J` and `ξ_J`, with the
//! observed order under grid refinement.

use nalgebra::SVector;
use trflow::ambient::{AlmostKahlerPair, AmbientModel, KahlerPotential};
use trflow::grid::TorusGrid;
use trflow::immersion::{frame_field, presets, DEFAULT_MARGIN};
use trflow::tensors::{integrability_residual, maslov_identity_residual, torsion_fields};

fn main() {
    let center = SVector::from([1.0, 0.0, 1.2, 0.0]);
    let cases: Vec<(&str, AmbientModel<4>, f64)> = vec![
        ("flat", AmbientModel::flat(), 1.0),
        ("complex-hyperbolic", AmbientModel::Potential(KahlerPotential::complex_hyperbolic()), 0.5),
        ("almost-kahler", AmbientModel::AlmostKahler(AlmostKahlerPair::new(0.05, center, 0.8).unwrap()), 1.0),
    ];
    for (name, model, radius) in &cases {
        println!("{name}");
        let mut previous: Option<(f64, f64)> = None;
        for n in [32, 64, 128] {
            let imm = presets::sheared(TorusGrid::uniform(n).unwrap(), *radius, 0.2, SVector::zeros());
            let ff = frame_field(&imm, model, DEFAULT_MARGIN).unwrap();
            let maslov = maslov_identity_residual(&ff);
            let integ = integrability_residual(&imm, model, DEFAULT_MARGIN).unwrap();
            let order = previous.map(|(m, i)| format!("  orders {:.2} {:.2}", (m / maslov).log2(), (i / integ).log2()));
            println!("  {n:>4}²  ξ_J identity {maslov:.3e}  integrability {integ:.3e}{}", order.unwrap_or_default());
            previous = Some((maslov, integ));
        }
        let t = torsion_fields(&frame_field(&presets::sheared(TorusGrid::uniform(32).unwrap(), *radius, 0.2, SVector::zeros()), model, DEFAULT_MARGIN).unwrap());
        println!("  sup |T_J| {:.2e}, sup |S_J| {:.2e}, sup |S_J + T_J| {:.2e}", t.t_j, t.s_j, t.sum);
    }
}
