//! Maslov flow coupled to Kähler-Ricci flow of the ambient potential on a
//! small box. `dω/dt` cancels between the two, so the drift of `ι*ω̄`
//! measures the discretization error only.

use nalgebra::SVector;
use trflow::ambient::KahlerPotential;
use trflow::flows::krf::{CoupledFlow, KrfPotential};
use trflow::flows::FlowConfig;
use trflow::grid::TorusGrid;
use trflow::immersion::presets;

fn main() {
    let center = SVector::from([1.0, 0.0, 1.2, 0.0]);
    let width = 0.6;
    let base = KahlerPotential::flat_plus_gaussian(0.05, center, width);
    let potential = KrfPotential::new(base, center, 3.5 * width, 16, 3.4 * width);
    println!("{} active potential nodes", potential.active_nodes());
    let imm = presets::sheared(TorusGrid::uniform(16).unwrap(), 1.0, 0.2, SVector::zeros());
    let config = FlowConfig { dt: 1e-4, steps: 20, diagnostics_every: 5, ..Default::default() };
    let mut flow = CoupledFlow::new(imm, potential, config).unwrap();
    let run = flow.run(true);
    for (t, d) in &run.drift {
        println!("t = {t:.4}  sup |ω_t - ω_0| = {d:.3e}");
    }
    println!("status: {:?}", run.status);
}
