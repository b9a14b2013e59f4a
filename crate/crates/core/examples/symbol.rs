//! Principal symbol of `H_J`: the exact report at one node, then the measured
//! response of `H_J` to plane waves in three directions.

use nalgebra::SVector;
use trflow::ambient::KahlerPotential;
use trflow::grid::TorusGrid;
use trflow::immersion::{frame_field, presets, DEFAULT_MARGIN};
use trflow::tensors::{plane_wave_response, symbol_report, PlaneWave, WaveDirection};

fn main() {
    let model = KahlerPotential::<4>::complex_hyperbolic();
    let imm = presets::sheared(TorusGrid::uniform(192).unwrap(), 0.5, 0.2, SVector::zeros());
    let ff = frame_field(&imm, &model, DEFAULT_MARGIN).unwrap();
    let report = symbol_report(&ff.frames[0], &SVector::from([1.0, 0.5])).unwrap();
    println!("{}", serde_json::to_string_pretty(&report).unwrap());

    for direction in [WaveDirection::Normal, WaveDirection::Tangent, WaveDirection::JOrthogonal] {
        let wave = PlaneWave { mode: [12, 0], direction, amplitude: 1e-6 };
        let r = plane_wave_response(&imm, &model, &wave, DEFAULT_MARGIN).unwrap();
        println!(
            "{direction:?}: measured {:.4e}, predicted {:.4e}, |ζ|² scale {:.4e}",
            r.measured, r.predicted, r.scale
        );
    }
}
