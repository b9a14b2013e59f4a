//! Evaluates each ambient model at a few points: metric, curvature and how far
//! the Ricci form is from a multiple of the Kähler form.

use nalgebra::SVector;
use trflow::ambient::{einstein_ratio, AlmostKahlerPair, Ambient, AmbientModel, KahlerPotential};

fn main() {
    let bump_center = SVector::from([1.0, 0.0, 1.2, 0.0]);
    let models: Vec<(&str, AmbientModel<4>)> = vec![
        ("flat", AmbientModel::flat()),
        ("complex-hyperbolic", AmbientModel::Potential(KahlerPotential::complex_hyperbolic())),
        ("fubini-study", AmbientModel::Potential(KahlerPotential::fubini_study())),
        ("flat-plus-gaussian", AmbientModel::Potential(KahlerPotential::flat_plus_gaussian(0.05, bump_center, 0.6))),
        ("almost-kahler", AmbientModel::AlmostKahler(AlmostKahlerPair::new(0.05, bump_center, 0.8).unwrap())),
    ];
    let points = [SVector::<f64, 4>::zeros(), SVector::from([0.3, -0.2, 0.4, 0.1])];
    for (name, model) in &models {
        println!("{name} ({:?})", model.kind());
        for x in &points {
            let (local, curv) = model.curvature(x).unwrap();
            let scalar = (local.metric.try_inverse().unwrap() * curv.ricci()).trace();
            match einstein_ratio(model, x) {
                Ok(e) => println!("  x = {:?}: scalar curvature {scalar:+.4}, λ = {:+.4} (deviation {:.1e})", x.as_slice(), e.lambda, e.deviation),
                Err(e) => println!("  x = {:?}: {e}", x.as_slice()),
            }
        }
    }
}
