//! Maslov flow of a sheared torus in complex hyperbolic space: `ω` grows or
//! decays exponentially at the Einstein constant, here `λ = -3`.

use trflow::flows::write_csv;
use trflow::scenario::{run_flow, Scenario};

fn main() {
    let scenario = Scenario::preset("ch-sheared").unwrap();
    let out = run_flow(&scenario).unwrap();
    for (k, v) in &out.header {
        println!("# {k}: {v}");
    }
    let mut stdout = std::io::stdout();
    write_csv(&mut stdout, &[], &out.records).unwrap();
    println!("status: {:?}", out.status);
}
