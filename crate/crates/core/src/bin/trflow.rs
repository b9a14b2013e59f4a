use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use trflow::flows::{write_csv, FlowStatus};
use trflow::scenario::{self, Scenario, StrSolveRequest};
use trflow::variation::ProbeSpec;

#[derive(Parser)]
#[command(version, about = "Totally real tori: residual checks, Maslov-type flows, Lagrangian angles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory (overrides the scenario's).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 1 gives bit-reproducible output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for random sampling (overrides the scenario's).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Nodes per parameter axis (overrides the scenario's).
    #[arg(long, global = true)]
    resolution: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the residual suite and write report.json.
    Check { scenario: String },
    /// Run the configured flow and write series.csv.
    Flow { scenario: String },
    /// Write the Lagrangian angle per node and its generator integrals.
    Angle { scenario: String },
    /// Solve an affine graph family for the special totally real condition.
    StrSolve { family: String },
    /// Compare finite-difference variations of the J-volume with the formulas.
    Variation {
        scenario: String,
        /// Probe field as inline JSON or a file path.
        #[arg(long)]
        probe: String,
    },
    /// Principal symbol report at a few nodes.
    Symbol { scenario: String },
}

type Fallible<T> = Result<T, Box<dyn std::error::Error>>;

fn load(cli: &Cli, source: &str) -> Fallible<(Scenario, PathBuf)> {
    let mut s = Scenario::load(source)?;
    if let Some(r) = cli.resolution {
        s.resolution = r;
    }
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    s.validate()?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&s.output.dir));
    fs::create_dir_all(&out)?;
    fs::write(out.join("resolved_config.json"), s.resolved_json())?;
    Ok((s, out))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Fallible<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn run(cli: &Cli) -> Fallible<bool> {
    match &cli.command {
        Command::Check { scenario } => {
            let (s, out) = load(cli, scenario)?;
            let report = scenario::check_suite(&s)?;
            for c in &report.checks {
                println!("{:<34} {:>12.3e}  tol {:>9.1e}  {}", c.check, c.value, c.tolerance, if c.pass { "pass" } else { "FAIL" });
            }
            write_json(&out.join("report.json"), &report)?;
            Ok(report.all_pass())
        }
        Command::Flow { scenario } => {
            let (s, out) = load(cli, scenario)?;
            let result = scenario::run_flow(&s)?;
            let mut file = BufWriter::new(fs::File::create(out.join("series.csv"))?);
            write_csv(&mut file, &result.header, &result.records)?;
            if let Some(drift) = &result.drift {
                let mut w = csv::Writer::from_path(out.join("drift.csv"))?;
                w.write_record(["t", "drift"])?;
                for (t, d) in drift {
                    w.write_record([format!("{t:.12e}"), format!("{d:.12e}")])?;
                }
                w.flush()?;
            }
            if !result.snapshots.is_empty() {
                let dir = out.join("snapshots");
                fs::create_dir_all(&dir)?;
                for (k, snap) in result.snapshots.iter().enumerate() {
                    write_json(&dir.join(format!("snapshot_{k:04}.json")), snap)?;
                }
            }
            for (k, v) in &result.header {
                println!("{k}: {v}");
            }
            println!("status: {}", result.status);
            Ok(result.status == FlowStatus::Completed)
        }
        Command::Angle { scenario } => {
            let (s, out) = load(cli, scenario)?;
            let table = scenario::angle_table(&s)?;
            let mut w = csv::Writer::from_path(out.join("angle.csv"))?;
            w.write_record(["node", "theta_raw", "theta_lift"])?;
            for (node, (raw, lift)) in table.raw.iter().zip(&table.lift).enumerate() {
                w.write_record([node.to_string(), format!("{raw:.12e}"), format!("{lift:.12e}")])?;
            }
            w.flush()?;
            let summary = serde_json::json!({
                "windings": table.windings,
                "generator_integrals": table.generator_integrals,
            });
            write_json(&out.join("angle.json"), &summary)?;
            println!("windings {:?}, generator integrals {:?}", table.windings, table.generator_integrals);
            Ok(true)
        }
        Command::StrSolve { family } => {
            let req = match StrSolveRequest::preset(family) {
                Some(r) => r,
                None => {
                    let text = fs::read_to_string(family)?;
                    let de = &mut serde_json::Deserializer::from_str(&text);
                    serde_path_to_error::deserialize(de).map_err(|e| format!("{}: {}", e.path(), e.inner()))?
                }
            };
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
            fs::create_dir_all(&out)?;
            let root = scenario::str_solve(&req)?;
            write_json(&out.join("str_root.json"), &root)?;
            println!("s = {:.15e}, Im det = {:.3e}, Re det = {:.6}, identically satisfied: {}", root.s, root.value.im, root.value.re, root.identically_satisfied);
            Ok(true)
        }
        Command::Variation { scenario, probe } => {
            let (s, out) = load(cli, scenario)?;
            let text = if Path::new(probe).exists() { fs::read_to_string(probe)? } else { probe.clone() };
            let spec: ProbeSpec = serde_json::from_str(&text)?;
            let suite = scenario::variation_suite(&s, &spec)?;
            write_json(&out.join("variation.json"), &suite)?;
            println!("first variation: fd {:.10e}, formula {:.10e}, residual {:.3e}", suite.first.finite_difference, suite.first.predicted, suite.first.residual);
            let mut pass = suite.first.residual <= 1e-5;
            match (&suite.second, &suite.second_refused) {
                (Some(v), _) => {
                    println!("second variation: fd {:.10e}, formula {:.10e}, residual {:.3e}", v.finite_difference, v.predicted, v.residual);
                    pass &= v.residual <= 1e-4;
                }
                (None, Some(reason)) => println!("{reason}"),
                _ => {}
            }
            Ok(pass)
        }
        Command::Symbol { scenario } => {
            let (s, out) = load(cli, scenario)?;
            let suite = scenario::symbol_suite(&s)?;
            write_json(&out.join("symbol.json"), &suite)?;
            let mut pass = suite.rank_one;
            for (node, r) in &suite.reports {
                let err = (r.eigenvalue - r.expected_eigenvalue).abs() / r.expected_eigenvalue;
                pass &= err <= 1e-12 && r.composition_residual <= 1e-12;
                println!("node {node}: eigenvalue {:.12} (|ζ|² = {:.12}), rank {}, kernel {}", r.eigenvalue, r.expected_eigenvalue, r.rank, r.kernel_dim);
            }
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
