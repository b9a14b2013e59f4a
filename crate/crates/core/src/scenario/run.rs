//! Orchestration behind the `trflow` subcommands. Each runner returns plain
//! data; the binary only handles files and exit codes.

use serde::{Deserialize, Serialize};

use super::{Scenario, ScenarioError};
use crate::ambient::{einstein_ratio, Ambient, AmbientModel};
use crate::calibration::{solve_str_family, AffineFamily, AngleField, CalabiYau, CalibrationError, StrRoot};
use crate::flows::krf::CoupledFlow;
use crate::flows::{stability_number, AmbientMode, Flow, FlowStatus, Integrator, Record};
use crate::immersion::frame_field;
use crate::tensors::{symbol_report, SymbolReport};
use crate::variation::{first_variation_check, second_variation_at_critical, FirstVariation, ProbeSpec, SecondVariation};

fn invalid(e: impl std::fmt::Display) -> ScenarioError {
    ScenarioError::Invalid { field: "immersion", reason: e.to_string() }
}

/// Node positions at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub resolution: [usize; 2],
    pub positions: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowOutput {
    /// `# key: value` lines for the CSV.
    pub header: Vec<(String, String)>,
    pub records: Vec<Record>,
    /// `(t, sup |ω_t - ω_0|)` for coupled runs.
    pub drift: Option<Vec<(f64, f64)>>,
    pub snapshots: Vec<Snapshot>,
    pub status: FlowStatus,
}

fn snapshot(t: f64, imm: &crate::immersion::Immersion<2, 4>) -> Snapshot {
    Snapshot { t, resolution: imm.grid().resolution(), positions: imm.positions().iter().map(|p| [p[0], p[1], p[2], p[3]]).collect() }
}

/// Least-squares slope of `log sup|ω|` against `t`.
pub fn exponential_fit(records: &[Record]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records.iter().filter(|r| r.sup_omega > 0.0).map(|r| (r.t, r.sup_omega.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mt, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(t, _)| (t - mt).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn run_flow(s: &Scenario) -> Result<FlowOutput, ScenarioError> {
    let cfg = s.flow;
    let imm = s.immersion()?;
    let model = s.model()?;
    let mut header = vec![
        ("scenario".to_string(), s.name.clone()),
        ("kind".to_string(), serde_json::to_value(cfg.kind).unwrap().as_str().unwrap_or_default().to_string()),
        ("ambient_mode".to_string(), serde_json::to_value(cfg.ambient_mode).unwrap().as_str().unwrap_or_default().to_string()),
        ("dt".to_string(), format!("{:e}", cfg.dt)),
        ("steps".to_string(), cfg.steps.to_string()),
        ("resolution".to_string(), s.resolution.to_string()),
    ];
    let ff = frame_field(&imm, &model, cfg.margin_min).map_err(invalid)?;
    let stability = stability_number(&ff, cfg.dt);
    header.push(("stability_number".into(), format!("{stability:.4}")));
    if cfg.integrator == Integrator::Euler && stability > 0.25 {
        header.push(("warning".into(), "explicit Euler above the 0.25 stability bound".into()));
    }
    let mut lambda = None;
    if cfg.ambient_mode == AmbientMode::KeNormalized {
        if let AmbientModel::Potential(p) = &model {
            let e = einstein_ratio(p, &imm.positions()[0])?;
            header.push(("lambda".into(), format!("{:.12e}", e.lambda)));
            header.push(("lambda_deviation".into(), format!("{:.3e}", e.deviation)));
            lambda = Some(e.lambda);
        }
    }

    if cfg.ambient_mode == AmbientMode::KrfPotential {
        let potential = s.krf_potential().ok_or_else(|| invalid("krf_potential needs a flat-plus-bump ambient"))?;
        header.push(("box_nodes".into(), s.krf.nodes.to_string()));
        let mut flow = CoupledFlow::new(imm, potential, cfg).map_err(invalid)?;
        let run = flow.run(true);
        let drift = run.drift.last().map_or(0.0, |d| d.1);
        header.push(("final_drift".into(), format!("{drift:.6e}")));
        let snapshots = if s.output.snapshots { vec![snapshot(flow.time(), flow.immersion())] } else { Vec::new() };
        return Ok(FlowOutput { header, records: run.records, drift: Some(run.drift), snapshots, status: run.status });
    }

    let mut flow = Flow::new(imm, &model, cfg);
    let every = cfg.diagnostics_every.max(1);
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    let mut push = |flow: &Flow<'_, 2, 4, AmbientModel<4>>, records: &mut Vec<Record>| {
        if let Ok(r) = flow.record() {
            records.push(r);
            if s.output.snapshots {
                snapshots.push(snapshot(flow.time(), flow.immersion()));
            }
        }
    };
    push(&flow, &mut records);
    let mut taken = 0;
    while taken < cfg.steps {
        if flow.step().is_err() {
            break;
        }
        taken += 1;
        if taken % every == 0 || taken == cfg.steps {
            push(&flow, &mut records);
        }
    }
    let status = if flow.status() == FlowStatus::Running { FlowStatus::Completed } else { flow.status() };
    if let Some(last) = records.last_mut() {
        last.status = status;
    }
    if let (Some(l), Some(fit)) = (lambda, exponential_fit(&records)) {
        header.push(("fitted_slope".into(), format!("{fit:.12e}")));
        header.push(("fit_relative_error".into(), format!("{:.3e}", ((fit - l) / l).abs())));
    }
    Ok(FlowOutput { header, records, drift: None, snapshots, status })
}

/// Per-node Lagrangian angle of a flat scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleTable {
    pub raw: Vec<f64>,
    pub lift: Vec<f64>,
    pub windings: [i64; 2],
    pub generator_integrals: [f64; 2],
}

pub fn angle_table(s: &Scenario) -> Result<AngleTable, ScenarioError> {
    let model = s.model()?;
    if !model.is_flat() {
        return Err(ScenarioError::Invalid { field: "ambient", reason: "the Lagrangian angle needs a flat model".into() });
    }
    let imm = s.immersion()?;
    let angle = AngleField::new(&imm, &CalabiYau { phase: s.calabi_yau_phase }).map_err(invalid)?;
    let generator_integrals = angle.generator_integrals(imm.grid());
    Ok(AngleTable { generator_integrals, windings: angle.windings, raw: angle.raw, lift: angle.lift })
}

/// Contents of a `str-solve` input file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrSolveRequest {
    pub family: AffineFamily,
    #[serde(default)]
    pub initial: f64,
}

impl StrSolveRequest {
    /// Built-in families: `diagonal` (with `a = 0.3`), `nilpotent`, `negative-real`.
    pub fn preset(name: &str) -> Option<Self> {
        let family = match name {
            "diagonal" => AffineFamily::diagonal(0.3),
            "nilpotent" => AffineFamily::nilpotent(),
            "negative-real" => AffineFamily::negative_real(),
            _ => return None,
        };
        Some(Self { family, initial: 0.0 })
    }
}

pub fn str_solve(req: &StrSolveRequest) -> Result<StrRoot, CalibrationError> {
    solve_str_family(&req.family, req.initial)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationSuite {
    pub probe: ProbeSpec,
    pub first: FirstVariation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second: Option<SecondVariation>,
    /// Why the second variation was not evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second_refused: Option<String>,
}

pub fn variation_suite(s: &Scenario, probe: &ProbeSpec) -> Result<VariationSuite, ScenarioError> {
    let imm = s.immersion()?;
    let model = s.model()?;
    let y = probe.build(imm.grid()).map_err(|reason| ScenarioError::Invalid { field: "probe", reason })?;
    let margin = s.flow.margin_min;
    let first = first_variation_check(&imm, &model, &y, 1e-4, margin).map_err(invalid)?;
    let (second, second_refused) = match second_variation_at_critical(&imm, &model, &y, 1e-2, margin) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(VariationSuite { probe: probe.clone(), first, second, second_refused })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolSuite {
    /// Reports at a few spread-out nodes.
    pub reports: Vec<(usize, SymbolReport)>,
    pub rank_one: bool,
}

pub fn symbol_suite(s: &Scenario) -> Result<SymbolSuite, ScenarioError> {
    let imm = s.immersion()?;
    let ff = frame_field(&imm, &s.model()?, s.flow.margin_min).map_err(invalid)?;
    let zeta = nalgebra::SVector::from(s.symbol_covector);
    let n = ff.frames.len();
    let reports = [0, n / 3, (2 * n) / 3]
        .into_iter()
        .map(|node| Ok((node, symbol_report(&ff.frames[node], &zeta).map_err(invalid)?)))
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let rank_one = reports.iter().all(|(_, r)| r.rank == 1);
    Ok(SymbolSuite { reports, rank_one })
}
