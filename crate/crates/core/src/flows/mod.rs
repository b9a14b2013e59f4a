//! Mean curvature flow, J-mean curvature flow and Maslov flow of discretized
//! totally real tori, with per-cadence diagnostics.
//!
//! The ambient is either held fixed or, in [`krf`], evolved by Kähler-Ricci
//! flow on a potential correction stored on a box grid.

pub mod krf;

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ambient::{Ambient, AmbientError};
use crate::calibration::{AngleField, CalabiYau};
use crate::immersion::{frame_field, FrameError, FrameField, Immersion};
use crate::linalg::Vector;
use crate::tensors::{chern_hessian, h_j, integrability_residual, lc_hessian, mean_curvature, s_j, t_j};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowKind {
    /// Velocity `H`.
    Mcf,
    /// Velocity `H_J + S_J`, the negative J-volume gradient.
    Jmcf,
    /// Velocity `H_J + T_J`.
    Maslov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbientMode {
    Static,
    /// Static Kähler-Einstein background; `ω_t = e^{λt} ω_0` is the expected law.
    KeNormalized,
    /// Coupled Kähler-Ricci flow of the potential.
    KrfPotential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub kind: FlowKind,
    pub ambient_mode: AmbientMode,
    pub dt: f64,
    pub steps: usize,
    pub integrator: Integrator,
    pub diagnostics_every: usize,
    pub margin_min: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            kind: FlowKind::Maslov,
            ambient_mode: AmbientMode::Static,
            dt: 1e-4,
            steps: 200,
            integrator: Integrator::Rk4,
            diagnostics_every: 10,
            margin_min: crate::immersion::DEFAULT_MARGIN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowStatus {
    Running,
    Completed,
    Degenerate,
    LeftDomain,
    Unstable,
    AmbientDegenerate,
}

impl fmt::Display for FlowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FlowStatus::Running => "running",
            FlowStatus::Completed => "completed",
            FlowStatus::Degenerate => "degenerate",
            FlowStatus::LeftDomain => "left-domain",
            FlowStatus::Unstable => "unstable",
            FlowStatus::AmbientDegenerate => "ambient-degenerate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("degenerate: totally real margin lost at node {node} (ρ_J = {rho_j:.3e})")]
    Degenerate { node: usize, rho_j: f64 },
    #[error("left chart domain at node {node}")]
    LeftDomain { node: usize },
    #[error("ambient degenerate: {0}")]
    AmbientDegenerate(String),
    #[error("unstable step: displacement {displacement:.3e} exceeds {limit:.3e}")]
    Unstable { displacement: f64, limit: f64 },
}

impl FlowError {
    pub fn status(&self) -> FlowStatus {
        match self {
            FlowError::Degenerate { .. } => FlowStatus::Degenerate,
            FlowError::LeftDomain { .. } => FlowStatus::LeftDomain,
            FlowError::AmbientDegenerate(_) => FlowStatus::AmbientDegenerate,
            FlowError::Unstable { .. } => FlowStatus::Unstable,
        }
    }
}

impl From<FrameError> for FlowError {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::NotTotallyReal { node, rho_j } => FlowError::Degenerate { node, rho_j },
            FrameError::Ambient { node, source: AmbientError::OutOfDomain { .. } } => FlowError::LeftDomain { node },
            FrameError::Ambient { node, source } => FlowError::AmbientDegenerate(format!("node {node}: {source}")),
        }
    }
}

/// Flow velocity at every node of a frame field.
pub fn velocity_from_frames<const N: usize, const D: usize>(ff: &FrameField<N, D>, kind: FlowKind) -> Vec<Vector<D>> {
    ff.frames
        .par_iter()
        .zip(&ff.seconds)
        .map(|(f, s)| match kind {
            FlowKind::Mcf => mean_curvature(f, &lc_hessian(f, s)),
            FlowKind::Jmcf => h_j(f, &chern_hessian(f, s)) + s_j(f),
            FlowKind::Maslov => h_j(f, &chern_hessian(f, s)) + t_j(f),
        })
        .collect()
}

pub fn velocity<const N: usize, const D: usize, A: Ambient<D> + ?Sized>(
    imm: &Immersion<N, D>,
    model: &A,
    kind: FlowKind,
    margin: f64,
) -> Result<Vec<Vector<D>>, FlowError> {
    Ok(velocity_from_frames(&frame_field(imm, model, margin)?, kind))
}

/// `dt` times the largest symbol eigenvalue on the grid, `|ζ|²_g` at the
/// Nyquist covector. Explicit Euler wants this below 0.25.
pub fn stability_number<const N: usize, const D: usize>(ff: &FrameField<N, D>, dt: f64) -> f64 {
    let zeta = nalgebra::SVector::<f64, N>::from_fn(|a, _| std::f64::consts::PI / ff.grid.spacing(a));
    ff.frames.iter().map(|f| (zeta.transpose() * f.metric_inv * zeta)[0]).fold(0.0, f64::max) * dt
}

/// One row of the diagnostics series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Record {
    pub t: f64,
    pub vol_g: f64,
    pub vol_j: f64,
    /// `max |ω(∂_i, ∂_j)|` in grid coordinates, so `ω_t = e^{λt} ω_0` shows as a pure exponential.
    pub sup_omega: f64,
    pub min_rho_j: f64,
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
    pub integrability_residual: f64,
    pub status: FlowStatus,
}

pub const CSV_COLUMNS: [&str; 9] =
    ["t", "vol_g", "vol_J", "sup_omega", "min_rhoJ", "theta_min", "theta_max", "integrability_residual", "status"];

/// Writes `# key: value` comment lines followed by the series.
pub fn write_csv(out: &mut impl Write, header: &[(String, String)], records: &[Record]) -> std::io::Result<()> {
    for (k, v) in header {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x:.12e}"));
    for r in records {
        w.write_record([
            format!("{:.12e}", r.t),
            format!("{:.12e}", r.vol_g),
            format!("{:.12e}", r.vol_j),
            format!("{:.12e}", r.sup_omega),
            format!("{:.12e}", r.min_rho_j),
            opt(r.theta_min),
            opt(r.theta_max),
            format!("{:.12e}", r.integrability_residual),
            r.status.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn record<const N: usize, const D: usize, A: Ambient<D> + ?Sized>(
    t: f64,
    imm: &Immersion<N, D>,
    model: &A,
    margin: f64,
    status: FlowStatus,
) -> Result<Record, FlowError> {
    let ff = frame_field(imm, model, margin)?;
    let (theta_min, theta_max) = if model.is_flat() {
        match AngleField::new(imm, &CalabiYau::default()) {
            Ok(a) => {
                let (lo, hi) = a.range();
                (Some(lo), Some(hi))
            }
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };
    Ok(Record {
        t,
        vol_g: ff.vol_g(),
        vol_j: ff.vol_j(),
        sup_omega: ff.sup_omega(),
        min_rho_j: ff.min_rho_j(),
        theta_min,
        theta_max,
        integrability_residual: integrability_residual(imm, model, margin)?,
        status,
    })
}

/// Smallest distance between neighbouring nodes, the scale for the
/// unstable-step guard.
pub(crate) fn node_spacing<const N: usize, const D: usize>(imm: &Immersion<N, D>) -> f64 {
    let grid = imm.grid();
    (0..grid.len())
        .flat_map(|idx| (0..N).map(move |a| (idx, a)))
        .map(|(idx, a)| imm.tangent(idx, a).norm() * grid.spacing(a))
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn advance<const D: usize>(positions: &[Vector<D>], rate: &[Vector<D>], dt: f64) -> Vec<Vector<D>> {
    positions.iter().zip(rate).map(|(p, v)| p + v * dt).collect()
}

/// A flow in a fixed ambient.
#[derive(Debug, Clone)]
pub struct Flow<'a, const N: usize, const D: usize, A: Ambient<D> + ?Sized> {
    model: &'a A,
    config: FlowConfig,
    immersion: Immersion<N, D>,
    t: f64,
    steps_taken: usize,
    status: FlowStatus,
}

impl<'a, const N: usize, const D: usize, A: Ambient<D> + ?Sized> Flow<'a, N, D, A> {
    pub fn new(immersion: Immersion<N, D>, model: &'a A, config: FlowConfig) -> Self {
        Self { model, config, immersion, t: 0.0, steps_taken: 0, status: FlowStatus::Running }
    }

    pub fn immersion(&self) -> &Immersion<N, D> {
        &self.immersion
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn status(&self) -> FlowStatus {
        self.status
    }

    fn rate(&self, positions: Vec<Vector<D>>) -> Result<(Vec<Vector<D>>, Immersion<N, D>), FlowError> {
        let imm = self.immersion.with_positions(positions).map_err(|e| FlowError::AmbientDegenerate(e.to_string()))?;
        let v = velocity(&imm, self.model, self.config.kind, self.config.margin_min)?;
        Ok((v, imm))
    }

    /// Advances one time step. On error the flow becomes terminal.
    pub fn step(&mut self) -> Result<(), FlowError> {
        let result = self.try_step();
        if let Err(e) = &result {
            self.status = e.status();
        }
        result
    }

    fn try_step(&mut self) -> Result<(), FlowError> {
        let dt = self.config.dt;
        let x0 = self.immersion.positions().to_vec();
        let (k1, _) = self.rate(x0.clone())?;
        let next = match self.config.integrator {
            Integrator::Euler => advance(&x0, &k1, dt),
            Integrator::Rk4 => {
                let (k2, _) = self.rate(advance(&x0, &k1, 0.5 * dt))?;
                let (k3, _) = self.rate(advance(&x0, &k2, 0.5 * dt))?;
                let (k4, _) = self.rate(advance(&x0, &k3, dt))?;
                x0.iter()
                    .enumerate()
                    .map(|(i, p)| p + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0))
                    .collect()
            }
        };
        let displacement = x0.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let limit = 10.0 * node_spacing(&self.immersion);
        if displacement > limit {
            return Err(FlowError::Unstable { displacement, limit });
        }
        self.immersion = self.immersion.with_positions(next).map_err(|e| FlowError::AmbientDegenerate(e.to_string()))?;
        self.t += dt;
        self.steps_taken += 1;
        Ok(())
    }

    pub fn record(&self) -> Result<Record, FlowError> {
        record(self.t, &self.immersion, self.model, self.config.margin_min, self.status)
    }

    /// Runs the configured number of steps, recording on cadence and at the
    /// end; stops early with a terminal status on failure.
    pub fn run(&mut self) -> Vec<Record> {
        let mut records = Vec::new();
        let every = self.config.diagnostics_every.max(1);
        if let Ok(r) = self.record() {
            records.push(r);
        }
        while self.steps_taken < self.config.steps {
            if self.step().is_err() {
                break;
            }
            if self.steps_taken.is_multiple_of(every) && self.steps_taken < self.config.steps {
                match self.record() {
                    Ok(r) => records.push(r),
                    Err(e) => {
                        self.status = e.status();
                        break;
                    }
                }
            }
        }
        if self.status == FlowStatus::Running {
            self.status = FlowStatus::Completed;
        }
        match self.record() {
            Ok(r) => records.push(r),
            Err(_) => {
                if let Some(last) = records.last_mut() {
                    last.status = self.status;
                }
            }
        }
        records
    }
}

#[cfg(test)]
mod tests;
