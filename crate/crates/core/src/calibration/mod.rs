//! Calabi-Yau data on the flat models: the holomorphic volume form, the
//! Lagrangian angle of a totally real frame, its lift and the Maslov form,
//! the calibration inequalities, and special totally real graphs.

mod graphs;

pub use graphs::{
    dichotomy_experiment, excess_exponent, homology_comparison, solve_str_family, str_graph_residual, totally_real_graph_check,
    AffineFamily, ClassReport, HomologyComparison, StrGraphValue, StrRoot,
};

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, SMatrix, SVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::ambient::LocalGeometry;
use crate::immersion::{rho_j_hermitian, FrameField, Immersion};
use crate::linalg::{complex_frame, det, polar_unitary};
use crate::tensors::{chern_hessian, xi_j};

/// Relative size of `|Ω(v)|` below which a frame counts as partially complex.
const DEGENERATE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("frame is partially complex (|Ω(v)| = {magnitude:.3e})")]
    Degenerate { magnitude: f64 },
    #[error("angle jumps by {jump:.3} between nodes {from} and {to}; insufficient resolution")]
    InsufficientResolution { from: usize, to: usize, jump: f64 },
    #[error("no bracket with a sign change of Im det found around s = {s0}")]
    NoBracket { s0: f64 },
    #[error("root s = {s} has Re det = {re:.3e} <= 0; no STR member found")]
    Rejected { s: f64, re: f64 },
    #[error(transparent)]
    Frame(#[from] crate::immersion::FrameError),
}

/// `Ω = e^{iθ_0} dz_1 ∧ ... ∧ dz_n` on flat `C^n` or a flat torus.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CalabiYau {
    pub phase: f64,
}

impl CalabiYau {
    pub fn evaluate<const N: usize, const D: usize>(&self, frame: &SMatrix<f64, D, N>) -> Complex64 {
        det(&complex_frame::<N, D>(frame)) * Complex64::from_polar(1.0, self.phase)
    }

    /// `e^{iθ}` from `Ω(v) / |v_1 ∧ ... ∧ v_n|_h`.
    pub fn angle_intrinsic<const N: usize, const D: usize>(&self, frame: &SMatrix<f64, D, N>) -> Result<f64, CalibrationError> {
        let omega = self.evaluate(frame);
        let m = complex_frame::<N, D>(frame);
        let h = m.adjoint() * m;
        let length = det(&h).re.max(0.0).sqrt();
        let scale: f64 = frame.column_iter().map(|c| c.norm()).product();
        if length <= DEGENERATE * scale {
            return Err(CalibrationError::Degenerate { magnitude: omega.norm() });
        }
        Ok((omega / length).arg())
    }

    /// Phase of `det_C U` in the polar decomposition `M = P U`.
    pub fn angle_polar<const N: usize, const D: usize>(&self, frame: &SMatrix<f64, D, N>) -> Result<f64, CalibrationError> {
        let m = complex_frame::<N, D>(frame);
        let magnitude = det(&m).norm();
        let scale: f64 = frame.column_iter().map(|c| c.norm()).product();
        if magnitude <= DEGENERATE * scale {
            return Err(CalibrationError::Degenerate { magnitude });
        }
        let dense = DMatrix::from_iterator(N, N, m.iter().cloned());
        let u = polar_unitary(&dense);
        Ok((u.determinant() * Complex64::from_polar(1.0, self.phase)).arg())
    }
}

/// Raw and lifted Lagrangian angle on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleField<const N: usize> {
    pub raw: Vec<f64>,
    pub lift: Vec<f64>,
    /// Winding of the lift around each generator of the torus.
    pub windings: [i64; N],
}

fn nearest_branch(target: f64, reference: f64) -> f64 {
    target + TAU * ((reference - target) / TAU).round()
}

impl<const N: usize> AngleField<N> {
    /// Greedy nearest-branch lift from node 0, sweeping in index order.
    pub fn new<const D: usize>(imm: &Immersion<N, D>, cy: &CalabiYau) -> Result<Self, CalibrationError> {
        let grid = imm.grid();
        let raw = (0..grid.len())
            .map(|idx| cy.angle_intrinsic(&imm.tangents(idx)))
            .collect::<Result<Vec<_>, _>>()?;
        let mut lift = vec![0.0; grid.len()];
        for idx in 0..grid.len() {
            let m = grid.multi_index(idx);
            lift[idx] = match (0..N).rev().find(|a| m[*a] > 0) {
                None => raw[idx],
                Some(axis) => nearest_branch(raw[idx], lift[grid.shift(idx, axis, -1).0]),
            };
        }
        let windings = std::array::from_fn(|axis| {
            let res = grid.resolution()[axis];
            let mut total = 0.0;
            let mut idx = 0;
            for _ in 0..res {
                let (next, _) = grid.shift(idx, axis, 1);
                total += nearest_branch(raw[next], raw[idx]) - raw[idx];
                idx = next;
            }
            (total / TAU).round() as i64
        });
        let field = Self { raw, lift, windings };
        for idx in 0..grid.len() {
            for axis in 0..N {
                let (nb, wraps) = grid.shift(idx, axis, 1);
                let jump = field.lifted(nb, wraps_array(axis, wraps)) - field.lift[idx];
                if jump.abs() > PI {
                    return Err(CalibrationError::InsufficientResolution { from: idx, to: nb, jump });
                }
            }
        }
        Ok(field)
    }

    fn lifted(&self, idx: usize, seams: [i64; N]) -> f64 {
        self.lift[idx] + TAU * seams.iter().zip(self.windings).map(|(s, w)| (s * w) as f64).sum::<f64>()
    }

    /// `μ_L = dθ_L` from the lift.
    pub fn maslov_form(&self, grid: &crate::grid::TorusGrid<N>) -> Vec<SVector<f64, N>> {
        (0..grid.len())
            .map(|idx| SVector::from_fn(|axis, _| grid.diff(idx, axis, |nb, seams| self.lifted(nb, seams))))
            .collect()
    }

    /// `∮ μ_L` along the coordinate loops through node 0.
    pub fn generator_integrals(&self, grid: &crate::grid::TorusGrid<N>) -> [f64; N] {
        let mu = self.maslov_form(grid);
        std::array::from_fn(|axis| {
            let mut idx = 0;
            let mut total = 0.0;
            for _ in 0..grid.resolution()[axis] {
                total += mu[idx][axis] * grid.spacing(axis);
                idx = grid.shift(idx, axis, 1).0;
            }
            total
        })
    }

    pub fn range(&self) -> (f64, f64) {
        self.lift.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
    }
}

fn wraps_array<const N: usize>(axis: usize, wraps: i64) -> [i64; N] {
    let mut s = [0; N];
    s[axis] = wraps;
    s
}

/// `sup |ξ_J + μ_L|`.
pub fn xi_j_vs_maslov_residual<const N: usize, const D: usize>(ff: &FrameField<N, D>, angle: &AngleField<N>) -> f64 {
    let mu = angle.maslov_form(&ff.grid);
    ff.frames
        .iter()
        .zip(&ff.seconds)
        .zip(&mu)
        .map(|((f, s), m)| (xi_j(f, &chern_hessian(f, s)) + m).amax())
        .fold(0.0, f64::max)
}

/// Both sides of `Re(e^{iθ}Ω) <= vol_J <= vol_g` on a frame, with the
/// equality cases as measured and as predicted by the phase and `ω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationCheck {
    pub re: f64,
    pub im: f64,
    pub vol_j: f64,
    pub vol_g: f64,
    pub first_equality: bool,
    pub second_equality: bool,
    /// `|Im| <= sqrt(2 tol vol_g vol_J)` and `Re > 0`.
    pub first_predicted: bool,
    /// `sup |ω_ij| <= sqrt(2 tol) vol_g`.
    pub second_predicted: bool,
    pub violated: bool,
}

pub fn calibration_check<const N: usize, const D: usize>(
    frame: &SMatrix<f64, D, N>,
    geometry: &LocalGeometry<D>,
    cy: &CalabiYau,
    theta: f64,
    tol: f64,
) -> CalibrationCheck {
    let value = cy.evaluate(frame) * Complex64::from_polar(1.0, theta);
    let metric = frame.transpose() * geometry.metric * frame;
    let omega = frame.transpose() * geometry.symplectic * frame;
    let vol_g = det(&metric).max(0.0).sqrt();
    let vol_j = rho_j_hermitian(frame, geometry) * vol_g;
    let scale = vol_g.max(f64::MIN_POSITIVE);
    let first = vol_j - value.re;
    let second = vol_g - vol_j;
    // Both slacks are quadratic in the defect that should vanish, so the
    // predicted equality windows scale like the square root of `tol`.
    let window = (2.0 * tol * scale).sqrt();
    let phase_window = (2.0 * tol * scale * vol_j).sqrt();
    CalibrationCheck {
        re: value.re,
        im: value.im,
        vol_j,
        vol_g,
        first_equality: first <= tol * scale,
        second_equality: second <= tol * scale,
        first_predicted: value.im.abs() <= phase_window && value.re > 0.0,
        second_predicted: omega.amax() <= window * scale.sqrt(),
        violated: first < -1e-12 * scale || second < -1e-12 * scale,
    }
}

/// Best constant phase, the `Im` defect of `e^{iθ}Ω` on `L` and the
/// Lagrangian defect, reported separately.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StrResidual {
    pub theta: f64,
    /// `sup |sin(θ_L + θ)| ρ_J √g`.
    pub residual: f64,
    /// `min cos(θ_L + θ) ρ_J √g`.
    pub min_re: f64,
    pub sup_omega: f64,
}

pub fn str_residual<const N: usize, const D: usize>(ff: &FrameField<N, D>, angle: &AngleField<N>) -> StrResidual {
    let (s, c) = angle.raw.iter().fold((0.0, 0.0), |(s, c), t| (s - t.sin(), c + t.cos()));
    let theta = s.atan2(c);
    let mut out = StrResidual { theta, residual: 0.0, min_re: f64::INFINITY, sup_omega: ff.sup_omega() };
    for (f, t) in ff.frames.iter().zip(&angle.raw) {
        let density = f.vol_j_density();
        out.residual = out.residual.max((t + theta).sin().abs() * density);
        out.min_re = out.min_re.min((t + theta).cos() * density);
    }
    out
}
