//! Finite-difference checks of the first and second variation of `Vol_J`.
//!
//! A probe is a tangent field `Y` on the parameter torus; the variation moves
//! every node along the chart-straight line `ι + t J ι_* Y`.

use nalgebra::SVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ambient::Ambient;
use crate::fields::TrigField;
use crate::grid::TorusGrid;
use crate::immersion::{frame_field, FrameError, Immersion};
use crate::linalg::Vector;
use crate::tensors::node_tensors;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationError {
    #[error("margin lost within the probe range: {0}")]
    Frame(#[from] FrameError),
    #[error("second variation refused: not critical (sup |H_J| = {sup_h_j:.3e})")]
    NotCritical { sup_h_j: f64 },
    #[error("second variation refused: ambient is not flat")]
    NotFlat,
    #[error("probe has {got} nodes, grid has {expected}")]
    Shape { got: usize, expected: usize },
}

/// Coefficients of `Y` in the coordinate frame `∂_1, ..., ∂_N` at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationProbe<const N: usize> {
    pub coefficients: Vec<SVector<f64, N>>,
}

impl<const N: usize> VariationProbe<N> {
    pub fn from_fn(grid: &TorusGrid<N>, f: impl Fn([f64; N]) -> SVector<f64, N>) -> Self {
        Self { coefficients: (0..grid.len()).map(|i| f(grid.angles(i))).collect() }
    }

    pub fn zero(grid: &TorusGrid<N>) -> Self {
        Self::from_fn(grid, |_| SVector::zeros())
    }

    pub fn from_field(grid: &TorusGrid<N>, field: &TrigField<N, N>) -> Self {
        Self::from_fn(grid, |p| field.eval(p))
    }

    /// Periodized Gaussian bump of angular `width` times `∂_axis`.
    pub fn bump(grid: &TorusGrid<N>, center: [f64; N], width: f64, axis: usize) -> Self {
        Self::from_fn(grid, |p| {
            let r2: f64 = (0..N)
                .map(|a| {
                    let d = (p[a] - center[a] + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
                    d * d
                })
                .sum();
            unit(axis, (-r2 / (2.0 * width * width)).exp())
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { coefficients: self.coefficients.iter().map(|c| c * factor).collect() }
    }

    /// `J ι_* Y` at every node.
    pub fn velocity<const D: usize, A: Ambient<D> + ?Sized>(
        &self,
        imm: &Immersion<N, D>,
        model: &A,
    ) -> Result<Vec<Vector<D>>, VariationError> {
        let expected = imm.grid().len();
        if self.coefficients.len() != expected {
            return Err(VariationError::Shape { got: self.coefficients.len(), expected });
        }
        imm.positions()
            .iter()
            .enumerate()
            .map(|(node, x)| {
                let local = model.local(x).map_err(|source| FrameError::Ambient { node, source })?;
                Ok(local.j(&(imm.tangents(node) * self.coefficients[node])))
            })
            .collect()
    }
}

/// Serializable description of a probe field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProbeSpec {
    /// Constant coefficients.
    Constant { value: Vec<f64> },
    /// `sin(m·φ) ∂_axis`.
    Sine { mode: Vec<i64>, axis: usize, amplitude: f64 },
    /// Gaussian bump times `∂_axis`.
    Bump { center: Vec<f64>, width: f64, axis: usize },
    /// Smooth random field with modes up to `max_mode`.
    Random { seed: u64, max_mode: i64, amplitude: f64 },
}

impl ProbeSpec {
    pub fn build<const N: usize>(&self, grid: &TorusGrid<N>) -> Result<VariationProbe<N>, String> {
        let fixed = |v: &[f64], what: &str| -> Result<[f64; N], String> {
            v.try_into().map_err(|_| format!("{what} needs {N} entries, got {}", v.len()))
        };
        match self {
            Self::Constant { value } => {
                let v = SVector::from(fixed(value, "constant")?);
                Ok(VariationProbe::from_fn(grid, |_| v))
            }
            Self::Sine { mode, axis, amplitude } => {
                if *axis >= N || mode.len() != N {
                    return Err(format!("sine probe needs {N} mode entries and axis < {N}"));
                }
                Ok(VariationProbe::from_fn(grid, |p| {
                    let phase: f64 = mode.iter().zip(p).map(|(m, x)| *m as f64 * x).sum();
                    unit(*axis, amplitude * phase.sin())
                }))
            }
            Self::Bump { center, width, axis } => {
                if *axis >= N {
                    return Err(format!("bump axis must be < {N}"));
                }
                Ok(VariationProbe::bump(grid, fixed(center, "bump center")?, *width, *axis))
            }
            Self::Random { seed, max_mode, amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(VariationProbe::from_field(grid, &TrigField::random(&mut rng, *max_mode, *amplitude)))
            }
        }
    }
}

fn unit<const N: usize>(axis: usize, value: f64) -> SVector<f64, N> {
    SVector::from_fn(|i, _| if i == axis { value } else { 0.0 })
}

fn vol_j_at<const N: usize, const D: usize, A: Ambient<D> + ?Sized>(
    imm: &Immersion<N, D>,
    model: &A,
    velocity: &[Vector<D>],
    t: f64,
    margin: f64,
) -> Result<f64, FrameError> {
    Ok(frame_field(&imm.displaced(velocity, t), model, margin)?.vol_j())
}

/// Both sides of the first variation formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstVariation {
    /// Richardson-extrapolated central difference of `Vol_J`.
    pub finite_difference: f64,
    /// `-∫ g(JY, H_J + S_J) vol_J`.
    pub predicted: f64,
    /// `|fd - predicted| / max(|fd|, 1e-8)`.
    pub residual: f64,
}

/// `-g(J ι_* Y, H_J + S_J) ρ_J vol_g` at every node, i.e. the integrand of
/// the predicted first variation.
pub fn first_variation_density<const N: usize, const D: usize, A: Ambient<D> + ?Sized>(
    imm: &Immersion<N, D>,
    model: &A,
    probe: &VariationProbe<N>,
    margin: f64,
) -> Result<Vec<f64>, VariationError> {
    let velocity = probe.velocity(imm, model)?;
    let ff = frame_field(imm, model, margin)?;
    Ok(ff
        .frames
        .iter()
        .zip(&ff.seconds)
        .zip(&velocity)
        .map(|((frame, seconds), v)| {
            let t = node_tensors(frame, seconds);
            -frame.geometry.inner(v, &(t.h_j + t.s_j)) * frame.vol_j_density()
        })
        .collect())
}

pub fn first_variation_check<const N: usize, const D: usize, A: Ambient<D> + ?Sized>(
    imm: &Immersion<N, D>,
    model: &A,
    probe: &VariationProbe<N>,
    tau: f64,
    margin: f64,
) -> Result<FirstVariation, VariationError> {
    let velocity = probe.velocity(imm, model)?;
    let f = |t: f64| vol_j_at(imm, model, &velocity, t, margin);
    let (p1, m1, p2, m2) = (f(tau)?, f(-tau)?, f(2.0 * tau)?, f(-2.0 * tau)?);
    let finite_difference = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * tau);
    let predicted = imm.grid().integrate(first_variation_density(imm, model, probe, margin)?.into_iter());
    Ok(FirstVariation {
        finite_difference,
        predicted,
        residual: (finite_difference - predicted).abs() / finite_difference.abs().max(1e-8),
    })
}

/// Gradient of `Vol_J` recovered from localized probes at one node, next to
/// the value read off `H_J + S_J`. Both are the components
/// `-g(J∂_k, grad)` for `k = 1..N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientReconstruction {
    pub node: usize,
    pub reconstructed: Vec<f64>,
    pub expected: Vec<f64>,
    /// `|reconstructed - expected| / |expected|`.
    pub relative_error: f64,
}

/// Divides the first variation along bumps `b ∂_k` centred at `node` by
/// `∫ b ρ_J vol_g` to read off `g(J∂_k, H_J + S_J)`.
pub fn reconstruct_gradient<const N: usize, const D: usize, A: Ambient<D> + ?Sized>(
    imm: &Immersion<N, D>,
    model: &A,
    node: usize,
    width: f64,
    tau: f64,
    margin: f64,
) -> Result<GradientReconstruction, VariationError> {
    let grid = *imm.grid();
    let ff = frame_field(imm, model, margin)?;
    let center = grid.angles(node);
    let frame = &ff.frames[node];
    let tensors = node_tensors(frame, &ff.seconds[node]);
    let mut reconstructed = Vec::with_capacity(N);
    let mut expected = Vec::with_capacity(N);
    for k in 0..N {
        let probe = VariationProbe::bump(&grid, center, width, k);
        let weight = grid.integrate(ff.frames.iter().zip(&probe.coefficients).map(|(f, c)| c[k] * f.vol_j_density()));
        let fv = first_variation_check(imm, model, &probe, tau, margin)?;
        reconstructed.push(fv.finite_difference / weight);
        expected.push(-frame.geometry.inner(&frame.jt(k), &(tensors.h_j + tensors.s_j)));
    }
    let diff: f64 = reconstructed.iter().zip(&expected).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = expected.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(GradientReconstruction { node, reconstructed, expected, relative_error: diff / norm.max(1e-12) })
}

/// Second variation at a critical immersion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondVariation {
    pub finite_difference: f64,
    /// `∫ (Div Y)² vol_g`.
    pub predicted: f64,
    /// `|fd - predicted| / max(|predicted|, 1e-8)`.
    pub residual: f64,
}

/// Threshold on `sup |H_J|` below which an immersion counts as critical.
pub const CRITICAL_TOL: f64 = 1e-8;

/// Compares the five-point second difference of `Vol_J` with `∫ (Div Y)²`.
/// Only defined at critical immersions of a flat model, where the terms
/// involving `H_J`, the Ricci form and the family's acceleration drop out.
pub fn second_variation_at_critical<const N: usize, const D: usize, A: Ambient<D> + ?Sized>(
    imm: &Immersion<N, D>,
    model: &A,
    probe: &VariationProbe<N>,
    tau: f64,
    margin: f64,
) -> Result<SecondVariation, VariationError> {
    if !model.is_flat() {
        return Err(VariationError::NotFlat);
    }
    let ff = frame_field(imm, model, margin)?;
    let sup_h_j = ff
        .frames
        .iter()
        .zip(&ff.seconds)
        .map(|(f, s)| {
            let h = node_tensors(f, s).h_j;
            f.geometry.inner(&h, &h).sqrt()
        })
        .fold(0.0, f64::max);
    if sup_h_j > CRITICAL_TOL {
        return Err(VariationError::NotCritical { sup_h_j });
    }
    let velocity = probe.velocity(imm, model)?;
    let f = |t: f64| vol_j_at(imm, model, &velocity, t, margin);
    let (f0, p1, m1, p2, m2) = (f(0.0)?, f(tau)?, f(-tau)?, f(2.0 * tau)?, f(-2.0 * tau)?);
    let finite_difference = (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * f0) / (12.0 * tau * tau);

    // Div Y = (1/√g) ∂_i(√g Y^i) on the induced metric.
    let grid = ff.grid;
    let weighted: Vec<SVector<f64, N>> =
        ff.frames.iter().zip(&probe.coefficients).map(|(f, y)| y * f.vol_density).collect();
    let predicted = grid.integrate((0..grid.len()).map(|i| {
        let div: f64 = (0..N).map(|a| grid.diff_periodic(&weighted, i, a)[a]).sum::<f64>() / ff.frames[i].vol_density;
        div * div * ff.frames[i].vol_density
    }));
    Ok(SecondVariation {
        finite_difference,
        predicted,
        residual: (finite_difference - predicted).abs() / predicted.abs().max(1e-8),
    })
}

#[cfg(test)]
mod tests;
