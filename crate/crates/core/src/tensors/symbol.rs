//! Principal symbols of `H_J` and of the operator `W ↦ d(ι*ω(W, ·))`, and a
//! high-frequency plane-wave harness that measures the former numerically.

use nalgebra::{DMatrix, SVector};
use serde::Serialize;

use super::{chern_hessian, h_j, TensorError};
use crate::ambient::Ambient;
use crate::immersion::{frame_field, Immersion, NodeFrame};
use crate::linalg::{numerical_rank, singular_values, Matrix, Vector};

const RANK_TOL: f64 = 1e-10;

/// `ι_* ζ♯` for a covector `ζ` on `T L`.
fn sharp<const N: usize, const D: usize>(frame: &NodeFrame<N, D>, zeta: &SVector<f64, N>) -> Vector<D> {
    frame.tangents * (frame.metric_inv * zeta)
}

/// Matrix of `π_J` in ambient coordinates.
fn pi_j_matrix<const N: usize, const D: usize>(frame: &NodeFrame<N, D>) -> Matrix<D> {
    let jt = frame.geometry.complex_structure * frame.tangents;
    jt * frame.basis_inv.fixed_rows::<N>(N)
}

/// `σ(H_J)(ζ): Z ↦ g(J ι_*ζ♯, π_J Z) J ι_*ζ♯`.
pub fn symbol_matrix<const N: usize, const D: usize>(frame: &NodeFrame<N, D>, zeta: &SVector<f64, N>) -> Matrix<D> {
    let jv = frame.geometry.j(&sharp(frame, zeta));
    jv * (jv.transpose() * frame.geometry.metric * pi_j_matrix(frame))
}

/// `σ(L)(ζ): W ↦ ζ ∧ ι*ω(W, ·)`, one row per pair `i < j`.
pub fn linearization_symbol<const N: usize, const D: usize>(
    frame: &NodeFrame<N, D>,
    zeta: &SVector<f64, N>,
) -> DMatrix<f64> {
    let pairs: Vec<(usize, usize)> = (0..N).flat_map(|i| ((i + 1)..N).map(move |j| (i, j))).collect();
    let w = &frame.geometry.symplectic;
    let mut out = DMatrix::zeros(pairs.len(), D);
    for (row, &(i, j)) in pairs.iter().enumerate() {
        let row_vec = (w * frame.tangent(j)) * zeta[i] - (w * frame.tangent(i)) * zeta[j];
        out.row_mut(row).copy_from(&row_vec.transpose());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolReport {
    pub zeta: Vec<f64>,
    /// Rayleigh quotient of `σ(H_J)` on `J ι_*ζ♯`.
    pub eigenvalue: f64,
    /// `|ζ|²_g`.
    pub expected_eigenvalue: f64,
    pub rank: usize,
    pub kernel_dim: usize,
    pub l_kernel_dim: usize,
    /// `max |σ(L) σ(H_J)|`.
    pub composition_residual: f64,
}

pub fn symbol_report<const N: usize, const D: usize>(
    frame: &NodeFrame<N, D>,
    zeta: &SVector<f64, N>,
) -> Result<SymbolReport, TensorError> {
    if zeta.iter().all(|z| *z == 0.0) {
        return Err(TensorError::ZeroCovector);
    }
    let s = symbol_matrix(frame, zeta);
    let l = linearization_symbol(frame, zeta);
    let jv = frame.geometry.j(&sharp(frame, zeta));
    let g = &frame.geometry;
    let eigenvalue = g.inner(&(s * jv), &jv) / g.inner(&jv, &jv);
    let expected_eigenvalue = (zeta.transpose() * frame.metric_inv * zeta)[0];
    let rank = numerical_rank(&singular_values(&DMatrix::from_column_slice(D, D, s.as_slice())), RANK_TOL);
    let l_rank = if l.nrows() == 0 { 0 } else { numerical_rank(&singular_values(&l), RANK_TOL) };
    let composition = &l * DMatrix::from_column_slice(D, D, s.as_slice());
    Ok(SymbolReport {
        zeta: zeta.iter().copied().collect(),
        eigenvalue,
        expected_eigenvalue,
        rank,
        kernel_dim: D - rank,
        l_kernel_dim: D - l_rank,
        composition_residual: composition.amax(),
    })
}

/// Direction of a plane-wave perturbation relative to `ζ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveDirection {
    /// `J ι_*ζ♯`, the eigendirection of the symbol.
    Normal,
    /// `ι_*ζ♯`.
    Tangent,
    /// `J ι_*η♯` with `η ⊥ ζ`.
    JOrthogonal,
}

/// Perturbation `ι ± a cos(m·φ) V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave<const N: usize> {
    pub mode: [i64; N],
    pub direction: WaveDirection,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneWaveResponse {
    /// Minus the `cos(m·φ) V` coefficient of the linearized change of `H_J`.
    pub measured: f64,
    /// Same coefficient predicted by the symbol.
    pub predicted: f64,
    /// `|m|²_g` averaged with the same weights, the natural response scale.
    pub scale: f64,
}

fn wave_direction<const N: usize, const D: usize>(
    frame: &NodeFrame<N, D>,
    zeta: &SVector<f64, N>,
    direction: WaveDirection,
) -> Vector<D> {
    let v = sharp(frame, zeta);
    match direction {
        WaveDirection::Normal => frame.geometry.j(&v),
        WaveDirection::Tangent => v,
        WaveDirection::JOrthogonal => {
            let g = &frame.geometry;
            let axis = (0..N).min_by(|a, b| zeta[*a].abs().total_cmp(&zeta[*b].abs())).unwrap_or(0);
            let t = frame.tangent(axis);
            let u = t - v * (g.inner(&t, &v) / g.inner(&v, &v));
            g.j(&u)
        }
    }
}

/// Measures the leading response of `H_J` to a plane-wave perturbation by a
/// symmetric difference in the amplitude, projected onto the `cos` phase.
pub fn plane_wave_response<const N: usize, const D: usize, A: Ambient<D> + ?Sized>(
    imm: &Immersion<N, D>,
    model: &A,
    wave: &PlaneWave<N>,
    margin: f64,
) -> Result<PlaneWaveResponse, TensorError> {
    let grid = imm.grid();
    let res = grid.resolution();
    for axis in 0..N {
        let m = wave.mode[axis].unsigned_abs() as usize;
        if m != 0 && res[axis] < 8 * m {
            return Err(TensorError::Unresolved { axis, nodes: res[axis], mode: wave.mode[axis] });
        }
    }
    let zeta = SVector::<f64, N>::from_fn(|i, _| wave.mode[i] as f64);
    if zeta.iter().all(|z| *z == 0.0) {
        return Err(TensorError::ZeroCovector);
    }
    let base = frame_field(imm, model, margin)?;
    let phase: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let p = grid.angles(idx);
            (0..N).map(|i| wave.mode[i] as f64 * p[i]).sum::<f64>().cos()
        })
        .collect();
    let dirs: Vec<Vector<D>> = base.frames.iter().map(|f| wave_direction(f, &zeta, wave.direction)).collect();
    let field: Vec<Vector<D>> = dirs.iter().zip(&phase).map(|(v, c)| v * *c).collect();
    let h_of = |scale: f64| -> Result<Vec<Vector<D>>, TensorError> {
        let ff = frame_field(&imm.displaced(&field, scale), model, margin)?;
        Ok(ff.frames.iter().zip(&ff.seconds).map(|(f, s)| h_j(f, &chern_hessian(f, s))).collect())
    };
    let plus = h_of(wave.amplitude)?;
    let minus = h_of(-wave.amplitude)?;
    let (mut num, mut pred, mut scale, mut den) = (0.0, 0.0, 0.0, 0.0);
    for (idx, f) in base.frames.iter().enumerate() {
        let g = &f.geometry;
        let v = &dirs[idx];
        let c = phase[idx];
        let delta = (plus[idx] - minus[idx]) / (2.0 * wave.amplitude);
        let vv = g.inner(v, v);
        num += c * g.inner(&delta, v);
        pred += c * c * g.inner(&(symbol_matrix(f, &zeta) * v), v);
        scale += c * c * vv * (zeta.transpose() * f.metric_inv * zeta)[0];
        den += c * c * vv;
    }
    Ok(PlaneWaveResponse { measured: -num / den, predicted: pred / den, scale: scale / den })
}
