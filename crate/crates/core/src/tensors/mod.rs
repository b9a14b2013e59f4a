//! Extrinsic tensors of a totally real immersion: the classical mean
//! curvature and Maslov-type 1-form, their totally real replacements
//! `H_J`, `ξ_J`, the torsion fields `T_J`, `S_J`, and the residuals of the
//! identities relating them.

mod residuals;
mod symbol;

pub use residuals::{
    alternative_mean_curvatures, dxi_residual, h_j_by_definition, hook_residual, integrability_residual,
    lagrangian_mean_curvature_residual, maslov_identity_residual, projection_identity_residual, torsion_fields,
    AlternativeMeanCurvatures, TorsionNorms,
};
pub use symbol::{
    linearization_symbol, plane_wave_response, symbol_matrix, symbol_report, PlaneWave, PlaneWaveResponse, SymbolReport,
    WaveDirection,
};

use nalgebra::SVector;
use thiserror::Error;

use crate::immersion::{FrameError, NodeFrame};
use crate::linalg::Vector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("identity holds only for Kähler ambients")]
    NotKahler,
    #[error("immersion is not Lagrangian (sup |ω| = {sup_omega:.3e})")]
    NotLagrangian { sup_omega: f64 },
    #[error("covector must be non-zero")]
    ZeroCovector,
    #[error("mode {mode} on axis {axis} is unresolved with {nodes} nodes")]
    Unresolved { axis: usize, nodes: usize, mode: i64 },
}

/// `∇_{∂a} ∂_b ι` for the Levi-Civita connection.
pub fn lc_hessian<const N: usize, const D: usize>(
    frame: &NodeFrame<N, D>,
    seconds: &[[Vector<D>; N]; N],
) -> [[Vector<D>; N]; N] {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| seconds[a][b] + frame.geometry.christoffel(&frame.tangent(a), &frame.tangent(b)))
    })
}

/// `∇~_{∂a} ∂_b ι` for the Chern connection.
pub fn chern_hessian<const N: usize, const D: usize>(
    frame: &NodeFrame<N, D>,
    seconds: &[[Vector<D>; N]; N],
) -> [[Vector<D>; N]; N] {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            seconds[a][b] + frame.geometry.chern_christoffel(&frame.tangent(a), &frame.tangent(b))
        })
    })
}

/// `J(TL)` coefficients `β` with `π_J ∇~_{∂a}∂_b ι = β^m J∂_m`.
fn j_coefficients<const N: usize, const D: usize>(
    frame: &NodeFrame<N, D>,
    chern: &[[Vector<D>; N]; N],
) -> [[SVector<f64, N>; N]; N] {
    std::array::from_fn(|a| std::array::from_fn(|b| frame.split(&chern[a][b]).1))
}

/// `H_J = g^{kl} g^{ij} g(J∂_j, π_J ∇~_{∂i} ∂_l) J∂_k`.
pub fn h_j<const N: usize, const D: usize>(frame: &NodeFrame<N, D>, chern: &[[Vector<D>; N]; N]) -> Vector<D> {
    let beta = j_coefficients(frame, chern);
    let jt = frame.geometry.complex_structure * frame.tangents;
    let j_gram = jt.transpose() * frame.geometry.metric * jt;
    let gi = &frame.metric_inv;
    let mut c = SVector::<f64, N>::zeros();
    for k in 0..N {
        for l in 0..N {
            for i in 0..N {
                for j in 0..N {
                    let inner = (j_gram.row(j) * beta[i][l])[0];
                    c[k] += gi[(k, l)] * gi[(i, j)] * inner;
                }
            }
        }
    }
    jt * c
}

/// `ξ_J(∂_k) = tr_L(J π_J ∇~_{∂k})`.
pub fn xi_j<const N: usize, const D: usize>(frame: &NodeFrame<N, D>, chern: &[[Vector<D>; N]; N]) -> SVector<f64, N> {
    let beta = j_coefficients(frame, chern);
    SVector::from_fn(|k, _| -(0..N).map(|i| beta[k][i][i]).sum::<f64>())
}

fn torsion_field<const N: usize, const D: usize>(
    frame: &NodeFrame<N, D>,
    torsion_of: impl Fn(usize, usize) -> Vector<D>,
) -> Vector<D> {
    let g = &frame.geometry;
    let gi = &frame.metric_inv;
    let mut out = Vector::<D>::zeros();
    for a in 0..N {
        for b in 0..N {
            let mut coeff = 0.0;
            for p in 0..N {
                for q in 0..N {
                    coeff += gi[(p, q)] * g.inner(&frame.pi_l(&torsion_of(a, p)), &frame.tangent(q));
                }
            }
            out -= frame.jt(b) * (gi[(a, b)] * coeff);
        }
    }
    out
}

/// `T_J = -g(π_L J T~(e_j, e_i), e_i) J e_j`.
pub fn t_j<const N: usize, const D: usize>(frame: &NodeFrame<N, D>) -> Vector<D> {
    let g = &frame.geometry;
    torsion_field(frame, |a, p| g.j(&g.torsion(&frame.tangent(a), &frame.tangent(p))))
}

/// `S_J = -g(π_L T~(J e_j, e_i), e_i) J e_j`.
pub fn s_j<const N: usize, const D: usize>(frame: &NodeFrame<N, D>) -> Vector<D> {
    let g = &frame.geometry;
    torsion_field(frame, |a, p| g.torsion(&frame.jt(a), &frame.tangent(p)))
}

/// Classical mean curvature `H = g^{ij} π_⊥ ∇_{∂i} ∂_j ι`.
pub fn mean_curvature<const N: usize, const D: usize>(frame: &NodeFrame<N, D>, lc: &[[Vector<D>; N]; N]) -> Vector<D> {
    traced_normal(frame, lc)
}

/// `H~ = g^{ij} π_⊥ ∇~_{∂i} ∂_j ι`.
pub fn chern_mean_curvature<const N: usize, const D: usize>(
    frame: &NodeFrame<N, D>,
    chern: &[[Vector<D>; N]; N],
) -> Vector<D> {
    traced_normal(frame, chern)
}

fn traced_normal<const N: usize, const D: usize>(frame: &NodeFrame<N, D>, hess: &[[Vector<D>; N]; N]) -> Vector<D> {
    let gi = &frame.metric_inv;
    let mut acc = Vector::<D>::zeros();
    for i in 0..N {
        for j in 0..N {
            acc += hess[i][j] * gi[(i, j)];
        }
    }
    frame.pi_perp(&acc)
}

/// Classical 1-form `ξ(X) = -ω(e_i, A(e_i, X))`.
pub fn xi_classical<const N: usize, const D: usize>(frame: &NodeFrame<N, D>, lc: &[[Vector<D>; N]; N]) -> SVector<f64, N> {
    let gi = &frame.metric_inv;
    SVector::from_fn(|x, _| {
        let mut acc = 0.0;
        for i in 0..N {
            for j in 0..N {
                acc -= gi[(i, j)] * frame.geometry.omega(&frame.tangent(i), &frame.pi_perp(&lc[j][x]));
            }
        }
        acc
    })
}

/// Pointwise tensors at one node.
#[derive(Debug, Clone)]
pub struct NodeTensors<const N: usize, const D: usize> {
    pub mean_curvature: Vector<D>,
    pub h_j: Vector<D>,
    pub t_j: Vector<D>,
    pub s_j: Vector<D>,
    pub xi_j: SVector<f64, N>,
}

pub fn node_tensors<const N: usize, const D: usize>(
    frame: &NodeFrame<N, D>,
    seconds: &[[Vector<D>; N]; N],
) -> NodeTensors<N, D> {
    let chern = chern_hessian(frame, seconds);
    NodeTensors {
        mean_curvature: mean_curvature(frame, &lc_hessian(frame, seconds)),
        h_j: h_j(frame, &chern),
        t_j: t_j(frame),
        s_j: s_j(frame),
        xi_j: xi_j(frame, &chern),
    }
}

#[cfg(test)]
mod tests;
