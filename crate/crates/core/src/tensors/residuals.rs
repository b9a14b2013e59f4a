//! Residuals of the pointwise and differential identities satisfied by the
//! tensors in this module. Each returns a sup-norm over the grid.

use nalgebra::{SMatrix, SVector};

use super::{TensorError, chern_hessian, chern_mean_curvature, h_j, lc_hessian, mean_curvature, s_j, t_j, xi_classical, xi_j};
use crate::ambient::{Ambient, Curvature, StructureKind};
use crate::immersion::{
    codifferential, exterior_d, frame_field, induced_curvature, FrameError, FrameField, Immersion, NodeFrame,
};
use crate::linalg::Vector;

fn norm<const N: usize, const D: usize>(frame: &NodeFrame<N, D>, v: &Vector<D>) -> f64 {
    frame.geometry.inner(v, v).max(0.0).sqrt()
}

fn sup(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, f64::max)
}

/// `H_J = -J tr_L(π_T J ∇~ π_L^t)` evaluated literally: the field `π_L^t ∂_j ι`
/// is differentiated along `L` with the grid stencil.
pub fn h_j_by_definition<const N: usize, const D: usize>(ff: &FrameField<N, D>) -> Vec<Vector<D>> {
    let fields: Vec<Vec<Vector<D>>> = (0..N)
        .map(|j| ff.frames.iter().map(|f| f.pi_l_transpose(&f.tangent(j))).collect())
        .collect();
    ff.frames
        .iter()
        .enumerate()
        .map(|(idx, f)| {
            let g = &f.geometry;
            let mut acc = Vector::<D>::zeros();
            for i in 0..N {
                for j in 0..N {
                    let w = f.metric_inv[(i, j)];
                    if w == 0.0 {
                        continue;
                    }
                    let deriv = ff.grid.diff_periodic(&fields[j], idx, i)
                        + g.chern_christoffel(&f.tangent(i), &fields[j][idx]);
                    acc += f.pi_t(&g.j(&deriv)) * w;
                }
            }
            -g.j(&acc)
        })
        .collect()
}

/// `sup |ω(H_J + T_J, ∂_x ι) - ξ_J(∂_x)|`, with `H_J` taken from its definition.
pub fn maslov_identity_residual<const N: usize, const D: usize>(ff: &FrameField<N, D>) -> f64 {
    let hj = h_j_by_definition(ff);
    sup(ff.frames.iter().zip(&ff.seconds).zip(&hj).flat_map(|((f, s), h)| {
        let xi = xi_j(f, &chern_hessian(f, s));
        let v = h + t_j(f);
        (0..N).map(move |x| (f.geometry.omega(&v, &f.tangent(x)) - xi[x]).abs())
    }))
}

/// 1-form `ω(H_J + T_J, ·)` on `L`.
pub fn hj_tj_form<const N: usize, const D: usize>(ff: &FrameField<N, D>) -> Vec<SVector<f64, N>> {
    ff.frames
        .iter()
        .zip(&ff.seconds)
        .map(|(f, s)| {
            let v = h_j(f, &chern_hessian(f, s)) + t_j(f);
            SVector::from_fn(|x, _| f.geometry.omega(&v, &f.tangent(x)))
        })
        .collect()
}

fn curvatures<const N: usize, const D: usize, A: Ambient<D> + ?Sized>(
    imm: &Immersion<N, D>,
    model: &A,
) -> Result<Vec<Curvature<D>>, FrameError> {
    imm.positions()
        .iter()
        .enumerate()
        .map(|(node, x)| model.curvature(x).map(|c| c.1).map_err(|source| FrameError::Ambient { node, source }))
        .collect()
}

/// `sup |d(ι*ω(H_J + T_J, ·)) - ½ ι*P~|`.
pub fn integrability_residual<const N: usize, const D: usize, A: Ambient<D> + ?Sized>(
    imm: &Immersion<N, D>,
    model: &A,
    margin: f64,
) -> Result<f64, FrameError> {
    let ff = frame_field(imm, model, margin)?;
    let curv = curvatures(imm, model)?;
    Ok(integrability_residual_with(&ff, &curv))
}

pub(crate) fn integrability_residual_with<const N: usize, const D: usize>(
    ff: &FrameField<N, D>,
    curv: &[Curvature<D>],
) -> f64 {
    let d_alpha = exterior_d(&ff.grid, &hj_tj_form(ff));
    sup(ff.frames.iter().zip(curv).zip(&d_alpha).map(|((f, c), da)| {
        let p = f.tangents.transpose() * c.chern_ricci_form() * f.tangents;
        (da - p * 0.5).amax()
    }))
}

/// `sup |ω(H, X) - (-d*ω(X) + ξ(X))|`, valid for Kähler ambients.
pub fn hook_residual<const N: usize, const D: usize, A: Ambient<D> + ?Sized>(
    imm: &Immersion<N, D>,
    model: &A,
    margin: f64,
) -> Result<f64, TensorError> {
    require_kahler(model)?;
    Ok(hook_residual_with(&frame_field(imm, model, margin)?))
}

fn require_kahler<const D: usize, A: Ambient<D> + ?Sized>(model: &A) -> Result<(), TensorError> {
    match model.kind() {
        StructureKind::Kahler => Ok(()),
        StructureKind::AlmostKahler => Err(TensorError::NotKahler),
    }
}

pub(crate) fn hook_residual_with<const N: usize, const D: usize>(ff: &FrameField<N, D>) -> f64 {
    let metric: Vec<SMatrix<f64, N, N>> = ff.frames.iter().map(|f| f.metric).collect();
    let omega: Vec<SMatrix<f64, N, N>> = ff.frames.iter().map(|f| f.omega).collect();
    let dstar = codifferential(&ff.grid, &metric, &omega);
    sup(ff.frames.iter().zip(&ff.seconds).zip(&dstar).flat_map(|((f, s), ds)| {
        let lc = lc_hessian(f, s);
        let h = mean_curvature(f, &lc);
        let xi = xi_classical(f, &lc);
        (0..N).map(move |x| (f.geometry.omega(&h, &f.tangent(x)) - (-ds[x] + xi[x])).abs())
    }))
}

/// `sup |dξ(X, Y) - [ω(R(X,Y)e_i, e_i) - ω(R^L(X,Y)e_i, e_i) - 2ω(A(X,e_i), A(Y,e_i))]|`
/// for Kähler ambients.
pub fn dxi_residual<const N: usize, const D: usize, A: Ambient<D> + ?Sized>(
    imm: &Immersion<N, D>,
    model: &A,
    margin: f64,
) -> Result<f64, TensorError> {
    require_kahler(model)?;
    let ff = frame_field(imm, model, margin)?;
    let curv = curvatures(imm, model)?;
    let metric: Vec<SMatrix<f64, N, N>> = ff.frames.iter().map(|f| f.metric).collect();
    let induced = induced_curvature(&ff.grid, &metric);
    let xi: Vec<SVector<f64, N>> =
        ff.frames.iter().zip(&ff.seconds).map(|(f, s)| xi_classical(f, &lc_hessian(f, s))).collect();
    let dxi = exterior_d(&ff.grid, &xi);
    let mut worst = 0.0f64;
    for (idx, f) in ff.frames.iter().enumerate() {
        let gi = &f.metric_inv;
        let lc = lc_hessian(f, &ff.seconds[idx]);
        let second_ff: [[Vector<D>; N]; N] = std::array::from_fn(|a| std::array::from_fn(|b| f.pi_perp(&lc[a][b])));
        for x in 0..N {
            for y in (x + 1)..N {
                let r_amb = curv[idx].riemann_apply(&f.tangent(x), &f.tangent(y));
                let r_ind = induced[idx][x][y];
                let mut rhs = 0.0;
                for i in 0..N {
                    for j in 0..N {
                        let w = gi[(i, j)];
                        rhs += w * f.geometry.omega(&(r_amb * f.tangent(i)), &f.tangent(j));
                        let r_col: SVector<f64, N> = r_ind.column(i).into();
                        rhs -= w * (r_col.transpose() * f.omega.column(j))[0];
                        rhs -= 2.0 * w * f.geometry.omega(&second_ff[x][i], &second_ff[y][j]);
                    }
                }
                worst = worst.max((dxi[idx][(x, y)] - rhs).abs());
            }
        }
    }
    Ok(worst)
}

/// `sup |ω(π_⊥ JX, π_⊥ JY) - ω(π_T JX, π_T JY) + ω(X, Y)|` over coordinate pairs.
pub fn projection_identity_residual<const N: usize, const D: usize>(ff: &FrameField<N, D>) -> f64 {
    sup(ff.frames.iter().flat_map(|f| {
        (0..N).flat_map(move |x| {
            (0..N).map(move |y| {
                let g = &f.geometry;
                let (jx, jy) = (f.jt(x), f.jt(y));
                let lhs = g.omega(&f.pi_perp(&jx), &f.pi_perp(&jy));
                let rhs = g.omega(&f.pi_t(&jx), &f.pi_t(&jy)) - f.omega[(x, y)];
                (lhs - rhs).abs()
            })
        })
    }))
}

/// Sup norms of the torsion vector fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorsionNorms {
    pub t_j: f64,
    pub s_j: f64,
    pub sum: f64,
}

pub fn torsion_fields<const N: usize, const D: usize>(ff: &FrameField<N, D>) -> TorsionNorms {
    let mut out = TorsionNorms { t_j: 0.0, s_j: 0.0, sum: 0.0 };
    for f in &ff.frames {
        let (t, s) = (t_j(f), s_j(f));
        out.t_j = out.t_j.max(norm(f, &t));
        out.s_j = out.s_j.max(norm(f, &s));
        out.sum = out.sum.max(norm(f, &(t + s)));
    }
    out
}

/// `sup |(H_J + S_J) - H|`, which vanishes on Lagrangians in almost Kähler ambients.
pub fn lagrangian_mean_curvature_residual<const N: usize, const D: usize>(ff: &FrameField<N, D>) -> f64 {
    sup(ff.frames.iter().zip(&ff.seconds).map(|(f, s)| {
        let hj = h_j(f, &chern_hessian(f, s));
        let h = mean_curvature(f, &lc_hessian(f, s));
        norm(f, &(hj + s_j(f) - h))
    }))
}

/// Mutual discrepancies of the expressions for `Ĥ = H + 2T_J` on Lagrangians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlternativeMeanCurvatures {
    /// `sup |Ĥ - (2H~ - H)|`.
    pub chern_route: f64,
    /// `sup |Ĥ + π_⊥ J ∇_{e_i}(J e_i)|`.
    pub projection_route: f64,
    /// `sup |Ĥ - (H_J + T_J)|`.
    pub maslov_route: f64,
}

/// Refused unless `sup |ω| <= lag_tol`.
pub fn alternative_mean_curvatures<const N: usize, const D: usize>(
    ff: &FrameField<N, D>,
    lag_tol: f64,
) -> Result<AlternativeMeanCurvatures, TensorError> {
    let sup_omega = ff.sup_omega();
    if !(sup_omega <= lag_tol) {
        return Err(TensorError::NotLagrangian { sup_omega });
    }
    let jt_fields: Vec<Vec<Vector<D>>> = (0..N).map(|j| ff.frames.iter().map(|f| f.jt(j)).collect()).collect();
    let mut out = AlternativeMeanCurvatures { chern_route: 0.0, projection_route: 0.0, maslov_route: 0.0 };
    for (idx, (f, s)) in ff.frames.iter().zip(&ff.seconds).enumerate() {
        let lc = lc_hessian(f, s);
        let ch = chern_hessian(f, s);
        let h = mean_curvature(f, &lc);
        let tj = t_j(f);
        let h_hat = h + tj * 2.0;
        let h_tilde = chern_mean_curvature(f, &ch);
        let mut traced = Vector::<D>::zeros();
        for i in 0..N {
            for j in 0..N {
                let w = f.metric_inv[(i, j)];
                let deriv = ff.grid.diff_periodic(&jt_fields[j], idx, i) + f.geometry.christoffel(&f.tangent(i), &jt_fields[j][idx]);
                traced += deriv * w;
            }
        }
        let third = -f.pi_perp(&f.geometry.j(&traced));
        out.chern_route = out.chern_route.max(norm(f, &(h_hat - (h_tilde * 2.0 - h))));
        out.projection_route = out.projection_route.max(norm(f, &(h_hat - third)));
        out.maslov_route = out.maslov_route.max(norm(f, &(h_hat - (h_j(f, &ch) + tj))));
    }
    Ok(out)
}
