//! Per-node adapted frames: the splitting `T M = T L ⊕ J(T L)`, induced
//! metric, `ω = ι*ω̄` and the totally real density `ρ_J`.

use nalgebra::{SMatrix, SVector};
use rayon::prelude::*;
use num_complex::Complex64;
use thiserror::Error;

use super::Immersion;
use crate::ambient::{Ambient, AmbientError, LocalGeometry};
use crate::grid::TorusGrid;
use crate::linalg::{det, gram_schmidt, Matrix, Vector};

/// Smallest `ρ_J` accepted before a plane counts as degenerate.
pub const DEFAULT_MARGIN: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("node {node}: {source}")]
    Ambient { node: usize, source: AmbientError },
    #[error("node {node} is not totally real (ρ_J = {rho_j:.3e})")]
    NotTotallyReal { node: usize, rho_j: f64 },
}

/// Frame data at one node.
#[derive(Debug, Clone)]
pub struct NodeFrame<const N: usize, const D: usize> {
    pub position: Vector<D>,
    pub tangents: SMatrix<f64, D, N>,
    pub geometry: LocalGeometry<D>,
    /// Inverse of `[∂ι | J∂ι]`.
    pub basis_inv: Matrix<D>,
    pub metric: SMatrix<f64, N, N>,
    pub metric_inv: SMatrix<f64, N, N>,
    pub omega: SMatrix<f64, N, N>,
    pub rho_j: f64,
    /// `sqrt(det g)`.
    pub vol_density: f64,
}

impl<const N: usize, const D: usize> NodeFrame<N, D> {
    /// Fails with [`FrameError::NotTotallyReal`] (node 0) if `ρ_J < margin`.
    pub fn new(
        position: Vector<D>,
        tangents: SMatrix<f64, D, N>,
        geometry: LocalGeometry<D>,
        margin: f64,
    ) -> Result<Self, FrameError> {
        let g = &geometry;
        let jt = g.complex_structure * tangents;
        let mut basis = Matrix::<D>::zeros();
        for k in 0..N {
            basis.set_column(k, &tangents.column(k));
            basis.set_column(N + k, &jt.column(k));
        }
        let metric = tangents.transpose() * g.metric * tangents;
        let omega = tangents.transpose() * g.symplectic * tangents;
        let det_g = det(&metric);
        let rho_sq = det(&g.metric).sqrt() * det(&basis).abs() / det_g;
        let rho_j = rho_sq.max(0.0).sqrt();
        let degenerate = FrameError::NotTotallyReal { node: 0, rho_j };
        if !(rho_j >= margin) || det_g <= 0.0 {
            return Err(degenerate);
        }
        let basis_inv = basis.try_inverse().ok_or(degenerate.clone())?;
        let metric_inv = metric.try_inverse().ok_or(degenerate)?;
        Ok(Self {
            position,
            tangents,
            geometry,
            basis_inv,
            metric,
            metric_inv,
            omega,
            rho_j,
            vol_density: det_g.sqrt(),
        })
    }

    pub fn tangent(&self, k: usize) -> Vector<D> {
        self.tangents.column(k).into()
    }

    /// `J ∂_k ι`.
    pub fn jt(&self, k: usize) -> Vector<D> {
        self.geometry.complex_structure * self.tangent(k)
    }

    /// Coefficients of `z` in the basis `[∂ι | J∂ι]`.
    pub fn split(&self, z: &Vector<D>) -> (SVector<f64, N>, SVector<f64, N>) {
        let c = self.basis_inv * z;
        (SVector::from_fn(|k, _| c[k]), SVector::from_fn(|k, _| c[N + k]))
    }

    pub fn pi_l(&self, z: &Vector<D>) -> Vector<D> {
        self.tangents * self.split(z).0
    }

    pub fn pi_j(&self, z: &Vector<D>) -> Vector<D> {
        self.geometry.complex_structure * (self.tangents * self.split(z).1)
    }

    /// Metric transpose of `π_L`.
    pub fn pi_l_transpose(&self, z: &Vector<D>) -> Vector<D> {
        let g = &self.geometry;
        let pi_l = self.tangents * self.basis_inv.fixed_rows::<N>(0);
        g.metric_inv * pi_l.transpose() * g.metric * z
    }

    /// Orthogonal projection onto `T L`.
    pub fn pi_t(&self, z: &Vector<D>) -> Vector<D> {
        let coeffs = self.metric_inv * (self.tangents.transpose() * (self.geometry.metric * z));
        self.tangents * coeffs
    }

    pub fn pi_perp(&self, z: &Vector<D>) -> Vector<D> {
        z - self.pi_t(z)
    }

    /// Density of `vol_J` with respect to `dφ`.
    pub fn vol_j_density(&self) -> f64 {
        self.rho_j * self.vol_density
    }

    /// `ω(X, Y)` normalized by the induced area element (n = 2 uses the single component).
    pub fn omega_norm(&self) -> f64 {
        let m = self.metric_inv * self.omega * self.metric_inv * self.omega.transpose();
        (0.5 * m.trace()).max(0.0).sqrt()
    }
}

/// Frames at every node of an immersion.
#[derive(Debug, Clone)]
pub struct FrameField<const N: usize, const D: usize> {
    pub grid: TorusGrid<N>,
    pub frames: Vec<NodeFrame<N, D>>,
    /// `∂_a ∂_b ι` per node.
    pub seconds: Vec<[[Vector<D>; N]; N]>,
}

pub fn frame_field<const N: usize, const D: usize, A: Ambient<D> + ?Sized>(
    imm: &Immersion<N, D>,
    model: &A,
    margin: f64,
) -> Result<FrameField<N, D>, FrameError> {
    let grid = *imm.grid();
    let frames = imm
        .positions()
        .par_iter()
        .enumerate()
        .map(|(node, x)| {
            let geometry = model.local(x).map_err(|source| FrameError::Ambient { node, source })?;
            NodeFrame::new(*x, imm.tangents(node), geometry, margin).map_err(|e| match e {
                FrameError::NotTotallyReal { rho_j, .. } => FrameError::NotTotallyReal { node, rho_j },
                other => other,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let seconds = (0..grid.len()).into_par_iter().map(|node| imm.second_derivatives(node)).collect();
    Ok(FrameField { grid, frames, seconds })
}

impl<const N: usize, const D: usize> FrameField<N, D> {
    pub fn vol_g(&self) -> f64 {
        self.grid.integrate(self.frames.iter().map(|f| f.vol_density))
    }

    pub fn vol_j(&self) -> f64 {
        self.grid.integrate(self.frames.iter().map(|f| f.vol_j_density()))
    }

    pub fn min_rho_j(&self) -> f64 {
        self.frames.iter().map(|f| f.rho_j).fold(f64::INFINITY, f64::min)
    }

    pub fn sup_omega(&self) -> f64 {
        self.frames.iter().map(|f| f.omega.amax()).fold(0.0, f64::max)
    }
}

/// `ρ_J = sqrt(det_C h)` with `h_ij = g(e_i, e_j) - i ω(e_i, e_j)` on a
/// Gram-Schmidt orthonormalization `e` of `frame`.
pub fn rho_j_hermitian<const N: usize, const D: usize>(
    frame: &SMatrix<f64, D, N>,
    geometry: &LocalGeometry<D>,
) -> f64 {
    let e = gram_schmidt(frame, &geometry.metric);
    let g = e.transpose() * geometry.metric * e;
    let w = e.transpose() * geometry.symplectic * e;
    let h = SMatrix::<Complex64, N, N>::from_fn(|i, j| Complex64::new(g[(i, j)], -w[(i, j)]));
    det(&h).re.max(0.0).sqrt()
}

/// `ρ_J = sqrt(vol_g(e_1, ..., e_n, J e_1, ..., J e_n))` on an orthonormalization of `frame`.
pub fn rho_j_volume<const N: usize, const D: usize>(
    frame: &SMatrix<f64, D, N>,
    geometry: &LocalGeometry<D>,
) -> f64 {
    let e = gram_schmidt(frame, &geometry.metric);
    let je = geometry.complex_structure * e;
    let mut full = Matrix::<D>::zeros();
    for k in 0..N {
        full.set_column(k, &e.column(k));
        full.set_column(N + k, &je.column(k));
    }
    let gram = full.transpose() * geometry.metric * full;
    det(&gram).max(0.0).sqrt().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{FlatSpace, KahlerPotential};
    use crate::immersion::presets;

    #[test]
    fn sheared_torus_density_matches_closed_form() {
        let grid = TorusGrid::<2>::uniform(16).unwrap();
        let imm = presets::sheared(grid, 1.0, 0.4, Vector::zeros());
        let ff = frame_field(&imm, &FlatSpace::default(), DEFAULT_MARGIN).unwrap();
        for f in &ff.frames {
            // in C^2, ρ_J² = 1 - ω_12² / det g
            let expected = (1.0 - f.omega[(0, 1)].powi(2) / det(&f.metric)).sqrt();
            assert!((f.rho_j - expected).abs() < 1e-12);
            assert!((rho_j_hermitian(&f.tangents, &f.geometry) - f.rho_j).abs() < 1e-12);
            assert!((rho_j_volume(&f.tangents, &f.geometry) - f.rho_j).abs() < 1e-12);
        }
        assert!(ff.vol_j() < ff.vol_g());
    }

    #[test]
    fn clifford_torus_is_lagrangian() {
        let grid = TorusGrid::<2>::uniform(16).unwrap();
        let imm = presets::product_circles::<2, 4>(grid, [1.0, 1.0], Vector::zeros());
        let ff = frame_field(&imm, &FlatSpace::default(), DEFAULT_MARGIN).unwrap();
        assert!(ff.sup_omega() < 1e-15);
        assert!((ff.min_rho_j() - 1.0).abs() < 1e-12);
        assert!((ff.vol_j() - ff.vol_g()).abs() < 1e-12);
    }

    #[test]
    fn complex_line_is_rejected() {
        let grid = TorusGrid::<2>::uniform(16).unwrap();
        // both tangents span the complex line z_2 = 0
        let imm = Immersion::from_fn(grid, [Vector::zeros(); 2], |p| {
            Vector::<4>::new(p[0].cos() + 0.1 * p[1].cos(), p[0].sin() + 0.1 * p[1].sin(), 0.0, 0.0)
        });
        let err = frame_field(&imm, &FlatSpace::default(), DEFAULT_MARGIN).unwrap_err();
        assert!(matches!(err, FrameError::NotTotallyReal { .. }));
    }

    #[test]
    fn leaving_the_ball_is_an_ambient_error() {
        let grid = TorusGrid::<2>::uniform(16).unwrap();
        let imm = presets::sheared(grid, 1.0, 0.2, Vector::zeros());
        let err = frame_field(&imm, &KahlerPotential::<4>::complex_hyperbolic(), DEFAULT_MARGIN).unwrap_err();
        assert!(matches!(err, FrameError::Ambient { .. }));
    }
}
