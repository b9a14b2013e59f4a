//! Discretized immersions `ι: T^n → M` sampled on a periodic grid, their
//! adapted frames and the discrete calculus of forms on `L`.

mod forms;
mod frames;
pub mod presets;

pub use forms::{codifferential, exterior_d, induced_christoffel, induced_curvature, OneForm, TwoForm};
pub use frames::{
    frame_field, rho_j_hermitian, rho_j_volume, FrameError, FrameField, NodeFrame, DEFAULT_MARGIN,
};

use nalgebra::SMatrix;
use thiserror::Error;

use crate::grid::TorusGrid;
use crate::linalg::Vector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImmersionError {
    #[error("expected {expected} positions, got {got}")]
    Length { expected: usize, got: usize },
    #[error("position {node} is not finite")]
    NonFinite { node: usize },
}

/// Node positions of an immersed torus together with the lift offsets
/// `ι(φ + 2π e_k) = ι(φ) + periods[k]` used across the parameter seams.
#[derive(Debug, Clone, PartialEq)]
pub struct Immersion<const N: usize, const D: usize> {
    grid: TorusGrid<N>,
    positions: Vec<Vector<D>>,
    periods: [Vector<D>; N],
}

impl<const N: usize, const D: usize> Immersion<N, D> {
    pub fn new(
        grid: TorusGrid<N>,
        positions: Vec<Vector<D>>,
        periods: [Vector<D>; N],
    ) -> Result<Self, ImmersionError> {
        assert_eq!(D, 2 * N, "ambient dimension must be twice the torus dimension");
        if positions.len() != grid.len() {
            return Err(ImmersionError::Length { expected: grid.len(), got: positions.len() });
        }
        if let Some(node) = positions.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(ImmersionError::NonFinite { node });
        }
        Ok(Self { grid, positions, periods })
    }

    /// Samples a parametrization at every node.
    pub fn from_fn(grid: TorusGrid<N>, periods: [Vector<D>; N], f: impl Fn([f64; N]) -> Vector<D>) -> Self {
        let positions = (0..grid.len()).map(|i| f(grid.angles(i))).collect();
        Self::new(grid, positions, periods).expect("sampled parametrization is finite")
    }

    pub fn grid(&self) -> &TorusGrid<N> {
        &self.grid
    }

    pub fn positions(&self) -> &[Vector<D>] {
        &self.positions
    }

    pub fn periods(&self) -> &[Vector<D>; N] {
        &self.periods
    }

    pub fn with_positions(&self, positions: Vec<Vector<D>>) -> Result<Self, ImmersionError> {
        Self::new(self.grid, positions, self.periods)
    }

    /// Displaces every node by `scale * field[node]`.
    pub fn displaced(&self, field: &[Vector<D>], scale: f64) -> Self {
        let positions = self.positions.iter().zip(field).map(|(p, v)| p + v * scale).collect();
        Self { grid: self.grid, positions, periods: self.periods }
    }

    fn lifted(&self, idx: usize, seams: [i64; N]) -> Vector<D> {
        seams
            .iter()
            .zip(self.periods.iter())
            .fold(self.positions[idx], |acc, (&s, p)| acc + p * s as f64)
    }

    /// `∂_axis ι` at a node.
    pub fn tangent(&self, idx: usize, axis: usize) -> Vector<D> {
        self.grid.diff(idx, axis, |nb, s| self.lifted(nb, s))
    }

    /// Columns `∂_1 ι, ..., ∂_n ι`.
    pub fn tangents(&self, idx: usize) -> SMatrix<f64, D, N> {
        let mut t = SMatrix::<f64, D, N>::zeros();
        for a in 0..N {
            t.set_column(a, &self.tangent(idx, a));
        }
        t
    }

    /// Coordinate second derivatives `∂_a ∂_b ι`.
    pub fn second_derivatives(&self, idx: usize) -> [[Vector<D>; N]; N] {
        let mut out = [[Vector::<D>::zeros(); N]; N];
        for a in 0..N {
            for b in a..N {
                let v = self.grid.diff2(idx, a, b, |nb, s| self.lifted(nb, s));
                out[a][b] = v;
                out[b][a] = v;
            }
        }
        out
    }
}
