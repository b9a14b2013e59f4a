//! Nodal differential forms on the parameter torus and the discrete
//! exterior derivative, codifferential and induced curvature.

use nalgebra::{SMatrix, SVector};

use crate::grid::TorusGrid;
use crate::linalg::det;

/// Component vector `α(∂_i)` per node.
pub type OneForm<const N: usize> = Vec<SVector<f64, N>>;
/// Antisymmetric component matrix `β(∂_i, ∂_j)` per node.
pub type TwoForm<const N: usize> = Vec<SMatrix<f64, N, N>>;

/// `(dα)_ij = ∂_i α_j - ∂_j α_i`.
pub fn exterior_d<const N: usize>(grid: &TorusGrid<N>, alpha: &[SVector<f64, N>]) -> TwoForm<N> {
    (0..grid.len())
        .map(|idx| {
            let partials: [SVector<f64, N>; N] = std::array::from_fn(|i| grid.diff_periodic(alpha, idx, i));
            SMatrix::from_fn(|i, j| partials[i][j] - partials[j][i])
        })
        .collect()
}

/// `(d*β)_j = -g_{jl} (1/√g) ∂_i(√g β^{il})` for the induced metric field `metric`.
pub fn codifferential<const N: usize>(
    grid: &TorusGrid<N>,
    metric: &[SMatrix<f64, N, N>],
    beta: &[SMatrix<f64, N, N>],
) -> OneForm<N> {
    let weighted: Vec<SMatrix<f64, N, N>> = metric
        .iter()
        .zip(beta)
        .map(|(g, b)| {
            let gi = g.try_inverse().expect("induced metric is non-degenerate");
            gi * b * gi.transpose() * det(g).sqrt()
        })
        .collect();
    (0..grid.len())
        .map(|idx| {
            let mut div = SVector::<f64, N>::zeros();
            for i in 0..N {
                let d = grid.diff_periodic(&weighted, idx, i);
                for l in 0..N {
                    div[l] += d[(i, l)];
                }
            }
            let g = metric[idx];
            -(g * div) / det(&g).sqrt()
        })
        .collect()
}

/// Christoffel matrices `C_a[(k, j)] = Γ^k_{aj}` of the induced metric.
pub fn induced_christoffel<const N: usize>(
    grid: &TorusGrid<N>,
    metric: &[SMatrix<f64, N, N>],
) -> Vec<[SMatrix<f64, N, N>; N]> {
    (0..grid.len())
        .map(|idx| {
            let dg: [SMatrix<f64, N, N>; N] = std::array::from_fn(|c| grid.diff_periodic(metric, idx, c));
            let gi = metric[idx].try_inverse().expect("induced metric is non-degenerate");
            std::array::from_fn(|a| {
                let first = SMatrix::<f64, N, N>::from_fn(|l, j| 0.5 * (dg[a][(j, l)] + dg[j][(a, l)] - dg[l][(a, j)]));
                gi * first
            })
        })
        .collect()
}

/// Riemann endomorphisms `R(∂_a, ∂_b)` of the induced metric per node.
pub fn induced_curvature<const N: usize>(
    grid: &TorusGrid<N>,
    metric: &[SMatrix<f64, N, N>],
) -> Vec<[[SMatrix<f64, N, N>; N]; N]> {
    let conn = induced_christoffel(grid, metric);
    let per_axis: Vec<Vec<SMatrix<f64, N, N>>> =
        (0..N).map(|a| conn.iter().map(|c| c[a]).collect()).collect();
    (0..grid.len())
        .map(|idx| {
            let d: [[SMatrix<f64, N, N>; N]; N] =
                std::array::from_fn(|a| std::array::from_fn(|b| grid.diff_periodic(&per_axis[b], idx, a)));
            let c = &conn[idx];
            std::array::from_fn(|a| {
                std::array::from_fn(|b| d[a][b] - d[b][a] + c[a] * c[b] - c[b] * c[a])
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exterior_derivative_squares_to_zero() {
        let grid = TorusGrid::<2>::uniform(24).unwrap();
        let f: Vec<f64> = (0..grid.len())
            .map(|i| {
                let p = grid.angles(i);
                (p[0] + p[1].cos()).sin()
            })
            .collect();
        let df: OneForm<2> = (0..grid.len())
            .map(|i| SVector::<f64, 2>::from_fn(|a, _| grid.diff_periodic(&f, i, a)))
            .collect();
        let ddf = exterior_d(&grid, &df);
        assert!(ddf.iter().all(|m| m.amax() < 1e-11));
    }

    #[test]
    fn flat_metric_has_no_curvature() {
        let grid = TorusGrid::<2>::uniform(16).unwrap();
        let metric = vec![SMatrix::<f64, 2, 2>::new(2.0, 0.3, 0.3, 1.0); grid.len()];
        let r = induced_curvature(&grid, &metric);
        assert!(r.iter().flatten().flatten().all(|m| m.amax() < 1e-12));
    }

    #[test]
    fn codifferential_of_area_form_vanishes_in_flat_metric() {
        let grid = TorusGrid::<2>::uniform(16).unwrap();
        let metric = vec![SMatrix::<f64, 2, 2>::identity(); grid.len()];
        let area = vec![SMatrix::<f64, 2, 2>::new(0.0, 1.0, -1.0, 0.0); grid.len()];
        let d = codifferential(&grid, &metric, &area);
        assert!(d.iter().all(|v| v.amax() < 1e-12));
    }
}
