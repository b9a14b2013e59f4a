//! Closed-form immersed tori used throughout the tests and scenarios.

use std::f64::consts::TAU;

use nalgebra::{SMatrix, SVector};

use super::Immersion;
use crate::grid::TorusGrid;
use crate::linalg::Vector;

fn unit<const D: usize>(a: usize) -> Vector<D> {
    let mut e = Vector::zeros();
    e[a] = 1.0;
    e
}

/// Product of circles `z_k = c_k + r_k e^{iφ_k}`. With unit radii in `C^2`
/// this is the Clifford-type Lagrangian torus.
pub fn product_circles<const N: usize, const D: usize>(
    grid: TorusGrid<N>,
    radii: [f64; N],
    center: Vector<D>,
) -> Immersion<N, D> {
    Immersion::from_fn(grid, [Vector::zeros(); N], |p| {
        let mut x = center;
        for k in 0..N {
            x[2 * k] += radii[k] * p[k].cos();
            x[2 * k + 1] += radii[k] * p[k].sin();
        }
        x
    })
}

/// `(c_1 + r e^{iφ_1}, c_2 + r(e^{iφ_2} + δ e^{iφ_1}))`, totally real but not
/// Lagrangian for `δ ≠ 0`: `ω_12 = r² δ sin(φ_2 - φ_1)` in the flat metric.
pub fn sheared(grid: TorusGrid<2>, radius: f64, delta: f64, center: Vector<4>) -> Immersion<2, 4> {
    Immersion::from_fn(grid, [Vector::zeros(); 2], |p| {
        let (c1, s1) = (p[0].cos(), p[0].sin());
        let (c2, s2) = (p[1].cos(), p[1].sin());
        center + Vector::<4>::new(radius * c1, radius * s1, radius * (c2 + delta * c1), radius * (s2 + delta * s1))
    })
}

/// Linear torus `ι(φ) = basis · φ`, closed in the flat torus when the columns
/// of `basis` are integer vectors.
pub fn linear<const N: usize, const D: usize>(grid: TorusGrid<N>, basis: SMatrix<f64, D, N>) -> Immersion<N, D> {
    let periods = std::array::from_fn(|k| basis.column(k) * TAU);
    Immersion::from_fn(grid, periods, |p| basis * SVector::<f64, N>::from(p))
}

/// `x_k = φ_k`, `y = 0`: the special Lagrangian straight torus.
pub fn straight<const N: usize, const D: usize>(grid: TorusGrid<N>) -> Immersion<N, D> {
    linear(grid, SMatrix::from_fn(|a, k| if a == 2 * k { 1.0 } else { 0.0 }))
}

/// Graph `x = φ`, `y = slope · φ + u(φ)` over the torus, `u` periodic.
pub fn graph<const N: usize, const D: usize>(
    grid: TorusGrid<N>,
    slope: SMatrix<f64, N, N>,
    u: impl Fn([f64; N]) -> [f64; N],
) -> Immersion<N, D> {
    let periods = std::array::from_fn(|k| {
        let mut p = unit::<D>(2 * k) * TAU;
        for m in 0..N {
            p[2 * m + 1] += TAU * slope[(m, k)];
        }
        p
    });
    Immersion::from_fn(grid, periods, |p| {
        let phi = SVector::<f64, N>::from(p);
        let lin = slope * phi;
        let w = u(p);
        Vector::from_fn(|a, _| if a % 2 == 0 { p[a / 2] } else { lin[a / 2] + w[a / 2] })
    })
}
