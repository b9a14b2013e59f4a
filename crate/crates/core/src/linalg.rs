//! Small dense linear-algebra helpers shared by the geometric modules.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use num_complex::Complex64;

/// Real vector in the ambient coordinate space `(x1, y1, ..., xn, yn)`.
pub type Vector<const D: usize> = SVector<f64, D>;
/// Real square matrix acting on ambient coordinate vectors.
pub type Matrix<const D: usize> = SMatrix<f64, D, D>;

/// The constant complex structure of `C^n` in interleaved real coordinates.
pub fn standard_complex_structure<const D: usize>() -> Matrix<D> {
    let mut j = Matrix::<D>::zeros();
    for k in 0..D / 2 {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

/// Complex components `dz_k(v) = v_{2k} + i v_{2k+1}`.
pub fn to_complex<const N: usize, const D: usize>(v: &Vector<D>) -> SVector<Complex64, N> {
    SVector::from_fn(|k, _| Complex64::new(v[2 * k], v[2 * k + 1]))
}

pub fn from_complex<const N: usize, const D: usize>(z: &SVector<Complex64, N>) -> Vector<D> {
    Vector::from_fn(|a, _| if a % 2 == 0 { z[a / 2].re } else { z[a / 2].im })
}

/// Columns of a real frame written in complex coordinates: `M[k][j] = dz_k(v_j)`.
pub fn complex_frame<const N: usize, const D: usize>(
    frame: &SMatrix<f64, D, N>,
) -> SMatrix<Complex64, N, N> {
    SMatrix::from_fn(|k, j| Complex64::new(frame[(2 * k, j)], frame[(2 * k + 1, j)]))
}

/// Gram-Schmidt orthonormalization of the columns of `frame` with respect to `metric`.
pub fn gram_schmidt<const N: usize, const D: usize>(
    frame: &SMatrix<f64, D, N>,
    metric: &Matrix<D>,
) -> SMatrix<f64, D, N> {
    let mut out = *frame;
    for j in 0..N {
        let mut v: Vector<D> = frame.column(j).into();
        for i in 0..j {
            let e: Vector<D> = out.column(i).into();
            v -= e * (e.dot(&(metric * v)));
        }
        let norm = v.dot(&(metric * v)).sqrt();
        out.set_column(j, &(v / norm));
    }
    out
}

/// Spectral function of a symmetric matrix: `V f(Λ) V^T`.
pub fn symmetric_apply(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let diag = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * diag * eig.eigenvectors.transpose()
}

pub fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    m.clone().svd(false, false).singular_values
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numerical_rank(singular: &DVector<f64>, rel_tol: f64) -> usize {
    let top = singular.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    singular.iter().filter(|s| **s > rel_tol * top).count()
}

/// Unitary factor `U` of the polar decomposition `M = P U`, `P = sqrt(M M^*)`.
pub fn polar_unitary(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    u * v_t
}

/// Determinant of a fixed-size square matrix.
pub fn det<T: nalgebra::ComplexField, const M: usize>(m: &SMatrix<T, M, M>) -> T {
    DMatrix::from_iterator(M, M, m.iter().cloned()).determinant()
}

/// Determinant of a dense complex matrix through LU.
pub fn complex_det(m: &DMatrix<Complex64>) -> Complex64 {
    m.clone().lu().determinant()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_structure_squares_to_minus_one() {
        let j = standard_complex_structure::<4>();
        assert!((j * j + Matrix::<4>::identity()).norm() < 1e-15);
        // J d/dx = d/dy
        let ex = Vector::<4>::new(1.0, 0.0, 0.0, 0.0);
        assert_eq!(j * ex, Vector::<4>::new(0.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn polar_factor_is_unitary_with_matching_phase() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 2.0),
                Complex64::new(0.3, -0.1),
                Complex64::new(-0.4, 0.5),
                Complex64::new(2.0, 0.2),
            ],
        );
        let u = polar_unitary(&m);
        let uu = &u * u.adjoint();
        assert!((uu - DMatrix::identity(2, 2)).norm() < 1e-12);
        let d = complex_det(&m);
        let du = complex_det(&u);
        assert!((du - d / d.norm()).norm() < 1e-12);
    }

    #[test]
    fn gram_schmidt_is_orthonormal() {
        let g = Matrix::<4>::from_diagonal(&Vector::<4>::new(1.0, 2.0, 3.0, 4.0));
        let f = SMatrix::<f64, 4, 2>::new(1.0, 0.2, 0.5, 1.0, 0.0, 0.3, 0.1, 0.7);
        let e = gram_schmidt(&f, &g);
        let gram = e.transpose() * g * e;
        assert!((gram - SMatrix::<f64, 2, 2>::identity()).norm() < 1e-14);
    }
}
