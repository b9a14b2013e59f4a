//! Almost Kähler structure obtained by retracting a bumped reference metric
//! onto the standard symplectic form.

use nalgebra::DMatrix;

use super::{Ambient, AmbientError, Jet, JetOrder, StructureKind};
use crate::linalg::{standard_complex_structure, symmetric_apply, Matrix, Vector};

/// Default finite-difference step for structures without closed-form derivatives.
pub const DEFAULT_AMBIENT_STEP: f64 = 1e-3;

const FIRST: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];

/// Reference metric `g' = diag(1 + ε b(x), 1, ..., 1)` with a Gaussian bump `b`
/// and the standard `ω`. The compatible `J` is the polar retraction
/// `J = A (A^* A)^{-1/2}` of `A` defined by `ω(X, Y) = g'(AX, Y)`; the metric is
/// then `g(X, Y) = ω(X, JY)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlmostKahlerPair<const D: usize> {
    pub epsilon: f64,
    pub center: Vector<D>,
    pub width: f64,
    /// Finite-difference step for the structure derivatives.
    pub step: f64,
}

fn to_dyn<const D: usize>(m: &Matrix<D>) -> DMatrix<f64> {
    DMatrix::from_iterator(D, D, m.iter().copied())
}

fn from_dyn<const D: usize>(m: &DMatrix<f64>) -> Matrix<D> {
    Matrix::from_iterator(m.iter().copied())
}

impl<const D: usize> AlmostKahlerPair<D> {
    pub fn new(epsilon: f64, center: Vector<D>, width: f64) -> Result<Self, AmbientError> {
        if epsilon <= -1.0 || width <= 0.0 {
            return Err(AmbientError::Parameter(format!(
                "bump needs ε > -1 and width > 0, got ε = {epsilon}, width = {width}"
            )));
        }
        Ok(Self { epsilon, center, width, step: DEFAULT_AMBIENT_STEP })
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn reference_metric(&self, x: &Vector<D>) -> Matrix<D> {
        let bump = (-(x - self.center).norm_squared() / (self.width * self.width)).exp();
        let mut g = Matrix::identity();
        g[(0, 0)] += self.epsilon * bump;
        g
    }

    /// `(g, J)` at a point.
    pub fn structure(&self, x: &Vector<D>) -> (Matrix<D>, Matrix<D>) {
        let omega = standard_complex_structure::<D>().transpose();
        let g_ref = to_dyn(&self.reference_metric(x));
        let sqrt = symmetric_apply(&g_ref, f64::sqrt);
        let inv_sqrt = symmetric_apply(&g_ref, |v| 1.0 / v.sqrt());
        let a = -(g_ref.clone().try_inverse().expect("reference metric is positive")) * to_dyn(&omega);
        let a_hat = &sqrt * a * &inv_sqrt;
        let pos = a_hat.transpose() * &a_hat;
        let j_hat = &a_hat * symmetric_apply(&pos, |v| 1.0 / v.sqrt());
        let j = from_dyn::<D>(&(inv_sqrt * j_hat * sqrt));
        let g = omega * j;
        ((g + g.transpose()) * 0.5, j)
    }

    fn shifted(&self, x: &Vector<D>, steps: &[(usize, f64)]) -> (Matrix<D>, Matrix<D>) {
        let mut y = *x;
        for &(c, s) in steps {
            y[c] += s * self.step;
        }
        self.structure(&y)
    }
}

impl<const D: usize> Ambient<D> for AlmostKahlerPair<D> {
    fn jet(&self, x: &Vector<D>, order: JetOrder) -> Result<Jet<D>, AmbientError> {
        let h = self.step;
        let (metric, j) = self.structure(x);
        let mut d_metric = [Matrix::<D>::zeros(); D];
        let mut d_complex = [Matrix::<D>::zeros(); D];
        let mut unit = [[(Matrix::<D>::zeros(), Matrix::<D>::zeros()); 2]; D];
        for c in 0..D {
            for (s, coef) in FIRST {
                let (g, jj) = self.shifted(x, &[(c, s)]);
                d_metric[c] += g * (coef / h);
                d_complex[c] += jj * (coef / h);
                if s == -1.0 {
                    unit[c][0] = (g, jj);
                } else if s == 1.0 {
                    unit[c][1] = (g, jj);
                }
            }
        }
        let (mut dd_metric, mut dd_complex) = (None, None);
        if order == JetOrder::Second {
            let mut ddg = Box::new([[Matrix::<D>::zeros(); D]; D]);
            let mut ddj = Box::new([[Matrix::<D>::zeros(); D]; D]);
            for c in 0..D {
                let ((gm, jm), (gp, jp)) = (unit[c][0], unit[c][1]);
                ddg[c][c] = (gp - metric * 2.0 + gm) / (h * h);
                ddj[c][c] = (jp - j * 2.0 + jm) / (h * h);
                for d in (c + 1)..D {
                    let mut g_acc = Matrix::<D>::zeros();
                    let mut j_acc = Matrix::<D>::zeros();
                    for (sc, sd, sign) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                        let (g, jj) = self.shifted(x, &[(c, sc), (d, sd)]);
                        g_acc += g * sign;
                        j_acc += jj * sign;
                    }
                    ddg[c][d] = g_acc / (4.0 * h * h);
                    ddg[d][c] = ddg[c][d];
                    ddj[c][d] = j_acc / (4.0 * h * h);
                    ddj[d][c] = ddj[c][d];
                }
            }
            dd_metric = Some(ddg);
            dd_complex = Some(ddj);
        }
        Ok(Jet { metric, d_metric, dd_metric, complex_structure: j, d_complex, dd_complex })
    }

    fn kind(&self) -> StructureKind {
        StructureKind::AlmostKahler
    }
}
