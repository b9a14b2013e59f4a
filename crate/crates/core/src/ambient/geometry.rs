//! Connections, torsion and curvature derived from a structure jet.

use super::{Ambient, AmbientError, Jet};
use crate::linalg::{Matrix, Vector};

/// First-order geometry at a point.
///
/// Connections are stored as matrices per coordinate direction:
/// `∇_{e_a} Y = ∂_a Y + conn[a] Y`.
#[derive(Debug, Clone)]
pub struct LocalGeometry<const D: usize> {
    pub metric: Matrix<D>,
    pub metric_inv: Matrix<D>,
    pub complex_structure: Matrix<D>,
    /// `ω(X, Y) = X^T symplectic Y` with `ω(X, Y) = g(JX, Y)`.
    pub symplectic: Matrix<D>,
    pub levi_civita: [Matrix<D>; D],
    pub chern: [Matrix<D>; D],
    /// `(∇_{e_a} J)` for the Levi-Civita connection.
    pub nabla_j: [Matrix<D>; D],
}

impl<const D: usize> LocalGeometry<D> {
    pub fn from_jet(jet: &Jet<D>) -> Self {
        let g = jet.metric;
        let g_inv = g.try_inverse().unwrap_or_else(|| Matrix::from_element(f64::NAN));
        let j = jet.complex_structure;
        let first = first_kind(&jet.d_metric);
        let levi_civita: [Matrix<D>; D] = std::array::from_fn(|a| g_inv * first[a]);
        let nabla_j: [Matrix<D>; D] =
            std::array::from_fn(|a| jet.d_complex[a] + levi_civita[a] * j - j * levi_civita[a]);
        let chern = std::array::from_fn(|a| levi_civita[a] + nabla_j[a] * j * 0.5);
        Self {
            metric: g,
            metric_inv: g_inv,
            complex_structure: j,
            symplectic: j.transpose() * g,
            levi_civita,
            chern,
            nabla_j,
        }
    }

    pub fn inner(&self, x: &Vector<D>, y: &Vector<D>) -> f64 {
        x.dot(&(self.metric * y))
    }

    pub fn omega(&self, x: &Vector<D>, y: &Vector<D>) -> f64 {
        x.dot(&(self.symplectic * y))
    }

    pub fn j(&self, x: &Vector<D>) -> Vector<D> {
        self.complex_structure * x
    }

    /// Levi-Civita Christoffel contraction `Γ(X, Y)`.
    pub fn christoffel(&self, x: &Vector<D>, y: &Vector<D>) -> Vector<D> {
        contract(&self.levi_civita, x, y)
    }

    /// Chern Christoffel contraction `Γ~(X, Y)`.
    pub fn chern_christoffel(&self, x: &Vector<D>, y: &Vector<D>) -> Vector<D> {
        contract(&self.chern, x, y)
    }

    /// Torsion of the Chern connection, `½(∇_X J)(JY) - ½(∇_Y J)(JX)`.
    pub fn torsion(&self, x: &Vector<D>, y: &Vector<D>) -> Vector<D> {
        self.chern_christoffel(x, y) - self.chern_christoffel(y, x)
    }

    /// `(∇_X J)` as a matrix.
    pub fn nabla_j_along(&self, x: &Vector<D>) -> Matrix<D> {
        (0..D).fold(Matrix::zeros(), |acc, a| acc + self.nabla_j[a] * x[a])
    }
}

fn contract<const D: usize>(conn: &[Matrix<D>; D], x: &Vector<D>, y: &Vector<D>) -> Vector<D> {
    (0..D).fold(Vector::zeros(), |acc, a| acc + conn[a] * y * x[a])
}

/// `first[a][(l, j)] = ½(∂_a g_{jl} + ∂_j g_{al} - ∂_l g_{aj})`.
fn first_kind<const D: usize>(dg: &[Matrix<D>; D]) -> [Matrix<D>; D] {
    std::array::from_fn(|a| {
        Matrix::from_fn(|l, j| 0.5 * (dg[a][(j, l)] + dg[j][(a, l)] - dg[l][(a, j)]))
    })
}

/// Curvature endomorphisms `R(e_a, e_b)` of both connections.
#[derive(Debug, Clone)]
pub struct Curvature<const D: usize> {
    pub riemann: Box<[[Matrix<D>; D]; D]>,
    pub chern: Box<[[Matrix<D>; D]; D]>,
    complex_structure: Matrix<D>,
}

impl<const D: usize> Curvature<D> {
    /// Requires a second-order jet.
    pub fn from_jet(jet: &Jet<D>, local: &LocalGeometry<D>) -> Self {
        let ddg = jet.dd_metric.as_ref().expect("curvature needs a second-order jet");
        let ddj = jet.dd_complex.as_ref().expect("curvature needs a second-order jet");
        let g_inv = local.metric_inv;
        let j = local.complex_structure;
        let first = first_kind(&jet.d_metric);
        let mut d_lc = Box::new([[Matrix::<D>::zeros(); D]; D]);
        let mut d_chern = Box::new([[Matrix::<D>::zeros(); D]; D]);
        for c in 0..D {
            let d_ginv = -g_inv * jet.d_metric[c] * g_inv;
            for a in 0..D {
                let d_first = Matrix::<D>::from_fn(|l, jj| {
                    0.5 * (ddg[c][a][(jj, l)] + ddg[c][jj][(a, l)] - ddg[c][l][(a, jj)])
                });
                let dl = d_ginv * first[a] + g_inv * d_first;
                let conn = local.levi_civita[a];
                let dj = jet.d_complex[c];
                let d_nabla = ddj[c][a] + dl * j + conn * dj - dj * conn - j * dl;
                d_lc[c][a] = dl;
                d_chern[c][a] = dl + (d_nabla * j + local.nabla_j[a] * dj) * 0.5;
            }
        }
        let assemble = |d: &[[Matrix<D>; D]; D], conn: &[Matrix<D>; D]| {
            let mut r = Box::new([[Matrix::<D>::zeros(); D]; D]);
            for a in 0..D {
                for b in 0..D {
                    r[a][b] = d[a][b] - d[b][a] + conn[a] * conn[b] - conn[b] * conn[a];
                }
            }
            r
        };
        Self {
            riemann: assemble(&d_lc, &local.levi_civita),
            chern: assemble(&d_chern, &local.chern),
            complex_structure: j,
        }
    }

    /// `Ric(Y, Z) = tr(X ↦ R(X, Y) Z)` as a matrix.
    pub fn ricci(&self) -> Matrix<D> {
        Matrix::from_fn(|b, c| (0..D).map(|a| self.riemann[a][b][(a, c)]).sum())
    }

    /// Ricci form `ρ(X, Y) = Ric(JX, Y)`.
    pub fn ricci_form(&self) -> Matrix<D> {
        self.complex_structure.transpose() * self.ricci()
    }

    /// `P~(X, Y) = Σ ω(R~(X, Y) e_j, e_j) = tr(J R~(X, Y))`.
    pub fn chern_ricci_form(&self) -> Matrix<D> {
        let j = self.complex_structure;
        Matrix::from_fn(|a, b| (j * self.chern[a][b]).trace())
    }

    pub fn riemann_apply(&self, x: &Vector<D>, y: &Vector<D>) -> Matrix<D> {
        apply(&self.riemann, x, y)
    }

    pub fn chern_apply(&self, x: &Vector<D>, y: &Vector<D>) -> Matrix<D> {
        apply(&self.chern, x, y)
    }
}

fn apply<const D: usize>(r: &[[Matrix<D>; D]; D], x: &Vector<D>, y: &Vector<D>) -> Matrix<D> {
    let mut m = Matrix::zeros();
    for a in 0..D {
        for b in 0..D {
            let w = x[a] * y[b];
            if w != 0.0 {
                m += r[a][b] * w;
            }
        }
    }
    m
}

/// Result of comparing the Ricci form with the Kähler form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EinsteinRatio {
    /// Median of `ρ_ab / ω_ab` over entries with `|ω_ab| > 1e-8`.
    pub lambda: f64,
    /// `max |ρ - λ ω|`.
    pub deviation: f64,
}

pub fn einstein_ratio<const D: usize, A: Ambient<D> + ?Sized>(
    model: &A,
    x: &Vector<D>,
) -> Result<EinsteinRatio, AmbientError> {
    let (local, curv) = model.curvature(x)?;
    let rho = curv.ricci_form();
    let omega = local.symplectic;
    let mut ratios: Vec<f64> = omega
        .iter()
        .zip(rho.iter())
        .filter(|(w, _)| w.abs() > 1e-8)
        .map(|(w, r)| r / w)
        .collect();
    if ratios.is_empty() {
        return Err(AmbientError::Parameter("Kähler form vanishes".into()));
    }
    ratios.sort_by(f64::total_cmp);
    let lambda = ratios[ratios.len() / 2];
    let deviation = (rho - omega * lambda).amax();
    Ok(EinsteinRatio { lambda, deviation })
}
