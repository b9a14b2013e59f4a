//! Kähler structures `g = ½(D²φ + J^T D²φ J)` from radial potential terms.

use serde::{Deserialize, Serialize};

use super::{Ambient, AmbientError, Jet, JetOrder, StructureKind};
use crate::linalg::{standard_complex_structure, Matrix, Vector};

/// Radial profile `F(u)` of one potential term, `u = |x - c|² / w²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `u / 2`, the flat metric when `w = 1`.
    Quadratic,
    /// `-log(1 - u)`, the complex hyperbolic ball.
    NegLogOneMinus,
    /// `log(1 + u)`, Fubini-Study in an affine chart.
    LogOnePlus,
    /// `exp(-1 / (1 - u))` on `u < 1`, zero outside.
    CompactBump,
    /// `exp(-u)`.
    Gaussian,
}

impl Profile {
    /// `[F, F', F'', F''', F'''']`, or `None` outside the domain.
    pub fn derivatives(self, u: f64) -> Option<[f64; 5]> {
        match self {
            Profile::Quadratic => Some([0.5 * u, 0.5, 0.0, 0.0, 0.0]),
            Profile::NegLogOneMinus => {
                let s = 1.0 - u;
                (s > 1e-9).then(|| [-s.ln(), 1.0 / s, 1.0 / s.powi(2), 2.0 / s.powi(3), 6.0 / s.powi(4)])
            }
            Profile::LogOnePlus => {
                let s = 1.0 + u;
                (s > 1e-9).then(|| [s.ln(), 1.0 / s, -1.0 / s.powi(2), 2.0 / s.powi(3), -6.0 / s.powi(4)])
            }
            Profile::CompactBump => {
                if u >= 1.0 {
                    return Some([0.0; 5]);
                }
                let v = 1.0 / (1.0 - u);
                let e = (-v).exp();
                let (v2, v3, v4) = (v * v, v.powi(3), v.powi(4));
                Some([
                    e,
                    -v2 * e,
                    (v4 - 2.0 * v3) * e,
                    (-v.powi(6) + 6.0 * v.powi(5) - 6.0 * v4) * e,
                    (v.powi(8) - 12.0 * v.powi(7) + 36.0 * v.powi(6) - 24.0 * v.powi(5)) * e,
                ])
            }
            Profile::Gaussian => {
                let e = (-u).exp();
                Some([e, -e, e, -e, e])
            }
        }
    }
}

/// `amplitude · F(|x - center|² / width²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialTerm<const D: usize> {
    pub profile: Profile,
    pub amplitude: f64,
    pub center: Vector<D>,
    pub width: f64,
}

/// Value and partial derivatives of a potential up to order four.
#[derive(Debug, Clone)]
pub struct PotentialJet<const D: usize> {
    pub value: f64,
    pub gradient: Vector<D>,
    pub hessian: Matrix<D>,
    /// `third[c] = ∂_c D²φ`.
    pub third: [Matrix<D>; D],
    /// `fourth[c][d] = ∂_c ∂_d D²φ`.
    pub fourth: Option<Box<[[Matrix<D>; D]; D]>>,
}

impl<const D: usize> PotentialJet<D> {
    pub fn zero(with_fourth: bool) -> Self {
        Self {
            value: 0.0,
            gradient: Vector::zeros(),
            hessian: Matrix::zeros(),
            third: [Matrix::zeros(); D],
            fourth: with_fourth.then(|| Box::new([[Matrix::zeros(); D]; D])),
        }
    }
}

impl<const D: usize> RadialTerm<D> {
    fn accumulate(&self, x: &Vector<D>, out: &mut PotentialJet<D>) -> Result<(), AmbientError> {
        let kappa = 1.0 / (self.width * self.width);
        let y = x - self.center;
        let u = kappa * y.norm_squared();
        let f = self
            .profile
            .derivatives(u)
            .ok_or_else(|| AmbientError::OutOfDomain { point: x.iter().copied().collect() })?;
        if f.iter().all(|v| *v == 0.0) {
            return Ok(());
        }
        let amp = self.amplitude;
        let p: Vector<D> = y * (2.0 * kappa);
        let q = 2.0 * kappa;
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        out.value += amp * f[0];
        out.gradient += p * (amp * f[1]);
        out.hessian += (p * p.transpose() * f[2] + Matrix::identity() * (q * f[1])) * amp;
        for c in 0..D {
            out.third[c] += Matrix::from_fn(|a, b| {
                amp * (f[3] * p[a] * p[b] * p[c]
                    + f[2] * q * (delta(a, b) * p[c] + delta(a, c) * p[b] + delta(b, c) * p[a]))
            });
        }
        if let Some(fourth) = out.fourth.as_mut() {
            for c in 0..D {
                for d in 0..D {
                    fourth[c][d] += Matrix::from_fn(|a, b| {
                        let pp = delta(a, b) * p[c] * p[d]
                            + delta(a, c) * p[b] * p[d]
                            + delta(a, d) * p[b] * p[c]
                            + delta(b, c) * p[a] * p[d]
                            + delta(b, d) * p[a] * p[c]
                            + delta(c, d) * p[a] * p[b];
                        let dd = delta(a, b) * delta(c, d)
                            + delta(a, c) * delta(b, d)
                            + delta(a, d) * delta(b, c);
                        amp * (f[4] * p[a] * p[b] * p[c] * p[d] + f[3] * q * pp + f[2] * q * q * dd)
                    });
                }
            }
        }
        Ok(())
    }
}

/// Kähler structure on a chart of `C^n` given by a sum of radial terms.
#[derive(Debug, Clone, PartialEq)]
pub struct KahlerPotential<const D: usize> {
    pub terms: Vec<RadialTerm<D>>,
}

impl<const D: usize> KahlerPotential<D> {
    fn single(profile: Profile) -> Self {
        Self {
            terms: vec![RadialTerm { profile, amplitude: 1.0, center: Vector::zeros(), width: 1.0 }],
        }
    }

    /// `|z|² / 2`.
    pub fn flat() -> Self {
        Self::single(Profile::Quadratic)
    }

    /// `-log(1 - |z|²)` on the unit ball.
    pub fn complex_hyperbolic() -> Self {
        Self::single(Profile::NegLogOneMinus)
    }

    /// `log(1 + |z|²)`.
    pub fn fubini_study() -> Self {
        Self::single(Profile::LogOnePlus)
    }

    /// `|z|² / 2 + ε · bump`, the bump compactly supported in a ball.
    pub fn flat_plus_bump(epsilon: f64, center: Vector<D>, width: f64) -> Self {
        let mut p = Self::flat();
        p.terms.push(RadialTerm { profile: Profile::CompactBump, amplitude: epsilon, center, width });
        p
    }

    /// `|z|² / 2 + ε · exp(-|x - c|² / w²)`.
    pub fn flat_plus_gaussian(epsilon: f64, center: Vector<D>, width: f64) -> Self {
        let mut p = Self::flat();
        p.terms.push(RadialTerm { profile: Profile::Gaussian, amplitude: epsilon, center, width });
        p
    }

    pub fn is_flat(&self) -> bool {
        self.terms.iter().all(|t| t.profile == Profile::Quadratic && t.width == 1.0 && t.amplitude == 1.0)
            && self.terms.len() == 1
    }

    /// `D²φ` alone, cheaper than a full jet.
    pub fn hessian(&self, x: &Vector<D>) -> Result<Matrix<D>, AmbientError> {
        let mut out = Matrix::zeros();
        for t in &self.terms {
            let kappa = 1.0 / (t.width * t.width);
            let y = x - t.center;
            let f = t
                .profile
                .derivatives(kappa * y.norm_squared())
                .ok_or_else(|| AmbientError::OutOfDomain { point: x.iter().copied().collect() })?;
            let p: Vector<D> = y * (2.0 * kappa);
            out += (p * p.transpose() * f[2] + Matrix::identity() * (2.0 * kappa * f[1])) * t.amplitude;
        }
        Ok(out)
    }

    pub fn potential_jet(&self, x: &Vector<D>, fourth: bool) -> Result<PotentialJet<D>, AmbientError> {
        let mut jet = PotentialJet::zero(fourth);
        for t in &self.terms {
            t.accumulate(x, &mut jet)?;
        }
        Ok(jet)
    }
}

/// Hermitian part `½(m + J^T m J)` with respect to the standard `J`.
pub(crate) fn hermitian_part<const D: usize>(m: &Matrix<D>, j: &Matrix<D>) -> Matrix<D> {
    (m + j.transpose() * m * j) * 0.5
}

/// Structure jet induced by the Hessian data of a potential.
pub(crate) fn jet_from_potential<const D: usize>(pot: &PotentialJet<D>) -> Jet<D> {
    let j = standard_complex_structure::<D>();
    let metric = hermitian_part(&pot.hessian, &j);
    let d_metric = std::array::from_fn(|c| hermitian_part(&pot.third[c], &j));
    let dd_metric = pot.fourth.as_ref().map(|f| {
        let mut out = Box::new([[Matrix::<D>::zeros(); D]; D]);
        for c in 0..D {
            for d in 0..D {
                out[c][d] = hermitian_part(&f[c][d], &j);
            }
        }
        out
    });
    Jet::with_standard_j(metric, d_metric, dd_metric)
}

impl<const D: usize> Ambient<D> for KahlerPotential<D> {
    fn jet(&self, x: &Vector<D>, order: JetOrder) -> Result<Jet<D>, AmbientError> {
        let pot = self.potential_jet(x, order == JetOrder::Second)?;
        let jet = jet_from_potential(&pot);
        if jet.metric.cholesky().is_none() {
            return Err(AmbientError::NotPositive { point: x.iter().copied().collect() });
        }
        Ok(jet)
    }

    fn kind(&self) -> StructureKind {
        StructureKind::Kahler
    }

    fn is_flat(&self) -> bool {
        KahlerPotential::is_flat(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(profile: Profile, u: f64) {
        let h = 1e-5;
        let f = |u| profile.derivatives(u).unwrap();
        let (lo, mid, hi) = (f(u - h), f(u), f(u + h));
        for k in 0..4 {
            let fd = (hi[k] - lo[k]) / (2.0 * h);
            let scale = mid[k + 1].abs().max(1.0);
            assert!((fd - mid[k + 1]).abs() < 1e-6 * scale, "{profile:?} order {} at {u}", k + 1);
        }
    }

    #[test]
    fn profile_derivatives_match_differences() {
        for p in [
            Profile::Quadratic,
            Profile::NegLogOneMinus,
            Profile::LogOnePlus,
            Profile::CompactBump,
            Profile::Gaussian,
        ] {
            for u in [0.1, 0.35, 0.6, 0.8] {
                fd_check(p, u);
            }
        }
    }

    #[test]
    fn flat_potential_gives_identity_metric() {
        let pot = KahlerPotential::<4>::flat();
        let jet = pot.jet(&Vector::<4>::new(0.3, -0.2, 1.0, 0.4), JetOrder::Second).unwrap();
        assert_eq!(jet.metric, Matrix::<4>::identity());
        assert!(jet.dd_metric.unwrap().iter().flatten().all(|m| m.amax() == 0.0));
    }

    #[test]
    fn tensor_derivatives_match_differences() {
        let pot = KahlerPotential::<4>::flat_plus_bump(0.05, Vector::<4>::new(1.0, 0.0, 1.0, 0.0), 0.9);
        let x = Vector::<4>::new(0.8, 0.15, 0.7, -0.1);
        let jet = pot.potential_jet(&x, true).unwrap();
        let h = 1e-5;
        for c in 0..4 {
            let mut e = Vector::<4>::zeros();
            e[c] = h;
            let plus = pot.potential_jet(&(x + e), true).unwrap();
            let minus = pot.potential_jet(&(x - e), true).unwrap();
            let d_hess = (plus.hessian - minus.hessian) / (2.0 * h);
            assert!((d_hess - jet.third[c]).amax() < 1e-7);
            for d in 0..4 {
                let d_third = (plus.third[d] - minus.third[d]) / (2.0 * h);
                assert!((d_third - jet.fourth.as_ref().unwrap()[c][d]).amax() < 1e-6);
            }
            let d_val = (plus.value - minus.value) / (2.0 * h);
            assert!((d_val - jet.gradient[c]).abs() < 1e-8);
        }
    }

    #[test]
    fn ball_rejects_points_outside() {
        let pot = KahlerPotential::<2>::complex_hyperbolic();
        assert!(matches!(
            pot.jet(&Vector::<2>::new(1.0, 0.2), JetOrder::First),
            Err(AmbientError::OutOfDomain { .. })
        ));
    }
}
