//! Smooth random periodic fields on the parameter torus, used as probes and
//! perturbations.

use nalgebra::SVector;
use rand::Rng;

/// `f(φ) = Σ c_m cos(m·φ) + s_m sin(m·φ)` with vector-valued coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigField<const N: usize, const K: usize> {
    terms: Vec<([i64; N], SVector<f64, K>, SVector<f64, K>)>,
}

impl<const N: usize, const K: usize> TrigField<N, K> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn from_terms(terms: Vec<([i64; N], SVector<f64, K>, SVector<f64, K>)>) -> Self {
        Self { terms }
    }

    /// All modes with `|m_i| <= max_mode`, coefficients uniform in `[-1, 1]`,
    /// rescaled so that the coefficient sum is `amplitude`.
    pub fn random(rng: &mut impl Rng, max_mode: i64, amplitude: f64) -> Self {
        let side = (2 * max_mode + 1) as usize;
        let count = side.pow(N as u32);
        let mut terms = Vec::with_capacity(count);
        for flat in 0..count {
            let mut rest = flat;
            let mode: [i64; N] = std::array::from_fn(|_| {
                let m = (rest % side) as i64 - max_mode;
                rest /= side;
                m
            });
            let c = SVector::<f64, K>::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let s = if mode.iter().all(|m| *m == 0) {
                SVector::zeros()
            } else {
                SVector::<f64, K>::from_fn(|_, _| rng.gen_range(-1.0..1.0))
            };
            terms.push((mode, c, s));
        }
        let total: f64 = terms.iter().map(|(_, c, s)| c.abs().sum() + s.abs().sum()).sum();
        let mut field = Self { terms };
        if total > 0.0 {
            field = field.scaled(amplitude / total);
        }
        field
    }

    /// Like [`TrigField::random`] without the constant mode.
    pub fn random_mean_free(rng: &mut impl Rng, max_mode: i64, amplitude: f64) -> Self {
        let mut f = Self::random(rng, max_mode, amplitude);
        f.terms.retain(|(m, _, _)| m.iter().any(|v| *v != 0));
        f
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        for (_, c, s) in &mut self.terms {
            *c *= factor;
            *s *= factor;
        }
        self
    }

    pub fn eval(&self, p: [f64; N]) -> SVector<f64, K> {
        self.terms.iter().fold(SVector::zeros(), |acc, (m, c, s)| {
            let phase: f64 = m.iter().zip(p).map(|(mi, pi)| *mi as f64 * pi).sum();
            acc + c * phase.cos() + s * phase.sin()
        })
    }

    /// `∂_axis f`.
    pub fn derivative(&self, p: [f64; N], axis: usize) -> SVector<f64, K> {
        self.terms.iter().fold(SVector::zeros(), |acc, (m, c, s)| {
            let phase: f64 = m.iter().zip(p).map(|(mi, pi)| *mi as f64 * pi).sum();
            let k = m[axis] as f64;
            acc + (s * phase.cos() - c * phase.sin()) * k
        })
    }
}
