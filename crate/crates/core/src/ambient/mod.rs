//! Ambient almost Hermitian structures `(M, J, g)` on coordinate charts of
//! `C^n`, evaluated pointwise as jets of the metric and complex structure.
//!
//! Every model exposes the same [`Ambient`] interface; the Levi-Civita and
//! Chern connections, torsion and curvature are then derived generically from
//! the jet in [`geometry`].

mod almost_kahler;
mod geometry;
mod potential;

pub use almost_kahler::{AlmostKahlerPair, DEFAULT_AMBIENT_STEP};
pub use geometry::{einstein_ratio, Curvature, EinsteinRatio, LocalGeometry};
pub use potential::{KahlerPotential, PotentialJet, Profile, RadialTerm};
pub(crate) use potential::{hermitian_part, jet_from_potential};

use thiserror::Error;

use crate::linalg::{standard_complex_structure, Matrix, Vector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmbientError {
    #[error("point {point:?} lies outside the model domain")]
    OutOfDomain { point: Vec<f64> },
    #[error("metric is not positive definite at {point:?}")]
    NotPositive { point: Vec<f64> },
    #[error("invalid model parameter: {0}")]
    Parameter(String),
}

/// Which compatibility conditions the structure satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureKind {
    /// `dω = 0` and `∇J = 0`.
    Kahler,
    /// `dω = 0` only.
    AlmostKahler,
}

/// How many derivatives of the structure a caller needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum JetOrder {
    /// Enough for connections and torsion.
    First,
    /// Also enough for curvature.
    Second,
}

/// Metric and complex structure with partial derivatives at a point.
#[derive(Debug, Clone)]
pub struct Jet<const D: usize> {
    pub metric: Matrix<D>,
    /// `d_metric[c]` is the partial derivative along coordinate `c`.
    pub d_metric: [Matrix<D>; D],
    /// `dd_metric[c][d]`, present for [`JetOrder::Second`].
    pub dd_metric: Option<Box<[[Matrix<D>; D]; D]>>,
    pub complex_structure: Matrix<D>,
    pub d_complex: [Matrix<D>; D],
    pub dd_complex: Option<Box<[[Matrix<D>; D]; D]>>,
}

impl<const D: usize> Jet<D> {
    /// Jet of a structure with constant `J` (standard) and the given metric data.
    pub fn with_standard_j(
        metric: Matrix<D>,
        d_metric: [Matrix<D>; D],
        dd_metric: Option<Box<[[Matrix<D>; D]; D]>>,
    ) -> Self {
        let zero_second = dd_metric.as_ref().map(|_| Box::new([[Matrix::<D>::zeros(); D]; D]));
        Self {
            metric,
            d_metric,
            dd_metric,
            complex_structure: standard_complex_structure(),
            d_complex: [Matrix::zeros(); D],
            dd_complex: zero_second,
        }
    }
}

/// A pointwise-evaluable almost Hermitian structure on a chart of `R^{2n}`.
pub trait Ambient<const D: usize>: Sync {
    fn jet(&self, x: &Vector<D>, order: JetOrder) -> Result<Jet<D>, AmbientError>;

    fn kind(&self) -> StructureKind;

    /// True when the metric is the flat one and `dz_1 ∧ ... ∧ dz_n` is parallel.
    fn is_flat(&self) -> bool {
        false
    }

    fn local(&self, x: &Vector<D>) -> Result<LocalGeometry<D>, AmbientError> {
        Ok(LocalGeometry::from_jet(&self.jet(x, JetOrder::First)?))
    }

    fn curvature(&self, x: &Vector<D>) -> Result<(LocalGeometry<D>, Curvature<D>), AmbientError> {
        let jet = self.jet(x, JetOrder::Second)?;
        let local = LocalGeometry::from_jet(&jet);
        let curv = Curvature::from_jet(&jet, &local);
        Ok((local, curv))
    }
}

/// `C^n` with its flat Kähler structure, optionally viewed modulo `2πZ^{2n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FlatSpace {
    pub periodic: bool,
}

impl<const D: usize> Ambient<D> for FlatSpace {
    fn jet(&self, _x: &Vector<D>, order: JetOrder) -> Result<Jet<D>, AmbientError> {
        let second = (order == JetOrder::Second).then(|| Box::new([[Matrix::<D>::zeros(); D]; D]));
        Ok(Jet::with_standard_j(Matrix::identity(), [Matrix::zeros(); D], second))
    }

    fn kind(&self) -> StructureKind {
        StructureKind::Kahler
    }

    fn is_flat(&self) -> bool {
        true
    }
}

/// Closed set of ambient models built from scenario files.
#[derive(Debug, Clone)]
pub enum AmbientModel<const D: usize> {
    Flat(FlatSpace),
    Potential(KahlerPotential<D>),
    AlmostKahler(AlmostKahlerPair<D>),
}

impl<const D: usize> AmbientModel<D> {
    pub fn flat() -> Self {
        Self::Flat(FlatSpace { periodic: false })
    }

    pub fn flat_torus() -> Self {
        Self::Flat(FlatSpace { periodic: true })
    }
}

impl<const D: usize> Ambient<D> for AmbientModel<D> {
    fn jet(&self, x: &Vector<D>, order: JetOrder) -> Result<Jet<D>, AmbientError> {
        match self {
            Self::Flat(m) => m.jet(x, order),
            Self::Potential(m) => m.jet(x, order),
            Self::AlmostKahler(m) => m.jet(x, order),
        }
    }

    fn kind(&self) -> StructureKind {
        match self {
            Self::Flat(m) => Ambient::<D>::kind(m),
            Self::Potential(m) => m.kind(),
            Self::AlmostKahler(m) => m.kind(),
        }
    }

    fn is_flat(&self) -> bool {
        match self {
            Self::Flat(_) => true,
            Self::Potential(m) => m.is_flat(),
            Self::AlmostKahler(_) => false,
        }
    }
}
