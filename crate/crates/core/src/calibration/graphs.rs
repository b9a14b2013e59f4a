//! Special totally real graphs: the determinant equations, a scalar-family
//! solver, and J-volume comparisons inside a homology class of the flat torus.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, SMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AngleField, CalabiYau, CalibrationError};
use crate::ambient::{Ambient, FlatSpace};
use crate::fields::TrigField;
use crate::grid::TorusGrid;
use crate::immersion::{frame_field, presets, rho_j_hermitian, Immersion};
use crate::linalg::{singular_values, standard_complex_structure, Vector};

const ROOT_TOL: f64 = 1e-12;

/// `det_C(I + iM)` split into parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrGraphValue {
    pub im: f64,
    pub re: f64,
}

impl StrGraphValue {
    pub fn is_str(&self, tol: f64) -> bool {
        self.im.abs() <= tol && self.re > 0.0
    }
}

pub fn str_graph_residual(m: &DMatrix<f64>) -> StrGraphValue {
    let n = m.nrows();
    let c = DMatrix::from_fn(n, n, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, m[(i, j)]));
    let d = c.determinant();
    StrGraphValue { im: d.im, re: d.re }
}

/// Graph of a map with differential `f_star` (acting on `R^{2n}`) is totally
/// real iff `J f_* + f_* J` is injective.
pub fn totally_real_graph_check<const D: usize>(f_star: &SMatrix<f64, D, D>) -> bool {
    let j = standard_complex_structure::<D>();
    let a = j * f_star + f_star * j;
    let sv = singular_values(&DMatrix::from_column_slice(D, D, a.as_slice()));
    sv.iter().cloned().fold(f64::INFINITY, f64::min) > 1e-10
}

/// `M(s) = base + s * direction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineFamily {
    pub base: Vec<Vec<f64>>,
    pub direction: Vec<Vec<f64>>,
}

impl AffineFamily {
    /// `diag(a, s)`.
    pub fn diagonal(a: f64) -> Self {
        Self { base: vec![vec![a, 0.0], vec![0.0, 0.0]], direction: vec![vec![0.0, 0.0], vec![0.0, 1.0]] }
    }

    /// `[[0, s], [0, 0]]`.
    pub fn nilpotent() -> Self {
        Self { base: vec![vec![0.0; 2]; 2], direction: vec![vec![0.0, 1.0], vec![0.0, 0.0]] }
    }

    /// `[[s, 2], [-1, 0]]`: `det(I + iM) = -1 + is`, root with `Re < 0`.
    pub fn negative_real() -> Self {
        Self { base: vec![vec![0.0, 2.0], vec![-1.0, 0.0]], direction: vec![vec![1.0, 0.0], vec![0.0, 0.0]] }
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn matrix(&self, s: f64) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.base[i][j] + s * self.direction[i][j])
    }

    fn im(&self, s: f64) -> f64 {
        str_graph_residual(&self.matrix(s)).im
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrRoot {
    pub s: f64,
    pub value: StrGraphValue,
    /// `Im det` vanishes for every `s`.
    pub identically_satisfied: bool,
    pub iterations: usize,
}

/// Newton iteration on `s ↦ Im det_C(I + iM(s))` safeguarded by bisection.
pub fn solve_str_family(family: &AffineFamily, s0: f64) -> Result<StrRoot, CalibrationError> {
    let accept = |s: f64, identically_satisfied: bool, iterations: usize| {
        let value = str_graph_residual(&family.matrix(s));
        if value.re > 0.0 {
            Ok(StrRoot { s, value, identically_satisfied, iterations })
        } else {
            Err(CalibrationError::Rejected { s, re: value.re })
        }
    };
    // `Im det` is a polynomial of degree <= n in `s`; n + 1 zeros make it vanish.
    let probes: Vec<f64> = (0..=2 * family.dim() + 2).map(|k| s0 + 0.37 * k as f64 - 1.1).collect();
    if probes.iter().all(|s| family.im(*s).abs() <= ROOT_TOL) {
        return accept(s0, true, 0);
    }
    let f0 = family.im(s0);
    if f0.abs() <= ROOT_TOL {
        return accept(s0, false, 0);
    }
    let mut width = 0.5;
    let (mut lo, mut hi) = loop {
        let candidates = [s0 - width, s0 + width];
        if let Some(&other) = candidates.iter().find(|s| family.im(**s).signum() != f0.signum()) {
            break if other < s0 { (other, s0) } else { (s0, other) };
        }
        width *= 2.0;
        if width > 1e8 {
            return Err(CalibrationError::NoBracket { s0 });
        }
    };
    let mut s = s0;
    let f_lo_sign = family.im(lo).signum();
    for iter in 1..=200 {
        let f = family.im(s);
        if f.abs() <= 1e-15 || hi - lo <= 1e-15 * (1.0 + s.abs()) {
            return accept(s, false, iter);
        }
        if f.signum() == f_lo_sign {
            lo = s;
        } else {
            hi = s;
        }
        let h = 1e-6 * (1.0 + s.abs());
        let slope = (family.im(s + h) - family.im(s - h)) / (2.0 * h);
        let newton = s - f / slope;
        s = if slope != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
    }
    let s_final = s;
    if family.im(s_final).abs() <= ROOT_TOL {
        accept(s_final, false, 200)
    } else {
        Err(CalibrationError::NoBracket { s0 })
    }
}

/// J-volumes of graph perturbations `y = u(φ)` of the straight torus in the
/// flat torus, against the base value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomologyComparison {
    pub base: f64,
    pub perturbed: Vec<f64>,
}

impl HomologyComparison {
    pub fn min_excess(&self) -> f64 {
        self.perturbed.iter().map(|v| v - self.base).fold(f64::INFINITY, f64::min)
    }
}

fn graph_vol_j<const N: usize, const D: usize>(
    grid: TorusGrid<N>,
    field: &TrigField<N, N>,
    margin: f64,
) -> Result<f64, CalibrationError> {
    let imm: Immersion<N, D> = presets::graph(grid, SMatrix::zeros(), |p| field.eval(p).into());
    Ok(frame_field(&imm, &FlatSpace { periodic: true }, margin)?.vol_j())
}

pub fn homology_comparison<const N: usize, const D: usize>(
    grid: TorusGrid<N>,
    perturbations: &[TrigField<N, N>],
    margin: f64,
) -> Result<HomologyComparison, CalibrationError> {
    let base = graph_vol_j::<N, D>(grid, &TrigField::zero(), margin)?;
    let perturbed = perturbations.iter().map(|f| graph_vol_j::<N, D>(grid, f, margin)).collect::<Result<_, _>>()?;
    Ok(HomologyComparison { base, perturbed })
}

/// Least-squares slope of `log(Vol_J excess)` against `log(amplitude)`.
pub fn excess_exponent<const N: usize, const D: usize>(
    grid: TorusGrid<N>,
    field: &TrigField<N, N>,
    amplitudes: &[f64],
    margin: f64,
) -> Result<f64, CalibrationError> {
    let base = graph_vol_j::<N, D>(grid, &TrigField::zero(), margin)?;
    let points = amplitudes
        .iter()
        .map(|a| Ok((a.ln(), (graph_vol_j::<N, D>(grid, &field.clone().scaled(*a), margin)? - base).ln())))
        .collect::<Result<Vec<_>, CalibrationError>>()?;
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    Ok(num / den)
}

/// One candidate of the dichotomy experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub name: String,
    /// `∫_L dx_a ∧ dx_b` over coordinate pairs `a < b`, divided by `4π²`.
    pub class: Vec<i64>,
    /// `∫_L Ω` divided by `4π²`.
    pub omega_period: [f64; 2],
    pub max_rho_j: f64,
    pub partially_complex: bool,
    pub special_totally_real: bool,
}

fn class_report<const D: usize>(name: &str, imm: &Immersion<2, D>, tol: f64) -> ClassReport {
    let grid = imm.grid();
    let flat = FlatSpace { periodic: true };
    let mut minors = vec![0.0; D * (D - 1) / 2];
    let mut period = Complex64::new(0.0, 0.0);
    let mut max_rho_j = 0.0f64;
    let cy = CalabiYau::default();
    for idx in 0..grid.len() {
        let t = imm.tangents(idx);
        let mut k = 0;
        for a in 0..D {
            for b in (a + 1)..D {
                minors[k] += t[(a, 0)] * t[(b, 1)] - t[(a, 1)] * t[(b, 0)];
                k += 1;
            }
        }
        period += cy.evaluate(&t);
        let local = Ambient::<D>::local(&flat, &Vector::<D>::zeros()).expect("flat model is defined everywhere");
        max_rho_j = max_rho_j.max(rho_j_hermitian(&t, &local));
    }
    let norm = grid.cell_measure() / (TAU * TAU);
    let partially_complex = max_rho_j <= tol;
    let special_totally_real = !partially_complex
        && AngleField::new(imm, &cy)
            .ok()
            .and_then(|angle| {
                let ff = frame_field(imm, &flat, tol).ok()?;
                Some(super::str_residual(&ff, &angle).residual <= tol.sqrt())
            })
            .unwrap_or(false);
    ClassReport {
        name: name.to_string(),
        class: minors.iter().map(|m| (m * norm).round() as i64).collect(),
        omega_period: [period.re * norm, period.im * norm],
        max_rho_j,
        partially_complex,
        special_totally_real,
    }
}

/// Straight torus, graph perturbations of it, and partially complex linear
/// tori, each with its homology class and STR / partially complex status.
pub fn dichotomy_experiment(grid: TorusGrid<2>, perturbations: &[TrigField<2, 2>], tol: f64) -> Vec<ClassReport> {
    let mut out = vec![class_report("straight", &presets::straight::<2, 4>(grid), tol)];
    for (k, f) in perturbations.iter().enumerate() {
        let imm: Immersion<2, 4> = presets::graph(grid, SMatrix::zeros(), |p| f.eval(p).into());
        out.push(class_report(&format!("graph-{k}"), &imm, tol));
    }
    let complex_line = |a: usize, b: usize| {
        presets::linear::<2, 4>(grid, SMatrix::from_fn(|r, c| if (c == 0 && r == a) || (c == 1 && r == b) { 1.0 } else { 0.0 }))
    };
    out.push(class_report("complex-z1", &complex_line(0, 1), tol));
    out.push(class_report("complex-z2", &complex_line(2, 3), tol));
    out
}

