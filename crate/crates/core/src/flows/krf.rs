//! Kähler-Ricci flow realized on the potential, coupled to the Maslov flow.
//!
//! The potential is `φ_0 + ψ` with `φ_0` analytic and the correction `ψ`
//! sampled on a box grid in the chart. `ψ` evolves by `∂_t ψ = ½ log det g`
//! (the real determinant, i.e. `log det_C` of the Hermitian metric), which
//! realizes `∂_t ω = -ρ`. Only nodes inside an active ball around the region
//! where `φ_0` is not flat are updated; `ψ` is zero elsewhere.

use nalgebra::{Cholesky, SMatrix};
use rayon::prelude::*;

use super::{advance, node_spacing, record, velocity, FlowConfig, FlowError, FlowStatus, Record};
use crate::ambient::{hermitian_part, jet_from_potential, Ambient, AmbientError, Jet, JetOrder, KahlerPotential, StructureKind};
use crate::immersion::{frame_field, Immersion};
use crate::linalg::{standard_complex_structure, Matrix, Vector};

/// A Hessian field with its first and second partial derivatives.
type HessianJet<const D: usize> = (Matrix<D>, [Matrix<D>; D], Box<[[Matrix<D>; D]; D]>);

/// Uniform cubic box grid in the chart, last axis fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGrid<const D: usize> {
    pub origin: Vector<D>,
    pub spacing: f64,
    pub nodes: usize,
}

impl<const D: usize> BoxGrid<D> {
    /// `nodes` per axis spanning `center ± half_width`.
    pub fn around(center: Vector<D>, half_width: f64, nodes: usize) -> Self {
        assert!(nodes >= 4, "box grid needs at least four nodes per axis");
        Self { origin: center.add_scalar(-half_width), spacing: 2.0 * half_width / (nodes - 1) as f64, nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.pow(D as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn stride(&self, axis: usize) -> usize {
        self.nodes.pow((D - 1 - axis) as u32)
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; D] {
        let mut m = [0; D];
        for a in (0..D).rev() {
            m[a] = idx % self.nodes;
            idx /= self.nodes;
        }
        m
    }

    pub fn point(&self, idx: usize) -> Vector<D> {
        let m = self.multi_index(idx);
        Vector::from_fn(|a, _| self.origin[a] + self.spacing * m[a] as f64)
    }
}

/// Cubic Lagrange weights on nodes `-1, 0, 1, 2` at `t ∈ [0, 1)`, with
/// first and second derivatives in `t`.
fn lagrange4(t: f64) -> [[f64; 4]; 3] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        [
            -(t3 - 3.0 * t2 + 2.0 * t) / 6.0,
            (t3 - 2.0 * t2 - t + 2.0) / 2.0,
            -(t3 - t2 - 2.0 * t) / 2.0,
            (t3 - t) / 6.0,
        ],
        [
            -(3.0 * t2 - 6.0 * t + 2.0) / 6.0,
            (3.0 * t2 - 4.0 * t - 1.0) / 2.0,
            -(3.0 * t2 - 2.0 * t - 2.0) / 2.0,
            (3.0 * t2 - 1.0) / 6.0,
        ],
        [-(t - 1.0), 3.0 * t - 2.0, -3.0 * t + 1.0, t],
    ]
}

/// The evolving potential.
#[derive(Debug, Clone)]
pub struct KrfPotential<const D: usize> {
    pub base: KahlerPotential<D>,
    pub grid: BoxGrid<D>,
    pub psi: Vec<f64>,
    active: Vec<usize>,
}

impl<const D: usize> KrfPotential<D> {
    /// Box of `nodes` per axis around `center`; nodes within `active_radius`
    /// of `center` (and off the boundary layer) evolve.
    pub fn new(base: KahlerPotential<D>, center: Vector<D>, half_width: f64, nodes: usize, active_radius: f64) -> Self {
        let grid = BoxGrid::around(center, half_width, nodes);
        let active = (0..grid.len())
            .filter(|&idx| {
                let m = grid.multi_index(idx);
                m.iter().all(|&v| v >= 2 && v + 2 < nodes) && (grid.point(idx) - center).norm() < active_radius
            })
            .collect();
        Self { base, grid, psi: vec![0.0; grid.len()], active }
    }

    pub fn active_nodes(&self) -> usize {
        self.active.len()
    }

    /// Model evaluating `φ_0 + ψ` for the given correction.
    pub fn model<'a>(&'a self, psi: &'a [f64]) -> KrfModel<'a, D> {
        KrfModel { base: &self.base, grid: self.grid, psi }
    }

    pub fn current(&self) -> KrfModel<'_, D> {
        self.model(&self.psi)
    }

    /// `½ log det g` at every active node, zero elsewhere.
    pub fn rate(&self, psi: &[f64]) -> Result<Vec<f64>, FlowError> {
        let j = standard_complex_structure::<D>();
        let model = self.model(psi);
        let rates = self
            .active
            .par_iter()
            .map(|&idx| {
                let x = self.grid.point(idx);
                let hess = self.base.hessian(&x).map_err(|e| FlowError::AmbientDegenerate(e.to_string()))?
                    + model.node_hessian(idx);
                let chol = Cholesky::new(hermitian_part(&hess, &j)).ok_or_else(|| {
                    FlowError::AmbientDegenerate(format!("metric not positive at {:?}", x.as_slice()))
                })?;
                Ok(chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>())
            })
            .collect::<Result<Vec<f64>, FlowError>>()?;
        let mut out = vec![0.0; psi.len()];
        for (&idx, r) in self.active.iter().zip(rates) {
            out[idx] = r;
        }
        Ok(out)
    }
}

/// `φ_0 + ψ` as an [`Ambient`]: analytic jets of `φ_0` plus the cubic
/// interpolant of the finite-difference Hessians of `ψ`.
#[derive(Debug, Clone, Copy)]
pub struct KrfModel<'a, const D: usize> {
    base: &'a KahlerPotential<D>,
    grid: BoxGrid<D>,
    psi: &'a [f64],
}

impl<const D: usize> KrfModel<'_, D> {
    /// Fourth-order Hessian of `ψ` at a box node, zero on the outer two layers.
    fn node_hessian(&self, idx: usize) -> Matrix<D> {
        const SECOND: [(isize, f64); 5] = [(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)];
        const FIRST: [(isize, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
        let g = &self.grid;
        let m = g.multi_index(idx);
        if m.iter().any(|&v| v < 2 || v + 2 >= g.nodes) {
            return Matrix::zeros();
        }
        let p = self.psi;
        let at = |offset: isize| p[(idx as isize + offset) as usize];
        let h2 = g.spacing * g.spacing;
        let mut out = Matrix::zeros();
        for a in 0..D {
            let sa = g.stride(a) as isize;
            out[(a, a)] = SECOND.iter().map(|&(k, w)| w * at(k * sa)).sum::<f64>() / (12.0 * h2);
            for b in (a + 1)..D {
                let sb = g.stride(b) as isize;
                let v = FIRST
                    .iter()
                    .flat_map(|&(i, wi)| FIRST.iter().map(move |&(j, wj)| (i * sa + j * sb, wi * wj)))
                    .map(|(off, w)| w * at(off))
                    .sum::<f64>()
                    / (144.0 * h2);
                out[(a, b)] = v;
                out[(b, a)] = v;
            }
        }
        out
    }

    /// Interpolated `D²ψ` with first and (optionally) second derivatives.
    fn correction(&self, x: &Vector<D>, second: bool) -> Option<HessianJet<D>> {
        let g = &self.grid;
        let mut base_idx = 0usize;
        let mut weights = [[[0.0; 4]; 3]; D];
        for a in 0..D {
            let s = (x[a] - g.origin[a]) / g.spacing;
            let i0 = s.floor();
            if i0 < 1.0 || i0 + 2.0 > (g.nodes - 1) as f64 {
                return None;
            }
            weights[a] = lagrange4(s - i0);
            base_idx += (i0 as usize - 1) * g.stride(a);
        }
        let inv = 1.0 / g.spacing;
        let mut value = Matrix::zeros();
        let mut first = [Matrix::zeros(); D];
        let mut dd = Box::new([[Matrix::zeros(); D]; D]);
        for flat in 0..4usize.pow(D as u32) {
            let mut rest = flat;
            let mut digits = [0usize; D];
            let mut idx = base_idx;
            for a in (0..D).rev() {
                digits[a] = rest % 4;
                rest /= 4;
                idx += digits[a] * g.stride(a);
            }
            let w = |a: usize, order: usize| weights[a][order][digits[a]];
            let w0: f64 = (0..D).map(|a| w(a, 0)).product();
            let h = self.node_hessian(idx);
            if h.iter().all(|v| *v == 0.0) {
                continue;
            }
            value += h * w0;
            for c in 0..D {
                let wc: f64 = (0..D).map(|a| w(a, usize::from(a == c))).product::<f64>() * inv;
                first[c] += h * wc;
                if second {
                    for d in c..D {
                        let wcd: f64 = (0..D)
                            .map(|a| match (a == c, a == d) {
                                (true, true) => w(a, 2),
                                (true, false) | (false, true) => w(a, 1),
                                (false, false) => w(a, 0),
                            })
                            .product::<f64>()
                            * inv
                            * inv;
                        dd[c][d] += h * wcd;
                    }
                }
            }
        }
        if second {
            for c in 0..D {
                for d in 0..c {
                    dd[c][d] = dd[d][c];
                }
            }
        }
        Some((value, first, dd))
    }
}

impl<const D: usize> Ambient<D> for KrfModel<'_, D> {
    fn jet(&self, x: &Vector<D>, order: JetOrder) -> Result<Jet<D>, AmbientError> {
        let second = order == JetOrder::Second;
        let mut pot = self.base.potential_jet(x, second)?;
        if let Some((value, first, dd)) = self.correction(x, second) {
            pot.hessian += value;
            for c in 0..D {
                pot.third[c] += first[c];
            }
            if let Some(f) = pot.fourth.as_mut() {
                for c in 0..D {
                    for d in 0..D {
                        f[c][d] += dd[c][d];
                    }
                }
            }
        }
        let jet = jet_from_potential(&pot);
        if jet.metric.cholesky().is_none() {
            return Err(AmbientError::NotPositive { point: x.iter().copied().collect() });
        }
        Ok(jet)
    }

    fn kind(&self) -> StructureKind {
        StructureKind::Kahler
    }
}

/// Maslov-type flow of an immersion coupled to Kähler-Ricci flow of the potential.
#[derive(Debug, Clone)]
pub struct CoupledFlow<const N: usize, const D: usize> {
    potential: KrfPotential<D>,
    config: FlowConfig,
    immersion: Immersion<N, D>,
    omega0: Vec<SMatrix<f64, N, N>>,
    t: f64,
    steps_taken: usize,
    status: FlowStatus,
}

/// Series and `ω` drift of a coupled run.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRun {
    pub records: Vec<Record>,
    /// `(t, sup |ω_t - ω_0|)`.
    pub drift: Vec<(f64, f64)>,
    pub status: FlowStatus,
}

impl<const N: usize, const D: usize> CoupledFlow<N, D> {
    pub fn new(immersion: Immersion<N, D>, potential: KrfPotential<D>, config: FlowConfig) -> Result<Self, FlowError> {
        let omega0 = frame_field(&immersion, &potential.current(), config.margin_min)?.frames.iter().map(|f| f.omega).collect();
        Ok(Self { potential, config, immersion, omega0, t: 0.0, steps_taken: 0, status: FlowStatus::Running })
    }

    pub fn immersion(&self) -> &Immersion<N, D> {
        &self.immersion
    }

    pub fn potential(&self) -> &KrfPotential<D> {
        &self.potential
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// `sup |ω_t - ω_0|` over nodes and components, in fixed grid coordinates.
    pub fn drift(&self) -> Result<f64, FlowError> {
        let ff = frame_field(&self.immersion, &self.potential.current(), self.config.margin_min)?;
        Ok(ff.frames.iter().zip(&self.omega0).map(|(f, w)| (f.omega - w).amax()).fold(0.0, f64::max))
    }

    fn stage(&self, positions: Vec<Vector<D>>, psi: &[f64]) -> Result<(Vec<Vector<D>>, Vec<f64>), FlowError> {
        let imm = self.immersion.with_positions(positions).map_err(|e| FlowError::AmbientDegenerate(e.to_string()))?;
        let v = velocity(&imm, &self.potential.model(psi), self.config.kind, self.config.margin_min)?;
        Ok((v, self.potential.rate(psi)?))
    }

    pub fn step(&mut self) -> Result<(), FlowError> {
        let result = self.try_step();
        if let Err(e) = &result {
            self.status = e.status();
        }
        result
    }

    fn try_step(&mut self) -> Result<(), FlowError> {
        let dt = self.config.dt;
        let x0 = self.immersion.positions().to_vec();
        let psi0 = self.potential.psi.clone();
        let shifted = |rate: &[f64], h: f64| -> Vec<f64> { psi0.iter().zip(rate).map(|(p, r)| p + h * r).collect() };
        let (k1, r1) = self.stage(x0.clone(), &psi0)?;
        let (next, psi_next) = match self.config.integrator {
            super::Integrator::Euler => (advance(&x0, &k1, dt), shifted(&r1, dt)),
            super::Integrator::Rk4 => {
                let (k2, r2) = self.stage(advance(&x0, &k1, 0.5 * dt), &shifted(&r1, 0.5 * dt))?;
                let (k3, r3) = self.stage(advance(&x0, &k2, 0.5 * dt), &shifted(&r2, 0.5 * dt))?;
                let (k4, r4) = self.stage(advance(&x0, &k3, dt), &shifted(&r3, dt))?;
                let x = x0
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0))
                    .collect();
                let psi = (0..psi0.len()).map(|i| psi0[i] + (r1[i] + 2.0 * r2[i] + 2.0 * r3[i] + r4[i]) * (dt / 6.0)).collect();
                (x, psi)
            }
        };
        let displacement = x0.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let limit = 10.0 * node_spacing(&self.immersion);
        if displacement > limit {
            return Err(FlowError::Unstable { displacement, limit });
        }
        self.immersion = self.immersion.with_positions(next).map_err(|e| FlowError::AmbientDegenerate(e.to_string()))?;
        self.potential.psi = psi_next;
        self.t += dt;
        self.steps_taken += 1;
        Ok(())
    }

    pub fn record(&self) -> Result<Record, FlowError> {
        record(self.t, &self.immersion, &self.potential.current(), self.config.margin_min, self.status)
    }

    /// Runs the configured steps; drift is sampled on the diagnostics cadence.
    /// Full records (which need curvature) are taken only at the ends when
    /// `with_records` is false.
    pub fn run(&mut self, with_records: bool) -> CoupledRun {
        let every = self.config.diagnostics_every.max(1);
        let mut records = Vec::new();
        let mut drift = vec![(0.0, 0.0)];
        if let Ok(r) = self.record() {
            records.push(r);
        }
        while self.steps_taken < self.config.steps {
            if self.step().is_err() {
                break;
            }
            if self.steps_taken.is_multiple_of(every) || self.steps_taken == self.config.steps {
                match self.drift() {
                    Ok(d) => drift.push((self.t, d)),
                    Err(e) => {
                        self.status = e.status();
                        break;
                    }
                }
                if with_records && self.steps_taken < self.config.steps {
                    if let Ok(r) = self.record() {
                        records.push(r);
                    }
                }
            }
        }
        if self.status == FlowStatus::Running {
            self.status = FlowStatus::Completed;
        }
        match self.record() {
            Ok(r) => records.push(r),
            Err(_) => {
                if let Some(last) = records.last_mut() {
                    last.status = self.status;
                }
            }
        }
        CoupledRun { records, drift, status: self.status }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{Flow, FlowKind};
    use crate::immersion::DEFAULT_MARGIN;

    #[test]
    fn lagrange_weights_reproduce_cubics() {
        for t in [0.0, 0.3, 0.77] {
            let w = lagrange4(t);
            let nodes = [-1.0, 0.0, 1.0, 2.0];
            let f = |x: f64| 2.0 * x.powi(3) - x * x + 0.5 * x - 3.0;
            let df = |x: f64| 6.0 * x * x - 2.0 * x + 0.5;
            let ddf = |x: f64| 12.0 * x - 2.0;
            let v: f64 = (0..4).map(|k| w[0][k] * f(nodes[k])).sum();
            let d: f64 = (0..4).map(|k| w[1][k] * f(nodes[k])).sum();
            let dd: f64 = (0..4).map(|k| w[2][k] * f(nodes[k])).sum();
            assert!((v - f(t)).abs() < 1e-12 && (d - df(t)).abs() < 1e-12 && (dd - ddf(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_potential_is_stationary() {
        let base = KahlerPotential::<4>::flat_plus_bump(0.0, Vector::zeros(), 0.8);
        let pot = KrfPotential::new(base, Vector::zeros(), 1.0, 12, 0.9);
        let rate = pot.rate(&pot.psi).unwrap();
        assert!(rate.iter().all(|r| r.abs() <= 1e-12));
    }

    #[test]
    fn interpolated_hessian_of_a_quadratic_is_exact() {
        let base = KahlerPotential::<2>::flat();
        let mut pot = KrfPotential::new(base, Vector::zeros(), 1.0, 16, 0.9);
        let q = Matrix::<2>::new(0.3, 0.1, 0.1, -0.2);
        for idx in 0..pot.grid.len() {
            let x = pot.grid.point(idx);
            pot.psi[idx] = 0.5 * (x.transpose() * q * x)[0];
        }
        let (value, first, dd) = pot.current().correction(&Vector::from([0.11, -0.23]), true).unwrap();
        assert!((value - q).amax() < 1e-12);
        assert!(first.iter().all(|m| m.amax() < 1e-10));
        assert!(dd.iter().flatten().all(|m| m.amax() < 1e-8));
    }

    /// `sup |∂ω̄/∂t + ρ̄|` near the bump of a one-dimensional (`D = 2`)
    /// potential, with the time derivative taken as a two-sided difference
    /// along the rate and `ρ̄` from the model's own curvature.
    fn ricci_defect(nodes: usize) -> f64 {
        let c = Vector::<2>::from([0.3, -0.1]);
        let w = 0.6;
        let mut pot = KrfPotential::new(KahlerPotential::flat_plus_gaussian(0.05, c, w), c, 3.5 * w, nodes, 3.4 * w);
        let rate = pot.rate(&pot.psi).unwrap();
        let delta = 1e-4;
        let omega_at = |pot: &KrfPotential<2>, x: &Vector<2>| pot.current().local(x).unwrap().symplectic;
        let points: Vec<Vector<2>> = (0..60)
            .map(|k| {
                let (r, a) = (1.5 * w * ((k % 6) as f64 + 0.5) / 6.0, 0.37 * k as f64);
                c + Vector::<2>::new(r * a.cos(), r * a.sin())
            })
            .collect();
        let rho: Vec<Matrix<2>> = points.iter().map(|x| pot.current().curvature(x).unwrap().1.ricci_form()).collect();
        pot.psi = rate.iter().map(|r| r * delta).collect();
        let plus: Vec<Matrix<2>> = points.iter().map(|x| omega_at(&pot, x)).collect();
        pot.psi = rate.iter().map(|r| -r * delta).collect();
        plus.iter()
            .zip(&points)
            .zip(&rho)
            .map(|((p, x), r)| ((p - omega_at(&pot, x)) / (2.0 * delta) + r).amax())
            .fold(0.0, f64::max)
    }

    #[test]
    fn potential_flow_reproduces_the_ricci_form() {
        let (coarse, fine) = (ricci_defect(32), ricci_defect(64));
        assert!(fine < 1e-2, "{fine:e}");
        assert!(coarse / fine >= 1.8, "{coarse:e} -> {fine:e}");
    }

    fn sheared(n: usize) -> Immersion<2, 4> {
        crate::immersion::presets::sheared(crate::grid::TorusGrid::uniform(n).unwrap(), 1.0, 0.2, Vector::zeros())
    }

    fn coupled_drift(epsilon: f64, kind: FlowKind) -> f64 {
        let c = Vector::<4>::from([1.0, 0.0, 1.2, 0.0]);
        let pot = KrfPotential::new(KahlerPotential::flat_plus_gaussian(epsilon, c, 0.6), c, 2.1, 24, 2.04);
        let config = FlowConfig { kind, dt: 1e-4, steps: 10, diagnostics_every: 10, ..Default::default() };
        let run = CoupledFlow::new(sheared(32), pot, config).unwrap().run(false);
        assert_eq!(run.status, FlowStatus::Completed);
        run.drift.last().unwrap().1
    }

    #[test]
    fn unbumped_coupled_flow_is_the_static_flow() {
        let flat = crate::ambient::FlatSpace::default();
        let imm = sheared(32);
        let w0 = frame_field(&imm, &flat, DEFAULT_MARGIN).unwrap();
        let mut flow = Flow::new(imm, &flat, FlowConfig { dt: 1e-4, steps: 10, ..Default::default() });
        flow.run();
        let w1 = frame_field(flow.immersion(), &flat, DEFAULT_MARGIN).unwrap();
        let static_drift =
            w0.frames.iter().zip(&w1.frames).map(|(a, b)| (a.omega - b.omega).amax()).fold(0.0, f64::max);
        assert!((coupled_drift(0.0, FlowKind::Maslov) - static_drift).abs() < 1e-14);
    }

    #[test]
    fn mean_curvature_flow_does_not_preserve_omega() {
        let (maslov, mcf) = (coupled_drift(0.05, FlowKind::Maslov), coupled_drift(0.05, FlowKind::Mcf));
        assert!(mcf > 10.0 * maslov, "{mcf:e} vs {maslov:e}");
    }
}
