//! Acceptance criteria A1-A12, one line each. Runs as a plain binary
//! (`harness = false`) so the lines are never swallowed by output capture.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trflow::ambient::{einstein_ratio, Ambient, AmbientModel, FlatSpace, KahlerPotential};
use trflow::calibration::{
    calibration_check, excess_exponent, homology_comparison, solve_str_family, xi_j_vs_maslov_residual, AffineFamily,
    AngleField, CalabiYau,
};
use trflow::fields::TrigField;
use trflow::flows::krf::{CoupledFlow, KrfPotential};
use trflow::flows::{Flow, FlowConfig, FlowKind};
use trflow::grid::TorusGrid;
use trflow::immersion::{frame_field, presets, rho_j_hermitian, rho_j_volume, Immersion, NodeFrame, DEFAULT_MARGIN};
use trflow::linalg::from_complex;
use trflow::scenario::{AmbientSpec, Scenario, PRESETS};
use trflow::tensors::{
    integrability_residual, lagrangian_mean_curvature_residual, maslov_identity_residual, plane_wave_response,
    symbol_report, torsion_fields, PlaneWave, WaveDirection,
};
use trflow::variation::{
    first_variation_check, reconstruct_gradient, second_variation_at_critical, ProbeSpec, VariationProbe,
};

/// Residuals at or below this are rounding noise; no order is demanded.
const ORDER_FLOOR: f64 = 1e-9;

type Criterion = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Fine value within tolerance and order at least two, unless at rounding level.
fn converges(coarse: f64, fine: f64, tol: f64) -> bool {
    fine <= tol && (fine <= ORDER_FLOOR || order(coarse, fine) >= 2.0)
}

fn preset(name: &str, resolution: usize) -> Scenario {
    Scenario::preset(name).expect("known preset").at_resolution(resolution)
}

fn with_h_amb(mut s: Scenario, h: f64) -> Scenario {
    if let AmbientSpec::AlmostKahler { h_amb, .. } = &mut s.ambient {
        *h_amb = h;
    }
    s
}

fn imm_and_model(s: &Scenario) -> (Immersion<2, 4>, AmbientModel<4>) {
    (s.immersion().unwrap(), s.model().unwrap())
}

fn random_frame(rng: &mut impl Rng) -> SMatrix<f64, 4, 2> {
    SMatrix::from_fn(|_, _| rng.gen_range(-1.0..1.0))
}

fn random_point(rng: &mut impl Rng, radius: f64) -> SVector<f64, 4> {
    loop {
        let x = SVector::<f64, 4>::from_fn(|_, _| rng.gen_range(-radius..radius));
        if x.norm() < radius {
            return x;
        }
    }
}

/// `U(a, b, c) A` with `U = diag(e^{ia}, e^{ib}) R(c)` unitary and `A` real:
/// a Lagrangian frame whose Lagrangian angle is `a + b + arg det A`.
fn lagrangian_frame(rng: &mut impl Rng) -> SMatrix<f64, 4, 2> {
    let (a, b, c) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
    let real = SMatrix::<f64, 2, 2>::from_fn(|_, _| rng.gen_range(-1.0..1.0)) + SMatrix::identity() * 1.5;
    let rot = SMatrix::<f64, 2, 2>::new(c.cos(), -c.sin(), c.sin(), c.cos()) * real;
    let phases = [Complex64::from_polar(1.0, a), Complex64::from_polar(1.0, b)];
    SMatrix::from_fn(|r, k| {
        let z = SVector::<Complex64, 2>::from_fn(|i, _| phases[i] * rot[(i, k)]);
        from_complex::<2, 4>(&z)[r]
    })
}

fn a1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let models: [AmbientModel<4>; 3] = [
        AmbientModel::flat(),
        AmbientModel::Potential(KahlerPotential::complex_hyperbolic()),
        Scenario::preset("ak-sheared").unwrap().model().unwrap(),
    ];
    let (mut dual, mut above, mut nonpositive, mut lag) = (0.0f64, f64::NEG_INFINITY, 0usize, 0.0f64);
    for k in 0..10_000 {
        let model = &models[k % 3];
        let local = model.local(&random_point(&mut rng, 0.8)).unwrap();
        let frame = random_frame(&mut rng);
        let (a, b) = (rho_j_hermitian(&frame, &local), rho_j_volume(&frame, &local));
        dual = dual.max((a - b).abs());
        above = above.max(a - 1.0);
        nonpositive += usize::from(a <= 0.0);
        if k % 3 == 0 {
            let f = lagrangian_frame(&mut rng);
            lag = lag.max((rho_j_hermitian(&f, &local) - 1.0).abs());
        }
    }
    Outcome::new(
        dual <= 1e-10 && above <= 1e-12 && nonpositive == 0 && lag <= 1e-10,
        format!("dual {dual:.1e}, max ρ_J - 1 {above:.1e}, non-positive {nonpositive}, Lagrangian |ρ_J - 1| {lag:.1e}"),
    )
}

fn a2() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["flat-sheared", "ak-sheared"] {
        let r: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let (imm, model) = imm_and_model(&preset(name, n));
                maslov_identity_residual(&frame_field(&imm, &model, DEFAULT_MARGIN).unwrap())
            })
            .collect();
        pass &= converges(r[0], r[1], 1e-4) && converges(r[1], r[2], 1e-4);
        parts.push(format!("{name} {:.1e} (orders {:.2}, {:.2})", r[1], order(r[0], r[1]), order(r[1], r[2])));
    }
    Outcome::new(pass, parts.join("; "))
}

fn a3() -> Outcome {
    let mut pass = true;
    let mut worst = (String::new(), 0.0, f64::INFINITY, 0.0);
    for name in PRESETS {
        let r: Vec<f64> = [(32, 4e-3), (64, 2e-3), (128, 1e-3)]
            .iter()
            .map(|&(n, h)| {
                let (imm, model) = imm_and_model(&with_h_amb(preset(name, n), h));
                integrability_residual(&imm, &model, DEFAULT_MARGIN).unwrap()
            })
            .collect();
        // bounded at the finest level, order demanded on both halvings
        let ok = converges(r[1], r[2], 1e-3) && (r[1] <= ORDER_FLOOR || order(r[0], r[1]) >= 2.0);
        pass &= ok;
        let o = if r[1] <= ORDER_FLOOR { f64::INFINITY } else { order(r[0], r[1]).min(order(r[1], r[2])) };
        if !ok || r[2] > worst.1 {
            worst = (name.to_string(), r[2], o, r[1]);
        }
    }
    Outcome::new(
        pass,
        format!(
            "{} presets; largest 128² residual {:.1e} ({}, 64² {:.1e}, min order {:.2})",
            PRESETS.len(),
            worst.1,
            worst.0,
            worst.3,
            worst.2
        ),
    )
}

fn a4() -> Outcome {
    let mut kahler = 0.0f64;
    for name in ["flat-sheared", "ch-sheared", "fs-sheared", "krf"] {
        let (imm, model) = imm_and_model(&preset(name, 64));
        let t = torsion_fields(&frame_field(&imm, &model, DEFAULT_MARGIN).unwrap());
        kahler = kahler.max(t.t_j).max(t.s_j);
    }
    let sums: Vec<f64> = [0.08, 0.04, 0.02]
        .iter()
        .map(|&h| {
            let (imm, model) = imm_and_model(&with_h_amb(preset("ak-sheared", 64), h));
            torsion_fields(&frame_field(&imm, &model, DEFAULT_MARGIN).unwrap()).sum
        })
        .collect();
    let ak = converges(sums[0], sums[1], 1e-4) && converges(sums[1], sums[2], 1e-4);
    Outcome::new(
        kahler <= 1e-8 && ak,
        format!(
            "Kähler max(|S_J|, |T_J|) {kahler:.1e}; almost Kähler |S_J + T_J| {:.1e} {:.1e} {:.1e}",
            sums[0], sums[1], sums[2]
        ),
    )
}

fn a5() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["flat-clifford", "ak-clifford"] {
        let r: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let (imm, model) = imm_and_model(&preset(name, n));
                lagrangian_mean_curvature_residual(&frame_field(&imm, &model, DEFAULT_MARGIN).unwrap())
            })
            .collect();
        pass &= converges(r[0], r[1], 1e-4) && converges(r[1], r[2], 1e-4);
        parts.push(format!("{name} {:.1e} (orders {:.2}, {:.2})", r[1], order(r[0], r[1]), order(r[1], r[2])));
    }
    Outcome::new(pass, parts.join("; "))
}

fn a6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ch = KahlerPotential::<4>::complex_hyperbolic();
    let (mut rank_ok, mut eig, mut comp) = (true, 0.0f64, 0.0f64);
    let mut frames = 0;
    while frames < 1000 {
        let x = random_point(&mut rng, 0.8);
        let Ok(frame) = NodeFrame::<2, 4>::new(x, random_frame(&mut rng), ch.local(&x).unwrap(), 1e-3) else {
            continue;
        };
        frames += 1;
        let zeta = SVector::<f64, 2>::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let r = symbol_report(&frame, &zeta).unwrap();
        rank_ok &= r.rank == 1 && r.l_kernel_dim >= 1;
        let scale = r.expected_eigenvalue.max(1.0);
        eig = eig.max((r.eigenvalue - r.expected_eigenvalue).abs() / scale);
        comp = comp.max(r.composition_residual / scale);
    }
    let mut waves = Vec::new();
    let mut waves_ok = true;
    for (name, m) in [("flat-sheared", 12i64), ("ch-sheared", 24)] {
        let (imm, model) = imm_and_model(&preset(name, 16 * m as usize));
        let respond = |direction| {
            plane_wave_response(&imm, &model, &PlaneWave { mode: [m, 0], direction, amplitude: 1e-6 }, DEFAULT_MARGIN)
                .unwrap()
        };
        let normal = respond(WaveDirection::Normal);
        let err = (normal.measured - normal.predicted).abs() / normal.predicted;
        let suppression = [WaveDirection::Tangent, WaveDirection::JOrthogonal]
            .into_iter()
            .map(|d| normal.measured.abs() / respond(d).measured.abs())
            .fold(f64::INFINITY, f64::min);
        waves_ok &= err <= 0.02 && suppression >= 50.0;
        waves.push(format!("{name} m={m}: coefficient {:.2}%, kernel suppressed {suppression:.0}x", 100.0 * err));
    }
    Outcome::new(
        rank_ok && eig <= 1e-12 && comp <= 1e-12 && waves_ok,
        format!("{frames} frames rank 1, eigenvalue {eig:.1e}, σ(L)σ(H_J) {comp:.1e}; {}", waves.join("; ")),
    )
}

fn node_omegas(imm: &Immersion<2, 4>, model: &dyn Ambient<4>) -> Vec<f64> {
    frame_field(imm, model, DEFAULT_MARGIN).unwrap().frames.iter().map(|f| f.omega[(0, 1)]).collect()
}

fn flow_drift(name: &str, kind: FlowKind) -> (f64, f64, f64) {
    let s = preset(name, 64);
    let (imm, model) = imm_and_model(&s);
    let w0 = node_omegas(&imm, &model);
    let mut flow = Flow::new(imm, &model, FlowConfig { kind, ..s.flow });
    flow.run();
    let w1 = node_omegas(flow.immersion(), &model);
    let drift = w0.iter().zip(&w1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let sup = |w: &[f64]| w.iter().map(|v| v.abs()).fold(0.0, f64::max);
    (drift, sup(&w0), sup(&w1))
}

fn a7() -> Outcome {
    let (_, initial, last) = flow_drift("flat-clifford", FlowKind::Maslov);
    let bound = (10.0 * initial).max(1e-13);
    let (maslov, _, _) = flow_drift("flat-sheared", FlowKind::Maslov);
    let (mcf, _, _) = flow_drift("flat-sheared", FlowKind::Mcf);
    Outcome::new(
        last <= bound && mcf >= 10.0 * maslov,
        format!(
            "clifford sup|ω| {initial:.1e} -> {last:.1e} (bound {bound:.0e}); sheared drift MCF {mcf:.1e} vs Maslov {maslov:.1e} ({:.0}x)",
            mcf / maslov
        ),
    )
}

fn a8() -> Outcome {
    let s = preset("ch-sheared", 64);
    let (imm, model) = imm_and_model(&s);
    let einstein = einstein_ratio(&model, &imm.positions()[0]).unwrap();
    let w0 = node_omegas(&imm, &model);
    // ratios are only meaningful away from the zeros of ω_0
    let sup0 = w0.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut flow = Flow::new(imm, &model, s.flow);
    let mut worst = 0.0f64;
    for step in 1..=s.flow.steps {
        flow.step().unwrap();
        if step % 10 == 0 {
            let expected = (einstein.lambda * flow.time()).exp();
            let w = node_omegas(flow.immersion(), &model);
            for (a, b) in w0.iter().zip(&w) {
                if a.abs() > 1e-2 * sup0 {
                    worst = worst.max((b / a - expected).abs() / expected);
                }
            }
        }
    }
    let t_end = flow.time();
    let fs = preset("fs-sheared", 64);
    let (imm, model) = imm_and_model(&fs);
    let mut flow = Flow::new(imm, &model, FlowConfig { diagnostics_every: 10, ..fs.flow });
    let sups: Vec<f64> = flow.run().iter().map(|r| r.sup_omega).collect();
    let monotone = sups.windows(2).all(|w| w[1] > w[0]);
    Outcome::new(
        worst <= 0.02 && einstein.deviation <= 1e-8 && monotone,
        format!(
            "λ = {:.6} (deviation {:.1e}), max |ω_t/ω_0 - e^(λt)| / e^(λt) {worst:.1e} for t <= {t_end:.2}; fs sup|ω| monotone {monotone} ({:.4} -> {:.4})",
            einstein.lambda,
            einstein.deviation,
            sups[0],
            sups[sups.len() - 1]
        ),
    )
}

fn coupled_drift(n: usize, box_nodes: usize, dt: f64, t_end: f64) -> f64 {
    let s = preset("krf", n);
    let AmbientSpec::FlatPlusBump { center, width, .. } = s.ambient else { unreachable!("krf preset has a bump") };
    let center = SVector::from(center);
    let potential = KrfPotential::new(
        s.ambient.potential().unwrap(),
        center,
        s.krf.half_width * width,
        box_nodes,
        s.krf.active_radius * width,
    );
    let steps = (t_end / dt).round() as usize;
    let config = FlowConfig { dt, steps, diagnostics_every: steps, ..s.flow };
    let mut flow = CoupledFlow::new(s.immersion().unwrap(), potential, config).unwrap();
    let run = flow.run(false);
    run.drift.last().map(|d| d.1).unwrap_or(f64::NAN)
}

fn a9() -> Outcome {
    let start = Instant::now();
    let dt = 1e-4;
    let t_end = 50.0 * dt;
    let coarse = coupled_drift(32, 24, dt, t_end);
    let fine = coupled_drift(64, 47, dt / 2.0, t_end);
    let elapsed = start.elapsed().as_secs_f64();
    Outcome::new(
        coarse / fine >= 1.5 && elapsed <= 1800.0,
        format!("D(T) {coarse:.2e} -> {fine:.2e} (factor {:.2}), {elapsed:.0} s", coarse / fine),
    )
}

fn a10() -> Outcome {
    let cy = CalabiYau::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let wrapped = |a: f64| (a + PI).rem_euclid(TAU) - PI;
    let mut routes = 0.0f64;
    for _ in 0..10_000 {
        let f = random_frame(&mut rng);
        if let (Ok(a), Ok(b)) = (cy.angle_intrinsic(&f), cy.angle_polar(&f)) {
            routes = routes.max(wrapped(a - b).abs());
        }
    }

    let mut xi_ok = true;
    let mut xi_parts = Vec::new();
    for name in ["flat-sheared", "graph-torus"] {
        let r: Vec<f64> = [32, 64]
            .iter()
            .map(|&n| {
                let (imm, model) = imm_and_model(&preset(name, n));
                let ff = frame_field(&imm, &model, DEFAULT_MARGIN).unwrap();
                xi_j_vs_maslov_residual(&ff, &AngleField::new(&imm, &cy).unwrap())
            })
            .collect();
        xi_ok &= converges(r[0], r[1], 1e-4);
        xi_parts.push(format!("{name} {:.1e} (order {:.2})", r[1], order(r[0], r[1])));
    }

    let grid = TorusGrid::<2>::uniform(64).unwrap();
    let loops: Vec<[f64; 2]> = [0.0, 0.1, 0.2, 0.4]
        .iter()
        .map(|&delta| AngleField::new(&presets::sheared(grid, 1.0, delta, SVector::zeros()), &cy).unwrap().generator_integrals(&grid))
        .collect();
    let quantized = loops.iter().flatten().map(|v| (v - TAU * (v / TAU).round()).abs()).fold(0.0, f64::max);
    let invariant = loops.iter().all(|l| (0..2).all(|k| (l[k] - loops[0][k]).abs() < 1e-8));

    let local = FlatSpace::default().local(&SVector::<f64, 4>::zeros()).unwrap();
    let (mut violated, mut misclassified, mut equalities) = (0usize, 0usize, [0usize; 2]);
    for k in 0..10_000 {
        let frame = if k % 2 == 0 { random_frame(&mut rng) } else { lagrangian_frame(&mut rng) };
        let theta = match k % 4 {
            0 | 1 => -cy.evaluate(&frame).arg(),
            _ => rng.gen_range(-PI..PI),
        };
        let c = calibration_check(&frame, &local, &cy, theta, 1e-10);
        violated += usize::from(c.violated);
        misclassified += usize::from(c.first_equality != c.first_predicted || c.second_equality != c.second_predicted);
        equalities[0] += usize::from(c.first_equality);
        equalities[1] += usize::from(c.second_equality);
    }
    Outcome::new(
        routes <= 1e-10 && xi_ok && quantized <= 1e-8 && invariant && violated == 0 && misclassified == 0,
        format!(
            "routes {routes:.1e}; ξ_J + dθ: {}; loops {:?} off 2πZ by {quantized:.1e}, shear invariant {invariant}; \
             10^4 frames: {violated} violations, {misclassified} misclassified, equalities {equalities:?}",
            xi_parts.join(", "),
            loops[0].map(|v| (v / TAU).round() as i64)
        ),
    )
}

fn a11() -> Outcome {
    let mut first = 0.0f64;
    for name in ["flat-sheared", "ch-sheared", "fs-sheared"] {
        // probes whose derivative nearly cancels need the finer grid for a
        // relative residual of 1e-5
        let s = preset(name, 128);
        let (imm, model) = imm_and_model(&s);
        let grid = s.grid().unwrap();
        for seed in 0..10 {
            let probe = ProbeSpec::Random { seed, max_mode: 2, amplitude: 0.1 }.build(&grid).unwrap();
            first = first.max(first_variation_check(&imm, &model, &probe, 1e-4, DEFAULT_MARGIN).unwrap().residual);
        }
    }

    let mut gradient = 0.0f64;
    for name in ["flat-sheared", "ch-sheared"] {
        let (imm, model) = imm_and_model(&preset(name, 64));
        for node in [0, 700, 2100] {
            gradient = gradient.max(reconstruct_gradient(&imm, &model, node, 0.15, 1e-4, DEFAULT_MARGIN).unwrap().relative_error);
        }
    }

    let grid = TorusGrid::<2>::uniform(64).unwrap();
    let straight = presets::straight::<2, 4>(grid);
    let flat_torus = AmbientModel::<4>::flat_torus();
    let sine = VariationProbe::from_fn(&grid, |p| SVector::from([p[0].sin(), 0.0]));
    let sv = second_variation_at_critical(&straight, &flat_torus, &sine, 1e-2, DEFAULT_MARGIN).unwrap();
    let closed_form = (sv.finite_difference - 2.0 * PI * PI).abs() / (2.0 * PI * PI);

    let coarse = TorusGrid::<2>::uniform(32).unwrap();
    let straight = presets::straight::<2, 4>(coarse);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let lowest = (0..50)
        .map(|_| {
            let probe = VariationProbe::from_field(&coarse, &TrigField::random(&mut rng, 3, 0.5));
            second_variation_at_critical(&straight, &flat_torus, &probe, 1e-2, DEFAULT_MARGIN).unwrap().finite_difference
        })
        .fold(f64::INFINITY, f64::min);
    Outcome::new(
        first <= 1e-5 && gradient <= 0.05 && sv.residual <= 1e-4 && closed_form <= 1e-4 && lowest >= -1e-6,
        format!(
            "first variation {first:.1e}; gradient {:.2}%; second variation vs ∫(Div Y)² {:.1e}, vs 2π² {closed_form:.1e}; min of 50 {lowest:.2e}",
            100.0 * gradient,
            sv.residual
        ),
    )
}

fn a12() -> Outcome {
    let mut root_err = 0.0f64;
    for a in [-0.7, 0.1, 0.3, 1.2] {
        let root = solve_str_family(&AffineFamily::diagonal(a), 0.0).unwrap();
        root_err = root_err.max((root.s + a).abs());
    }
    let nilpotent = solve_str_family(&AffineFamily::nilpotent(), 0.4).unwrap().identically_satisfied;

    let grid = TorusGrid::<2>::uniform(48).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let fields: Vec<TrigField<2, 2>> = (0..20).map(|_| TrigField::random_mean_free(&mut rng, 3, 0.05)).collect();
    let cmp = homology_comparison::<2, 4>(grid, &fields, DEFAULT_MARGIN).unwrap();
    let floor = cmp.perturbed.iter().fold(f64::INFINITY, |m, v| m.min(*v)) - TAU * TAU;
    let exponent = excess_exponent::<2, 4>(grid, &fields[0], &[0.01, 0.02, 0.04, 0.08], DEFAULT_MARGIN).unwrap();
    Outcome::new(
        root_err <= 1e-12 && nilpotent && floor >= -1e-8 && (exponent - 2.0).abs() <= 0.1,
        format!(
            "diagonal roots {root_err:.1e}, nilpotent identically {nilpotent}; min Vol_J - 4π² {floor:.2e} over 20; exponent {exponent:.3}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 12] = [
        ("A1", a1),
        ("A2", a2),
        ("A3", a3),
        ("A4", a4),
        ("A5", a5),
        ("A6", a6),
        ("A7", a7),
        ("A8", a8),
        ("A9", a9),
        ("A10", a10),
        ("A11", a11),
        ("A12", a12),
    ];
    let only = std::env::args().skip(1).find(|a| a.starts_with('A'));
    let mut failed = 0;
    for (id, check) in criteria {
        if only.as_deref().is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        failed += usize::from(!outcome.pass);
        println!(
            "{id:<4} {}  {}  [{:.1} s]",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
