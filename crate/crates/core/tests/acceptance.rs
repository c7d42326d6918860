//! Quantitative acceptance gates. Runs without the libtest harness so that
//! every criterion prints exactly one pass/fail line.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::pair_sum::pair_terms;
use common::{gaussian, ground_state_1d_wide, shoot_ground_state};
use nlslab::cli::dispatch;
use nlslab::convergence::fit_to_ground_state;
use nlslab::diagnostics::{conserved_quantities, gn_check, virial_check};
use nlslab::evolve::{estimate_blowup_from, run_evolution, run_evolution_tracked, EvolutionConfig, Stepper};
use nlslab::field::{grad_sq_norm, l2_distance, ComplexField, Grid, C64};
use nlslab::ground_state::{
    closed_form_1d, ground_state_1d_closed_form, pohozaev_report, solve_ground_state, GroundState,
};
use nlslab::io::band_limited_noise;
use nlslab::morawetz::{
    build_weights, interaction_morawetz, localized_energy, localized_momentum, morawetz_terms,
    optimal_galilean_shift, MorawetzWeights,
};
use nlslab::symmetry::{apply_group, galilean_boost, inverse, pseudoconformal, GroupElement};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

/// Accumulates named comparisons against pinned tolerances.
#[derive(Default)]
struct Gate {
    pass: bool,
    parts: Vec<String>,
}

impl Gate {
    fn new() -> Self {
        Self { pass: true, parts: Vec::new() }
    }

    fn below(&mut self, name: &str, value: f64, tol: f64) {
        let ok = value < tol;
        self.pass &= ok;
        self.parts.push(format!("{name} {value:.3e} < {tol:.0e}{}", if ok { "" } else { " (no)" }));
    }

    fn holds(&mut self, name: &str, ok: bool) {
        self.pass &= ok;
        self.parts.push(format!("{name} {}", if ok { "yes" } else { "no" }));
    }

    fn done(self) -> Verdict {
        Verdict { pass: self.pass, detail: self.parts.join("; ") }
    }
}

fn gs_1d() -> (GroundState, f64) {
    let start = Instant::now();
    let q = solve_ground_state(Grid::new(1, 512, 12.0).unwrap(), 1e-10).unwrap();
    (q, start.elapsed().as_secs_f64())
}

fn gs_2d() -> (GroundState, f64) {
    let start = Instant::now();
    let q = solve_ground_state(Grid::new(2, 128, 12.8).unwrap(), 1e-8).unwrap();
    (q, start.elapsed().as_secs_f64())
}

fn criterion_1() -> Verdict {
    let mut gate = Gate::new();
    let (q, t1) = gs_1d();
    let g = *q.grid();
    let err = q
        .field
        .samples()
        .iter()
        .enumerate()
        .map(|(i, z)| (z - C64::new(closed_form_1d(g.coord(i)), 0.0)).norm())
        .fold(0.0, f64::max);
    gate.below("1D max error", err, 1e-8);
    let exact = 3f64.sqrt() * std::f64::consts::PI / 2.0;
    gate.below("1D mass error", (q.mass - exact).abs(), 1e-6);
    let (q2, t2) = gs_2d();
    let oracle = shoot_ground_state(2, 1.5 * 12.8);
    gate.below("2D mass rel error", (q2.mass - oracle.mass).abs() / oracle.mass, 1e-4);
    gate.below("solve time s", t1 + t2, 30.0);
    gate.done()
}

fn criterion_2() -> Verdict {
    let mut gate = Gate::new();
    for (q, d) in [(gs_1d().0, 1.0), (gs_2d().0, 2.0)] {
        let rep = pohozaev_report(&q);
        gate.below(&format!("d={d} |grad ratio - d/2|"), (rep.grad_ratio - d / 2.0).abs(), 1e-5);
        gate.below(&format!("d={d} |E|/grad"), rep.energy.abs() / q.grad_sq, 1e-6);
    }
    gate.done()
}

struct Drifts {
    mass: f64,
    energy: f64,
    momentum: f64,
}

fn drifts(u0: &ComplexField, mu: f64, t_end: f64) -> Drifts {
    // Strang's energy error is O(dt^2); 1e-4 keeps it under the gate
    let cfg = EvolutionConfig { mu, t_end, dt0: 1e-4, record_stride: 500, ..Default::default() };
    let traj = run_evolution(u0, &cfg).unwrap();
    assert!((traj.final_state.time() - t_end).abs() < 1e-9, "run stopped at {}", traj.final_state.time());
    let c0 = conserved_quantities(u0, mu);
    let escale = c0.energy.abs().max(0.5 * grad_sq_norm(u0));
    let mut out = Drifts { mass: 0.0, energy: 0.0, momentum: 0.0 };
    for r in &traj.records {
        out.mass = out.mass.max((r.mass - c0.mass).abs() / c0.mass);
        out.energy = out.energy.max((r.energy - c0.energy).abs() / escale);
        for (a, b) in r.momentum.iter().zip(&c0.momentum) {
            out.momentum = out.momentum.max((a - b).abs());
        }
    }
    out
}

fn criterion_3() -> Verdict {
    let mut gate = Gate::new();
    let q = ground_state_1d_wide();
    let g1 = Grid::new(1, 256, 16.0).unwrap();
    let g2 = Grid::new(2, 128, 16.0).unwrap();
    let cases = [
        ("soliton", q.field.clone()),
        ("gaussian 1D", ComplexField::from_real_fn(g1, 0.0, |x| gaussian(x, 1.0))),
        ("gaussian 2D", ComplexField::from_real_fn(g2, 0.0, |x| gaussian(x, 1.0))),
    ];
    for (name, u0) in cases {
        let d = drifts(&u0, -1.0, 5.0);
        gate.below(&format!("{name} mass"), d.mass, 1e-10);
        gate.below(&format!("{name} energy"), d.energy, 1e-8);
        gate.below(&format!("{name} momentum"), d.momentum, 1e-10);
    }
    gate.done()
}

fn criterion_4() -> Verdict {
    let mut gate = Gate::new();
    let q = ground_state_1d_wide();
    let u = Stepper::new(*q.grid(), -1.0).advance(&q.field, 1.0, 1e-4);
    let expect = q.field.scaled(C64::from_polar(1.0, 1.0));
    gate.below("||u(1) - e^{i}Q||", l2_distance(&u, &expect).unwrap(), 1e-6);
    gate.done()
}

fn criterion_5() -> Verdict {
    let mut gate = Gate::new();
    let g = Grid::new(1, 512, 16.0).unwrap();
    let u0 = ComplexField::from_real_fn(g, 0.0, |x| 1.5 * gaussian(x, 1.0));
    // a huge rate constant pins dt = dt0, so records are uniform in time
    let cfg = EvolutionConfig { dt0: 1e-4, t_end: 0.2, record_stride: 100, rate_constant: 1e9, ..Default::default() };
    let traj = run_evolution(&u0, &cfg).unwrap();
    let rep = virial_check(&traj).unwrap();
    gate.holds("focusing energy negative", rep.target < 0.0);
    gate.below("focusing max rel error", rep.max_rel_error, 1e-2);
    let traj = run_evolution(&u0, &EvolutionConfig { mu: 1.0, ..cfg }).unwrap();
    let rep = virial_check(&traj).unwrap();
    gate.below("defocusing max rel error", rep.max_rel_error, 1e-2);
    gate.holds("defocusing second differences positive", rep.second_differences.iter().all(|(_, v)| *v > 0.0));
    gate.done()
}

fn criterion_6() -> Verdict {
    let mut gate = Gate::new();
    let g = Grid::new(1, 512, 16.0).unwrap();
    let u0 = ComplexField::from_fn(g, 0.0, |x| C64::from_polar(gaussian(&[x[0] - 0.4], 1.0), 0.3 * x[0]));
    let mut st = Stepper::new(g, -1.0);
    let dt = 1e-4;

    let (lambda, t) = (1.25, 0.4);
    let s = GroupElement::new(lambda, &[0.0], &[0.0], 0.0).unwrap();
    let a = st.advance(&apply_group(&s, &u0).unwrap(), t, dt);
    let b = apply_group(&s, &st.advance(&u0, lambda * lambda * t, dt)).unwrap();
    gate.below("scaling discrepancy", l2_distance(&a, &b).unwrap(), 1e-6);

    let xi = [0.5];
    let a = st.advance(&galilean_boost(&u0, &xi, 0.0).unwrap(), t, dt);
    let b = galilean_boost(&st.advance(&u0, t, dt), &xi, t).unwrap();
    gate.below("Galilean discrepancy", l2_distance(&a, &b).unwrap(), 1e-6);

    // pseudoconformal image of the soliton collapses at T = 0 with width |t|
    let gp = Grid::new(1, 4096, 16.0).unwrap();
    let q = ground_state_1d_closed_form(gp).unwrap();
    let t0 = -0.25;
    let soliton = q.field.scaled(C64::from_polar(1.0, 1.0 / t0)).with_time(1.0 / t0);
    let v0 = pseudoconformal(&soliton, t0).unwrap();
    // the threshold blowup is unstable and amplifies step errors, so dt
    // shrinks with the width and the fit stops at a threefold compression
    let cfg = EvolutionConfig {
        t_end: 0.17,
        dt0: 1e-4,
        rate_constant: 3e-3,
        record_stride: 200,
        blowup_gradient_factor: 1e3,
        ..Default::default()
    };
    let traj = run_evolution_tracked(&v0, &cfg, Some(&q)).unwrap();
    let widths: Vec<f64> = traj.records.iter().map(|r| r.lambda.unwrap()).collect();
    let fit = estimate_blowup_from(&traj.times, &widths).unwrap();
    gate.below("|exponent - 1|", (fit.rate_exponent - 1.0).abs(), 0.05);
    gate.parts.push(format!("T fit {:.2e}, {} samples", fit.t_est, fit.samples));
    gate.done()
}

fn criterion_7() -> Verdict {
    let mut gate = Gate::new();
    for (d, n, radii) in [(1, 512, &[8.0, 16.0, 32.0][..]), (2, 512, &[8.0, 16.0, 32.0]), (3, 256, &[8.0, 16.0])] {
        let g = Grid::new(d, n, n as f64 / 8.0).unwrap();
        let mut maxima = Vec::new();
        for &k in radii {
            match build_weights(k * g.spacing(), &g) {
                Ok(w) => maxima.push(w.max_lap_psi()),
                Err(e) => {
                    gate.holds(&format!("d={d} R={k}h invariants ({e})"), false);
                }
            }
        }
        let worst = maxima
            .windows(2)
            .map(|p| (p[0] / p[1] / 4.0 - 1.0).abs())
            .fold(0.0, f64::max);
        gate.below(&format!("d={d} doubling deviation from 4"), worst, 0.2);
    }
    gate.done()
}

fn chirped(g: Grid) -> ComplexField {
    ComplexField::from_fn(g, 0.0, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let ph = 0.15 * r2 + 0.7 * x[0] - 0.4 * x[1];
        C64::from_polar(1.2 * gaussian(&[x[0] - 0.5, x[1]], 1.2), ph)
    })
}

fn criterion_8() -> Verdict {
    let mut gate = Gate::new();
    // n = 64 is the smallest lattice with 4h <= R <= L/8
    let g = Grid::new(2, 64, 16.0).unwrap();
    let w = build_weights(2.0, &g).unwrap();
    let f = chirped(g);
    let oracle = pair_terms(&f, &w, -1.0).functional;
    let m = interaction_morawetz(&f, &w, None).unwrap();
    gate.below("rel error vs pair sum", (m - oracle).abs() / oracle.abs(), 1e-10);
    let real = ComplexField::from_real_fn(g, 0.0, |x| gaussian(x, 1.0) * (1.0 + 0.2 * x[0]));
    gate.below("|M(real)|", interaction_morawetz(&real, &w, None).unwrap().abs(), 1e-12);
    let mc = interaction_morawetz(&f.conj(), &w, None).unwrap();
    gate.below("|M(conj f) + M(f)|/|M|", (mc + m).abs() / m.abs(), 1e-12);
    gate.done()
}

fn fd_derivative(u0: &ComplexField, w: &MorawetzWeights, delta: f64) -> f64 {
    let mut st = Stepper::new(*u0.grid(), -1.0);
    let (mut fwd, mut bwd) = (u0.clone(), u0.clone());
    for _ in 0..(delta / 1e-3).round() as usize {
        fwd = st.step(&fwd, 1e-3);
        bwd = st.step(&bwd, -1e-3);
    }
    (interaction_morawetz(&fwd, w, None).unwrap() - interaction_morawetz(&bwd, w, None).unwrap()) / (2.0 * delta)
}

fn criterion_9() -> Verdict {
    let mut gate = Gate::new();
    let g = Grid::new(2, 64, 8.0).unwrap();
    let w = build_weights(1.0, &g).unwrap();
    let u0 = ComplexField::from_fn(g, 0.0, |x| C64::from_polar(1.5 * gaussian(x, 1.0), 0.6 * x[0] - 0.3 * x[1]));
    let terms = morawetz_terms(&u0, &w, -1.0).unwrap();
    let fd: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|&d| fd_derivative(&u0, &w, d)).collect();
    gate.below("|dM/dt - rhs| / scale", (fd[2] - terms.total()).abs() / terms.scale(), 1e-2);
    let order = ((fd[0] - fd[1]) / (fd[1] - fd[2])).log2();
    gate.below("|order - 2|", (order - 2.0).abs(), 0.2);
    gate.done()
}

fn criterion_10() -> Verdict {
    let mut gate = Gate::new();
    let g = Grid::new(2, 64, 8.0).unwrap();
    let w = build_weights(1.0, &g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut err, mut resid): (f64, f64) = (0.0, 0.0);
    for _ in 0..8 {
        let k0 = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
        let s = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let f = ComplexField::from_fn(g, 0.0, |x| {
            C64::from_polar(gaussian(x, 1.2) * (1.0 + 0.2 * x[1]), k0[0] * x[0] + k0[1] * x[1])
        });
        let xi = optimal_galilean_shift(&f, &s, &w).unwrap();
        err = err.max((xi[0] + k0[0]).abs().max((xi[1] + k0[1]).abs()));
        let p = localized_momentum(&f, &s, w.radius(), &xi).unwrap();
        resid = resid.max(p.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    gate.below("|xi + k0|", err, 1e-10);
    gate.below("localized momentum", resid, 1e-12);
    gate.done()
}

fn criterion_11() -> Verdict {
    let mut gate = Gate::new();
    let g = Grid::new(2, 64, 8.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut least = f64::INFINITY;
    for i in 0..60 {
        let f = if i % 2 == 0 {
            let (a, w, k) = (rng.random_range(0.1..3.0), rng.random_range(0.3..2.0), rng.random_range(-2.0..2.0));
            ComplexField::from_fn(g, 0.0, |x| C64::from_polar(a * gaussian(x, w), k * x[0]))
        } else {
            band_limited_noise(g, i).scaled(C64::new(rng.random_range(0.5..4.0), 0.0))
        };
        let c = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let xi = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        least = least.min(localized_energy(&f, &c, rng.random_range(0.5..1.5), &xi, 1.0).unwrap());
    }
    gate.holds(&format!("defocusing minimum {least:.3e} >= 0"), least >= 0.0);
    let q = ground_state_1d_wide();
    let e = localized_energy(&q.field, &[0.0], 8.0, &[0.0], -1.0).unwrap();
    gate.below("|E_loc(Q)|/grad", e.abs() / grad_sq_norm(&q.field), 1e-4);
    gate.done()
}

fn criterion_12() -> Verdict {
    let mut gate = Gate::new();
    let q = ground_state_1d_wide();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let element = |rng: &mut ChaCha8Rng| {
        GroupElement::new(
            rng.random_range(0.8..1.25),
            &[rng.random_range(-1.0..1.0)],
            &[rng.random_range(-0.5..0.5)],
            rng.random_range(-3.0..3.0),
        )
        .unwrap()
    };
    let (mut dist, mut params): (f64, f64) = (0.0, 0.0);
    for _ in 0..4 {
        let g = element(&mut rng);
        let fit = fit_to_ground_state(&apply_group(&inverse(&g), &q.field).unwrap(), q).unwrap();
        dist = dist.max(fit.distance);
        params = params.max(fit.g.max_param_diff(&g));
    }
    gate.below("round-trip distance", dist, 1e-8);
    gate.below("round-trip parameters", params, 1e-6);
    let f = q.field.map_with_point(|x, z| z * C64::from_polar(1.0 + 0.05 * (-x[0] * x[0]).exp(), 0.3 * x[0]));
    let base = fit_to_ground_state(&f, q).unwrap().distance;
    let mut spread: f64 = 0.0;
    for _ in 0..3 {
        let h = element(&mut rng);
        let moved = fit_to_ground_state(&apply_group(&h, &f).unwrap(), q).unwrap().distance;
        spread = spread.max((moved - base).abs());
    }
    gate.below("orbit distance invariance", spread, 1e-8);
    gate.done()
}

fn random_battery_field(rng: &mut ChaCha8Rng, g: Grid, seed: u64) -> ComplexField {
    let d = g.dim();
    if seed % 4 == 3 {
        return band_limited_noise(g, seed).scaled(C64::new(rng.random_range(0.2..5.0), 0.0));
    }
    let bumps: Vec<(f64, f64, Vec<f64>, Vec<f64>)> = (0..rng.random_range(1..4))
        .map(|_| {
            (
                rng.random_range(0.2..3.0),
                rng.random_range(0.4..2.0),
                (0..d).map(|_| rng.random_range(-2.0..2.0)).collect(),
                (0..d).map(|_| rng.random_range(-2.0..2.0)).collect(),
            )
        })
        .collect();
    ComplexField::from_fn(g, 0.0, |x| {
        bumps
            .iter()
            .map(|(a, w, c, k)| {
                let shifted: Vec<f64> = x.iter().zip(c).map(|(v, c)| v - c).collect();
                let ph: f64 = x.iter().zip(k).map(|(v, k)| v * k).sum();
                C64::from_polar(a * gaussian(&shifted, *w), ph)
            })
            .sum()
    })
}

fn criterion_13() -> Verdict {
    let mut gate = Gate::new();
    let q1 = gs_1d().0;
    let q2 = gs_2d().0;
    let grids = [Grid::new(1, 512, 16.0).unwrap(), Grid::new(2, 64, 10.0).unwrap()];
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for i in 0..100u64 {
        let (g, qm) = if i % 2 == 0 { (grids[0], q1.mass) } else { (grids[1], q2.mass) };
        let f = random_battery_field(&mut rng, g, i);
        worst = worst.max(gn_check(&f, qm).unwrap().ratio);
    }
    gate.below("battery max ratio - 1", worst - 1.0, 1e-5);
    for q in [&q1, &q2] {
        let r = gn_check(&q.field, q.mass).unwrap().ratio;
        gate.below(&format!("d={} |ratio(Q) - 1|", q.grid().dim()), (r - 1.0).abs(), 1e-5);
    }
    gate.done()
}

fn criterion_14() -> Verdict {
    let mut gate = Gate::new();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("demo.toml");
    fs::write(
        &cfg,
        "dimension = 1\nn = 256\nL = 16.0\nmu = -1\npreset = \"perturbed_soliton\"\n\
         sample_times = [0.0, 0.25, 0.5]\n[preset_params]\nseed = 7\nperturbation = 0.02\n\
         [evolution]\nt_end = 0.5\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let code = dispatch([
            "nlslab",
            "converge-demo",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        gate.holds(&format!("run {run} exit 0"), code == 0);
        outputs.push(fs::read(out.join("convergence.csv")).unwrap_or_default());
    }
    gate.holds("non-empty", !outputs[0].is_empty());
    gate.holds("byte-identical", outputs[0] == outputs[1]);
    gate.done()
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 14] = [
        ("ground-state certification", criterion_1),
        ("Pohozaev and zero energy", criterion_2),
        ("conservation to t = 5", criterion_3),
        ("soliton persistence", criterion_4),
        ("virial identity", criterion_5),
        ("symmetry covariance", criterion_6),
        ("Morawetz weights", criterion_7),
        ("Morawetz functional", criterion_8),
        ("time-derivative identity", criterion_9),
        ("Galilean zeroing", criterion_10),
        ("localized energy", criterion_11),
        ("fit recovery", criterion_12),
        ("Gagliardo-Nirenberg", criterion_13),
        ("determinism", criterion_14),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict { pass: false, detail: format!("panicked: {msg}") }
        });
        if !verdict.pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {} ({name}, {:.1} s): {}",
            if verdict.pass { "PASS" } else { "FAIL" },
            k + 1,
            start.elapsed().as_secs_f64(),
            verdict.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
