//! Fitting symmetry parameters that bring a field closest to the ground
//! state, along single snapshots and along evolutions.

use log::{debug, info};

use crate::error::{Error, Result};
use crate::evolve::{moment_estimate, run_evolution_sampled, EvolutionConfig};
use crate::field::{inner_product, l2_distance, mass, ComplexField, C64};
use crate::ground_state::GroundState;
use crate::symmetry::{apply_group_unchecked, GroupElement};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub g: GroupElement,
    /// `||g f - Q||_2`.
    pub distance: f64,
    pub iterations: usize,
    /// Whether every search step shrank below [`STEP_TOLERANCE`].
    pub converged: bool,
    /// Largest search step when the search stopped.
    pub final_step: f64,
}

pub const STEP_TOLERANCE: f64 = 1e-10;
const MAX_EVALUATIONS: usize = 40_000;
const SCALE_RANGE: (f64, f64) = (1.0 / 16.0, 16.0);

/// Parameter vector `(λ, x0, ξ0)`; the phase is solved in closed form.
fn element(p: &[f64], d: usize, gamma: f64) -> Result<GroupElement> {
    GroupElement::new(p[0], &p[1..1 + d], &p[1 + d..1 + 2 * d], gamma)
}

struct Objective<'a> {
    f: &'a ComplexField,
    q: &'a ComplexField,
    dim: usize,
    evaluations: usize,
}

impl Objective<'_> {
    /// `(||g f - Q||², γ)` with `γ` optimal for the other parameters.
    fn eval(&mut self, p: &[f64]) -> Result<(f64, f64)> {
        self.evaluations += 1;
        if !(SCALE_RANGE.0..=SCALE_RANGE.1).contains(&p[0]) {
            return Ok((f64::INFINITY, 0.0));
        }
        let a = apply_group_unchecked(&element(p, self.dim, 0.0)?, self.f)?;
        let gamma = -inner_product(&a, self.q)?.arg();
        let rot = C64::from_polar(1.0, gamma);
        let dv = self.q.grid().cell_volume();
        let d2: f64 = a
            .samples()
            .iter()
            .zip(self.q.samples())
            .map(|(x, y)| (x * rot - y).norm_sqr())
            .sum::<f64>()
            * dv;
        Ok((d2, gamma))
    }
}

/// Minimizes `||g f - Q||_2` over the symmetry group.
///
/// Starts from the moment estimate and refines `(λ, x0, ξ0)` by coordinate
/// search: each coordinate is tried at `± step`, improvements are kept, and
/// all steps halve after a sweep without improvement.
pub fn fit_to_ground_state(f: &ComplexField, q: &GroundState) -> Result<FitResult> {
    f.grid().check_same(q.grid())?;
    let ratio = (mass(f) / q.mass).sqrt();
    if !(0.5..=2.0).contains(&ratio) {
        return Err(Error::Precondition(format!(
            "||f||_2 / ||Q||_2 = {ratio:.4} is outside [0.5, 2]"
        )));
    }
    let init = moment_estimate(f, q)?;
    fit_from(f, q, &init)
}

fn fit_from(f: &ComplexField, q: &GroundState, init: &GroupElement) -> Result<FitResult> {
    let d = f.grid().dim();
    let mut obj = Objective { f, q: &q.field, dim: d, evaluations: 0 };
    let mut p: Vec<f64> = std::iter::once(init.lambda.clamp(SCALE_RANGE.0, SCALE_RANGE.1))
        .chain(init.x0().iter().copied())
        .chain(init.xi0().iter().copied())
        .collect();
    let mut steps: Vec<f64> = std::iter::once(0.05 * p[0])
        .chain(std::iter::repeat_n(0.05, 2 * d))
        .collect();
    let (mut best, mut gamma) = obj.eval(&p)?;
    let mut sweeps = 0;
    while steps.iter().cloned().fold(0.0, f64::max) >= STEP_TOLERANCE && obj.evaluations < MAX_EVALUATIONS {
        sweeps += 1;
        let mut improved = false;
        for c in 0..p.len() {
            for sign in [1.0, -1.0] {
                let mut trial = p.clone();
                trial[c] += sign * steps[c];
                let (v, g) = obj.eval(&trial)?;
                if v < best {
                    best = v;
                    gamma = g;
                    p = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    let final_step = steps.iter().cloned().fold(0.0, f64::max);
    let g = element(&p, d, gamma)?;
    let distance = l2_distance(&apply_group_unchecked(&g, f)?, &q.field)?;
    debug!(
        "fit: {} evaluations over {sweeps} sweeps, distance {distance:.3e}, step {final_step:.1e}",
        obj.evaluations
    );
    Ok(FitResult {
        g,
        distance,
        iterations: obj.evaluations,
        converged: final_step < STEP_TOLERANCE,
        final_step,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSample {
    pub t: f64,
    pub fit: FitResult,
    /// Smallest distance over this and all earlier samples.
    pub running_inf: f64,
}

/// Evolves `u0` and fits the state at each of `sample_times`.
pub fn sequential_convergence_experiment(
    u0: &ComplexField,
    cfg: &EvolutionConfig,
    q: &GroundState,
    sample_times: &[f64],
) -> Result<Vec<ConvergenceSample>> {
    if cfg.mu != -1.0 {
        return Err(Error::Precondition("the convergence experiment is focusing (mu = -1)".into()));
    }
    let rel = (mass(u0).sqrt() - q.l2_norm()).abs() / q.l2_norm();
    if rel > 1e-8 {
        return Err(Error::Precondition(format!(
            "initial mass must equal the ground-state mass; ||u0|| differs by {rel:.2e} relative"
        )));
    }
    let traj = run_evolution_sampled(u0, cfg, None, sample_times)?;
    let mut out: Vec<ConvergenceSample> = Vec::with_capacity(traj.samples.len());
    let mut inf = f64::INFINITY;
    for f in &traj.samples {
        let fit = fit_to_ground_state(f, q)?;
        inf = inf.min(fit.distance);
        info!("t = {:.4}: distance {:.6e}, running inf {inf:.6e}", f.time(), fit.distance);
        out.push(ConvergenceSample { t: f.time(), fit, running_inf: inf });
    }
    Ok(out)
}

/// Number of fixed test functions in the weak-pairing battery.
pub const BATTERY_SIZE: usize = 16;

/// Pairings of fitted fields with `Q` and with a fixed battery of smooth,
/// essentially band-limited test functions. A proxy for weak convergence:
/// nothing is asserted about the values.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakLimitReport {
    /// `<g_n f_n, Q> / ||Q||²` per field.
    pub q_pairing: Vec<C64>,
    /// `<g_n f_n, φ_m>` per field and battery function.
    pub battery: Vec<[C64; BATTERY_SIZE]>,
    /// `||g_n f_n - Q||_2` per field.
    pub distance: Vec<f64>,
}

/// Unit-norm Gaussians `e^{ik·x} e^{-|x-c|²/2}` at four centers and four
/// frequencies along the first axis.
fn battery(q: &GroundState) -> Vec<ComplexField> {
    let grid = *q.grid();
    let d = grid.dim();
    let mut out = Vec::with_capacity(BATTERY_SIZE);
    for c in [-1.5, -0.5, 0.5, 1.5] {
        for k in [0.0, 1.0, 2.0, 3.0] {
            let f = ComplexField::from_fn(grid, 0.0, |x| {
                let r2: f64 = (0..d).map(|a| (x[a] - if a == 0 { c } else { 0.0 }).powi(2)).sum();
                C64::from_polar((-0.5 * r2).exp(), k * x[0])
            });
            let norm = mass(&f).sqrt();
            out.push(f.scaled(C64::new(1.0 / norm, 0.0)));
        }
    }
    out
}

pub fn weak_limit_proxy(fields: &[ComplexField], q: &GroundState) -> Result<WeakLimitReport> {
    let tests = battery(q);
    let mut report = WeakLimitReport { q_pairing: Vec::new(), battery: Vec::new(), distance: Vec::new() };
    for f in fields {
        let fit = fit_to_ground_state(f, q)?;
        let a = apply_group_unchecked(&fit.g, f)?;
        report.q_pairing.push(inner_product(&a, &q.field)? / mass(&q.field));
        let mut row = [C64::new(0.0, 0.0); BATTERY_SIZE];
        for (slot, t) in row.iter_mut().zip(&tests) {
            *slot = inner_product(&a, t)?;
        }
        report.battery.push(row);
        report.distance.push(fit.distance);
    }
    Ok(report)
}
