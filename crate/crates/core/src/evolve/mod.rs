//! Time integration of `u_t = iΔu - iμ|u|^{4/d}u` by Strang splitting, with
//! diagnostics recording, modulation tracking and blowup estimation.

mod blowup;
mod modulation;

pub use blowup::{estimate_blowup, estimate_blowup_from, BlowupReport};
pub(crate) use modulation::moment_estimate;
pub use modulation::{mean_frequency, track_modulation};

use log::{debug, info};

use crate::diagnostics::{self, DiagnosticRecord};
use crate::error::{Error, Result};
use crate::field::{fft_nd, grad_sq_norm, ComplexField, FftDirection, Grid, Spectrum, C64};
use crate::ground_state::GroundState;

/// Smallest admissible adaptive step.
pub const MIN_STEP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    /// `-1` focusing, `+1` defocusing.
    pub mu: f64,
    pub dt0: f64,
    /// Duration of the run, measured from the time stamp of the data.
    pub t_end: f64,
    pub cfl_safety: f64,
    pub blowup_gradient_factor: f64,
    pub record_stride: usize,
    /// `c` in `dt = cfl_safety * min(dt0, c / ||u||_∞^{4/d})`.
    pub rate_constant: f64,
    /// Top-octave mass fraction that stops a run as blown up.
    pub nyquist_fraction: f64,
    pub keep_snapshots: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            mu: -1.0,
            dt0: 5e-4,
            t_end: 1.0,
            cfl_safety: 1.0,
            blowup_gradient_factor: 20.0,
            record_stride: 20,
            rate_constant: 0.1,
            nyquist_fraction: 0.1,
            keep_snapshots: false,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::Config(format!("evolution.{key}: {msg}")));
        if self.mu != 1.0 && self.mu != -1.0 {
            return bad("mu", format!("must be -1 or +1, got {}", self.mu));
        }
        if !(self.dt0 > 0.0 && self.dt0.is_finite()) {
            return bad("dt0", format!("must be positive, got {}", self.dt0));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end", format!("must be positive, got {}", self.t_end));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad("cfl_safety", format!("must lie in (0, 1], got {}", self.cfl_safety));
        }
        if !(self.blowup_gradient_factor > 1.0) {
            return bad(
                "blowup_gradient_factor",
                format!("must exceed 1, got {}", self.blowup_gradient_factor),
            );
        }
        if self.record_stride == 0 {
            return bad("record_stride", "must be at least 1".into());
        }
        if !(self.rate_constant > 0.0 && self.rate_constant.is_finite()) {
            return bad("rate_constant", format!("must be positive, got {}", self.rate_constant));
        }
        if !(self.nyquist_fraction > 0.0 && self.nyquist_fraction < 1.0) {
            return bad(
                "nyquist_fraction",
                format!("must lie in (0, 1), got {}", self.nyquist_fraction),
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    HorizonReached,
    BlowupDetected,
    StepUnderflow,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::HorizonReached => "horizon_reached",
            Termination::BlowupDetected => "blowup_detected",
            Termination::StepUnderflow => "step_underflow",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dim: usize,
    pub mu: f64,
    pub times: Vec<f64>,
    /// Fields at `times`; empty unless snapshots were requested.
    pub snapshots: Vec<ComplexField>,
    pub records: Vec<DiagnosticRecord>,
    pub termination: Termination,
    pub final_state: ComplexField,
    pub steps: usize,
    /// Fields at the requested sample times reached before termination.
    pub samples: Vec<ComplexField>,
}

/// Reusable split-step propagator for one grid.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid,
    mu: f64,
    k2: Vec<f64>,
    cached_dt: f64,
    kinetic: Vec<C64>,
}

impl Stepper {
    /// `mu = 0` switches the nonlinearity off.
    pub fn new(grid: Grid, mu: f64) -> Self {
        let d = grid.dim();
        let k2 = (0..grid.len())
            .map(|i| grid.wave_vector(i)[..d].iter().map(|k| k * k).sum())
            .collect();
        Self { grid, mu, k2, cached_dt: f64::NAN, kinetic: Vec::new() }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn nonlinear_half(&self, u: &mut [C64], dt: f64) {
        if self.mu == 0.0 {
            return;
        }
        let d = self.grid.dim();
        let c = -self.mu * 0.5 * dt;
        for z in u.iter_mut() {
            let r2 = z.norm_sqr();
            let rate = match d {
                1 => r2 * r2,
                2 => r2,
                _ => r2.powf(2.0 / 3.0),
            };
            *z *= C64::from_polar(1.0, c * rate);
        }
    }

    /// One Strang step applied in place to raw samples.
    pub fn step_samples(&mut self, u: &mut [C64], dt: f64) {
        if dt != self.cached_dt {
            self.kinetic = self.k2.iter().map(|k2| C64::from_polar(1.0, -k2 * dt)).collect();
            self.cached_dt = dt;
        }
        let (n, d) = (self.grid.n(), self.grid.dim());
        self.nonlinear_half(u, dt);
        fft_nd(u, n, d, FftDirection::Forward);
        for (z, m) in u.iter_mut().zip(&self.kinetic) {
            *z *= m;
        }
        fft_nd(u, n, d, FftDirection::Inverse);
        self.nonlinear_half(u, dt);
    }

    pub fn step(&mut self, f: &ComplexField, dt: f64) -> ComplexField {
        let mut s = f.samples().to_vec();
        self.step_samples(&mut s, dt);
        ComplexField::from_raw(self.grid, s, f.time() + dt)
    }

    /// Advances by `duration` with equal steps no longer than `dt_max`.
    pub fn advance(&mut self, f: &ComplexField, duration: f64, dt_max: f64) -> ComplexField {
        if duration <= 0.0 {
            return f.clone();
        }
        let steps = (duration / dt_max).ceil().max(1.0) as usize;
        let dt = duration / steps as f64;
        let mut s = f.samples().to_vec();
        for _ in 0..steps {
            self.step_samples(&mut s, dt);
        }
        ComplexField::from_raw(self.grid, s, f.time() + duration)
    }
}

/// One second-order split step; `mu = 0` gives the free flow.
pub fn strang_step(f: &ComplexField, dt: f64, mu: f64) -> Result<ComplexField> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Argument(format!("time step must be positive, got {dt}")));
    }
    Ok(Stepper::new(*f.grid(), mu).step(f, dt))
}

/// Fraction of the spectral mass with some `|k_a|` above half the Nyquist
/// wavenumber.
pub fn top_octave_fraction(f: &ComplexField) -> f64 {
    let grid = *f.grid();
    let spec = Spectrum::of(f);
    let quarter = grid.n() / 4;
    let (mut top, mut total) = (0.0, 0.0);
    for (i, c) in spec.coeffs().iter().enumerate() {
        let idx = grid.multi_index(i);
        let w = c.norm_sqr();
        total += w;
        if (0..grid.dim()).any(|a| grid.mode(idx[a]).unsigned_abs() as usize > quarter) {
            top += w;
        }
    }
    if total > 0.0 {
        top / total
    } else {
        0.0
    }
}

pub fn run_evolution(u0: &ComplexField, cfg: &EvolutionConfig) -> Result<Trajectory> {
    run_evolution_tracked(u0, cfg, None)
}

pub fn run_evolution_tracked(
    u0: &ComplexField,
    cfg: &EvolutionConfig,
    q: Option<&GroundState>,
) -> Result<Trajectory> {
    run_evolution_sampled(u0, cfg, q, &[])
}

struct Recorder<'a> {
    mu: f64,
    center: Vec<f64>,
    q: Option<&'a GroundState>,
    integral: f64,
    last: Option<(f64, f64)>,
}

impl Recorder<'_> {
    fn record(&mut self, f: &ComplexField) -> DiagnosticRecord {
        let t = f.time();
        let c = diagnostics::conserved_quantities(f, self.mu);
        let pot = diagnostics::potential_norm(f);
        if let Some((t_prev, p_prev)) = self.last {
            self.integral += 0.5 * (t - t_prev) * (pot + p_prev);
        }
        self.last = Some((t, pot));
        let tracked = self.q.and_then(|q| track_modulation(f, q).ok());
        DiagnosticRecord {
            t,
            mass: c.mass,
            energy: c.energy,
            momentum: c.momentum,
            variance: diagnostics::variance(f, &self.center).value,
            grad_sq: grad_sq_norm(f),
            linf: f.max_abs(),
            lambda: tracked.map(|g| g.lambda),
            x_center: tracked.map(|g| g.x0().to_vec()),
            xi: tracked.map(|g| g.xi0().to_vec()),
            gamma: tracked.map(|g| g.gamma),
            spacetime_norm_partial: diagnostics::spacetime_root(self.integral, f.grid().dim()),
            morawetz_value: None,
            fit_distance: None,
        }
    }
}

/// Full driver: records every `record_stride` steps and additionally lands
/// exactly on each of `sample_times` (absolute times), storing the fields.
pub fn run_evolution_sampled(
    u0: &ComplexField,
    cfg: &EvolutionConfig,
    q: Option<&GroundState>,
    sample_times: &[f64],
) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = *u0.grid();
    let d = grid.dim();
    let t0 = u0.time();
    let t_stop = t0 + cfg.t_end;
    let mut pending: Vec<f64> = sample_times.iter().copied().filter(|&s| s >= t0 && s <= t_stop).collect();
    pending.sort_by(f64::total_cmp);
    pending.reverse();

    let mut rec = Recorder {
        mu: cfg.mu,
        center: u0.centroid(),
        q,
        integral: 0.0,
        last: None,
    };
    let grad0 = grad_sq_norm(u0).sqrt();
    let grad_limit = cfg.blowup_gradient_factor * grad0;
    let check_every = cfg.record_stride.min(10);

    let mut traj = Trajectory {
        dim: d,
        mu: cfg.mu,
        times: vec![t0],
        snapshots: Vec::new(),
        records: vec![rec.record(u0)],
        termination: Termination::HorizonReached,
        final_state: u0.clone(),
        steps: 0,
        samples: Vec::new(),
    };
    if cfg.keep_snapshots {
        traj.snapshots.push(u0.clone());
    }
    while pending.last().is_some_and(|&s| s <= t0) {
        pending.pop();
        traj.samples.push(u0.clone());
    }

    let mut stepper = Stepper::new(grid, cfg.mu);
    let mut u = u0.samples().to_vec();
    let mut t = t0;
    let mut steps = 0usize;
    let mut last_recorded = 0usize;
    let eps = 1e-12 * t_stop.abs().max(1.0);
    let power = 2.0 / d as f64;

    while t_stop - t > eps {
        let linf2 = u.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        let rate = linf2.powf(power);
        let mut dt = cfg.dt0;
        if rate > 0.0 {
            dt = dt.min(cfg.rate_constant / rate);
        }
        dt *= cfg.cfl_safety;
        if dt < MIN_STEP {
            info!("step underflow at t = {t}: dt = {dt:e}");
            traj.termination = Termination::StepUnderflow;
            break;
        }
        let mut target = t_stop;
        if let Some(&s) = pending.last() {
            target = target.min(s);
        }
        if target - t <= dt * (1.0 + 1e-9) {
            dt = target - t;
            t = target;
        } else {
            t += dt;
        }
        stepper.step_samples(&mut u, dt);
        steps += 1;

        while pending.last().is_some_and(|&s| s <= t + eps) {
            pending.pop();
            traj.samples.push(ComplexField::from_raw(grid, u.clone(), t));
        }

        let at_end = t_stop - t <= eps;
        let record_now = steps % cfg.record_stride == 0 || at_end;
        if record_now || steps % check_every == 0 {
            let f = ComplexField::from_raw(grid, u.clone(), t);
            let grad = grad_sq_norm(&f).sqrt();
            let occupancy = top_octave_fraction(&f);
            let blown = grad > grad_limit || occupancy > cfg.nyquist_fraction || !f.is_finite();
            if record_now || blown {
                traj.times.push(t);
                traj.records.push(rec.record(&f));
                if cfg.keep_snapshots {
                    traj.snapshots.push(f.clone());
                }
                last_recorded = steps;
            }
            if blown {
                debug!("blowup flagged at t = {t}: |grad u| = {grad:.3e}, top-octave fraction {occupancy:.3e}");
                traj.termination = Termination::BlowupDetected;
                break;
            }
        }
    }
    if last_recorded != steps && traj.termination != Termination::HorizonReached {
        let f = ComplexField::from_raw(grid, u.clone(), t);
        traj.times.push(t);
        traj.records.push(rec.record(&f));
        if cfg.keep_snapshots {
            traj.snapshots.push(f);
        }
    }
    traj.steps = steps;
    traj.final_state = ComplexField::from_raw(grid, u, t);
    Ok(traj)
}
