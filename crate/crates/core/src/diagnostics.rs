//! Conserved quantities, variance and the virial identity,
//! Gagliardo-Nirenberg ratios and the spacetime scattering norm.

use log::warn;

use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::field::{grad_sq_norm, lp_norm, mass, ComplexField, Spectrum};

/// Per-time summary written as one CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub momentum: Vec<f64>,
    pub variance: f64,
    pub grad_sq: f64,
    pub linf: f64,
    pub lambda: Option<f64>,
    pub x_center: Option<Vec<f64>>,
    pub xi: Option<Vec<f64>>,
    pub gamma: Option<f64>,
    /// Running `L^{2(d+2)/d}_{t,x}` norm from the start of the run.
    pub spacetime_norm_partial: f64,
    pub morawetz_value: Option<f64>,
    pub fit_distance: Option<f64>,
}

impl DiagnosticRecord {
    pub fn dim(&self) -> usize {
        self.momentum.len()
    }

    /// Every float the record carries, optional ones included when present.
    pub fn floats(&self) -> impl Iterator<Item = f64> + '_ {
        [self.t, self.mass, self.energy, self.variance, self.grad_sq, self.linf, self.spacetime_norm_partial]
            .into_iter()
            .chain(self.momentum.iter().copied())
            .chain(self.lambda)
            .chain(self.x_center.iter().flatten().copied())
            .chain(self.xi.iter().flatten().copied())
            .chain(self.gamma)
            .chain(self.morawetz_value)
            .chain(self.fit_distance)
    }

    pub fn is_finite(&self) -> bool {
        self.floats().all(f64::is_finite)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conserved {
    pub mass: f64,
    pub energy: f64,
    pub momentum: Vec<f64>,
}

/// Exponent `2 + 4/d` of the potential term.
pub fn potential_exponent(dim: usize) -> f64 {
    2.0 + 4.0 / dim as f64
}

/// `||f||_{2+4/d}^{2+4/d}`.
pub fn potential_norm(f: &ComplexField) -> f64 {
    let p = potential_exponent(f.grid().dim());
    lp_norm(f, p).expect("exponent above one").powf(p)
}

pub fn energy(f: &ComplexField, mu: f64) -> f64 {
    let d = f.grid().dim() as f64;
    0.5 * grad_sq_norm(f) + mu * d / (2.0 * d + 4.0) * potential_norm(f)
}

/// `Im ∫ ∂_j f conj(f)`, evaluated spectrally.
pub fn momentum(f: &ComplexField) -> Vec<f64> {
    let grid = *f.grid();
    let spec = Spectrum::of(f);
    let nyq = grid.n() / 2;
    let mut p = vec![0.0; grid.dim()];
    for (i, c) in spec.coeffs().iter().enumerate() {
        let idx = grid.multi_index(i);
        let w = c.norm_sqr();
        for (a, pa) in p.iter_mut().enumerate() {
            if idx[a] != nyq {
                *pa += grid.wavenumber(idx[a]) * w;
            }
        }
    }
    let s = grid.cell_volume() / grid.len() as f64;
    p.iter_mut().for_each(|v| *v *= s);
    p
}

pub fn conserved_quantities(f: &ComplexField, mu: f64) -> Conserved {
    Conserved {
        mass: mass(f),
        energy: energy(f, mu),
        momentum: momentum(f),
    }
}

/// Record of a lone field: variance about its own centroid, no running
/// spacetime integral, no modulation data.
pub fn snapshot_record(f: &ComplexField, mu: f64) -> DiagnosticRecord {
    let c = conserved_quantities(f, mu);
    DiagnosticRecord {
        t: f.time(),
        mass: c.mass,
        energy: c.energy,
        momentum: c.momentum,
        variance: variance(f, &f.centroid()).value,
        grad_sq: grad_sq_norm(f),
        linf: f.max_abs(),
        lambda: None,
        x_center: None,
        xi: None,
        gamma: None,
        spacetime_norm_partial: 0.0,
        morawetz_value: None,
        fit_distance: None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variance {
    pub value: f64,
    /// Set when more than `1e-8` of the mass lies outside the central
    /// half-box, where periodic images make the moment unreliable.
    pub tail_warning: bool,
}

pub fn variance(f: &ComplexField, center: &[f64]) -> Variance {
    let grid = *f.grid();
    let d = grid.dim();
    let half = 0.5 * grid.half_width();
    let (mut v, mut tail, mut total) = (0.0, 0.0, 0.0);
    for (i, z) in f.samples().iter().enumerate() {
        let p = grid.point(i);
        let rho = z.norm_sqr();
        let r2: f64 = (0..d).map(|a| (p[a] - center[a]).powi(2)).sum();
        v += r2 * rho;
        total += rho;
        if (0..d).any(|a| p[a].abs() > half) {
            tail += rho;
        }
    }
    let tail_warning = tail > 1e-8 * total;
    if tail_warning {
        warn!("variance: {:.2e} of the mass lies outside the central half-box", tail / total);
    }
    Variance { value: v * grid.cell_volume(), tail_warning }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirialReport {
    /// `16 E(u0)`.
    pub target: f64,
    /// `(t_i, second difference of the variance at t_i)` for interior records.
    pub second_differences: Vec<(f64, f64)>,
    pub max_abs_error: f64,
    /// `max_abs_error / |16 E(u0)|`; infinite when the energy vanishes.
    pub max_rel_error: f64,
}

/// Central second differences of the recorded variance compared with
/// `16 E(u0)`.
pub fn virial_check(traj: &Trajectory) -> Result<VirialReport> {
    let recs = &traj.records;
    if recs.len() < 5 {
        return Err(Error::Argument(format!(
            "virial check needs at least 5 records, got {}",
            recs.len()
        )));
    }
    let dt = uniform_step(&traj.times)?;
    let target = 16.0 * recs[0].energy;
    let mut second = Vec::with_capacity(recs.len() - 2);
    let mut max_abs: f64 = 0.0;
    for w in recs.windows(3) {
        let d2 = (w[2].variance - 2.0 * w[1].variance + w[0].variance) / (dt * dt);
        max_abs = max_abs.max((d2 - target).abs());
        second.push((w[1].t, d2));
    }
    Ok(VirialReport {
        target,
        second_differences: second,
        max_abs_error: max_abs,
        max_rel_error: max_abs / target.abs(),
    })
}

/// Common spacing of `times`, or an argument error if they are not uniform.
pub(crate) fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(Error::Argument("need at least two record times".into()));
    }
    let span = times[times.len() - 1] - times[0];
    let dt = span / (times.len() - 1) as f64;
    for w in times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1e-300) {
            return Err(Error::Argument(format!(
                "record times are not uniform: step {} vs mean {dt}",
                w[1] - w[0]
            )));
        }
    }
    Ok(dt)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Sharp Gagliardo-Nirenberg comparison
/// `||f||_p^p <= ((d+2)/d) (||f||_2/||Q||_2)^{4/d} ||∇f||_2^2`.
pub fn gn_check(f: &ComplexField, q_mass: f64) -> Result<GnReport> {
    let m = mass(f);
    if m == 0.0 {
        return Err(Error::Argument("Gagliardo-Nirenberg check of the zero field".into()));
    }
    let d = f.grid().dim() as f64;
    let lhs = potential_norm(f);
    let rhs = (d + 2.0) / d * (m / q_mass).powf(2.0 / d) * grad_sq_norm(f);
    Ok(GnReport { lhs, rhs, ratio: lhs / rhs })
}

/// Trapezoidal accumulation of `∫ ||u(t)||_p^p dt` over the records, returned
/// as the `L^{2(d+2)/d}_{t,x}` norm.
pub fn scattering_norm_accumulate(traj: &Trajectory) -> f64 {
    let dim = traj.dim;
    let integrand: Vec<f64> = traj
        .records
        .iter()
        .map(|r| potential_from_record(r, traj.mu, dim))
        .collect();
    let mut acc = 0.0;
    for (w, f) in traj.times.windows(2).zip(integrand.windows(2)) {
        acc += 0.5 * (w[1] - w[0]) * (f[0] + f[1]);
    }
    spacetime_root(acc, dim)
}

/// Potential term recovered from the stored energy and kinetic parts.
fn potential_from_record(r: &DiagnosticRecord, mu: f64, dim: usize) -> f64 {
    let d = dim as f64;
    ((r.energy - 0.5 * r.grad_sq) * (2.0 * d + 4.0) / (mu * d)).max(0.0)
}

pub(crate) fn spacetime_root(integral: f64, dim: usize) -> f64 {
    let d = dim as f64;
    integral.max(0.0).powf(d / (2.0 * (d + 2.0)))
}
