use super::profile::{chi, chi_prime};
use super::weights::MorawetzWeights;
use crate::diagnostics::potential_exponent;
use crate::error::{Error, Result};
use crate::evolve::Trajectory;
use crate::field::{mass, spectral_gradient, ComplexField, C64};

/// `χ²(|y - s| / R)` at every lattice point, distances taken periodically.
fn window_sq(f: &ComplexField, s: &[f64], radius: f64) -> Result<Vec<f64>> {
    let grid = *f.grid();
    let d = grid.dim();
    if s.len() != d {
        return Err(Error::Argument(format!("center has {} components, expected {d}", s.len())));
    }
    Ok((0..grid.len())
        .map(|i| {
            let p = grid.point(i);
            let r = (0..d).map(|a| grid.wrap(p[a] - s[a]).powi(2)).sum::<f64>().sqrt();
            chi(r / radius).powi(2)
        })
        .collect())
}

fn check_xi(xi: &[f64], d: usize) -> Result<()> {
    if xi.len() != d {
        return Err(Error::Argument(format!("frequency has {} components, expected {d}", xi.len())));
    }
    Ok(())
}

/// Localized momentum `∫ χ²((y - s)/R) (Im(f̄ ∇f) + ξ|f|²) dy` of `e^{iy·ξ} f`.
pub fn localized_momentum(f: &ComplexField, s: &[f64], radius: f64, xi: &[f64]) -> Result<Vec<f64>> {
    let d = f.grid().dim();
    check_xi(xi, d)?;
    let win = window_sq(f, s, radius)?;
    let grad = spectral_gradient(f);
    let dv = f.grid().cell_volume();
    Ok((0..d)
        .map(|j| {
            let s: f64 = f
                .samples()
                .iter()
                .zip(grad[j].samples())
                .zip(&win)
                .map(|((u, du), c)| c * ((u.conj() * du).im + xi[j] * u.norm_sqr()))
                .sum();
            s * dv
        })
        .collect())
}

/// `∫ χ²((y - s)/R) |∇f + iξ f|² dy`, invariant under
/// `(f, ξ) -> (e^{ia·y} f, ξ - a)`.
pub fn localized_kinetic(f: &ComplexField, s: &[f64], radius: f64, xi: &[f64]) -> Result<f64> {
    let d = f.grid().dim();
    check_xi(xi, d)?;
    let win = window_sq(f, s, radius)?;
    let grad = spectral_gradient(f);
    let mut acc = 0.0;
    for (i, (u, c)) in f.samples().iter().zip(&win).enumerate() {
        let v: f64 = (0..d)
            .map(|j| (grad[j].samples()[i] + C64::new(0.0, xi[j]) * u).norm_sqr())
            .sum();
        acc += c * v;
    }
    Ok(acc * f.grid().cell_volume())
}

/// The frequency `ξ(s)` that zeroes the localized momentum around `s`.
pub fn optimal_galilean_shift(f: &ComplexField, s: &[f64], w: &MorawetzWeights) -> Result<Vec<f64>> {
    f.grid().check_same(w.grid())?;
    let d = f.grid().dim();
    let win = window_sq(f, s, w.radius())?;
    let dv = f.grid().cell_volume();
    let local_mass: f64 = f.samples().iter().zip(&win).map(|(u, c)| c * u.norm_sqr()).sum::<f64>() * dv;
    if !(local_mass >= 1e-12 * mass(f)) || local_mass == 0.0 {
        return Err(Error::Precondition(format!(
            "local mass {local_mass:.3e} around the window center vanishes"
        )));
    }
    let p = localized_momentum(f, s, w.radius(), &vec![0.0; d])?;
    Ok(p.into_iter().map(|v| -v / local_mass).collect())
}

/// Energy of `χ((x - c)/R) e^{ix·ξ} f`, with the cutoff gradient taken
/// analytically.
pub fn localized_energy(f: &ComplexField, center: &[f64], radius: f64, xi: &[f64], mu: f64) -> Result<f64> {
    let grid = *f.grid();
    let d = grid.dim();
    check_xi(xi, d)?;
    if center.len() != d {
        return Err(Error::Argument(format!("center has {} components, expected {d}", center.len())));
    }
    if !(radius > 0.0) {
        return Err(Error::Argument(format!("radius must be positive, got {radius}")));
    }
    let l = grid.half_width();
    if center.iter().any(|c| c.abs() + 2.0 * radius > l) {
        return Err(Error::Precondition(format!(
            "window of radius {radius} around {center:?} is clipped by the box [-{l}, {l})"
        )));
    }
    let grad = spectral_gradient(f);
    let p = potential_exponent(d);
    let (mut kinetic, mut potential) = (0.0, 0.0);
    for (i, u) in f.samples().iter().enumerate() {
        let x = grid.point(i);
        let z: Vec<f64> = (0..d).map(|a| x[a] - center[a]).collect();
        let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let c = chi(r / radius);
        let dc = if r > 0.0 { chi_prime(r / radius) / (radius * r) } else { 0.0 };
        for j in 0..d {
            let dv = *u * (dc * z[j]) + (grad[j].samples()[i] + C64::new(0.0, xi[j]) * u) * c;
            kinetic += dv.norm_sqr();
        }
        potential += (c * u.norm()).powf(p);
    }
    let df = d as f64;
    Ok((0.5 * kinetic + mu * df / (2.0 * df + 4.0) * potential) * grid.cell_volume())
}

/// `∫ N(t)³ dt / sup N` over the records, with the frequency scale `N = 1/λ`
/// taken from the tracked width `λ`.
pub fn cascade_ratio(traj: &Trajectory) -> Result<f64> {
    let scales: Option<Vec<f64>> = traj.records.iter().map(|r| r.lambda.map(|l| 1.0 / l)).collect();
    match scales {
        Some(s) if !s.is_empty() => cascade_ratio_from(&traj.times, &s),
        _ => Err(Error::Precondition("cascade ratio needs tracked modulation data on every record".into())),
    }
}

/// Trapezoidal `∫ N³ dt` divided by `max N`.
pub fn cascade_ratio_from(times: &[f64], scales: &[f64]) -> Result<f64> {
    if times.len() != scales.len() || times.len() < 2 {
        return Err(Error::Argument("cascade ratio needs matching times and scales, at least two".into()));
    }
    if scales.iter().any(|n| !(n.is_finite() && *n > 0.0)) {
        return Err(Error::Argument("frequency scales must be finite and positive".into()));
    }
    let integral: f64 = times
        .windows(2)
        .zip(scales.windows(2))
        .map(|(t, n)| 0.5 * (t[1] - t[0]) * (n[0].powi(3) + n[1].powi(3)))
        .sum();
    let sup = scales.iter().copied().fold(0.0, f64::max);
    Ok(integral / sup)
}
