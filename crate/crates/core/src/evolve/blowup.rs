use super::{Termination, Trajectory};
use crate::error::{Error, Result};

/// Curve fits of the width `λ(t)` near a singular time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupReport {
    /// Singular time of the best power-law fit `λ ≈ c (T - t)^α`.
    pub t_est: f64,
    pub rate_exponent: f64,
    pub prefactor: f64,
    /// Coefficient of determination of the power law in log variables.
    pub powerlaw_score: f64,
    /// Coefficient of determination of `λ ≈ c sqrt(s / ln|ln s|)`,
    /// `s = T - t`, over samples with `s < 1/e`; `None` if too few qualify.
    pub loglog_score: Option<f64>,
    pub samples: usize,
}

pub const MIN_SAMPLES: usize = 20;

/// Fits the recorded width of a blown-up trajectory. Uses the tracked scale
/// when every record carries one, otherwise the gradient proxy
/// `||∇u(0)|| / ||∇u(t)||`.
pub fn estimate_blowup(traj: &Trajectory) -> Result<BlowupReport> {
    if traj.termination != Termination::BlowupDetected {
        return Err(Error::Precondition(format!(
            "blowup estimate needs a blown-up trajectory, got {}",
            traj.termination.as_str()
        )));
    }
    let widths: Vec<f64> = if traj.records.iter().all(|r| r.lambda.is_some()) {
        traj.records.iter().map(|r| r.lambda.unwrap()).collect()
    } else {
        let g0 = traj.records[0].grad_sq.sqrt();
        traj.records.iter().map(|r| g0 / r.grad_sq.sqrt()).collect()
    };
    estimate_blowup_from(&traj.times, &widths)
}

struct LineFit {
    slope: f64,
    intercept: f64,
    r2: f64,
    ssr: f64,
}

fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    LineFit { slope, intercept, r2: 1.0 - ssr / syy, ssr }
}

fn powerlaw_ssr(times: &[f64], logw: &[f64], t_star: f64) -> LineFit {
    let x: Vec<f64> = times.iter().map(|t| (t_star - t).ln()).collect();
    fit_line(&x, logw)
}

fn loglog_score(times: &[f64], widths: &[f64], t_star: f64) -> Option<f64> {
    let inv_e = (-1.0f64).exp();
    let mut a = Vec::new();
    let mut w = Vec::new();
    for (t, &l) in times.iter().zip(widths) {
        let s = t_star - t;
        if s > 0.0 && s < inv_e {
            a.push((s / s.ln().abs().ln()).sqrt());
            w.push(l);
        }
    }
    if a.len() < 5 {
        return None;
    }
    let c = a.iter().zip(&w).map(|(x, y)| x * y).sum::<f64>() / a.iter().map(|x| x * x).sum::<f64>();
    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let ssr: f64 = a.iter().zip(&w).map(|(x, y)| (y - c * x).powi(2)).sum();
    let sst: f64 = w.iter().map(|y| (y - mean).powi(2)).sum();
    Some(1.0 - ssr / sst)
}

/// Minimizes `objective(gap)` over `gap > 0` on a log grid followed by a
/// golden-section refinement in `ln gap`.
fn scan_gap(span: f64, objective: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi) = ((span * 1e-7).ln(), (span * 10.0).ln());
    let n = 240;
    let mut best = (f64::INFINITY, lo);
    for i in 0..=n {
        let s = lo + (hi - lo) * i as f64 / n as f64;
        let v = objective(s.exp());
        if v < best.0 {
            best = (v, s);
        }
    }
    let step = (hi - lo) / n as f64;
    let (mut a, mut b) = (best.1 - step, best.1 + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if objective(c.exp()) < objective(d.exp()) {
            b = d;
        } else {
            a = c;
        }
    }
    (0.5 * (a + b)).exp()
}

/// Power-law and log-log fits of widths sampled at increasing `times`.
pub fn estimate_blowup_from(times: &[f64], widths: &[f64]) -> Result<BlowupReport> {
    if times.len() != widths.len() {
        return Err(Error::Argument("times and widths differ in length".into()));
    }
    if times.len() < MIN_SAMPLES {
        return Err(Error::Precondition(format!(
            "blowup fit needs at least {MIN_SAMPLES} samples, got {}",
            times.len()
        )));
    }
    if widths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::Argument("widths must be finite and positive".into()));
    }
    let last = times[times.len() - 1];
    let span = last - times[0];
    let logw: Vec<f64> = widths.iter().map(|w| w.ln()).collect();

    let gap = scan_gap(span, |g| powerlaw_ssr(times, &logw, last + g).ssr);
    let t_est = last + gap;
    let fit = powerlaw_ssr(times, &logw, t_est);

    let ll_gap = scan_gap(span, |g| match loglog_score(times, widths, last + g) {
        Some(s) => -s,
        None => f64::INFINITY,
    });
    Ok(BlowupReport {
        t_est,
        rate_exponent: fit.slope,
        prefactor: fit.intercept.exp(),
        powerlaw_score: fit.r2,
        loglog_score: loglog_score(times, widths, last + ll_gap),
        samples: times.len(),
    })
}
