use log::debug;

use super::weights::MorawetzWeights;
use crate::diagnostics::potential_exponent;
use crate::error::{Error, Result};
use crate::field::{fft_nd, fourier_truncate, spectral_gradient, ComplexField, FftDirection, Grid, C64};

/// Non-periodic pair sums `Σ_x Σ_y a(x) b(y) k(x - y) h^{2d}` through
/// zero-padded FFTs on a `(2n)^d` lattice.
struct Correlator {
    grid: Grid,
    big: usize,
}

impl Correlator {
    fn new(grid: &Grid) -> Self {
        Self { grid: *grid, big: 2 * grid.n() }
    }

    fn padded_len(&self) -> usize {
        self.big.pow(self.grid.dim() as u32)
    }

    fn padded_index(&self, flat: usize) -> usize {
        let idx = self.grid.multi_index(flat);
        (0..self.grid.dim()).rev().fold(0, |acc, a| acc * self.big + idx[a])
    }

    fn transform(&self, values: &[f64]) -> Vec<C64> {
        let mut buf = vec![C64::new(0.0, 0.0); self.padded_len()];
        for (flat, v) in values.iter().enumerate() {
            buf[self.padded_index(flat)] = C64::new(*v, 0.0);
        }
        fft_nd(&mut buf, self.big, self.grid.dim(), FftDirection::Forward);
        buf
    }

    /// Spectrum of `k` sampled at lattice differences in `(-n, n)^d`.
    fn kernel(&self, k: impl Fn(&[f64]) -> f64) -> Vec<C64> {
        let (n, d, h) = (self.grid.n() as i64, self.grid.dim(), self.grid.spacing());
        let big = self.big as i64;
        let mut buf = vec![C64::new(0.0, 0.0); self.padded_len()];
        let mut z = [0.0; 3];
        for (flat, slot) in buf.iter_mut().enumerate() {
            let mut rem = flat as i64;
            let mut skip = false;
            for za in z.iter_mut().take(d) {
                let i = rem % big;
                rem /= big;
                if i == n {
                    skip = true;
                }
                *za = if i < n { i as f64 * h } else { (i - big) as f64 * h };
            }
            if !skip {
                *slot = C64::new(k(&z[..d]), 0.0);
            }
        }
        fft_nd(&mut buf, self.big, d, FftDirection::Forward);
        buf
    }

    /// `Σ_x a(x) (b ⋆ k)(x) h^{2d}` given the spectra of `b` and `k`.
    fn pair_sum(&self, a: &[f64], b_hat: &[C64], k_hat: &[C64]) -> f64 {
        let mut conv: Vec<C64> = b_hat.iter().zip(k_hat).map(|(x, y)| x * y).collect();
        fft_nd(&mut conv, self.big, self.grid.dim(), FftDirection::Inverse);
        let s: f64 = a
            .iter()
            .enumerate()
            .map(|(flat, v)| v * conv[self.padded_index(flat)].re)
            .sum();
        s * self.grid.cell_volume().powi(2)
    }
}

/// Mass density, momentum density and gradient of a field.
struct Densities {
    rho: Vec<f64>,
    momentum: Vec<Vec<f64>>,
    gradient: Vec<ComplexField>,
}

impl Densities {
    fn of(f: &ComplexField) -> Self {
        let gradient = spectral_gradient(f);
        let rho = f.samples().iter().map(|u| u.norm_sqr()).collect();
        let momentum = gradient
            .iter()
            .map(|g| f.samples().iter().zip(g.samples()).map(|(u, du)| (u.conj() * du).im).collect())
            .collect();
        Self { rho, momentum, gradient }
    }
}

fn radial(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `M = Σ_j ∫ m_j(x) (ρ ⋆ w_j)(x) dx` with `w_j(z) = z_j ψ(|z|)`, after
/// applying the Fourier cutoff when one is given.
pub fn interaction_morawetz(f: &ComplexField, w: &MorawetzWeights, cutoff: Option<f64>) -> Result<f64> {
    f.grid().check_same(w.grid())?;
    let truncated;
    let u = match cutoff {
        Some(t) => {
            truncated = fourier_truncate(f, t);
            &truncated
        }
        None => f,
    };
    let dens = Densities::of(u);
    let corr = Correlator::new(f.grid());
    let rho_hat = corr.transform(&dens.rho);
    let mut total = 0.0;
    for (j, m) in dens.momentum.iter().enumerate() {
        let k = corr.kernel(|z| z[j] * w.psi(radial(z)));
        total += corr.pair_sum(m, &rho_hat, &k);
    }
    Ok(total)
}

/// The bulk terms of `dM/dt` with no frequency cutoff.
///
/// With `K_jk(z) = ∂_k(z_j ψ) = φ ẑ_j ẑ_k + ψ (δ_jk - ẑ_j ẑ_k)`:
/// the gradient pair `2∬ ρ(y) Re(∂_j ū ∂_k u)(x) K_jk(x-y)` is split into
/// its radial (`φ`) and angular (`ψ`) blocks, the momentum pair is
/// `-2∬ m_j(x) m_k(y) K_jk(x-y)`, the mass term is
/// `-½∬ ρ ρ [Δφ + (d-1)Δψ]` and the nonlinear term is
/// `μ 2/(d+2) ∬ ρ(y) |u(x)|^{2+4/d} [φ + (d-1)ψ](x-y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorawetzTerms {
    pub gradient_radial: f64,
    pub gradient_angular: f64,
    pub momentum_pair: f64,
    pub mass: f64,
    pub nonlinear: f64,
}

impl MorawetzTerms {
    pub fn total(&self) -> f64 {
        self.gradient_radial + self.gradient_angular + self.momentum_pair + self.mass + self.nonlinear
    }

    /// Largest absolute term, the natural scale for comparing `dM/dt`.
    pub fn scale(&self) -> f64 {
        [self.gradient_radial, self.gradient_angular, self.momentum_pair, self.mass, self.nonlinear]
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
    }
}

/// Block of `K_jk` selected by `part`: radial `φ ẑ_j ẑ_k` or angular
/// `ψ (δ_jk - ẑ_j ẑ_k)`. The origin takes the spherical average.
#[derive(Clone, Copy)]
enum Block {
    Radial,
    Angular,
}

fn tensor_kernel(w: &MorawetzWeights, j: usize, k: usize, z: &[f64], part: Block) -> f64 {
    let r = radial(z);
    let delta = if j == k { 1.0 } else { 0.0 };
    let d = z.len() as f64;
    let (phi, psi) = (w.phi(r), w.psi(r));
    let zz = if r == 0.0 { delta / d } else { z[j] * z[k] / (r * r) };
    match part {
        Block::Radial => phi * zz,
        Block::Angular => psi * (delta - zz),
    }
}

pub fn morawetz_terms(f: &ComplexField, w: &MorawetzWeights, mu: f64) -> Result<MorawetzTerms> {
    f.grid().check_same(w.grid())?;
    let d = f.grid().dim();
    let dens = Densities::of(f);
    let corr = Correlator::new(f.grid());
    let rho_hat = corr.transform(&dens.rho);
    let m_hat: Vec<Vec<C64>> = dens.momentum.iter().map(|m| corr.transform(m)).collect();

    let mut terms = MorawetzTerms {
        gradient_radial: 0.0,
        gradient_angular: 0.0,
        momentum_pair: 0.0,
        mass: 0.0,
        nonlinear: 0.0,
    };
    for j in 0..d {
        for k in j..d {
            let mult = if j == k { 1.0 } else { 2.0 };
            let s: Vec<f64> = dens.gradient[j]
                .samples()
                .iter()
                .zip(dens.gradient[k].samples())
                .map(|(a, b)| 2.0 * (a.conj() * b).re)
                .collect();
            let kr = corr.kernel(|z| tensor_kernel(w, j, k, z, Block::Radial));
            let ka = corr.kernel(|z| tensor_kernel(w, j, k, z, Block::Angular));
            terms.gradient_radial += mult * corr.pair_sum(&s, &rho_hat, &kr);
            terms.gradient_angular += mult * corr.pair_sum(&s, &rho_hat, &ka);
            let full: Vec<C64> = kr.iter().zip(&ka).map(|(a, b)| a + b).collect();
            terms.momentum_pair -= 2.0 * mult * corr.pair_sum(&dens.momentum[j], &m_hat[k], &full);
        }
    }
    let df = d as f64;
    let lap = corr.kernel(|z| {
        let r = radial(z);
        w.lap_phi(r) + (df - 1.0) * w.lap_psi(r)
    });
    terms.mass = -0.5 * corr.pair_sum(&dens.rho, &rho_hat, &lap);
    let p = potential_exponent(d);
    let pot: Vec<f64> = dens.rho.iter().map(|r| r.powf(0.5 * p)).collect();
    let div = corr.kernel(|z| {
        let r = radial(z);
        w.phi(r) + (df - 1.0) * w.psi(r)
    });
    terms.nonlinear = mu * 2.0 / (df + 2.0) * corr.pair_sum(&pot, &rho_hat, &div);
    Ok(terms)
}

/// `dM/dt` predicted by the bulk terms. Only the uncut functional is
/// supported.
pub fn morawetz_rhs(f: &ComplexField, w: &MorawetzWeights, mu: f64, cutoff: Option<f64>) -> Result<f64> {
    if cutoff.is_some() {
        return Err(Error::Unsupported(
            "morawetz_rhs has no commutator terms; use it without a frequency cutoff".into(),
        ));
    }
    let terms = morawetz_terms(f, w, mu)?;
    debug!("morawetz terms at t={}: {terms:?}", f.time());
    Ok(terms.total())
}
