//! Periodic lattices, complex fields sampled on them, and the spectral
//! calculus used by every other module.
//!
//! A [`Grid`] samples the box `[-L, L)^d` with `n` points per axis at
//! `x_i = -L + i h`, `h = 2L/n`. Samples are stored row-major with axis 0
//! fastest. Wavenumbers follow FFT ordering, `k = (pi/L) m` with
//! `m in {0, .., n/2-1, -n/2, .., -1}`.

mod fft;
mod spectral;

pub use spectral::{
    bandlimited_resample, fourier_truncate, grad_sq_norm, inner_product, l2_distance, laplacian,
    lp_norm, mass, resample_tensor, spectral_gradient, Spectrum,
};

pub(crate) use fft::{fft_nd, FftDirection};
pub(crate) use spectral::resample_tensor_masked;

use crate::error::{Error, Result};
use num_complex::Complex64;

pub type C64 = Complex64;

/// Upper bound on `n^d` for any grid.
pub const MAX_SAMPLES: usize = 1 << 24;

/// Uniform periodic lattice on `[-L, L)^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    half_width: f64,
}

impl Grid {
    pub fn new(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Config(format!("half-width must be positive, got {half_width}")));
        }
        let total = n.checked_pow(dim as u32).unwrap_or(usize::MAX);
        if total > MAX_SAMPLES {
            return Err(Error::Config(format!(
                "{n}^{dim} = {total} samples exceeds the budget of {MAX_SAMPLES}"
            )));
        }
        Ok(Self { dim, n, half_width })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Quadrature weight `h^d` of one sample.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Signed mode number of FFT index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        std::f64::consts::PI / self.half_width * self.mode(i) as f64
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    /// Largest per-axis wavenumber magnitude, `pi / h`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        let mut rest = flat;
        for slot in idx.iter_mut().take(self.dim) {
            *slot = rest % self.n;
            rest /= self.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .take(self.dim)
            .rev()
            .fold(0, |acc, &i| acc * self.n + i)
    }

    /// Physical coordinates of sample `flat`; unused trailing entries are zero.
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.coord(idx[a]);
        }
        p
    }

    /// Wave vector of mode `flat` in FFT ordering.
    pub fn wave_vector(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut k = [0.0; 3];
        for a in 0..self.dim {
            k[a] = self.wavenumber(idx[a]);
        }
        k
    }

    /// Wraps a coordinate periodically into `[-L, L)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let period = 2.0 * self.half_width;
        let y = (x + self.half_width).rem_euclid(period) - self.half_width;
        if y >= self.half_width {
            y - period
        } else {
            y
        }
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    /// Grid with the same spacing and `factor` times the half-width.
    pub fn enlarged(&self, factor: usize) -> Result<Grid> {
        Grid::new(self.dim, self.n * factor, self.half_width * factor as f64)
    }
}

/// Complex samples of a field on a [`Grid`] at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    samples: Vec<C64>,
    t: f64,
}

impl ComplexField {
    pub fn new(grid: Grid, samples: Vec<C64>, t: f64) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidField(format!("sample {i} is not finite")));
        }
        if !t.is_finite() {
            return Err(Error::InvalidField("time stamp is not finite".into()));
        }
        Ok(Self { grid, samples, t })
    }

    pub(crate) fn from_raw(grid: Grid, samples: Vec<C64>, t: f64) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Self { grid, samples, t }
    }

    pub fn zeros(grid: Grid, t: f64) -> Self {
        Self::from_raw(grid, vec![C64::new(0.0, 0.0); grid.len()], t)
    }

    /// Samples `f` at every lattice point.
    ///
    /// Panics if `f` returns a non-finite value.
    pub fn from_fn(grid: Grid, t: f64, f: impl Fn(&[f64]) -> C64) -> Self {
        let d = grid.dim();
        let samples: Vec<C64> = (0..grid.len())
            .map(|i| {
                let p = grid.point(i);
                let z = f(&p[..d]);
                assert!(z.re.is_finite() && z.im.is_finite(), "non-finite sample at {p:?}");
                z
            })
            .collect();
        Self::from_raw(grid, samples, t)
    }

    pub fn from_real_fn(grid: Grid, t: f64, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, t, |x| C64::new(f(x), 0.0))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<C64> {
        self.samples
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self::from_raw(self.grid, self.samples.iter().map(|&z| f(z)).collect(), self.t)
    }

    /// Pointwise map that also receives the sample coordinates.
    pub fn map_with_point(&self, f: impl Fn(&[f64], C64) -> C64) -> Self {
        let d = self.grid.dim();
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                let p = self.grid.point(i);
                f(&p[..d], z)
            })
            .collect();
        Self::from_raw(self.grid, samples, self.t)
    }

    pub fn zip_map(&self, other: &ComplexField, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_raw(self.grid, samples, self.t))
    }

    pub fn scaled(&self, c: C64) -> Self {
        self.map(|z| z * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn add(&self, other: &ComplexField) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexField) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Mass centroid `int x |f|^2 / int |f|^2`.
    pub fn centroid(&self) -> Vec<f64> {
        let d = self.grid.dim();
        let mut acc = [0.0; 3];
        let mut m = 0.0;
        for (i, z) in self.samples.iter().enumerate() {
            let rho = z.norm_sqr();
            let p = self.grid.point(i);
            for a in 0..d {
                acc[a] += p[a] * rho;
            }
            m += rho;
        }
        acc[..d].iter().map(|v| if m > 0.0 { v / m } else { 0.0 }).collect()
    }

    /// Restriction of a field on an enlarged lattice to the central block
    /// matching `target` (same spacing, smaller box).
    pub(crate) fn restrict_to(&self, target: Grid) -> Result<Self> {
        let src = self.grid;
        if src.dim() != target.dim() || (src.spacing() - target.spacing()).abs() > 1e-12 * src.spacing() {
            return Err(Error::GridMismatch("restriction needs equal spacing".into()));
        }
        if target.n() > src.n() {
            return Err(Error::GridMismatch("target lattice is larger than source".into()));
        }
        let offset = (src.n() - target.n()) / 2;
        let samples = (0..target.len())
            .map(|i| {
                let idx = target.multi_index(i);
                let mut s = [0usize; 3];
                for a in 0..target.dim() {
                    s[a] = idx[a] + offset;
                }
                self.samples[src.flat_index(&s[..target.dim()])]
            })
            .collect();
        Ok(Self::from_raw(target, samples, self.t))
    }
}
