use super::fft::{fft_nd, FftDirection};
use super::{ComplexField, Grid, C64};
use crate::error::{Error, Result};

/// Discrete Fourier coefficients of a field, FFT ordering, unnormalized.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<C64>,
}

impl Spectrum {
    pub fn of(f: &ComplexField) -> Self {
        let grid = *f.grid();
        let mut coeffs = f.samples().to_vec();
        fft_nd(&mut coeffs, grid.n(), grid.dim(), FftDirection::Forward);
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Multiplies every mode by `m(k)`, `k` the wave vector.
    pub fn apply(&mut self, m: impl Fn(&[f64]) -> C64) {
        let d = self.grid.dim();
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            let k = self.grid.wave_vector(i);
            *c *= m(&k[..d]);
        }
    }

    pub fn into_field(self, t: f64) -> ComplexField {
        let mut s = self.coeffs;
        fft_nd(&mut s, self.grid.n(), self.grid.dim(), FftDirection::Inverse);
        ComplexField::from_raw(self.grid, s, t)
    }
}

/// Applies the Fourier multiplier `m(k)` to `f`.
fn apply_multiplier(f: &ComplexField, m: impl Fn(&[f64]) -> C64) -> ComplexField {
    let mut s = Spectrum::of(f);
    s.apply(m);
    s.into_field(f.time())
}

/// Spectral partial derivatives, one field per axis. The Nyquist mode of the
/// differentiated axis is dropped.
pub fn spectral_gradient(f: &ComplexField) -> Vec<ComplexField> {
    let grid = *f.grid();
    let spec = Spectrum::of(f);
    let nyq = grid.n() / 2;
    (0..grid.dim())
        .map(|axis| {
            let mut s = spec.clone();
            for (i, c) in s.coeffs.iter_mut().enumerate() {
                let j = grid.multi_index(i)[axis];
                *c = if j == nyq {
                    C64::new(0.0, 0.0)
                } else {
                    *c * C64::new(0.0, grid.wavenumber(j))
                };
            }
            s.into_field(f.time())
        })
        .collect()
}

pub fn laplacian(f: &ComplexField) -> ComplexField {
    apply_multiplier(f, |k| C64::new(-k.iter().map(|v| v * v).sum::<f64>(), 0.0))
}

/// `||grad f||_2^2` evaluated in Fourier space, consistent with
/// [`spectral_gradient`].
pub fn grad_sq_norm(f: &ComplexField) -> f64 {
    let grid = *f.grid();
    let spec = Spectrum::of(f);
    let nyq = grid.n() / 2;
    let mut acc = 0.0;
    for (i, c) in spec.coeffs.iter().enumerate() {
        let idx = grid.multi_index(i);
        let k2: f64 = (0..grid.dim())
            .filter(|&a| idx[a] != nyq)
            .map(|a| grid.wavenumber(idx[a]).powi(2))
            .sum();
        acc += k2 * c.norm_sqr();
    }
    acc * grid.cell_volume() / grid.len() as f64
}

/// `(h^d sum |f|^p)^(1/p)`, or the max modulus for `p = inf`.
pub fn lp_norm(f: &ComplexField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Argument(format!("Lp exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let h = f.grid().cell_volume();
    let sum: f64 = if p == 2.0 {
        f.samples().iter().map(|z| z.norm_sqr()).sum()
    } else {
        f.samples().iter().map(|z| z.norm().powf(p)).sum()
    };
    Ok((h * sum).powf(1.0 / p))
}

pub fn mass(f: &ComplexField) -> f64 {
    f.grid().cell_volume() * f.samples().iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// `h^d sum f conj(g)`.
pub fn inner_product(f: &ComplexField, g: &ComplexField) -> Result<C64> {
    f.grid().check_same(g.grid())?;
    let s: C64 = f
        .samples()
        .iter()
        .zip(g.samples())
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(s * f.grid().cell_volume())
}

pub fn l2_distance(f: &ComplexField, g: &ComplexField) -> Result<f64> {
    f.grid().check_same(g.grid())?;
    let s: f64 = f
        .samples()
        .iter()
        .zip(g.samples())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok((s * f.grid().cell_volume()).sqrt())
}

/// Sharp projection onto modes with `|k| <= cutoff`.
pub fn fourier_truncate(f: &ComplexField, cutoff: f64) -> ComplexField {
    let cut2 = cutoff * cutoff;
    let max_k2 = f.grid().nyquist().powi(2) * f.grid().dim() as f64;
    if cutoff >= 0.0 && cut2 >= max_k2 {
        return f.clone();
    }
    apply_multiplier(f, |k| {
        let k2: f64 = k.iter().map(|v| v * v).sum();
        if cutoff >= 0.0 && k2 <= cut2 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Trigonometric basis row of one axis at coordinate `x`, with the Nyquist
/// mode taken as its real (cosine) part.
fn axis_basis(grid: &Grid, x: f64) -> Vec<C64> {
    let n = grid.n();
    let shift = x + grid.half_width();
    (0..n)
        .map(|j| {
            if j == n / 2 {
                C64::new((grid.wavenumber(j).abs() * shift).cos(), 0.0)
            } else {
                C64::from_polar(1.0, grid.wavenumber(j) * shift)
            }
        })
        .collect()
}

/// Contracts `axis` of a tensor with `dims` (axis 0 fastest) against `basis`,
/// an `m x dims[axis]` row-major matrix.
fn contract(data: &[C64], dims: &mut [usize], axis: usize, basis: &[C64], m: usize) -> Vec<C64> {
    let n = dims[axis];
    let stride: usize = dims[..axis].iter().product();
    let outer: usize = dims[axis + 1..].iter().product();
    let mut out = vec![C64::new(0.0, 0.0); stride * m * outer];
    for o in 0..outer {
        for p in 0..m {
            let row = &basis[p * n..(p + 1) * n];
            let dst = stride * (p + m * o);
            for (j, b) in row.iter().enumerate() {
                let src = stride * (j + n * o);
                for i in 0..stride {
                    out[dst + i] += data[src + i] * b;
                }
            }
        }
    }
    dims[axis] = m;
    out
}

fn check_inside(grid: &Grid, x: f64) -> Result<()> {
    let l = grid.half_width();
    if x.is_finite() && (-l..=l).contains(&x) {
        Ok(())
    } else {
        Err(Error::Argument(format!("point coordinate {x} lies outside [-{l}, {l}]")))
    }
}

fn normalized_coeffs(f: &ComplexField) -> Vec<C64> {
    let spec = Spectrum::of(f);
    let s = 1.0 / f.grid().len() as f64;
    spec.coeffs.into_iter().map(|c| c * s).collect()
}

/// Band-limited interpolant of `f` evaluated at arbitrary points, each a
/// slice of `d` coordinates inside the box.
pub fn bandlimited_resample(f: &ComplexField, points: &[Vec<f64>]) -> Result<Vec<C64>> {
    let grid = *f.grid();
    let d = grid.dim();
    for p in points {
        if p.len() != d {
            return Err(Error::Argument(format!("point has {} coordinates, expected {d}", p.len())));
        }
        for &x in p {
            check_inside(&grid, x)?;
        }
    }
    let coeffs = normalized_coeffs(f);
    Ok(points
        .iter()
        .map(|p| {
            let mut dims = vec![grid.n(); d];
            let mut cur = coeffs.clone();
            for (axis, &x) in p.iter().enumerate() {
                cur = contract(&cur, &mut dims, axis, &axis_basis(&grid, x), 1);
            }
            cur[0]
        })
        .collect())
}

/// Band-limited interpolant of `f` on the tensor product of per-axis
/// coordinate lists; output is row-major with axis 0 fastest.
pub fn resample_tensor(f: &ComplexField, axes: &[Vec<f64>]) -> Result<Vec<C64>> {
    let masked: Vec<Vec<Option<f64>>> = axes
        .iter()
        .map(|xs| xs.iter().map(|&x| Some(x)).collect())
        .collect();
    resample_tensor_masked(f, &masked)
}

/// As [`resample_tensor`], with `None` coordinates evaluating to zero.
pub(crate) fn resample_tensor_masked(f: &ComplexField, axes: &[Vec<Option<f64>>]) -> Result<Vec<C64>> {
    let grid = *f.grid();
    let d = grid.dim();
    if axes.len() != d {
        return Err(Error::Argument(format!("got {} coordinate lists, expected {d}", axes.len())));
    }
    let mut cur = normalized_coeffs(f);
    let mut dims = vec![grid.n(); d];
    for (axis, xs) in axes.iter().enumerate() {
        let mut basis = Vec::with_capacity(xs.len() * grid.n());
        for x in xs {
            match *x {
                Some(x) => {
                    check_inside(&grid, x)?;
                    basis.extend(axis_basis(&grid, x));
                }
                None => basis.extend(std::iter::repeat_n(C64::new(0.0, 0.0), grid.n())),
            }
        }
        cur = contract(&cur, &mut dims, axis, &basis, xs.len());
    }
    Ok(cur)
}
