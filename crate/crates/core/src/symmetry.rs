//! The four-parameter symmetry group, Galilean boosts, and the
//! pseudoconformal transform, applied to single snapshots.
//!
//! A [`GroupElement`] acts by
//! `(g f)(x) = λ^{d/2} e^{i x·ξ} e^{iγ} f(λx + x0)`.
//! [`galilean_boost`] uses the flow-level convention with frequency `ξ0/2`;
//! the boost at `t = 0` equals the element `(1, 0, ξ0/2, 0)`.

use crate::error::{Error, Result};
use crate::field::{resample_tensor_masked, ComplexField, Grid, Spectrum, C64};

/// Largest scale ratio accepted by one application of [`apply_group`].
pub const MAX_SCALE_RATIO: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    pub dim: usize,
    pub lambda: f64,
    /// Translation; entries beyond `dim` are zero.
    pub x0: [f64; 3],
    pub xi0: [f64; 3],
    pub gamma: f64,
}

fn pad(v: &[f64]) -> [f64; 3] {
    let mut out = [0.0; 3];
    out[..v.len()].copy_from_slice(v);
    out
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl GroupElement {
    pub fn new(lambda: f64, x0: &[f64], xi0: &[f64], gamma: f64) -> Result<Self> {
        let dim = x0.len();
        if !(1..=3).contains(&dim) || xi0.len() != dim {
            return Err(Error::Argument(format!(
                "translation and frequency need matching length 1..=3, got {} and {}",
                x0.len(),
                xi0.len()
            )));
        }
        let g = Self { dim, lambda, x0: pad(x0), xi0: pad(xi0), gamma };
        if !(lambda > 0.0) || !g.is_finite() {
            return Err(Error::Argument(format!("invalid group element {g:?}")));
        }
        Ok(g)
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, lambda: 1.0, x0: [0.0; 3], xi0: [0.0; 3], gamma: 0.0 }
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0[..self.dim]
    }

    pub fn xi0(&self) -> &[f64] {
        &self.xi0[..self.dim]
    }

    fn is_finite(&self) -> bool {
        self.lambda.is_finite()
            && self.gamma.is_finite()
            && self.x0.iter().chain(&self.xi0).all(|v| v.is_finite())
    }

    /// Largest absolute parameter difference, phases compared modulo 2π.
    pub fn max_param_diff(&self, other: &GroupElement) -> f64 {
        let mut m = (self.lambda - other.lambda).abs();
        for a in 0..self.dim {
            m = m.max((self.x0[a] - other.x0[a]).abs());
            m = m.max((self.xi0[a] - other.xi0[a]).abs());
        }
        m.max(phase_distance(self.gamma, other.gamma))
    }
}

/// `|a - b|` reduced to `[0, π]`.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let d = (a - b).rem_euclid(tau);
    d.min(tau - d)
}

/// Element acting as `g2` after `g1`.
pub fn compose(g2: &GroupElement, g1: &GroupElement) -> GroupElement {
    let mut x0 = [0.0; 3];
    let mut xi0 = [0.0; 3];
    for a in 0..3 {
        x0[a] = g1.lambda * g2.x0[a] + g1.x0[a];
        xi0[a] = g2.xi0[a] + g2.lambda * g1.xi0[a];
    }
    GroupElement {
        dim: g2.dim,
        lambda: g1.lambda * g2.lambda,
        x0,
        xi0,
        gamma: g1.gamma + g2.gamma + dot(&g2.x0, &g1.xi0),
    }
}

pub fn inverse(g: &GroupElement) -> GroupElement {
    let l = g.lambda;
    let mut x0 = [0.0; 3];
    let mut xi0 = [0.0; 3];
    for a in 0..3 {
        x0[a] = -g.x0[a] / l;
        xi0[a] = -g.xi0[a] / l;
    }
    GroupElement {
        dim: g.dim,
        lambda: 1.0 / l,
        x0,
        xi0,
        gamma: -g.gamma + dot(&g.x0, &g.xi0) / l,
    }
}

fn check_dim(g: &GroupElement, grid: &Grid) -> Result<()> {
    if g.dim != grid.dim() {
        return Err(Error::Argument(format!(
            "group element has dimension {}, field has {}",
            g.dim,
            grid.dim()
        )));
    }
    Ok(())
}

/// Applies `g` to `f` by band-limited resampling at the wrapped points
/// `λx + x0`.
pub fn apply_group(g: &GroupElement, f: &ComplexField) -> Result<ComplexField> {
    if !(1.0 / MAX_SCALE_RATIO..=MAX_SCALE_RATIO).contains(&g.lambda) {
        return Err(Error::Argument(format!(
            "scale {} outside the per-application range [1/{MAX_SCALE_RATIO}, {MAX_SCALE_RATIO}]",
            g.lambda
        )));
    }
    apply_group_unchecked(g, f)
}

pub(crate) fn apply_group_unchecked(g: &GroupElement, f: &ComplexField) -> Result<ComplexField> {
    let grid = *f.grid();
    check_dim(g, &grid)?;
    if *g == GroupElement::identity(g.dim) {
        return Ok(f.clone());
    }
    let d = grid.dim();
    let (coords, vals) = affine_resample(f, g.lambda, &g.x0[..d])?;
    let amp = g.lambda.powf(d as f64 / 2.0);
    let samples = vals
        .into_iter()
        .enumerate()
        .map(|(i, z)| {
            let idx = grid.multi_index(i);
            let phase: f64 = (0..d).map(|a| coords[a][idx[a]] * g.xi0[a]).sum::<f64>() + g.gamma;
            z * C64::from_polar(amp, phase)
        })
        .collect();
    Ok(ComplexField::from_raw(grid, samples, f.time()))
}

/// Per-axis circular mean of `|f|^2`, a center that is well defined on the
/// periodic box.
pub fn circular_center(f: &ComplexField) -> Vec<f64> {
    let grid = *f.grid();
    let d = grid.dim();
    let l = grid.half_width();
    let w = std::f64::consts::PI / l;
    let mut acc = [C64::new(0.0, 0.0); 3];
    for (i, z) in f.samples().iter().enumerate() {
        let p = grid.point(i);
        let rho = z.norm_sqr();
        for a in 0..d {
            acc[a] += C64::from_polar(rho, w * p[a]);
        }
    }
    acc[..d].iter().map(|c| if c.norm() > 0.0 { c.arg() / w } else { 0.0 }).collect()
}

/// Evaluates `f(s x + x0)` on the lattice, treating `f` as the periodic
/// interpolant restricted to the box-sized window around its circular center
/// and zero outside. Output coordinates are unwrapped into the window around
/// the image center; they are returned per axis for phase evaluation.
fn affine_resample(f: &ComplexField, s: f64, x0: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<C64>)> {
    let grid = *f.grid();
    let l = grid.half_width();
    let center = circular_center(f);
    let xs = grid.coords();
    let mut coords = Vec::with_capacity(grid.dim());
    let mut axes = Vec::with_capacity(grid.dim());
    for (a, &c) in center.iter().enumerate() {
        let c_out = (c - x0[a]) / s;
        let unwrapped: Vec<f64> = xs.iter().map(|&x| c_out + grid.wrap(x - c_out)).collect();
        let sample: Vec<Option<f64>> = unwrapped
            .iter()
            .map(|&x| {
                let y = s * x + x0[a];
                if (-l..l).contains(&(y - c)) {
                    Some(grid.wrap(y))
                } else {
                    None
                }
            })
            .collect();
        coords.push(unwrapped);
        axes.push(sample);
    }
    Ok((coords, resample_tensor_masked(f, &axes)?))
}

/// Exact periodic translation `f(x - shift)` by a Fourier phase.
pub fn translate(f: &ComplexField, shift: &[f64]) -> ComplexField {
    let mut s = Spectrum::of(f);
    s.apply(|k| {
        let ph: f64 = k.iter().zip(shift).map(|(a, b)| a * b).sum();
        C64::from_polar(1.0, -ph)
    });
    s.into_field(f.time())
}

/// `v(t,x) = e^{i(ξ0/2)·(x - (ξ0/2)t)} u(t, x - ξ0 t)` for a snapshot of `u`
/// stamped at `t`.
pub fn galilean_boost(f: &ComplexField, xi0: &[f64], t: f64) -> Result<ComplexField> {
    let grid = *f.grid();
    if xi0.len() != grid.dim() {
        return Err(Error::Argument(format!(
            "boost has {} components, field dimension is {}",
            xi0.len(),
            grid.dim()
        )));
    }
    check_time(f, t)?;
    if xi0.iter().all(|&v| v == 0.0) {
        return Ok(f.clone());
    }
    let shift: Vec<f64> = xi0.iter().map(|v| v * t).collect();
    let moved = if t == 0.0 { f.clone() } else { translate(f, &shift) };
    Ok(moved.map_with_point(|x, z| {
        let ph: f64 = x.iter().zip(xi0).map(|(xa, k)| 0.5 * k * (xa - 0.5 * k * t)).sum();
        z * C64::from_polar(1.0, ph)
    }))
}

fn check_time(f: &ComplexField, t: f64) -> Result<()> {
    if (f.time() - t).abs() > 1e-12 * t.abs().max(1.0) {
        return Err(Error::Argument(format!(
            "snapshot is stamped at t = {}, expected {t}",
            f.time()
        )));
    }
    Ok(())
}

/// `v(t,x) = |t|^{-d/2} conj(u(1/t, x/t)) e^{i|x|^2/4t}` from a snapshot of
/// `u` stamped at `1/t`.
pub fn pseudoconformal(f: &ComplexField, t: f64) -> Result<ComplexField> {
    if t == 0.0 || !t.is_finite() {
        return Err(Error::Argument("pseudoconformal target time must be finite and nonzero".into()));
    }
    if !(1.0 / MAX_SCALE_RATIO..=MAX_SCALE_RATIO).contains(&t.abs()) {
        return Err(Error::Argument(format!(
            "|t| = {} outside the resampling range [1/{MAX_SCALE_RATIO}, {MAX_SCALE_RATIO}]",
            t.abs()
        )));
    }
    check_time(f, 1.0 / t)?;
    let grid = *f.grid();
    let d = grid.dim();
    let (coords, vals) = affine_resample(f, 1.0 / t, &[0.0; 3][..d])?;
    let amp = t.abs().powf(-(d as f64) / 2.0);
    let samples = vals
        .into_iter()
        .enumerate()
        .map(|(i, z)| {
            let idx = grid.multi_index(i);
            let r2: f64 = (0..d).map(|a| coords[a][idx[a]].powi(2)).sum();
            z.conj() * C64::from_polar(amp, r2 / (4.0 * t))
        })
        .collect();
    Ok(ComplexField::from_raw(grid, samples, t))
}
