use log::info;

use super::profile::{chi, Profile, SUPPORT};
use crate::error::{Error, Result};
use crate::field::Grid;

/// Radial weights `φ_R(r) = Φ(r/R)` and `ψ_R(r) = r^{-1} ∫_0^r φ_R`, with
/// `ψ` truncated to zero beyond `r = L`.
#[derive(Debug, Clone)]
pub struct MorawetzWeights {
    grid: Grid,
    radius: f64,
    profile: &'static Profile,
    table_spacing: f64,
    phi_table: Vec<f64>,
    psi_table: Vec<f64>,
    max_lap_psi: f64,
}

/// Table spacing in units of the grid spacing.
const TABLE_REFINEMENT: f64 = 4.0;

/// Builds the weights at radius `radius` for `grid`, checking every invariant.
pub fn build_weights(radius: f64, grid: &Grid) -> Result<MorawetzWeights> {
    let h = grid.spacing();
    let l = grid.half_width();
    if !(radius.is_finite() && radius >= 4.0 * h - 1e-12 * h) {
        return Err(Error::Argument(format!("radius {radius} is below 4h = {}", 4.0 * h)));
    }
    if 8.0 * radius > l * (1.0 + 1e-12) {
        return Err(Error::Argument(format!("radius {radius} exceeds L/8 = {}", l / 8.0)));
    }
    let profile = Profile::get(grid.dim());
    let mut w = MorawetzWeights {
        grid: *grid,
        radius,
        profile,
        table_spacing: h / TABLE_REFINEMENT,
        phi_table: Vec::new(),
        psi_table: Vec::new(),
        max_lap_psi: 0.0,
    };
    let count = (l / w.table_spacing).round() as usize + 1;
    w.phi_table = (0..count).map(|i| w.phi(i as f64 * w.table_spacing)).collect();
    w.psi_table = (0..count).map(|i| w.psi(i as f64 * w.table_spacing)).collect();
    w.max_lap_psi = (0..count)
        .map(|i| w.lap_psi(i as f64 * w.table_spacing).abs())
        .fold(0.0, f64::max);
    w.verify()?;
    info!(
        "morawetz weights: d={} R={radius} max|Δψ|={:.6e} (R² max|Δψ| = {:.6e})",
        grid.dim(),
        w.max_lap_psi,
        w.max_lap_psi * radius * radius
    );
    Ok(w)
}

impl MorawetzWeights {
    fn verify(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::Construction(format!("weight invariant violated: {what}")));
        let phi0 = self.phi_table[0];
        let tol = 1e-12 * phi0;
        let dr = self.table_spacing;
        let total = self.phi_integral();
        for (i, (&p, &s)) in self.phi_table.iter().zip(&self.psi_table).enumerate() {
            let r = i as f64 * dr;
            if p < -tol {
                return fail("φ >= 0");
            }
            if r >= SUPPORT * self.radius && p != 0.0 {
                return fail("φ = 0 beyond 4R");
            }
            if r * s > total + tol * r.max(1.0) {
                return fail("r ψ(r) <= ∫φ");
            }
            if r <= self.radius && p < 0.5 * phi0 {
                return fail("φ(r) >= φ(0)/2 for r <= R");
            }
            if i > 0 {
                if p > self.phi_table[i - 1] + tol {
                    return fail("φ nonincreasing");
                }
                if s > self.psi_table[i - 1] + tol {
                    return fail("ψ nonincreasing");
                }
            }
        }
        if (self.psi_table[0] - phi0).abs() > tol || (self.psi(dr * 1e-6) - phi0).abs() > 1e-9 * phi0 {
            return fail("ψ(0+) = φ(0)");
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Radial cutoff `χ(r / R)`.
    pub fn chi(&self, r: f64) -> f64 {
        chi(r / self.radius)
    }

    pub fn table_spacing(&self) -> f64 {
        self.table_spacing
    }

    pub fn phi_table(&self) -> &[f64] {
        &self.phi_table
    }

    pub fn psi_table(&self) -> &[f64] {
        &self.psi_table
    }

    /// Largest `|Δψ|` over the table points.
    pub fn max_lap_psi(&self) -> f64 {
        self.max_lap_psi
    }

    /// `∫_0^∞ φ(r) dr`.
    pub fn phi_integral(&self) -> f64 {
        self.radius * self.profile.total()
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.profile.eval(r / self.radius).0
    }

    pub fn phi_prime(&self, r: f64) -> f64 {
        self.profile.eval(r / self.radius).1 / self.radius
    }

    pub fn lap_phi(&self, r: f64) -> f64 {
        let w = r / self.radius;
        let (_, p1, p2) = self.profile.eval(w);
        let d = self.dim() as f64;
        let lap = if w == 0.0 { d * p2 } else { p2 + (d - 1.0) * p1 / w };
        lap / (self.radius * self.radius)
    }

    fn truncated(&self, r: f64) -> bool {
        r > self.grid.half_width()
    }

    pub fn psi(&self, r: f64) -> f64 {
        if self.truncated(r) {
            return 0.0;
        }
        let w = r / self.radius;
        if w == 0.0 {
            self.profile.eval(0.0).0
        } else {
            self.profile.integral(w) / w
        }
    }

    /// `ψ'(r) = (φ - ψ) / r`, zero at the origin.
    pub fn psi_prime(&self, r: f64) -> f64 {
        if r == 0.0 || self.truncated(r) {
            return 0.0;
        }
        (self.phi(r) - self.psi(r)) / r
    }

    /// `Δψ = φ'/r + (d - 3)(φ - ψ)/r²`, with the limit `d φ''(0)/3` at the origin.
    pub fn lap_psi(&self, r: f64) -> f64 {
        if self.truncated(r) {
            return 0.0;
        }
        let d = self.dim() as f64;
        if r == 0.0 {
            let p2 = self.profile.eval(0.0).2;
            return d * p2 / (3.0 * self.radius * self.radius);
        }
        self.phi_prime(r) / r + (d - 3.0) * (self.phi(r) - self.psi(r)) / (r * r)
    }
}
