//! Direct pair-sum evaluation of the interaction functionals.

use nlslab::field::{spectral_gradient, ComplexField};
use nlslab::morawetz::MorawetzWeights;

pub struct PairTerms {
    pub functional: f64,
    pub gradient_radial: f64,
    pub gradient_angular: f64,
    pub momentum_pair: f64,
    pub mass: f64,
    pub nonlinear: f64,
}

/// Every term by brute force over all lattice pairs, with the kernel written
/// as `K_jk = δ_jk ψ + z_j z_k ψ'(r)/r`.
pub fn pair_terms(f: &ComplexField, w: &MorawetzWeights, mu: f64) -> PairTerms {
    let grid = *f.grid();
    let d = grid.dim();
    let df = d as f64;
    let n = grid.len();
    let grad = spectral_gradient(f);
    let u = f.samples();
    let rho: Vec<f64> = u.iter().map(|z| z.norm_sqr()).collect();
    let m: Vec<Vec<f64>> = (0..d)
        .map(|j| (0..n).map(|i| (u[i].conj() * grad[j].samples()[i]).im).collect())
        .collect();
    let pot: Vec<f64> = rho.iter().map(|r| r.powf(1.0 + 2.0 / df)).collect();
    let pts: Vec<[f64; 3]> = (0..n).map(|i| grid.point(i)).collect();

    let mut t = PairTerms {
        functional: 0.0,
        gradient_radial: 0.0,
        gradient_angular: 0.0,
        momentum_pair: 0.0,
        mass: 0.0,
        nonlinear: 0.0,
    };
    for x in 0..n {
        let s: Vec<Vec<f64>> = (0..d)
            .map(|j| (0..d).map(|k| 2.0 * (grad[j].samples()[x].conj() * grad[k].samples()[x]).re).collect())
            .collect();
        for y in 0..n {
            let z: Vec<f64> = (0..d).map(|a| pts[x][a] - pts[y][a]).collect();
            let r = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            let (phi, psi) = (w.phi(r), w.psi(r));
            let dpsi_over_r = if r > 0.0 { w.psi_prime(r) / r } else { 0.0 };
            for j in 0..d {
                t.functional += m[j][x] * rho[y] * z[j] * psi;
                for k in 0..d {
                    let delta = if j == k { 1.0 } else { 0.0 };
                    let kjk = delta * psi + z[j] * z[k] * dpsi_over_r;
                    let zz = if r > 0.0 { z[j] * z[k] / (r * r) } else { delta / df };
                    t.gradient_radial += rho[y] * s[j][k] * phi * zz;
                    t.gradient_angular += rho[y] * s[j][k] * (kjk - phi * zz);
                    t.momentum_pair -= 2.0 * m[j][x] * m[k][y] * kjk;
                }
            }
            t.mass -= 0.5 * rho[x] * rho[y] * (w.lap_phi(r) + (df - 1.0) * w.lap_psi(r));
            t.nonlinear += mu * 2.0 / (df + 2.0) * pot[x] * rho[y] * (phi + (df - 1.0) * psi);
        }
    }
    let dv2 = grid.cell_volume().powi(2);
    t.functional *= dv2;
    t.gradient_radial *= dv2;
    t.gradient_angular *= dv2;
    t.momentum_pair *= dv2;
    t.mass *= dv2;
    t.nonlinear *= dv2;
    t
}
