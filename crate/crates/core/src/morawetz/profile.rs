//! Unit-radius weight profile `Φ(w) = ∫ χ²(|z - s|) χ²(|s|) ds`, `|z| = w`,
//! stored as a C² quintic Hermite interpolant on `[0, 4]`.

use std::sync::OnceLock;

/// Smoothstep cutoff: 1 on `[0, 1]`, 0 on `[2, ∞)`.
pub fn chi(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let u = r - 1.0;
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

pub fn chi_prime(r: f64) -> f64 {
    if r <= 1.0 || r >= 2.0 {
        0.0
    } else {
        let u = r - 1.0;
        -30.0 * u * u * (1.0 - u) * (1.0 - u)
    }
}

fn chi_second(r: f64) -> f64 {
    if r <= 1.0 || r >= 2.0 {
        0.0
    } else {
        let u = r - 1.0;
        -60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)
    }
}

/// `g = χ²` and its first two radial derivatives.
fn g_all(t: f64) -> (f64, f64, f64) {
    let (c, c1, c2) = (chi(t), chi_prime(t), chi_second(t));
    (c * c, 2.0 * c * c1, 2.0 * (c1 * c1 + c * c2))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

fn integrate_pieces(breaks: &mut Vec<f64>, rule: &[(f64, f64)], mut f: impl FnMut(f64) -> [f64; 3]) -> [f64; 3] {
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut acc = [0.0; 3];
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for &(x, wt) in rule {
            let v = f(mid + half * x);
            for c in 0..3 {
                acc[c] += half * wt * v[c];
            }
        }
    }
    acc
}

/// Surface area of the unit sphere in `R^d`.
pub(crate) fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI,
    }
}

/// `(Φ(w), Φ'(w), ΔΦ(w))` by direct quadrature.
pub(crate) fn phi_quadrature(d: usize, w: f64) -> [f64; 3] {
    if d == 1 {
        let rule = gauss_legendre(12);
        let mut breaks = vec![-2.0, -1.0, 1.0, 2.0];
        for c in [-2.0, -1.0, 1.0, 2.0] {
            let b = w + c;
            if b > -2.0 && b < 2.0 {
                breaks.push(b);
            }
        }
        return integrate_pieces(&mut breaks, &rule, |s| {
            let g0 = g_all(s.abs()).0;
            let r = w - s;
            let (g, g1, g2) = g_all(r.abs());
            [g0 * g, g0 * g1 * r.signum(), g0 * g2]
        });
    }

    let df = d as f64;
    let rule = gauss_legendre(24);
    let lap = |t: f64, g1: f64, g2: f64| if t > 0.0 { g2 + (df - 1.0) * g1 / t } else { 0.0 };
    if w == 0.0 {
        let mut breaks = vec![0.0, 1.0, 2.0];
        let v = integrate_pieces(&mut breaks, &rule, |r| {
            let (g, g1, g2) = g_all(r);
            let jac = r.powi(d as i32 - 1);
            [jac * g * g, 0.0, jac * g * lap(r, g1, g2)]
        });
        let a = sphere_area(d);
        return [a * v[0], 0.0, a * v[2]];
    }

    // integrate over s = ρσ, θ the angle between σ and z
    let polar_area = if d == 2 { 2.0 } else { 2.0 * std::f64::consts::PI };
    let mut breaks = vec![0.0, 1.0, 2.0];
    for c in [1.0, 2.0] {
        for b in [(w - c).abs(), w + c] {
            if b > 0.0 && b < 2.0 {
                breaks.push(b);
            }
        }
    }
    // refine panels geometrically toward each breakpoint
    let mut fine = Vec::new();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    for p in breaks.windows(2) {
        let (a, b) = (p[0], p[1]);
        let m = 0.5 * (a + b);
        fine.extend([a, m]);
        for k in 1..=4 {
            let s = 0.5f64.powi(k);
            fine.push(a + (m - a) * s);
            fine.push(b - (b - m) * s);
        }
    }
    fine.push(2.0);
    let inner_rule = gauss_legendre(20);
    let v = integrate_pieces(&mut fine, &rule, |rho| {
        let g_rho = g_all(rho).0;
        if g_rho == 0.0 {
            return [0.0; 3];
        }
        let mut thetas = vec![0.0, std::f64::consts::PI];
        for c in [1.0f64, 2.0] {
            let cs = (w * w + rho * rho - c * c) / (2.0 * w * rho);
            if cs > -1.0 && cs < 1.0 {
                thetas.push(cs.acos());
            }
        }
        let inner = integrate_pieces(&mut thetas, &inner_rule, |th| {
            let ct = th.cos();
            let t = (w * w + rho * rho - 2.0 * w * rho * ct).max(0.0).sqrt();
            let (g, g1, g2) = g_all(t);
            let sw = if d == 2 { 1.0 } else { th.sin() };
            let radial = if t > 0.0 { g1 * (w - rho * ct) / t } else { 0.0 };
            [g * sw, radial * sw, lap(t, g1, g2) * sw]
        });
        let jac = rho.powi(d as i32 - 1) * g_rho;
        [jac * inner[0], jac * inner[1], jac * inner[2]]
    });
    [polar_area * v[0], polar_area * v[1], polar_area * v[2]]
}

/// Support edge of `Φ`.
pub const SUPPORT: f64 = 4.0;
const CELLS: usize = 512;

#[derive(Debug)]
pub struct Profile {
    dw: f64,
    /// Monomial coefficients in `w - w_i` per cell.
    cells: Vec<[f64; 6]>,
    /// `∫_0^{w_i} P`.
    cumulative: Vec<f64>,
}

impl Profile {
    fn build(dim: usize) -> Self {
        let dw = SUPPORT / CELLS as f64;
        let nodes: Vec<[f64; 3]> = (0..=CELLS)
            .map(|i| {
                let w = i as f64 * dw;
                if i == CELLS {
                    return [0.0; 3];
                }
                let [f, f1, lap] = phi_quadrature(dim, w);
                let f2 = if i == 0 {
                    lap / dim as f64
                } else {
                    lap - (dim as f64 - 1.0) * f1 / w
                };
                [f, if i == 0 { 0.0 } else { f1 }, f2]
            })
            .collect();
        let h = dw;
        let mut cells = Vec::with_capacity(CELLS);
        let mut cumulative = Vec::with_capacity(CELLS + 1);
        cumulative.push(0.0);
        for i in 0..CELLS {
            let [f0, d0, s0] = nodes[i];
            let [f1, d1, s1] = nodes[i + 1];
            let (a0, a1, a2) = (f0, d0, 0.5 * s0);
            let a = f1 - (a0 + a1 * h + a2 * h * h);
            let b = d1 - (a1 + 2.0 * a2 * h);
            let c = s1 - 2.0 * a2;
            let a3 = (20.0 * a - 8.0 * b * h + c * h * h) / (2.0 * h.powi(3));
            let a4 = (-30.0 * a + 14.0 * b * h - 2.0 * c * h * h) / (2.0 * h.powi(4));
            let a5 = (12.0 * a - 6.0 * b * h + c * h * h) / (2.0 * h.powi(5));
            let coeffs = [a0, a1, a2, a3, a4, a5];
            let integral: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, ak)| ak * h.powi(k as i32 + 1) / (k + 1) as f64)
                .sum();
            cumulative.push(cumulative[i] + integral);
            cells.push(coeffs);
        }
        Self { dw, cells, cumulative }
    }

    /// Cached profile for dimension `d`.
    pub fn get(d: usize) -> &'static Profile {
        static CACHE: [OnceLock<Profile>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        CACHE[d - 1].get_or_init(|| Profile::build(d))
    }

    fn locate(&self, w: f64) -> (usize, f64) {
        let i = ((w / self.dw) as usize).min(CELLS - 1);
        (i, w - i as f64 * self.dw)
    }

    /// `(P, P', P'')` at `w >= 0`.
    pub fn eval(&self, w: f64) -> (f64, f64, f64) {
        if w >= SUPPORT {
            return (0.0, 0.0, 0.0);
        }
        let (i, u) = self.locate(w);
        let a = &self.cells[i];
        let p = a[0] + u * (a[1] + u * (a[2] + u * (a[3] + u * (a[4] + u * a[5]))));
        let p1 = a[1] + u * (2.0 * a[2] + u * (3.0 * a[3] + u * (4.0 * a[4] + u * 5.0 * a[5])));
        let p2 = 2.0 * a[2] + u * (6.0 * a[3] + u * (12.0 * a[4] + u * 20.0 * a[5]));
        (p, p1, p2)
    }

    /// `∫_0^w P`.
    pub fn integral(&self, w: f64) -> f64 {
        if w >= SUPPORT {
            return self.total();
        }
        let (i, u) = self.locate(w);
        let a = &self.cells[i];
        let part: f64 = a
            .iter()
            .enumerate()
            .map(|(k, ak)| ak * u.powi(k as i32 + 1) / (k + 1) as f64)
            .sum();
        self.cumulative[i] + part
    }

    pub fn total(&self) -> f64 {
        self.cumulative[CELLS]
    }
}
