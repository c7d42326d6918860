//! Independent oracles and helpers shared by the integration tests.
#![allow(dead_code)]

pub mod pair_sum;

use std::sync::OnceLock;

use nlslab::field::Grid;
use nlslab::ground_state::{solve_ground_state, GroundState};

/// Result of shooting the radial ground-state ODE.
#[derive(Debug, Clone, Copy)]
pub struct ShootingResult {
    pub peak: f64,
    pub mass: f64,
}

/// Surface area of the unit sphere in R^d.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => unreachable!(),
    }
}

enum Outcome {
    /// Solution crossed zero: peak too large.
    Crossed,
    /// Solution turned back up before crossing: peak too small.
    Turned,
    Reached,
}

/// State (Q, Q', mass integral).
type State = [f64; 3];

fn rhs(d: usize, r: f64, y: &State) -> State {
    let p = 4.0 / d as f64;
    let q = y[0];
    let qp = y[1];
    let damping = if r > 0.0 { (d as f64 - 1.0) * qp / r } else { 0.0 };
    let qpp = q - q * q.abs().powf(p) - damping;
    [qp, qpp, sphere_area(d) * q * q * r.powi(d as i32 - 1)]
}

/// Dormand-Prince 5(4) integration from the series start until the profile
/// crosses zero, turns upward, or reaches `r_max`.
fn integrate(d: usize, a: f64, r_max: f64) -> (Outcome, f64) {
    let p = 4.0 / d as f64;
    let r0 = 1e-4;
    let c2 = (a - a.powf(1.0 + p)) / (2.0 * d as f64);
    let mut r = r0;
    let mut y: State = [
        a + c2 * r0 * r0,
        2.0 * c2 * r0,
        sphere_area(d) * a * a * r0.powi(d as i32) / d as f64,
    ];
    let mut h: f64 = 1e-3;
    let (atol, rtol) = (1e-14, 1e-13);

    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut last_mass = y[2];
    while r < r_max {
        h = h.min(r_max - r);
        let mut k = [[0.0; 3]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for c in 0..3 {
                    ys[c] += h * A[s][j] * kj[c];
                }
            }
            k[s] = rhs(d, r + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut err: f64 = 0.0;
        for c in 0..3 {
            let mut e = 0.0;
            for s in 0..7 {
                y5[c] += h * B5[s] * k[s][c];
                e += h * (B5[s] - B4[s]) * k[s][c];
            }
            if c < 2 {
                let sc = atol + rtol * y[c].abs().max(y5[c].abs());
                err = err.max((e / sc).abs());
            }
        }
        if err <= 1.0 {
            r += h;
            y = y5;
            if y[0] < 0.0 {
                return (Outcome::Crossed, last_mass);
            }
            if y[1] > 0.0 {
                return (Outcome::Turned, last_mass);
            }
            last_mass = y[2];
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    (Outcome::Reached, last_mass)
}

/// Shoots `Q'' + (d-1)Q'/r - Q + Q^{1+4/d} = 0`, `Q'(0) = 0`, bisecting on
/// `Q(0)` and integrating the mass up to the point of departure.
pub fn shoot_ground_state(d: usize, r_max: f64) -> ShootingResult {
    let (mut lo, mut hi) = (1.0f64, 5.0f64);
    let mut mass = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        match integrate(d, mid, r_max) {
            (Outcome::Crossed, _) => hi = mid,
            (Outcome::Turned, m) | (Outcome::Reached, m) => {
                lo = mid;
                mass = m;
            }
        }
    }
    ShootingResult { peak: lo, mass }
}

/// Ground states shared across tests in one binary.
pub fn ground_state_1d() -> &'static GroundState {
    static Q: OnceLock<GroundState> = OnceLock::new();
    Q.get_or_init(|| solve_ground_state(Grid::new(1, 512, 12.0).unwrap(), 1e-10).unwrap())
}

/// 1D ground state on a box wide enough for soliton dynamics.
pub fn ground_state_1d_wide() -> &'static GroundState {
    static Q: OnceLock<GroundState> = OnceLock::new();
    Q.get_or_init(|| solve_ground_state(Grid::new(1, 512, 24.0).unwrap(), 1e-10).unwrap())
}

pub fn ground_state_2d() -> &'static GroundState {
    static Q: OnceLock<GroundState> = OnceLock::new();
    Q.get_or_init(|| solve_ground_state(Grid::new(2, 128, 12.8).unwrap(), 1e-8).unwrap())
}

pub fn gaussian(x: &[f64], width: f64) -> f64 {
    (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * width * width)).exp()
}
