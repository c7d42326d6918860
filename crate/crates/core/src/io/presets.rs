use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::{Preset, RunConfig};
use super::snapshot::read_snapshot;
use crate::error::{Error, Result};
use crate::field::{fourier_truncate, mass, ComplexField, C64};
use crate::ground_state::{solve_ground_state, GroundState};

/// Largest wavenumber of the perturbation noise.
const NOISE_BAND: f64 = 4.0;

/// Unit-norm, band-limited complex noise under a Gaussian envelope of
/// width `L/4`, drawn from ChaCha8 seeded with `seed`.
pub fn band_limited_noise(grid: crate::field::Grid, seed: u64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<C64> = (0..grid.len())
        .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let white = ComplexField::new(grid, samples, 0.0).expect("normal samples are finite");
    let band = fourier_truncate(&white, NOISE_BAND.min(grid.nyquist()));
    let s = grid.half_width() / 4.0;
    let shaped = band.map_with_point(|x, z| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        z * (-r2 / (2.0 * s * s)).exp()
    });
    let norm = mass(&shaped).sqrt();
    shaped.scaled(C64::new(1.0 / norm, 0.0))
}

/// Solves the ground state on the configured grid when the preset needs it.
pub fn ground_state_for(cfg: &RunConfig) -> Result<Option<GroundState>> {
    if cfg.preset.needs_ground_state() {
        solve_ground_state(cfg.grid, cfg.ground_state_tol).map(Some)
    } else {
        Ok(None)
    }
}

fn with_boost(f: ComplexField, boost: &[f64]) -> ComplexField {
    if boost.iter().all(|b| *b == 0.0) {
        return f;
    }
    f.map_with_point(|x, z| {
        let ph: f64 = x.iter().zip(boost).map(|(a, b)| a * b).sum();
        z * C64::from_polar(1.0, ph)
    })
}

/// Builds the initial field; `q` must be given for ground-state presets.
pub fn initial_field(cfg: &RunConfig, q: Option<&GroundState>) -> Result<ComplexField> {
    let d = cfg.grid.dim();
    let p = &cfg.params;
    let need_q = || q.ok_or_else(|| Error::Argument("preset needs the ground state".into()));
    let boost = p.boost_or_zero(d);
    Ok(match &cfg.preset {
        Preset::Gaussian => {
            let f = ComplexField::from_real_fn(cfg.grid, 0.0, |x| {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                p.amplitude * (-r2 / (2.0 * p.width * p.width)).exp()
            });
            with_boost(f, &boost)
        }
        Preset::Soliton => need_q()?.field.clone(),
        Preset::BoostedSoliton => with_boost(need_q()?.field.clone(), &boost),
        Preset::ScaledSoliton => need_q()?.field.scaled(C64::new(p.scale, 0.0)),
        Preset::PerturbedSoliton => {
            let q = need_q()?;
            let noise = band_limited_noise(cfg.grid, p.seed);
            let f = q.field.add(&noise.scaled(C64::new(p.perturbation, 0.0)))?;
            let f = with_boost(f, &boost);
            f.scaled(C64::new((mass(&q.field) / mass(&f)).sqrt(), 0.0))
        }
        Preset::File(path) => {
            let f = read_snapshot(path)?;
            if *f.grid() != cfg.grid {
                return Err(Error::GridMismatch(format!(
                    "snapshot {} has grid {:?}, config has {:?}",
                    path.display(),
                    f.grid(),
                    cfg.grid
                )));
            }
            f
        }
    })
}
