use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FftDirection {
    Forward,
    /// Inverse transform including the `1/N` normalization.
    Inverse,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            FftDirection::Forward => p.plan_fft_forward(n),
            FftDirection::Inverse => p.plan_fft_inverse(n),
        }
    })
}

/// In-place `dim`-dimensional transform of a cube with `n` points per axis,
/// axis 0 fastest.
pub(crate) fn fft_nd(data: &mut [Complex64], n: usize, dim: usize, dir: FftDirection) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = plan(n, dir);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    // axis 0 lines are contiguous
    fft.process_with_scratch(data, &mut scratch);

    let mut buf = Vec::new();
    for axis in 1..dim {
        let stride = n.pow(axis as u32);
        let block = stride * n;
        buf.resize(block, Complex64::new(0.0, 0.0));
        for chunk in data.chunks_exact_mut(block) {
            for o in 0..stride {
                for j in 0..n {
                    buf[o * n + j] = chunk[o + j * stride];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for o in 0..stride {
                for j in 0..n {
                    chunk[o + j * stride] = buf[o * n + j];
                }
            }
        }
    }

    if dir == FftDirection::Inverse {
        let s = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }
}
