//! Multidimensional complex FFT over the grid layout.
//!
//! Forward: `F[k] = sum_j f[j] exp(-i xi_k . x_j)`. Inverse carries the `1/N^n`
//! factor, so a plane wave `exp(i xi_k . x)` maps to a single spectral sample
//! and every multiplier acts on it by plain multiplication.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Grid;

struct Plan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

// Plans are immutable once built; the cache only hands out shared references.
fn plan(points: usize) -> Arc<Plan> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plan>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(points)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plan {
                forward: planner.plan_fft_forward(points),
                inverse: planner.plan_fft_inverse(points),
            })
        })
        .clone()
}

fn transform_component(grid: &Grid, data: &mut [Complex64], fft: &dyn Fft<f64>) {
    let n = grid.points();
    let dim = grid.dim();
    let total = grid.len();
    debug_assert_eq!(data.len(), total);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

    // Last axis is contiguous: all lines in one call.
    fft.process_with_scratch(data, &mut scratch);

    let mut lines = Vec::new();
    for axis in 0..dim - 1 {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = n * stride;
        lines.resize(block, Complex64::new(0.0, 0.0));
        for base in (0..total).step_by(block) {
            let chunk = &mut data[base..base + block];
            for t in 0..n {
                for inner in 0..stride {
                    lines[inner * n + t] = chunk[t * stride + inner];
                }
            }
            fft.process_with_scratch(&mut lines, &mut scratch);
            for t in 0..n {
                for inner in 0..stride {
                    chunk[t * stride + inner] = lines[inner * n + t];
                }
            }
        }
    }
}

/// In-place forward transform of every component of a component-major buffer.
pub(crate) fn forward(grid: &Grid, data: &mut [Complex64]) {
    let p = plan(grid.points());
    for comp in data.chunks_mut(grid.len()) {
        transform_component(grid, comp, p.forward.as_ref());
    }
}

/// In-place inverse transform, normalized so that `inverse(forward(f)) == f`.
pub(crate) fn inverse(grid: &Grid, data: &mut [Complex64]) {
    let p = plan(grid.points());
    let scale = 1.0 / grid.len() as f64;
    for comp in data.chunks_mut(grid.len()) {
        transform_component(grid, comp, p.inverse.as_ref());
        for v in comp.iter_mut() {
            *v *= scale;
        }
    }
}
