//! Thin 2D FFT wrapper used by the split-step propagator and grid synthesis.
//!
//! Frequency-box coefficients (indexed by k with `‖k‖_∞ ≤ N`) are embedded
//! into an M×M periodic grid with M large enough that the embedding is
//! alias-free for the trig polynomials the crate manipulates.

use crate::C64;
use ndarray::Array2;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Forward/inverse plans for one grid size.
pub struct Fft2 {
    pub m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            fwd: planner.plan_fft_forward(m),
            inv: planner.plan_fft_inverse(m),
        }
    }

    fn transform(&self, grid: &mut Array2<C64>, plan: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        let mut scratch = vec![C64::ZERO; m];
        for mut row in grid.rows_mut() {
            scratch.copy_from_slice(row.as_slice().expect("contiguous row"));
            plan.process(&mut scratch);
            row.as_slice_mut().unwrap().copy_from_slice(&scratch);
        }
        for mut col in grid.columns_mut() {
            for (s, v) in scratch.iter_mut().zip(col.iter()) {
                *s = *v;
            }
            plan.process(&mut scratch);
            for (v, s) in col.iter_mut().zip(scratch.iter()) {
                *v = *s;
            }
        }
    }

    /// Coefficients (mode k at wrapped index) -> sampled values on the grid
    /// `x_j = j/M`. Uses the inverse transform without normalization, which
    /// matches `f(x_j) = Σ_k c_k e^{2πi k·j/M}`.
    pub fn synthesize(&self, grid: &mut Array2<C64>) {
        self.transform(grid, &self.inv.clone());
    }

    /// Sampled values -> coefficients (normalized by 1/M²).
    pub fn analyze(&self, grid: &mut Array2<C64>) {
        self.transform(grid, &self.fwd.clone());
        let norm = 1.0 / (self.m * self.m) as f64;
        grid.mapv_inplace(|c| c * norm);
    }

    /// Wrapped grid index for a signed frequency.
    pub fn index(&self, k: i64) -> usize {
        k.rem_euclid(self.m as i64) as usize
    }
}

/// Smallest power of two at least `2(2N+1)`; keeps mode products of box
/// states with the crate's small-support potentials alias-free.
pub fn grid_size_for_box(n: i32) -> usize {
    (2 * (2 * n as usize + 1)).next_power_of_two()
}
