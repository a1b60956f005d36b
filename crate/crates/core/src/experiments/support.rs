//! Shared numerics for the dynamical experiments: box sizing for wave
//! packets, Gauss-Hermite quadrature for Gaussian phase-space ensembles, and
//! checkpointed split-step evolution.

use crate::error::Result;
use crate::quantum::{HamiltonianSpec, QuantumState, SplitStep};
use crate::weyl::FreqBox;
use ndarray::Array2;
use ndarray_linalg::{Eigh, UPLO};
use std::f64::consts::TAU;

/// Frequency box holding a packet at ξ₀ with an 8√ħ momentum margin
/// (Gaussian tails beyond it are ≲ e^{-64}) plus slack for the slow
/// momentum drift of order ε.
pub fn packet_box(hbar: f64, xi0: [f64; 2]) -> FreqBox {
    let r = (xi0[0] * xi0[0] + xi0[1] * xi0[1]).sqrt();
    let n = ((r + 8.0 * hbar.sqrt() + 0.25 * hbar.powf(0.25)) / (TAU * hbar)).ceil() as i32;
    FreqBox::new(n)
}

/// Gauss-Hermite rule adapted to a standard normal weight: `Σ w_j f(t_j)`
/// equals `E[f(Z)]`, Z ~ N(0,1), exactly for polynomial f of degree < 2n.
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Golub-Welsch on the symmetric Jacobi matrix of the Hermite family.
    pub fn new(n: usize) -> Self {
        let mut jac = Array2::<f64>::zeros((n, n));
        for i in 0..n - 1 {
            let b = ((i + 1) as f64 / 2.0).sqrt();
            jac[[i, i + 1]] = b;
            jac[[i + 1, i]] = b;
        }
        let (vals, vecs) = jac.eigh(UPLO::Lower).expect("hermite jacobi eigensolve");
        // physicists' weight e^{-t²}: node t_j, weight √π v₀²; switch to the
        // N(0,1) normalization z = √2 t so Σw = 1 with no constants left
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|j| (vals[j] * 2f64.sqrt(), vecs[[0, j]] * vecs[[0, j]]))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        GaussHermite {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }
}

/// Weighted (u, η) cloud discretizing a product Gaussian.
pub fn gaussian_ensemble(
    mean: (f64, f64),
    var: (f64, f64),
    n: usize,
) -> Vec<(f64, f64, f64)> {
    let gh = GaussHermite::new(n);
    let (su, se) = (var.0.sqrt(), var.1.sqrt());
    let mut out = Vec::with_capacity(n * n);
    for (zu, wu) in gh.nodes.iter().zip(gh.weights.iter()) {
        for (ze, we) in gh.nodes.iter().zip(gh.weights.iter()) {
            out.push((mean.0 + su * zu, mean.1 + se * ze, wu * we));
        }
    }
    out
}

/// States at (approximately) the requested times, reached by whole split
/// steps; returns `(actual_time, state)` pairs including t = 0.
pub fn evolve_checkpoints(
    spec: &HamiltonianSpec,
    box_: FreqBox,
    psi0: &QuantumState,
    times: &[f64],
    dt: f64,
    leak_tol: f64,
) -> Result<Vec<(f64, QuantumState)>> {
    let stepper = SplitStep::new(spec.clone(), box_, dt)?;
    let mut out = vec![(0.0, psi0.clone())];
    let mut cur = psi0.clone();
    let mut steps_done: usize = 0;
    for &t in times {
        let target = (t / dt).round().max(0.0) as usize;
        if target > steps_done {
            cur = stepper.evolve(&cur, target - steps_done, leak_tol)?;
            steps_done = target;
        }
        out.push((steps_done as f64 * dt, cur.clone()));
    }
    Ok(out)
}
