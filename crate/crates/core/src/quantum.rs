//! States and dynamics: Fourier-box wave functions, the semiclassical
//! Hamiltonian `H = Op(‖ξ‖²/2) + ε²V(x)`, spectral propagation via a dense
//! Hermitian eigensolver, and a Strang split-step propagator on an FFT grid
//! for boxes where the dense route is too expensive.

use crate::error::{Error, Result};
use crate::fft::{grid_size_for_box, Fft2};
use crate::potential::FourierField;
use crate::weyl::{quantize, FreqBox, OperatorMatrix, Symbol};
use crate::C64;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use std::f64::consts::{PI, TAU};

/// Wave function as Fourier coefficients on a truncation box.
#[derive(Debug, Clone)]
pub struct QuantumState {
    pub box_: FreqBox,
    pub hbar: f64,
    pub coeffs: Array1<C64>,
}

impl QuantumState {
    pub fn new(box_: FreqBox, hbar: f64, coeffs: Array1<C64>) -> Result<Self> {
        if coeffs.len() != box_.dim() {
            return Err(Error::Config(format!(
                "state length {} does not match box dimension {}",
                coeffs.len(),
                box_.dim()
            )));
        }
        Ok(Self { box_, hbar, coeffs })
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        assert!(n > 0.0);
        self.coeffs.mapv_inplace(|c| c / n);
        self
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Expectation ⟨ψ, A ψ⟩ of a dense operator.
    pub fn expectation(&self, op: &OperatorMatrix) -> C64 {
        assert_eq!(op.box_, self.box_);
        let av = op.apply(&self.coeffs);
        self.coeffs
            .iter()
            .zip(av.iter())
            .map(|(c, v)| c.conj() * v)
            .sum()
    }

    /// Probability mass on frequencies with `‖k‖_∞ ≤ r`.
    pub fn mass_within(&self, r: i64) -> f64 {
        self.box_
            .iter()
            .filter(|k| k[0].abs() <= r && k[1].abs() <= r)
            .map(|k| self.coeffs[self.box_.index(k)].norm_sqr())
            .sum()
    }
}

/// Gaussian wave packet centered at (x0, ξ0): coefficients
/// `c_k ∝ e^{-‖2πħk - ξ0‖²/(2ħ)} e^{-2πi k·x0}`, normalized. Fails if the
/// box clips more than `1e-8` of the mass.
pub fn wave_packet(box_: FreqBox, hbar: f64, x0: [f64; 2], xi0: [f64; 2]) -> Result<QuantumState> {
    let mut coeffs = Array1::from_elem(box_.dim(), C64::ZERO);
    let mut boundary_mass = 0.0f64;
    let mut total = 0.0f64;
    for k in box_.iter() {
        let xi = [TAU * hbar * k[0] as f64, TAU * hbar * k[1] as f64];
        let d2 = (xi[0] - xi0[0]).powi(2) + (xi[1] - xi0[1]).powi(2);
        let amp = (-d2 / (2.0 * hbar)).exp();
        let phase = -TAU * (k[0] as f64 * x0[0] + k[1] as f64 * x0[1]);
        coeffs[box_.index(k)] = C64::from_polar(amp, phase);
        total += amp * amp;
        if k[0].abs() == box_.n as i64 || k[1].abs() == box_.n as i64 {
            boundary_mass += amp * amp;
        }
    }
    if total == 0.0 {
        return Err(Error::Config("wave packet has no support on the box".into()));
    }
    // the boundary shell bounds what the truncation clipped
    let clipped = boundary_mass / total * (4.0 * (2 * box_.n as usize + 1) as f64);
    if clipped > 1e-8 {
        return Err(Error::DiagnosticsFailed(format!(
            "wave packet clipped by the box: boundary-shell estimate {clipped:.3e} > 1e-8"
        )));
    }
    QuantumState::new(box_, hbar, coeffs).map(QuantumState::normalized)
}

/// Semiclassical Hamiltonian parameters: `H = -ħ²Δ/(8π²) + ε² V`, i.e. the
/// quantization of `‖ξ‖²/2 + ε²V(x)`.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    pub hbar: f64,
    pub eps: f64,
    pub potential: FourierField,
}

impl HamiltonianSpec {
    pub fn new(hbar: f64, eps: f64, potential: FourierField) -> Result<Self> {
        if !(hbar > 0.0) || !(eps >= 0.0) {
            return Err(Error::Config("hbar must be positive, eps nonnegative".into()));
        }
        Ok(Self {
            hbar,
            eps,
            potential,
        })
    }

    /// Kinetic eigenvalue on mode k: `2π²ħ²‖k‖²`.
    pub fn kinetic_eigenvalue(&self, k: [i64; 2]) -> f64 {
        2.0 * PI * PI * self.hbar * self.hbar * (k[0] * k[0] + k[1] * k[1]) as f64
    }

    pub fn matrix(&self, box_: FreqBox) -> Result<OperatorMatrix> {
        let mut op = quantize(&Symbol::from_field(&self.potential), self.hbar, box_)?;
        op.mat.mapv_inplace(|c| c * self.eps * self.eps);
        for k in box_.iter() {
            let i = box_.index(k);
            op.mat[[i, i]] += C64::new(self.kinetic_eigenvalue(k), 0.0);
        }
        Ok(op)
    }
}

/// Dense spectral decomposition of a Hermitian operator matrix.
pub struct EigenDecomposition {
    pub box_: FreqBox,
    pub hbar: f64,
    pub eigenvalues: Array1<f64>,
    /// Columns are orthonormal eigenvectors.
    pub eigenvectors: Array2<C64>,
}

impl EigenDecomposition {
    pub fn new(op: &OperatorMatrix) -> Result<Self> {
        let dev = op.hermiticity_deviation();
        if dev > 1e-10 {
            return Err(Error::DiagnosticsFailed(format!(
                "operator is not Hermitian (deviation {dev:.3e}); refusing to diagonalize"
            )));
        }
        let (vals, vecs) = op
            .mat
            .eigh(UPLO::Lower)
            .map_err(|e| Error::DiagnosticsFailed(format!("eigensolver failed: {e}")))?;
        Ok(Self {
            box_: op.box_,
            hbar: op.hbar,
            eigenvalues: vals,
            eigenvectors: vecs,
        })
    }

    pub fn eigenstate(&self, idx: usize) -> QuantumState {
        QuantumState {
            box_: self.box_,
            hbar: self.hbar,
            coeffs: self.eigenvectors.column(idx).to_owned(),
        }
    }

    /// Indices of the `count` eigenvalues closest to `energy`, sorted by
    /// distance.
    pub fn nearest(&self, energy: f64, count: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.eigenvalues.len()).collect();
        idx.sort_by(|&a, &b| {
            (self.eigenvalues[a] - energy)
                .abs()
                .total_cmp(&(self.eigenvalues[b] - energy).abs())
        });
        idx.truncate(count);
        idx
    }

    /// `e^{-i t H/ħ} ψ` through the eigenbasis.
    pub fn evolve(&self, state: &QuantumState, t: f64) -> QuantumState {
        assert_eq!(state.box_, self.box_);
        let adj = self.eigenvectors.t().mapv(|c| c.conj());
        let mut modal = adj.dot(&state.coeffs);
        for (c, &lam) in modal.iter_mut().zip(self.eigenvalues.iter()) {
            *c *= C64::from_polar(1.0, -t * lam / self.hbar);
        }
        QuantumState {
            box_: self.box_,
            hbar: self.hbar,
            coeffs: self.eigenvectors.dot(&modal),
        }
    }
}

/// Strang split-step propagator on the FFT grid enclosing the box.
pub struct SplitStep {
    spec: HamiltonianSpec,
    box_: FreqBox,
    fft: Fft2,
    /// e^{-i dt ε² V(x)/(2ħ)} on grid nodes (half step).
    half_potential: Array2<C64>,
    /// e^{-i dt 2π²ħ‖k‖²} on grid frequencies (full step).
    kinetic: Array2<C64>,
    pub dt: f64,
}

impl SplitStep {
    pub fn new(spec: HamiltonianSpec, box_: FreqBox, dt: f64) -> Result<Self> {
        let m = grid_size_for_box(box_.n);
        if m < 2 * (2 * box_.n as usize + 1) {
            return Err(Error::AliasedGrid { m, n: box_.n });
        }
        let fft = Fft2::new(m);
        let mut half_potential = Array2::from_elem((m, m), C64::ZERO);
        for j0 in 0..m {
            for j1 in 0..m {
                let x = [j0 as f64 / m as f64, j1 as f64 / m as f64];
                let v = spec.potential.evaluate(x);
                let phase = -dt * spec.eps * spec.eps * v / (2.0 * spec.hbar);
                half_potential[[j0, j1]] = C64::from_polar(1.0, phase);
            }
        }
        let mut kinetic = Array2::from_elem((m, m), C64::ZERO);
        let half = m as i64 / 2;
        for j0 in 0..m {
            for j1 in 0..m {
                // signed grid frequency in [-M/2, M/2)
                let k0 = if (j0 as i64) < half { j0 as i64 } else { j0 as i64 - m as i64 };
                let k1 = if (j1 as i64) < half { j1 as i64 } else { j1 as i64 - m as i64 };
                let lam = 2.0 * PI * PI * spec.hbar * (k0 * k0 + k1 * k1) as f64;
                kinetic[[j0, j1]] = C64::from_polar(1.0, -dt * lam);
            }
        }
        Ok(Self {
            spec,
            box_,
            fft,
            half_potential,
            kinetic,
            dt,
        })
    }

    fn embed(&self, state: &QuantumState) -> Array2<C64> {
        let m = self.fft.m;
        let mut grid = Array2::from_elem((m, m), C64::ZERO);
        for k in self.box_.iter() {
            grid[[self.fft.index(k[0]), self.fft.index(k[1])]] = state.coeffs[self.box_.index(k)];
        }
        grid
    }

    /// Extracts box coefficients and the mass the grid holds outside the box.
    fn extract(&self, grid: &Array2<C64>) -> (Array1<C64>, f64) {
        let mut coeffs = Array1::from_elem(self.box_.dim(), C64::ZERO);
        let mut inside = 0.0;
        let total: f64 = grid.iter().map(|c| c.norm_sqr()).sum();
        for k in self.box_.iter() {
            let c = grid[[self.fft.index(k[0]), self.fft.index(k[1])]];
            coeffs[self.box_.index(k)] = c;
            inside += c.norm_sqr();
        }
        (coeffs, total - inside)
    }

    /// Runs `steps` Strang steps; fails if more than `leak_tol` of the mass
    /// escapes the frequency box.
    pub fn evolve(&self, state: &QuantumState, steps: usize, leak_tol: f64) -> Result<QuantumState> {
        assert_eq!(state.box_, self.box_);
        let mut grid = self.embed(state);
        for _ in 0..steps {
            self.fft.synthesize(&mut grid);
            grid.zip_mut_with(&self.half_potential, |c, p| *c *= p);
            self.fft.analyze(&mut grid);
            grid.zip_mut_with(&self.kinetic, |c, p| *c *= p);
            self.fft.synthesize(&mut grid);
            grid.zip_mut_with(&self.half_potential, |c, p| *c *= p);
            self.fft.analyze(&mut grid);
        }
        let (coeffs, leaked) = self.extract(&grid);
        if leaked > leak_tol {
            return Err(Error::DiagnosticsFailed(format!(
                "split-step leaked {leaked:.3e} of the mass out of the box (tolerance {leak_tol:.1e})"
            )));
        }
        QuantumState::new(self.box_, self.spec.hbar, coeffs)
    }
}

/// Truncation / oscillation health of a propagated state.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StateDiagnostics {
    pub norm: f64,
    pub in_box_mass: f64,
    pub boundary_shell_mass: f64,
}

pub fn diagnose(state: &QuantumState) -> StateDiagnostics {
    let n = state.box_.n as i64;
    let total: f64 = state.coeffs.iter().map(|c| c.norm_sqr()).sum();
    let interior = state.mass_within(n - 1);
    StateDiagnostics {
        norm: total.sqrt(),
        in_box_mass: total,
        boundary_shell_mass: total - interior,
    }
}

/// Spectral localization of the state with respect to `-ħ²Δ`, whose symbol
/// on mode k is `4π²ħ²‖k‖²`: mass at or below `delta`, mass at or above
/// `big_r`, and the mass held by the box. A healthy semiclassically
/// oscillating state has negligible low and high mass.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct OscillationDiagnostics {
    pub low_mass: f64,
    pub high_mass: f64,
    pub in_box_mass: f64,
}

pub fn oscillation_diagnostics(state: &QuantumState, delta: f64, big_r: f64) -> OscillationDiagnostics {
    let h2 = 4.0 * PI * PI * state.hbar * state.hbar;
    let mut low = 0.0;
    let mut high = 0.0;
    let mut total = 0.0;
    for k in state.box_.iter() {
        let w = state.coeffs[state.box_.index(k)].norm_sqr();
        let lam = h2 * (k[0] * k[0] + k[1] * k[1]) as f64;
        total += w;
        if lam <= delta {
            low += w;
        }
        if lam >= big_r {
            high += w;
        }
    }
    OscillationDiagnostics {
        low_mass: low,
        high_mass: high,
        in_box_mass: total,
    }
}

/// Eigenpair with its defect against the dense matrix and the quasimode
/// qualification `residual + |λ - E| ≤ c·ħε`.
#[derive(Debug, Clone)]
pub struct EigenCandidate {
    pub index: usize,
    pub eigenvalue: f64,
    pub residual: f64,
    pub qualifies: bool,
}

/// The `count` eigenpairs nearest `energy`, with residuals and the
/// order-`c·ħε` qualification flag.
pub fn eigenpairs_near(
    eig: &EigenDecomposition,
    h: &OperatorMatrix,
    spec: &HamiltonianSpec,
    energy: f64,
    count: usize,
    c: f64,
) -> Vec<EigenCandidate> {
    eig.nearest(energy, count)
        .into_iter()
        .map(|i| {
            let v = eig.eigenstate(i);
            let hv = h.apply(&v.coeffs);
            let lam = eig.eigenvalues[i];
            let residual = hv
                .iter()
                .zip(v.coeffs.iter())
                .map(|(a, b)| (a - b * lam).norm_sqr())
                .sum::<f64>()
                .sqrt();
            EigenCandidate {
                index: i,
                eigenvalue: lam,
                residual,
                qualifies: residual + (lam - energy).abs() <= c * spec.hbar * spec.eps,
            }
        })
        .collect()
}

/// JSON round trip: list of `(k1, k2, re, im)` records plus ħ and the box
/// size. The loader renormalizes, rejecting corrections beyond 1e-6.
pub fn state_to_json(state: &QuantumState) -> serde_json::Value {
    let modes: Vec<serde_json::Value> = state
        .box_
        .iter()
        .filter(|&k| state.coeffs[state.box_.index(k)] != C64::ZERO)
        .map(|k| {
            let c = state.coeffs[state.box_.index(k)];
            serde_json::json!([k[0], k[1], c.re, c.im])
        })
        .collect();
    serde_json::json!({ "hbar": state.hbar, "n": state.box_.n, "modes": modes })
}

pub fn state_from_json(value: &serde_json::Value) -> Result<QuantumState> {
    let hbar = value["hbar"]
        .as_f64()
        .ok_or_else(|| Error::Config("state JSON missing hbar".into()))?;
    let n = value["n"]
        .as_i64()
        .ok_or_else(|| Error::Config("state JSON missing box size".into()))? as i32;
    let box_ = FreqBox::new(n);
    let mut coeffs = Array1::from_elem(box_.dim(), C64::ZERO);
    let modes = value["modes"]
        .as_array()
        .ok_or_else(|| Error::Config("state JSON missing modes".into()))?;
    for rec in modes {
        let arr = rec
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| Error::Config("state mode record must be [k1,k2,re,im]".into()))?;
        let k = [
            arr[0].as_i64().ok_or_else(|| Error::Config("bad k1".into()))?,
            arr[1].as_i64().ok_or_else(|| Error::Config("bad k2".into()))?,
        ];
        if !box_.contains(k) {
            return Err(Error::TruncationTooSmall { mode: k, n });
        }
        coeffs[box_.index(k)] = C64::new(
            arr[2].as_f64().unwrap_or(f64::NAN),
            arr[3].as_f64().unwrap_or(f64::NAN),
        );
    }
    let state = QuantumState::new(box_, hbar, coeffs)?;
    let norm = state.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Normalization((norm - 1.0).abs()));
    }
    Ok(state.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn packet_box(hbar: f64, xi0: [f64; 2]) -> FreqBox {
        let r = (xi0[0] * xi0[0] + xi0[1] * xi0[1]).sqrt();
        let n = ((r + 8.0 * hbar.sqrt()) / (TAU * hbar)).ceil() as i32;
        FreqBox::new(n)
    }

    #[test]
    fn wave_packet_normalized_and_contained() {
        let hbar = 1.0 / 32.0;
        let xi0 = [1.0, 0.5];
        let b = packet_box(hbar, xi0);
        let psi = wave_packet(b, hbar, [0.3, 0.7], xi0).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let d = diagnose(&psi);
        assert!(d.boundary_shell_mass < 1e-10);
    }

    #[test]
    fn wave_packet_moment_matches_center() {
        let hbar = 1.0 / 64.0;
        let xi0 = [0.8, -0.3];
        let b = packet_box(hbar, xi0);
        let psi = wave_packet(b, hbar, [0.0, 0.0], xi0).unwrap();
        let mut mean = [0.0, 0.0];
        for k in b.iter() {
            let w = psi.coeffs[b.index(k)].norm_sqr();
            mean[0] += w * TAU * hbar * k[0] as f64;
            mean[1] += w * TAU * hbar * k[1] as f64;
        }
        assert!((mean[0] - xi0[0]).abs() < 1e-6);
        assert!((mean[1] - xi0[1]).abs() < 1e-6);
    }

    #[test]
    fn free_evolution_phases() {
        // ε = 0: both propagators must multiply mode k by e^{-it·2π²ħ‖k‖²}
        let hbar = 0.1;
        let spec = HamiltonianSpec::new(hbar, 0.0, FourierField::zero()).unwrap();
        let b = FreqBox::new(4);
        let mut coeffs = Array1::from_elem(b.dim(), C64::ZERO);
        coeffs[b.index([1, 0])] = C64::new(0.6, 0.0);
        coeffs[b.index([-2, 3])] = C64::new(0.0, 0.8);
        let psi = QuantumState::new(b, hbar, coeffs).unwrap();
        let t = 0.37;

        let eig = EigenDecomposition::new(&spec.matrix(b).unwrap()).unwrap();
        let out_exact = eig.evolve(&psi, t);
        let stepper = SplitStep::new(spec.clone(), b, t / 16.0).unwrap();
        let out_strang = stepper.evolve(&psi, 16, 1e-12).unwrap();

        for (k, c0) in [([1i64, 0i64], C64::new(0.6, 0.0)), ([-2, 3], C64::new(0.0, 0.8))] {
            let lam = spec.kinetic_eigenvalue(k);
            let expect = c0 * C64::from_polar(1.0, -t * lam / hbar);
            assert!((out_exact.coeffs[b.index(k)] - expect).norm() < 1e-12);
            assert!((out_strang.coeffs[b.index(k)] - expect).norm() < 1e-12);
        }
    }

    fn test_spec() -> HamiltonianSpec {
        let v = FourierField::cosine([1, 0], 1.0).sum(&FourierField::cosine([0, 1], 0.5));
        HamiltonianSpec::new(1.0 / 16.0, 0.3, v).unwrap()
    }

    #[test]
    fn spectral_evolution_is_unitary_and_solves_schrodinger() {
        let spec = test_spec();
        let b = FreqBox::new(8);
        let h = spec.matrix(b).unwrap();
        let eig = EigenDecomposition::new(&h).unwrap();
        let psi = wave_packet(b, spec.hbar, [0.2, 0.5], [0.4, 0.1]).unwrap();
        let t = 0.5;
        let out = eig.evolve(&psi, t);
        assert!((out.norm() - 1.0).abs() < 1e-10);
        // finite-difference check of iħ∂_t ψ = Hψ at t
        let dt = 1e-6;
        let plus = eig.evolve(&psi, t + dt);
        let minus = eig.evolve(&psi, t - dt);
        let ih = C64::new(0.0, spec.hbar);
        let hpsi = h.apply(&out.coeffs);
        let mut worst: f64 = 0.0;
        for i in 0..b.dim() {
            let lhs = ih * (plus.coeffs[i] - minus.coeffs[i]) / (2.0 * dt);
            worst = worst.max((lhs - hpsi[i]).norm());
        }
        assert!(worst < 1e-6, "schrodinger residual {worst}");
    }

    #[test]
    fn strang_second_order_convergence() {
        let spec = test_spec();
        let b = FreqBox::new(8);
        let eig = EigenDecomposition::new(&spec.matrix(b).unwrap()).unwrap();
        let psi = wave_packet(b, spec.hbar, [0.0, 0.0], [0.3, 0.2]).unwrap();
        let t = 0.4;
        let reference = eig.evolve(&psi, t);
        let err_at = |steps: usize| -> f64 {
            let stepper = SplitStep::new(spec.clone(), b, t / steps as f64).unwrap();
            let out = stepper.evolve(&psi, steps, 1e-6).unwrap();
            out.coeffs
                .iter()
                .zip(reference.coeffs.iter())
                .map(|(a, r)| (a - r).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let e1 = err_at(40);
        let e2 = err_at(80);
        let rate = (e1 / e2).log2();
        assert!(
            (rate - 2.0).abs() < 0.2,
            "strang convergence rate {rate}, errors {e1:.3e} / {e2:.3e}"
        );
    }

    #[test]
    fn strang_conserves_norm_and_energy() {
        let spec = test_spec();
        let b = FreqBox::new(8);
        let h = spec.matrix(b).unwrap();
        let psi = wave_packet(b, spec.hbar, [0.1, 0.9], [0.35, 0.0]).unwrap();
        let e0 = psi.expectation(&h).re;
        let stepper = SplitStep::new(spec.clone(), b, 0.002).unwrap();
        let out = stepper.evolve(&psi, 500, 1e-6).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-6);
        let e1 = out.expectation(&h).re;
        assert!((e1 - e0).abs() < 1e-5, "energy drift {}", (e1 - e0).abs());
    }

    #[test]
    fn eigenpairs_are_accurate() {
        let spec = test_spec();
        let b = FreqBox::new(6);
        let h = spec.matrix(b).unwrap();
        let eig = EigenDecomposition::new(&h).unwrap();
        for &i in eig.nearest(0.1, 4).iter() {
            let v = eig.eigenstate(i);
            let hv = h.apply(&v.coeffs);
            let lam = eig.eigenvalues[i];
            let res: f64 = hv
                .iter()
                .zip(v.coeffs.iter())
                .map(|(a, c)| (a - c * lam).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-10, "eigen residual {res}");
        }
    }

    #[test]
    fn oscillation_masses_are_indicators_on_modes() {
        let hbar = 1.0 / 16.0;
        let b = FreqBox::new(8);
        let mut coeffs = Array1::from_elem(b.dim(), C64::ZERO);
        coeffs[b.index([4, 0])] = C64::ONE;
        let psi = QuantumState::new(b, hbar, coeffs).unwrap();
        let lam = 4.0 * std::f64::consts::PI.powi(2) * hbar * hbar * 16.0;
        let d = oscillation_diagnostics(&psi, lam / 2.0, lam * 2.0);
        assert_eq!((d.low_mass, d.high_mass, d.in_box_mass), (0.0, 0.0, 1.0));
        let d2 = oscillation_diagnostics(&psi, lam, lam);
        assert_eq!((d2.low_mass, d2.high_mass), (1.0, 1.0));
    }

    #[test]
    fn wave_packet_oscillation_gate() {
        // unit-speed packet: almost no mass at -ħ²Δ symbol below 0.1
        let hbar = 1.0 / 64.0;
        let xi0 = [1.0, 0.0];
        let b = packet_box(hbar, xi0);
        let psi = wave_packet(b, hbar, [0.0, 0.0], xi0).unwrap();
        let d = oscillation_diagnostics(&psi, 0.1, 16.0);
        assert!(d.low_mass < 1e-6, "low mass {}", d.low_mass);
        assert!(d.high_mass < 1e-6);
        assert!(d.in_box_mass > 1.0 - 1e-8);
    }

    #[test]
    fn free_eigenpairs_at_half() {
        // ħ = 1/(2πm): e_{(m,0)} has kinetic value 2π²ħ²m² = 1/2 exactly
        let m = 4i64;
        let hbar = 1.0 / (TAU * m as f64);
        let spec = HamiltonianSpec::new(hbar, 0.0, FourierField::zero()).unwrap();
        let b = FreqBox::new(2 * m as i32);
        let h = spec.matrix(b).unwrap();
        let eig = EigenDecomposition::new(&h).unwrap();
        let cands = eigenpairs_near(&eig, &h, &spec, 0.5, 8, 1.0);
        // multiplicity of ‖k‖² = m²: (±m,0),(0,±m) → 4
        let exact: Vec<_> = cands.iter().filter(|c| (c.eigenvalue - 0.5).abs() < 1e-12).collect();
        assert_eq!(exact.len(), 4);
        for c in &cands {
            assert!(c.residual < 1e-10);
        }
    }

    #[test]
    fn state_json_round_trip() {
        let spec = test_spec();
        let b = FreqBox::new(5);
        let psi = wave_packet(b, spec.hbar, [0.4, 0.2], [0.3, 0.1]).unwrap();
        let json = state_to_json(&psi);
        let back = state_from_json(&json).unwrap();
        assert_eq!(back.box_, psi.box_);
        let diff: f64 = back
            .coeffs
            .iter()
            .zip(psi.coeffs.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-12);
        // badly normalized input is rejected
        let mut bad = json.clone();
        bad["modes"] = serde_json::json!([[0, 0, 2.0, 0.0]]);
        assert!(matches!(state_from_json(&bad), Err(Error::Normalization(_))));
    }

    #[test]
    fn rejects_non_hermitian() {
        let b = FreqBox::new(2);
        let mut op = OperatorMatrix::zeros(b, 0.1);
        op.mat[[0, 1]] = C64::new(1.0, 0.0);
        assert!(EigenDecomposition::new(&op).is_err());
    }
}
