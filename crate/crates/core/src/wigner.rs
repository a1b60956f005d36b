//! Phase-space measurements of a state: matrix-free Weyl expectations (the
//! pairing of the state's Wigner distribution with a symbol), their
//! two-microlocal refinement, position densities, and mass in tubes around
//! closed geodesics.
//!
//! For a state on the frequency box the pairing is the quadratic form
//! `Σ_m Σ_k conj(c_{k+m}) â_m(πħ(2k+m)) c_k`, evaluated without forming the
//! operator matrix; symbols carry finitely many x-modes so the cost is
//! O(modes × dim).

use crate::error::{Error, Result};
use crate::fft::Fft2;
use crate::lattice::PrimitiveLattice;
use crate::quantum::QuantumState;
use crate::weyl::{Symbol, TwoMicroSymbol};
use crate::C64;
use ndarray::Array2;
use std::f64::consts::PI;

/// Pairing `⟨W_ψ, a⟩ = ⟨ψ, Op(a)ψ⟩`, matrix-free.
pub fn wigner_pairing(state: &QuantumState, a: &Symbol) -> Result<C64> {
    let box_ = state.box_;
    if a.max_mode() > 2 * box_.n as i64 {
        // consistent with the quantization window check
        let worst = a
            .modes()
            .iter()
            .max_by_key(|(m, _)| m[0].abs().max(m[1].abs()))
            .map(|(m, _)| *m)
            .unwrap_or([0, 0]);
        return Err(Error::TruncationTooSmall {
            mode: worst,
            n: box_.n,
        });
    }
    let hbar = state.hbar;
    let mut acc = C64::ZERO;
    for (m, f) in a.modes() {
        for k in box_.iter() {
            let q = [k[0] + m[0], k[1] + m[1]];
            if !box_.contains(q) {
                continue;
            }
            let xi = [
                PI * hbar * (2 * k[0] + m[0]) as f64,
                PI * hbar * (2 * k[1] + m[1]) as f64,
            ];
            acc += state.coeffs[box_.index(q)].conj() * f(xi) * state.coeffs[box_.index(k)];
        }
    }
    Ok(acc)
}

/// Two-microlocal pairing at scale ε around Λ^⊥.
pub fn two_micro_pairing(
    state: &QuantumState,
    lattice: &PrimitiveLattice,
    a: &TwoMicroSymbol,
    eps: f64,
) -> Result<C64> {
    assert!(eps > 0.0);
    wigner_pairing(state, &a.to_symbol(lattice, eps))
}

/// Observable `e^{2πi k·x}` for a frequency constrained to Λ; rejected
/// otherwise so averaged measurements stay inside the averaged algebra.
pub fn fourier_mode_observable(lattice: &PrimitiveLattice, k: [i64; 2]) -> Result<Symbol> {
    if lattice.member(k).is_none() {
        return Err(Error::KNotInLambda(k));
    }
    Ok(Symbol::exp_mode(k))
}

/// `|ψ(x)|²` sampled on an m×m grid; requires m ≥ 2(2N+1) so the density's
/// modes (reaching 2N per axis) are alias-free.
pub fn position_density(state: &QuantumState, m: usize) -> Result<Array2<f64>> {
    let need = 2 * (2 * state.box_.n as usize + 1);
    if m < need {
        return Err(Error::AliasedGrid {
            m,
            n: state.box_.n,
        });
    }
    let fft = Fft2::new(m);
    let mut grid = Array2::from_elem((m, m), C64::ZERO);
    for k in state.box_.iter() {
        grid[[fft.index(k[0]), fft.index(k[1])]] = state.coeffs[state.box_.index(k)];
    }
    fft.synthesize(&mut grid);
    Ok(grid.mapv(|c| c.norm_sqr()))
}

/// Probability that the internal coordinate `u = ⟨x, e_Λ⟩ mod 1` lies within
/// distance `radius` of `center`. Exact: pairs the Λ-profile of `|ψ|²` with
/// the Fourier series of the interval indicator.
pub fn mass_in_tube(
    state: &QuantumState,
    lattice: &PrimitiveLattice,
    center: f64,
    radius: f64,
) -> Result<f64> {
    if !(radius > 0.0 && radius < 0.5) {
        return Err(Error::Config(format!(
            "tube radius {radius} must lie in (0, 1/2)"
        )));
    }
    let box_ = state.box_;
    let e = lattice.generator();
    // largest |n| with n·e inside the difference set of the box
    let step = e[0].abs().max(e[1].abs()).max(1);
    let n_max = 2 * box_.n as i64 / step;
    let mut mass = 0.0f64;
    for n in -n_max..=n_max {
        let m = [n * e[0], n * e[1]];
        // density mode ρ_m = Σ_k conj(c_k) c_{k+m}
        let mut rho = C64::ZERO;
        for k in box_.iter() {
            let q = [k[0] + m[0], k[1] + m[1]];
            if box_.contains(q) {
                rho += state.coeffs[box_.index(k)].conj() * state.coeffs[box_.index(q)];
            }
        }
        let indicator = if n == 0 {
            C64::new(2.0 * radius, 0.0)
        } else {
            let nf = n as f64;
            C64::from_polar(1.0, -2.0 * PI * nf * center)
                * ((2.0 * PI * nf * radius).sin() / (PI * nf))
        };
        // pairing ∫ ρ(u) 1_tube(u) du = Σ_n ρ_n conj(Î_n) with Î_n = e^{-2πinc} sin(2πnr)/(πn)
        mass += (rho * indicator.conj()).re;
    }
    Ok(mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::FourierField;
    use crate::quantum::wave_packet;
    use crate::weyl::{quantize, FreqBox, SymbolClass};
    use ndarray::Array1;
    use rand::Rng;
    use rand::SeedableRng;
    use std::f64::consts::TAU;
    use std::sync::Arc;

    fn random_state(rng: &mut impl Rng, box_: FreqBox, hbar: f64) -> QuantumState {
        let coeffs = Array1::from_iter(
            (0..box_.dim()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        );
        QuantumState::new(box_, hbar, coeffs).unwrap().normalized()
    }

    fn random_symbol(rng: &mut impl Rng, mode_bound: i64) -> Symbol {
        let mut modes = Vec::new();
        for _ in 0..4 {
            let m = [
                rng.random_range(-mode_bound..=mode_bound),
                rng.random_range(-mode_bound..=mode_bound),
            ];
            let amp = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let c0 = rng.random_range(-1.0..1.0);
            let c1 = rng.random_range(-1.0..1.0);
            let f = move |xi: [f64; 2]| {
                amp * (-(xi[0] - c0).powi(2) - (xi[1] - c1).powi(2)).exp()
            };
            modes.push((m, Arc::new(f) as crate::weyl::CoefFn));
        }
        Symbol::new(modes, SymbolClass::Bounded, false)
    }

    #[test]
    fn pairing_matches_dense_expectation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let b = FreqBox::new(5);
        for _ in 0..15 {
            let hbar = rng.random_range(0.02..0.4);
            let psi = random_state(&mut rng, b, hbar);
            let sym = random_symbol(&mut rng, 2);
            let fast = wigner_pairing(&psi, &sym).unwrap();
            let op = quantize(&sym, hbar, b).unwrap();
            let dense = psi.expectation(&op);
            assert!((fast - dense).norm() < 1e-12);
        }
    }

    #[test]
    fn two_micro_pairing_matches_dense() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        let lat = PrimitiveLattice::new([1, 1]).unwrap();
        let b = FreqBox::new(5);
        let a = TwoMicroSymbol::xi_eta(
            |xi, eta| C64::new((-(xi[0].powi(2) + xi[1].powi(2))).exp() / (1.0 + eta * eta), 0.0),
            [C64::ZERO; 2],
        )
        .unwrap();
        for _ in 0..5 {
            let (hbar, eps) = (rng.random_range(0.05..0.3), rng.random_range(0.1..0.6));
            let psi = random_state(&mut rng, b, hbar);
            let fast = two_micro_pairing(&psi, &lat, &a, eps).unwrap();
            let op = crate::weyl::quantize_two_micro(&lat, &a, hbar, eps, b).unwrap();
            assert!((fast - psi.expectation(&op)).norm() < 1e-12);
        }
    }

    #[test]
    fn pairing_real_for_real_symbols() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let b = FreqBox::new(4);
        let v = FourierField::cosine([1, 2], 0.7).sum(&FourierField::cosine([1, 0], 0.4));
        let psi = random_state(&mut rng, b, 0.1);
        let val = wigner_pairing(&psi, &Symbol::from_field(&v)).unwrap();
        assert!(val.im.abs() < 1e-13);
    }

    #[test]
    fn mode_observable_respects_lattice() {
        let lat = PrimitiveLattice::new([2, 1]).unwrap();
        assert!(fourier_mode_observable(&lat, [4, 2]).is_ok());
        assert!(matches!(
            fourier_mode_observable(&lat, [1, 1]),
            Err(Error::KNotInLambda([1, 1]))
        ));
    }

    #[test]
    fn position_density_normalization_and_pointwise() {
        let hbar = 1.0 / 16.0;
        let b = FreqBox::new(6);
        let psi = wave_packet(b, hbar, [0.25, 0.5], [0.2, 0.1]).unwrap();
        let m = 32;
        let rho = position_density(&psi, m).unwrap();
        let avg: f64 = rho.sum() / (m * m) as f64;
        assert!((avg - 1.0).abs() < 1e-10, "density mean {avg}");
        // spot check against direct summation
        for &(j0, j1) in &[(0usize, 0usize), (5, 17), (20, 3)] {
            let x = [j0 as f64 / m as f64, j1 as f64 / m as f64];
            let mut val = C64::ZERO;
            for k in b.iter() {
                let ph = TAU * (k[0] as f64 * x[0] + k[1] as f64 * x[1]);
                val += psi.coeffs[b.index(k)] * C64::from_polar(1.0, ph);
            }
            assert!((rho[[j0, j1]] - val.norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn position_density_rejects_aliasing() {
        let b = FreqBox::new(6);
        let psi = wave_packet(b, 1.0 / 16.0, [0.0, 0.0], [0.2, 0.1]).unwrap();
        assert!(matches!(
            position_density(&psi, 16),
            Err(Error::AliasedGrid { .. })
        ));
    }

    #[test]
    fn tube_mass_closed_form() {
        // ψ = (e_0 + e_{(1,0)})/√2 has |ψ|² = 1 + cos(2πu); the tube of
        // radius 1/4 around u = 0 carries 1/2 + 1/π
        let b = FreqBox::new(2);
        let mut coeffs = Array1::from_elem(b.dim(), C64::ZERO);
        coeffs[b.index([0, 0])] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        coeffs[b.index([1, 0])] = C64::new(1.0 / 2f64.sqrt(), 0.0);
        let psi = QuantumState::new(b, 0.1, coeffs).unwrap();
        let lat = PrimitiveLattice::new([1, 0]).unwrap();
        let mass = mass_in_tube(&psi, &lat, 0.0, 0.25).unwrap();
        assert!((mass - (0.5 + 1.0 / std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn tube_mass_against_grid_quadrature() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let b = FreqBox::new(4);
        let lat = PrimitiveLattice::new([1, 1]).unwrap();
        let psi = random_state(&mut rng, b, 0.1);
        let (center, radius) = (0.3, 0.2);
        let exact = mass_in_tube(&psi, &lat, center, radius).unwrap();
        // Riemann sum of |ψ|²·1_tube on a fine grid
        let m = 512;
        let rho = position_density(&psi, m).unwrap();
        let mut approx = 0.0;
        for j0 in 0..m {
            for j1 in 0..m {
                let x = [j0 as f64 / m as f64, j1 as f64 / m as f64];
                let u = (x[0] * lat.generator()[0] as f64 + x[1] * lat.generator()[1] as f64)
                    .rem_euclid(1.0);
                let mut d = (u - center).abs();
                d = d.min(1.0 - d);
                if d <= radius {
                    approx += rho[[j0, j1]];
                }
            }
        }
        approx /= (m * m) as f64;
        // grid cuts tube boundaries; agreement is first order in 1/m
        assert!(
            (exact - approx).abs() < 0.02,
            "tube mass {exact} vs quadrature {approx}"
        );
    }

    #[test]
    fn tube_mass_of_uniform_state_is_width() {
        let b = FreqBox::new(3);
        let mut coeffs = Array1::from_elem(b.dim(), C64::ZERO);
        coeffs[b.index([0, 0])] = C64::ONE;
        let psi = QuantumState::new(b, 0.2, coeffs).unwrap();
        let lat = PrimitiveLattice::new([2, 1]).unwrap();
        let mass = mass_in_tube(&psi, &lat, 0.7, 0.1).unwrap();
        assert!((mass - 0.2).abs() < 1e-14);
    }

    #[test]
    fn nonnegative_symbol_nearly_nonnegative_pairing() {
        // sharp-Gårding trend: x-only nonnegative symbols may go slightly
        // negative at finite ħ, bounded by O(ħ)
        let b = FreqBox::new(8);
        let v = FourierField::cosine([1, 0], 1.0).sum(&FourierField::constant(1.0)); // 1 + cos ≥ 0
        let sym = Symbol::from_field(&v);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let psi = random_state(&mut rng, b, 0.05);
            let val = wigner_pairing(&psi, &sym).unwrap().re;
            assert!(val > -1e-10, "multiplication by a nonnegative function must be nonnegative, got {val}");
        }
    }
}
