//! Classical reference dynamics: the averaged motion transverse to a closed
//! geodesic reduces to a pendulum-type system in the internal coordinate
//! `u = ⟨x, e_Λ⟩ mod 1` with conjugate momentum η,
//!
//! ```text
//! u̇ = L η,   η̇ = -L W'(u),   p_Λ(u, η) = η²/2 + W(u),
//! ```
//!
//! where `W` is the Λ-profile of the potential and `L = |e_Λ|`. A symplectic
//! Störmer–Verlet integrator drives the experiments; a classical RK4 step
//! serves as an independent cross-check.

use crate::error::{Error, Result};
use crate::lattice::PrimitiveLattice;
use crate::potential::Profile;

/// Classical point in the adapted coordinates: position on the torus, the
/// conserved longitudinal momentum σ (coefficient of `e⊥/L`), and the slow
/// transverse momentum η.
#[derive(Debug, Clone, Copy)]
pub struct TwoMicroPoint {
    pub x: [f64; 2],
    pub sigma: f64,
    pub eta: f64,
}

/// Integrator used for the reduced flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// Symplectic, energy-stable; the production choice.
    Verlet,
    /// Classical Runge-Kutta; non-symplectic reference.
    Rk4,
}

/// Reduced transverse system along a rational direction.
#[derive(Debug, Clone)]
pub struct PendulumSystem {
    pub lattice: PrimitiveLattice,
    pub profile: Profile,
}

/// State of the reduced flow; `u` is kept unwrapped so rotation numbers and
/// winding are observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumState {
    pub u: f64,
    pub eta: f64,
}

impl PendulumSystem {
    pub fn new(lattice: PrimitiveLattice, profile: Profile) -> Self {
        Self { lattice, profile }
    }

    pub fn p_lambda(&self, s: PendulumState) -> f64 {
        0.5 * s.eta * s.eta + self.profile.eval(s.u)
    }

    fn force(&self, u: f64) -> f64 {
        -self.lattice.length() * self.profile.deriv(u)
    }

    pub fn verlet_step(&self, s: PendulumState, dt: f64) -> PendulumState {
        let l = self.lattice.length();
        let eta_half = s.eta + 0.5 * dt * self.force(s.u);
        let u = s.u + dt * l * eta_half;
        let eta = eta_half + 0.5 * dt * self.force(u);
        PendulumState { u, eta }
    }

    pub fn rk4_step(&self, s: PendulumState, dt: f64) -> PendulumState {
        let l = self.lattice.length();
        let f = |s: PendulumState| (l * s.eta, self.force(s.u));
        let (k1u, k1e) = f(s);
        let (k2u, k2e) = f(PendulumState {
            u: s.u + 0.5 * dt * k1u,
            eta: s.eta + 0.5 * dt * k1e,
        });
        let (k3u, k3e) = f(PendulumState {
            u: s.u + 0.5 * dt * k2u,
            eta: s.eta + 0.5 * dt * k2e,
        });
        let (k4u, k4e) = f(PendulumState {
            u: s.u + dt * k3u,
            eta: s.eta + dt * k3e,
        });
        PendulumState {
            u: s.u + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
            eta: s.eta + dt / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e),
        }
    }

    pub fn step(&self, s: PendulumState, dt: f64, method: Integrator) -> PendulumState {
        match method {
            Integrator::Verlet => self.verlet_step(s, dt),
            Integrator::Rk4 => self.rk4_step(s, dt),
        }
    }

    /// Integrates for time `t` (possibly negative) with step magnitude `dt`.
    pub fn flow(&self, s: PendulumState, t: f64, dt: f64, method: Integrator) -> PendulumState {
        assert!(dt > 0.0);
        let steps = (t.abs() / dt).ceil().max(1.0) as usize;
        let h = t / steps as f64;
        let mut cur = s;
        for _ in 0..steps {
            cur = self.step(cur, h, method);
        }
        cur
    }

    /// Lifts a reduced displacement back to the torus: moving the internal
    /// coordinate by Δu displaces x by `Δu·e/L²`; the perpendicular
    /// translation by arclength σ displaces x by `σ·e⊥/L`.
    pub fn lift(&self, p: TwoMicroPoint, du: f64, sigma: f64) -> TwoMicroPoint {
        let e = self.lattice.generator();
        let perp = self.lattice.perp();
        let l2 = self.lattice.length_sq() as f64;
        let l = self.lattice.length();
        TwoMicroPoint {
            x: [
                p.x[0] + du * e[0] as f64 / l2 + sigma * perp[0] as f64 / l,
                p.x[1] + du * e[1] as f64 / l2 + sigma * perp[1] as f64 / l,
            ],
            sigma: p.sigma,
            eta: p.eta,
        }
    }

    /// Translation flow generated by the longitudinal momentum: x moves by
    /// `s·e⊥/L`; σ and η are untouched. Period exactly L on the torus.
    pub fn perp_flow(&self, p: TwoMicroPoint, s: f64) -> TwoMicroPoint {
        self.lift(p, 0.0, s)
    }

    /// Reduced flow lifted to the full point: integrates (u, η) for time t
    /// and moves x along `e/L²` by the winding of u.
    pub fn flow_point(&self, p: TwoMicroPoint, t: f64, dt: f64) -> TwoMicroPoint {
        let s0 = PendulumState {
            u: self.internal_coordinate(p.x),
            eta: p.eta,
        };
        let s1 = self.flow(s0, t, dt, Integrator::Verlet);
        let mut out = self.lift(p, s1.u - s0.u, 0.0);
        out.eta = s1.eta;
        out
    }

    /// Conserved pair (σ, p_Λ): exactly invariant under the translation
    /// flow, invariant up to O(dt²) under the integrated reduced flow.
    pub fn moment_map(&self, p: TwoMicroPoint) -> (f64, f64) {
        let s = PendulumState {
            u: self.internal_coordinate(p.x),
            eta: p.eta,
        };
        (p.sigma, self.p_lambda(s))
    }

    /// True on the critical fibers (η = 0 and W'(u) = 0), where the reduced
    /// flow degenerates to a fixed point.
    pub fn is_critical(&self, p: TwoMicroPoint, tol: f64) -> bool {
        self.is_equilibrium(
            PendulumState {
                u: self.internal_coordinate(p.x),
                eta: p.eta,
            },
            tol,
        )
    }

    /// Samples the invariant torus through `p0`: an n_s × n_t grid of
    /// translation times over [0, L) and reduced-flow times over one period.
    /// Equidistributes the product Haar measure on the orbit torus.
    pub fn sample_invariant_torus(
        &self,
        p0: TwoMicroPoint,
        n_s: usize,
        n_t: usize,
        dt: f64,
        horizon: f64,
    ) -> Result<Vec<TwoMicroPoint>> {
        if self.is_critical(p0, 1e-12) {
            return Err(Error::CriticalPoint);
        }
        let s0 = PendulumState {
            u: self.internal_coordinate(p0.x),
            eta: p0.eta,
        };
        let period = self.period(s0, dt, horizon)?;
        let l = self.lattice.length();
        let mut out = Vec::with_capacity(n_s * n_t);
        let mut along = p0;
        let mut u_prev = s0.u;
        let ht = period / n_t as f64;
        for _ in 0..n_t {
            for i in 0..n_s {
                let s = l * i as f64 / n_s as f64;
                out.push(self.perp_flow(along, s));
            }
            let cur = PendulumState {
                u: u_prev,
                eta: along.eta,
            };
            let next = self.flow(cur, ht, dt.min(ht), Integrator::Verlet);
            along = self.lift(along, next.u - u_prev, 0.0);
            along.eta = next.eta;
            u_prev = next.u;
        }
        Ok(out)
    }
}

/// Normalized cell histogram of the x-coordinates of a sample cloud; cells
/// average to 1 for a uniform cloud, so sup-cell values estimate the density
/// sup of the projected measure.
pub fn project_density(samples: &[TwoMicroPoint], m: usize) -> ndarray::Array2<f64> {
    let mut hist = ndarray::Array2::zeros((m, m));
    for p in samples {
        let j0 = ((p.x[0].rem_euclid(1.0)) * m as f64).floor() as usize % m;
        let j1 = ((p.x[1].rem_euclid(1.0)) * m as f64).floor() as usize % m;
        hist[[j0, j1]] += 1.0;
    }
    let w = (m * m) as f64 / samples.len() as f64;
    hist.mapv_inplace(|c| c * w);
    hist
}

impl PendulumSystem {
    pub fn internal_coordinate(&self, x: [f64; 2]) -> f64 {
        let e = self.lattice.generator();
        (x[0] * e[0] as f64 + x[1] * e[1] as f64).rem_euclid(1.0)
    }

    /// True if the point sits on an equilibrium of the reduced flow.
    pub fn is_equilibrium(&self, s: PendulumState, tol: f64) -> bool {
        s.eta.abs() < tol && self.profile.deriv(s.u).abs() < tol
    }

    /// Period of the orbit through `s`: twice the spacing of turning points
    /// for librations, the winding time for rotations. Crossing times are
    /// refined by bisection on a single integrator substep.
    pub fn period(&self, s: PendulumState, dt: f64, horizon: f64) -> Result<f64> {
        if self.is_equilibrium(s, 1e-12) {
            return Err(Error::CriticalPoint);
        }
        let librating = self.p_lambda(s) < self.profile.max() - 1e-13;
        if librating {
            // eta changes sign at turning points; the time between two
            // consecutive sign changes is half the period. Strict product
            // test so starting exactly at a turning point does not fire.
            let crossing =
                |a: PendulumState, b: PendulumState| a.eta * b.eta < 0.0;
            let mut start = s;
            while start.eta == 0.0 {
                start = self.verlet_step(start, dt);
            }
            let (_, s1) = self.next_event(start, dt, horizon, crossing)?;
            let (half, _) = self.next_event(s1, dt, horizon, crossing)?;
            Ok(2.0 * half)
        } else {
            // winding orbit: period is the time for u to advance one cell
            let start = s.u;
            let dir = if s.eta >= 0.0 { 1.0 } else { -1.0 };
            let crossed = move |_: PendulumState, b: PendulumState| dir * (b.u - start) >= 1.0;
            Ok(self.next_event(s, dt, horizon, crossed)?.0)
        }
    }

    /// First time in (0, horizon] where `event(prev, next)` fires across a
    /// step, refined to ~1e-12·dt by bisection.
    fn next_event(
        &self,
        s: PendulumState,
        dt: f64,
        horizon: f64,
        event: impl Fn(PendulumState, PendulumState) -> bool,
    ) -> Result<(f64, PendulumState)> {
        let mut t = 0.0;
        let mut cur = s;
        while t < horizon {
            let next = self.verlet_step(cur, dt);
            if event(cur, next) {
                // bisect the substep length
                let (mut lo, mut hi) = (0.0f64, dt);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let probe = self.verlet_step(cur, mid);
                    if event(cur, probe) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                let hit = self.verlet_step(cur, hi);
                return Ok((t + hi, hit));
            }
            cur = next;
            t += dt;
        }
        Err(Error::NonperiodicOrbit)
    }

    /// Times in (0, horizon] where the transverse momentum vanishes
    /// (turning points of the reduced motion, the classical caustic times).
    pub fn caustic_times(
        &self,
        s: PendulumState,
        dt: f64,
        horizon: f64,
        max_events: usize,
    ) -> Vec<f64> {
        let mut out = Vec::new();
        let mut cur = s;
        let mut t = 0.0;
        while t < horizon && out.len() < max_events {
            match self.next_event(cur, dt, horizon - t, |a, b| a.eta * b.eta < 0.0) {
                Ok((te, state)) => {
                    t += te;
                    out.push(t);
                    // step past the crossing so the event re-arms
                    cur = self.verlet_step(state, dt);
                    t += dt;
                }
                Err(_) => break,
            }
        }
        out
    }

    /// Equal-time samples over one period: discretizes the invariant measure
    /// of the orbit through `s`.
    pub fn sample_orbit(
        &self,
        s: PendulumState,
        count: usize,
        dt: f64,
        horizon: f64,
    ) -> Result<Vec<PendulumState>> {
        let period = self.period(s, dt, horizon)?;
        let mut out = Vec::with_capacity(count);
        let mut cur = s;
        let h = period / count as f64;
        for _ in 0..count {
            out.push(cur);
            cur = self.flow(cur, h, dt.min(h), Integrator::Verlet);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn system(gen: [i64; 2], amp: f64) -> PendulumSystem {
        PendulumSystem::new(
            PrimitiveLattice::new(gen).unwrap(),
            Profile::cosine(amp),
        )
    }

    #[test]
    fn energy_drift_is_second_order() {
        let sys = system([1, 0], 0.8);
        let s0 = PendulumState { u: 0.2, eta: 0.9 };
        let drift = |dt: f64| {
            let out = sys.flow(s0, 3.0, dt, Integrator::Verlet);
            (sys.p_lambda(out) - sys.p_lambda(s0)).abs()
        };
        // sample max drift along the orbit rather than the endpoint, which
        // can accidentally cancel for symplectic schemes
        let max_drift = |dt: f64| {
            let mut cur = s0;
            let mut worst: f64 = 0.0;
            let steps = (3.0 / dt) as usize;
            for _ in 0..steps {
                cur = sys.verlet_step(cur, dt);
                worst = worst.max((sys.p_lambda(cur) - sys.p_lambda(s0)).abs());
            }
            worst
        };
        let d1 = max_drift(2e-3);
        let d2 = max_drift(1e-3);
        let rate = (d1 / d2).log2();
        assert!((rate - 2.0).abs() < 0.3, "drift rate {rate}");
        assert!(drift(1e-3) < 1e-5);
    }

    #[test]
    fn verlet_agrees_with_rk4() {
        let sys = system([2, 1], 0.5);
        let s0 = PendulumState { u: 0.1, eta: 0.4 };
        let a = sys.flow(s0, 2.0, 1e-5, Integrator::Verlet);
        let b = sys.flow(s0, 2.0, 1e-3, Integrator::Rk4);
        assert!((a.u - b.u).abs() < 1e-7, "u mismatch {}", (a.u - b.u).abs());
        assert!((a.eta - b.eta).abs() < 1e-7);
    }

    #[test]
    fn harmonic_period_near_minimum() {
        // W(u) = a cos(2πu) has its minimum at u = 1/2 with W'' = a(2π)²;
        // small oscillations have period 2π/(L√W'')
        for gen in [[1i64, 0], [1, 1]] {
            let amp = 0.7;
            let sys = system(gen, amp);
            let l = sys.lattice.length();
            let omega = l * (amp * (2.0 * PI).powi(2)).sqrt();
            let expected = 2.0 * PI / omega;
            let s0 = PendulumState {
                u: 0.5 + 1e-3,
                eta: 0.0,
            };
            let measured = sys.period(s0, expected / 2000.0, 10.0 * expected).unwrap();
            assert!(
                (measured - expected).abs() / expected < 1e-3,
                "period {measured} vs harmonic {expected}"
            );
        }
    }

    #[test]
    fn free_rotation_period() {
        let sys = PendulumSystem::new(
            PrimitiveLattice::new([1, 2]).unwrap(),
            Profile::from_modes(std::iter::empty::<(i64, crate::C64)>()),
        );
        let eta = 0.63;
        let s0 = PendulumState { u: 0.2, eta };
        let expected = 1.0 / (sys.lattice.length() * eta);
        let measured = sys.period(s0, expected / 500.0, 10.0 * expected).unwrap();
        assert!((measured - expected).abs() / expected < 1e-9);
    }

    #[test]
    fn equilibrium_and_separatrix_are_rejected() {
        let sys = system([1, 0], 1.0);
        let eq = PendulumState { u: 0.5, eta: 0.0 };
        assert!(matches!(sys.period(eq, 1e-3, 10.0), Err(Error::CriticalPoint)));
        let unstable = PendulumState { u: 0.0, eta: 0.0 };
        assert!(matches!(
            sys.period(unstable, 1e-3, 10.0),
            Err(Error::CriticalPoint)
        ));
        // near the unstable equilibrium the return time blows up
        // logarithmically; a short horizon is exceeded
        let sep = PendulumState { u: 1e-9, eta: 0.0 };
        assert!(matches!(
            sys.period(sep, 1e-3, 2.0),
            Err(Error::NonperiodicOrbit)
        ));
    }

    #[test]
    fn reduced_flow_commutes_with_perpendicular_translation() {
        let sys = system([2, 1], 0.6);
        let p = TwoMicroPoint {
            x: [0.37, 0.81],
            sigma: 1.0,
            eta: 0.5,
        };
        let s0 = PendulumState {
            u: sys.internal_coordinate(p.x),
            eta: p.eta,
        };
        let s1 = sys.flow(s0, 1.3, 1e-4, Integrator::Verlet);
        let du = s1.u - s0.u;
        let sigma = 0.42;
        // translate then flow vs flow then translate
        let a = sys.lift(sys.lift(p, du, 0.0), 0.0, sigma);
        let b = sys.lift(sys.lift(p, 0.0, sigma), du, 0.0);
        assert!((a.x[0] - b.x[0]).abs() < 1e-12 && (a.x[1] - b.x[1]).abs() < 1e-12);
        // the perpendicular translation leaves the internal coordinate alone
        let q = sys.lift(p, 0.0, sigma);
        let lat = sys.lattice;
        let len = lat.length();
        let shifted = sys.internal_coordinate(q.x);
        let direct = sys.internal_coordinate(p.x);
        // <e⊥/L, e> = 0 exactly in exact arithmetic; float dot products of
        // small integers with one division stay at rounding level
        assert!(
            (shifted - direct).abs() < 1e-12 / len.min(1.0),
            "internal coordinate moved by {}",
            (shifted - direct).abs()
        );
    }

    #[test]
    fn caustic_times_alternate_at_half_period() {
        let sys = system([1, 0], 1.0);
        let s0 = PendulumState { u: 0.4, eta: 0.0 };
        let period = sys.period(s0, 1e-4, 50.0).unwrap();
        let times = sys.caustic_times(s0, 1e-4, 3.0 * period, 5);
        assert!(times.len() >= 3);
        for (i, pair) in times.windows(2).enumerate() {
            let gap = pair[1] - pair[0];
            assert!(
                (gap - period / 2.0).abs() < 1e-2 * period,
                "gap {i} = {gap} vs half period {}",
                period / 2.0
            );
        }
    }

    #[test]
    fn flows_commute_on_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let sys = system([1, 0], 0.8);
        for _ in 0..1000 {
            let p = TwoMicroPoint {
                x: [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)],
                sigma: rng.random_range(0.5..2.0),
                eta: rng.random_range(-1.5..1.5),
            };
            let (t, s) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            let a = sys.perp_flow(sys.flow_point(p, t, 1e-3), s);
            let b = sys.flow_point(sys.perp_flow(p, s), t, 1e-3);
            let d = (a.x[0] - b.x[0]).abs().max((a.x[1] - b.x[1]).abs())
                + (a.eta - b.eta).abs();
            assert!(d < 1e-8, "commutator defect {d}");
        }
    }

    #[test]
    fn critical_fibers_are_fixed_points() {
        let sys = system([1, 0], 1.0);
        // W = cos(2πu): critical at u ∈ {0, 1/2}
        for u in [0.0, 0.5] {
            let p = TwoMicroPoint {
                x: [u, 0.3],
                sigma: 1.0,
                eta: 0.0,
            };
            assert!(sys.is_critical(p, 1e-12));
            let q = sys.flow_point(p, 2.0, 1e-3);
            assert!((q.x[0] - p.x[0]).abs() < 1e-14 && (q.x[1] - p.x[1]).abs() < 1e-14);
            assert!(q.eta.abs() < 1e-14);
        }
    }

    #[test]
    fn moment_map_conserved_along_flows() {
        let sys = system([2, 1], 0.6);
        let p = TwoMicroPoint {
            x: [0.1, 0.7],
            sigma: 1.3,
            eta: 0.4,
        };
        let m0 = sys.moment_map(p);
        let m1 = sys.moment_map(sys.perp_flow(p, 0.77));
        assert!((m0.0 - m1.0).abs() < 1e-14 && (m0.1 - m1.1).abs() < 1e-10);
        let m2 = sys.moment_map(sys.flow_point(p, 2.0, 1e-4));
        assert!((m0.0 - m2.0).abs() < 1e-14);
        assert!((m0.1 - m2.1).abs() < 1e-7, "p_lambda drift {}", (m0.1 - m2.1).abs());
    }

    #[test]
    fn free_torus_sampling_is_uniform() {
        let sys = PendulumSystem::new(
            PrimitiveLattice::new([1, 0]).unwrap(),
            Profile::from_modes(std::iter::empty::<(i64, crate::C64)>()),
        );
        let p0 = TwoMicroPoint {
            x: [0.2, 0.9],
            sigma: 1.0,
            eta: 0.7,
        };
        let samples = sys
            .sample_invariant_torus(p0, 64, 64, 1e-3, 100.0)
            .unwrap();
        assert_eq!(samples.len(), 64 * 64);
        let hist = project_density(&samples, 8);
        let total: f64 = hist.sum() / 64.0;
        assert!((total - 1.0).abs() < 1e-12);
        let max = hist.iter().cloned().fold(0.0, f64::max);
        let min = hist.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 1.3, "uniformity ratio {}", max / min);
    }

    #[test]
    fn torus_sampling_rejects_critical_base() {
        let sys = system([1, 0], 1.0);
        let p = TwoMicroPoint {
            x: [0.5, 0.1],
            sigma: 1.0,
            eta: 0.0,
        };
        assert!(matches!(
            sys.sample_invariant_torus(p, 8, 8, 1e-3, 10.0),
            Err(Error::CriticalPoint)
        ));
    }

    #[test]
    fn orbit_samples_conserve_energy() {
        let sys = system([1, 1], 0.9);
        let s0 = PendulumState { u: 0.35, eta: 0.2 };
        let e0 = sys.p_lambda(s0);
        let samples = sys.sample_orbit(s0, 32, 1e-4, 100.0).unwrap();
        assert_eq!(samples.len(), 32);
        for s in samples {
            assert!((sys.p_lambda(s) - e0).abs() < 1e-6);
        }
    }
}
