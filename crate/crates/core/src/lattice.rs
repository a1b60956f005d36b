//! Primitive rank-1 sublattices of Z² and their direction Hamiltonians.
//!
//! A sublattice is stored through its canonical-sign generator; the
//! orthogonal generator is the +90° rotation `(a, b) -> (-b, a)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A primitive rank-1 sublattice of Z², `Λ = Z·e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimitiveLattice {
    generator: [i64; 2],
}

impl PrimitiveLattice {
    /// Builds the lattice generated by `e`, canonicalizing the sign so the
    /// first nonzero coordinate of the generator is positive.
    pub fn new(e: [i64; 2]) -> Result<Self> {
        if e == [0, 0] {
            return Err(Error::ZeroVector);
        }
        let g = gcd(e[0], e[1]);
        if g > 1 {
            return Err(Error::NotPrimitive(g));
        }
        let flip = e[0] < 0 || (e[0] == 0 && e[1] < 0);
        let generator = if flip { [-e[0], -e[1]] } else { e };
        Ok(Self { generator })
    }

    pub fn generator(&self) -> [i64; 2] {
        self.generator
    }

    /// The directly orthogonal generator of the same length.
    pub fn perp(&self) -> [i64; 2] {
        [-self.generator[1], self.generator[0]]
    }

    /// Euclidean length `L_Λ` of the generator.
    pub fn length(&self) -> f64 {
        let [a, b] = self.generator;
        ((a * a + b * b) as f64).sqrt()
    }

    /// Squared length as an integer.
    pub fn length_sq(&self) -> i64 {
        let [a, b] = self.generator;
        a * a + b * b
    }

    /// `H_Λ(ξ) = ⟨ξ, e⟩ / L`.
    pub fn h_lambda(&self, xi: [f64; 2]) -> f64 {
        let [a, b] = self.generator;
        (xi[0] * a as f64 + xi[1] * b as f64) / self.length()
    }

    /// `H_Λ^⊥(ξ) = ⟨ξ, e^⊥⟩ / L`.
    pub fn h_lambda_perp(&self, xi: [f64; 2]) -> f64 {
        let [a, b] = self.perp();
        (xi[0] * a as f64 + xi[1] * b as f64) / self.length()
    }

    /// Integer pairing `⟨k, e⟩` for a frequency `k ∈ Z²`.
    pub fn pair(&self, k: [i64; 2]) -> i64 {
        k[0] * self.generator[0] + k[1] * self.generator[1]
    }

    /// Integer pairing `⟨k, e^⊥⟩`.
    pub fn pair_perp(&self, k: [i64; 2]) -> i64 {
        let p = self.perp();
        k[0] * p[0] + k[1] * p[1]
    }

    /// Whether `k` lies in the sublattice, and if so the integer `n` with `k = n·e`.
    pub fn member(&self, k: [i64; 2]) -> Option<i64> {
        if self.pair_perp(k) != 0 {
            return None;
        }
        Some(self.pair(k) / self.length_sq())
    }
}

impl std::fmt::Display for PrimitiveLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Z({},{})", self.generator[0], self.generator[1])
    }
}

/// Classification of a covector direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectionClass {
    /// ξ generates periodic geodesics; carries the unique Λ with ξ ∈ Λ^⊥.
    Rational(PrimitiveLattice),
    Irrational,
}

/// Parameters for rational-direction detection on float input.
#[derive(Debug, Clone, Copy)]
pub struct RationalDetection {
    /// Largest denominator reconstructed by the continued fraction.
    pub max_denominator: i64,
    /// Relative residual below which the reconstruction is accepted.
    pub residual_tol: f64,
}

impl Default for RationalDetection {
    fn default() -> Self {
        Self {
            // tight enough that quadratic irrationals (whose convergents with
            // denominator <= 10^4 still miss by ~1e-9) stay Irrational, while
            // exact ratios of moderate integers reconstruct with ~1e-16 residual
            max_denominator: 10_000,
            residual_tol: 1e-12,
        }
    }
}

/// Continued-fraction rational reconstruction of `x` with bounded denominator.
fn best_rational(x: f64, max_den: i64) -> (i64, i64) {
    // convergents of the continued fraction of x
    let (mut p0, mut q0, mut p1, mut q1) = (1i64, 0i64, x.floor() as i64, 1i64);
    let mut frac = x - x.floor();
    while frac.abs() > 1e-15 {
        let r = 1.0 / frac;
        let a = r.floor();
        if a >= 1e18 {
            break;
        }
        let a = a as i64;
        let (p2, q2) = match (a.checked_mul(p1), a.checked_mul(q1)) {
            (Some(ap), Some(aq)) => match (ap.checked_add(p0), aq.checked_add(q0)) {
                (Some(p2), Some(q2)) => (p2, q2),
                _ => break,
            },
            _ => break,
        };
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        frac = r - a as f64;
    }
    (p1, q1)
}

/// Decides whether ξ points in a rational direction and, if so, returns the
/// primitive lattice Λ with `⟨ξ, e_Λ⟩ = 0`.
pub fn classify_direction(xi: [f64; 2], det: RationalDetection) -> Result<DirectionClass> {
    if xi == [0.0, 0.0] {
        return Err(Error::ZeroVector);
    }
    if xi[0] == 0.0 {
        return Ok(DirectionClass::Rational(PrimitiveLattice::new([1, 0])?));
    }
    if xi[1] == 0.0 {
        return Ok(DirectionClass::Rational(PrimitiveLattice::new([0, 1])?));
    }
    let ratio = xi[1] / xi[0];
    let (p, q) = best_rational(ratio, det.max_denominator);
    if q == 0 {
        return Ok(DirectionClass::Irrational);
    }
    let scale = xi[0].abs().max(xi[1].abs());
    let residual = (xi[1] * q as f64 - xi[0] * p as f64).abs() / (scale * q.abs().max(1) as f64);
    if residual <= det.residual_tol {
        // xi ∝ (q, p), so e_Λ ∝ (-p, q)
        Ok(DirectionClass::Rational(PrimitiveLattice::new([-p, q])?))
    } else {
        Ok(DirectionClass::Irrational)
    }
}

/// All canonical primitive lattices with `L_Λ <= max_norm`, sorted by
/// `(L_Λ, generator)`.
pub fn enumerate_lattices(max_norm: f64) -> Vec<PrimitiveLattice> {
    let bound = max_norm.floor() as i64;
    let mut out = Vec::new();
    for a in 0..=bound {
        for b in -bound..=bound {
            if a == 0 && b <= 0 {
                continue;
            }
            if a > 0 && b != 0 && gcd(a, b) != 1 {
                continue;
            }
            if a == 0 && b != 1 {
                continue;
            }
            if b == 0 && a != 1 {
                continue;
            }
            let norm2 = (a * a + b * b) as f64;
            if norm2 <= max_norm * max_norm {
                out.push(PrimitiveLattice { generator: [a, b] });
            }
        }
    }
    out.sort_by(|x, y| {
        x.length_sq()
            .cmp(&y.length_sq())
            .then(x.generator.cmp(&y.generator))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn axis_and_pythagorean() {
        let l = PrimitiveLattice::new([1, 0]).unwrap();
        assert_eq!(l.generator(), [1, 0]);
        assert_eq!(l.perp(), [0, 1]);
        assert_eq!(l.length(), 1.0);

        let l = PrimitiveLattice::new([3, 4]).unwrap();
        assert_eq!(l.perp(), [-4, 3]);
        assert_eq!(l.length(), 5.0);
    }

    #[test]
    fn rejects_non_primitive_and_zero() {
        assert!(matches!(
            PrimitiveLattice::new([2, 4]),
            Err(Error::NotPrimitive(2))
        ));
        assert!(matches!(PrimitiveLattice::new([0, 0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn canonical_sign() {
        let a = PrimitiveLattice::new([3, -4]).unwrap();
        let b = PrimitiveLattice::new([-3, 4]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.generator(), [3, -4]);
        let c = PrimitiveLattice::new([0, -1]).unwrap();
        assert_eq!(c.generator(), [0, 1]);
    }

    #[test]
    fn hamiltonian_values() {
        let l = PrimitiveLattice::new([1, 0]).unwrap();
        assert_eq!(l.h_lambda([0.0, 1.0]), 0.0);
        assert_eq!(l.h_lambda_perp([0.0, 1.0]), 1.0);
        let l = PrimitiveLattice::new([3, 4]).unwrap();
        assert!((l.h_lambda([3.0, 4.0]) - 5.0).abs() < 1e-14);
        assert!(l.h_lambda_perp([3.0, 4.0]).abs() < 1e-14);
    }

    #[test]
    fn classify_axes_and_diagonal() {
        let det = RationalDetection::default();
        match classify_direction([0.0, 3.0], det).unwrap() {
            DirectionClass::Rational(l) => assert_eq!(l.generator(), [1, 0]),
            _ => panic!("vertical direction must be rational"),
        }
        match classify_direction([2.0, -2.0], det).unwrap() {
            DirectionClass::Rational(l) => assert_eq!(l.generator(), [1, 1]),
            _ => panic!("(2,-2) must be rational"),
        }
        let irr = classify_direction([1.0, std::f64::consts::SQRT_2], det).unwrap();
        assert_eq!(irr, DirectionClass::Irrational);
        assert!(matches!(
            classify_direction([0.0, 0.0], det),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn enumerate_small() {
        let ls = enumerate_lattices(1.0);
        let gens: Vec<_> = ls.iter().map(|l| l.generator()).collect();
        assert_eq!(gens, vec![[0, 1], [1, 0]]);

        let ls = enumerate_lattices(1.5);
        let gens: Vec<_> = ls.iter().map(|l| l.generator()).collect();
        assert_eq!(gens, vec![[0, 1], [1, 0], [1, -1], [1, 1]]);
    }

    #[test]
    fn enumerate_matches_brute_force_count() {
        // brute-force gcd scan over the box [-10,10]², counting each {e,-e} once
        let bound = 10i64;
        let max_norm = 10.0f64;
        let mut count = 0;
        for a in -bound..=bound {
            for b in -bound..=bound {
                if (a, b) == (0, 0) || gcd(a, b) != 1 {
                    continue;
                }
                if ((a * a + b * b) as f64) <= max_norm * max_norm {
                    count += 1;
                }
            }
        }
        assert_eq!(enumerate_lattices(max_norm).len(), count / 2);
    }

    proptest! {
        #[test]
        fn norm_identity(a in -20i64..20, b in -20i64..20,
                         x in -10.0f64..10.0, y in -10.0f64..10.0) {
            prop_assume!((a, b) != (0, 0) && gcd(a, b) == 1);
            let l = PrimitiveLattice::new([a, b]).unwrap();
            let xi = [x, y];
            let lhs = l.h_lambda(xi).powi(2) + l.h_lambda_perp(xi).powi(2);
            let rhs = x * x + y * y;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn sign_canonicalization(a in -20i64..20, b in -20i64..20) {
            prop_assume!((a, b) != (0, 0) && gcd(a, b) == 1);
            let l1 = PrimitiveLattice::new([a, b]).unwrap();
            let l2 = PrimitiveLattice::new([-a, -b]).unwrap();
            prop_assert_eq!(l1, l2);
        }

        #[test]
        fn perp_scaled_is_rational(a in -9i64..9, b in -9i64..9, num in 1i64..7, den in 1i64..7) {
            prop_assume!((a, b) != (0, 0) && gcd(a, b) == 1);
            let l = PrimitiveLattice::new([a, b]).unwrap();
            let p = l.perp();
            let s = num as f64 / den as f64;
            let xi = [s * p[0] as f64, s * p[1] as f64];
            match classify_direction(xi, RationalDetection::default()).unwrap() {
                DirectionClass::Rational(found) => prop_assert_eq!(found, l),
                DirectionClass::Irrational => prop_assert!(false, "scaled perp must be rational"),
            }
        }
    }
}
