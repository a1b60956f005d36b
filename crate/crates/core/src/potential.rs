//! Real trigonometric polynomials on T², directional averages, and the
//! critical-geodesic structure of a potential.

use crate::error::{Error, Result};
use crate::lattice::{classify_direction, DirectionClass, PrimitiveLattice, RationalDetection};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Tolerance on the Hermitian symmetry of the coefficients.
const REALITY_TOL: f64 = 1e-12;

/// A real-valued function on T² with finitely many Fourier modes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierField {
    coeffs: BTreeMap<[i64; 2], C64>,
}

impl FourierField {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        if c != 0.0 {
            coeffs.insert([0, 0], C64::new(c, 0.0));
        }
        Self { coeffs }
    }

    /// `amp · cos(2π k·x)`.
    pub fn cosine(k: [i64; 2], amp: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(k, C64::new(amp / 2.0, 0.0));
        coeffs.insert([-k[0], -k[1]], C64::new(amp / 2.0, 0.0));
        Self { coeffs }
    }

    /// Builds from explicit coefficients, validating the reality constraint
    /// `V̂_{-k} = conj(V̂_k)`.
    pub fn from_modes(modes: impl IntoIterator<Item = ([i64; 2], C64)>) -> Result<Self> {
        let mut coeffs: BTreeMap<[i64; 2], C64> = BTreeMap::new();
        for (k, c) in modes {
            *coeffs.entry(k).or_insert(C64::ZERO) += c;
        }
        coeffs.retain(|_, c| c.norm() > 0.0);
        let field = Self { coeffs };
        field.check_reality()?;
        Ok(field)
    }

    fn check_reality(&self) -> Result<()> {
        for (&k, &c) in &self.coeffs {
            let neg = [-k[0], -k[1]];
            let mirror = self.coeffs.get(&neg).copied().unwrap_or(C64::ZERO);
            let dev = (mirror - c.conj()).norm();
            let scale = c.norm().max(1.0);
            if dev > REALITY_TOL * scale {
                return Err(Error::NotReal { k, neg_k: neg, dev });
            }
        }
        Ok(())
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (&k, &c) in &other.coeffs {
            *coeffs.entry(k).or_insert(C64::ZERO) += c;
        }
        coeffs.retain(|_, c| c.norm() > 0.0);
        Self { coeffs }
    }

    pub fn modes(&self) -> impl Iterator<Item = ([i64; 2], C64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coeff(&self, k: [i64; 2]) -> C64 {
        self.coeffs.get(&k).copied().unwrap_or(C64::ZERO)
    }

    pub fn mean(&self) -> f64 {
        self.coeff([0, 0]).re
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(|&k| k == [0, 0])
    }

    /// Largest `‖k‖_∞` over the stored modes.
    pub fn support_bound(&self) -> i64 {
        self.coeffs
            .keys()
            .map(|k| k[0].abs().max(k[1].abs()))
            .max()
            .unwrap_or(0)
    }

    /// `Σ_k V̂_k e^{2πi k·x}`; the imaginary part is discarded after the
    /// reality check at construction.
    pub fn evaluate(&self, x: [f64; 2]) -> f64 {
        let mut acc = C64::ZERO;
        for (&k, &c) in &self.coeffs {
            let phase = TAU * (k[0] as f64 * x[0] + k[1] as f64 * x[1]);
            acc += c * C64::from_polar(1.0, phase);
        }
        acc.re
    }

    /// Mode filter onto Λ: keeps exactly the coefficients with `k ∈ Λ`.
    pub fn average_along(&self, lattice: &PrimitiveLattice) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(&k, _)| lattice.member(k).is_some())
            .map(|(&k, &c)| (k, c))
            .collect();
        Self { coeffs }
    }

    /// Geodesic average in the direction ξ: the Λ-filter for rational ξ
    /// (with ξ ∈ Λ^⊥), the mean for irrational ξ.
    pub fn geodesic_average(&self, xi: [f64; 2], det: RationalDetection) -> Result<Self> {
        match classify_direction(xi, det)? {
            DirectionClass::Rational(lattice) => Ok(self.average_along(&lattice)),
            DirectionClass::Irrational => Ok(Self::constant(self.mean())),
        }
    }

    /// The averaged potential as a 1-periodic profile of the fractional
    /// coordinate `u = ⟨x, e_Λ⟩ mod 1`.
    pub fn lambda_profile(&self, lattice: &PrimitiveLattice) -> Profile {
        let mut coeffs = BTreeMap::new();
        for (&k, &c) in &self.coeffs {
            if let Some(n) = lattice.member(k) {
                *coeffs.entry(n).or_insert(C64::ZERO) += c;
            }
        }
        Profile { coeffs }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let recs: Vec<ModeRecord> = self
            .coeffs
            .iter()
            .map(|(&k, &c)| ModeRecord {
                k,
                re: c.re,
                im: c.im,
            })
            .collect();
        serde_json::to_value(recs).expect("mode records are serializable")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let recs: Vec<ModeRecord> = serde_json::from_value(value.clone())?;
        Self::from_modes(recs.into_iter().map(|r| (r.k, C64::new(r.re, r.im))))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModeRecord {
    k: [i64; 2],
    re: f64,
    im: f64,
}

/// A real 1-periodic profile `W(u) = Σ_n c_n e^{2πi n u}`; the averaged
/// potential seen along the lattice coordinate.
#[derive(Debug, Clone, Default)]
pub struct Profile {
    coeffs: BTreeMap<i64, C64>,
}

impl Profile {
    pub fn from_modes(modes: impl IntoIterator<Item = (i64, C64)>) -> Self {
        Self {
            coeffs: modes.into_iter().collect(),
        }
    }

    /// `amp · cos(2π u)`.
    pub fn cosine(amp: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(1, C64::new(amp / 2.0, 0.0));
        coeffs.insert(-1, C64::new(amp / 2.0, 0.0));
        Self { coeffs }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(|&n| n == 0)
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&n, &c)| (c * unit_phase(n as f64 * u)).re)
            .sum()
    }

    /// d/du of the profile.
    pub fn deriv(&self, u: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&n, &c)| {
                let w = TAU * n as f64;
                (c * C64::new(0.0, w) * unit_phase(n as f64 * u)).re
            })
            .sum()
    }

    pub fn second_deriv(&self, u: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&n, &c)| {
                let w = TAU * n as f64;
                (-c * w * w * unit_phase(n as f64 * u)).re
            })
            .sum()
    }

    pub fn max_abs_second_deriv(&self) -> f64 {
        (0..2048)
            .map(|j| self.second_deriv(j as f64 / 2048.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        (0..4096)
            .map(|j| self.eval(j as f64 / 4096.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `e^{2πi·turns}` with quarter-turn argument reduction, so that the phase is
/// exact at multiples of 1/4 of a turn. Plain `sin(2π·0.5)` is ~1.2e-16, which
/// would make equilibrium fibers of the reduced flow drift instead of staying
/// exact fixed points.
fn unit_phase(turns: f64) -> C64 {
    let r = turns.rem_euclid(1.0);
    let q = (4.0 * r).round();
    let d = r - 0.25 * q;
    let (s, c) = (TAU * d).sin_cos();
    match (q as i64).rem_euclid(4) {
        0 => C64::new(c, s),
        1 => C64::new(-s, c),
        2 => C64::new(-c, -s),
        _ => C64::new(s, -c),
    }
}

/// How a critical position sits on the averaged profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootClass {
    Min,
    Max,
    Degenerate,
}

/// Critical geodesics of one lattice direction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalGeodesicReport {
    pub lattice: PrimitiveLattice,
    /// Positions `u* ∈ [0,1)` (fraction of one period of the averaged
    /// potential) with `W'(u*) = 0`, sorted.
    pub positions: Vec<f64>,
    pub classes: Vec<RootClass>,
    /// Set when the average is constant and every geodesic is critical.
    pub degenerate: bool,
}

const ROOT_GRID: usize = 4096;

/// Finds all roots of `W'` over one period by grid bracketing plus Newton
/// polish, classifying each by the sign of `W''`.
pub fn critical_geodesics(
    lattice: &PrimitiveLattice,
    v: &FourierField,
    root_tol: f64,
) -> Result<CriticalGeodesicReport> {
    let w = v.lambda_profile(lattice);
    if w.is_constant() {
        return Err(Error::DegenerateDirection);
    }
    let scale = w.max_abs_second_deriv().max(1.0);
    let mut roots: Vec<f64> = Vec::new();
    for j in 0..ROOT_GRID {
        let a = j as f64 / ROOT_GRID as f64;
        let b = (j + 1) as f64 / ROOT_GRID as f64;
        let (fa, fb) = (w.deriv(a), w.deriv(b));
        if fa == 0.0 {
            push_root(&mut roots, a, root_tol);
            continue;
        }
        if fa * fb < 0.0 {
            // bisection then Newton
            let (mut lo, mut hi) = (a, b);
            let mut flo = fa;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = w.deriv(mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
            }
            let mut u = 0.5 * (lo + hi);
            for _ in 0..8 {
                let d2 = w.second_deriv(u);
                if d2.abs() < 1e-14 * scale {
                    break;
                }
                let step = w.deriv(u) / d2;
                u -= step;
                if step.abs() < root_tol {
                    break;
                }
            }
            push_root(&mut roots, u.rem_euclid(1.0), root_tol);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let classes = roots
        .iter()
        .map(|&u| {
            let d2 = w.second_deriv(u);
            if d2 > 1e-9 * scale {
                RootClass::Min
            } else if d2 < -1e-9 * scale {
                RootClass::Max
            } else {
                RootClass::Degenerate
            }
        })
        .collect();
    Ok(CriticalGeodesicReport {
        lattice: *lattice,
        positions: roots,
        classes,
        degenerate: false,
    })
}

fn push_root(roots: &mut Vec<f64>, u: f64, tol: f64) {
    let sep = tol.max(1e-10);
    let dup = roots
        .iter()
        .any(|&r| (r - u).abs() < sep || (r - u).abs() > 1.0 - sep);
    if !dup {
        roots.push(u);
    }
}

/// Runs `critical_geodesics` over all lattices up to `max_norm`; constant
/// directions are reported with the degenerate flag instead of erroring.
/// Directions with `L_Λ > max_norm` are truncated away by construction.
pub fn critical_set(
    v: &FourierField,
    max_norm: f64,
    root_tol: f64,
) -> Vec<CriticalGeodesicReport> {
    crate::lattice::enumerate_lattices(max_norm)
        .iter()
        .map(|l| match critical_geodesics(l, v, root_tol) {
            Ok(report) => report,
            Err(_) => CriticalGeodesicReport {
                lattice: *l,
                positions: Vec::new(),
                classes: Vec::new(),
                degenerate: true,
            },
        })
        .collect()
}
