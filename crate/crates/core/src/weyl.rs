//! Exact Weyl quantization on T² over a truncated frequency box.
//!
//! In the Fourier basis `e_k(x) = e^{2πi k·x}` the quantization of a
//! periodic symbol acts as `Op(a) e_k = Σ_q e_q â_{q-k}(πħ(q+k))`, which the
//! crate evaluates entrywise on the box `‖k‖_∞ ≤ N`. Everything downstream
//! (averaging, Schur bounds, exact commutators) reduces to identities on
//! these dense matrices.

use crate::error::{Error, Result};
use crate::lattice::PrimitiveLattice;
use crate::C64;
use ndarray::Array2;
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

/// Truncation box: frequencies with `‖k‖_∞ ≤ n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreqBox {
    pub n: i32,
}

impl FreqBox {
    pub fn new(n: i32) -> Self {
        assert!(n >= 0);
        Self { n }
    }

    pub fn side(&self) -> usize {
        2 * self.n as usize + 1
    }

    pub fn dim(&self) -> usize {
        self.side() * self.side()
    }

    pub fn contains(&self, k: [i64; 2]) -> bool {
        k[0].abs() <= self.n as i64 && k[1].abs() <= self.n as i64
    }

    pub fn index(&self, k: [i64; 2]) -> usize {
        debug_assert!(self.contains(k));
        let n = self.n as i64;
        ((k[0] + n) * (2 * n + 1) + (k[1] + n)) as usize
    }

    pub fn freq(&self, idx: usize) -> [i64; 2] {
        let side = self.side() as i64;
        let n = self.n as i64;
        [(idx as i64) / side - n, (idx as i64) % side - n]
    }

    pub fn iter(&self) -> impl Iterator<Item = [i64; 2]> + '_ {
        (0..self.dim()).map(|i| self.freq(i))
    }
}

/// Declared smoothness/growth class of a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolClass {
    CompactSupport,
    Bounded,
    PolyDeg2,
}

pub type CoefFn = Arc<dyn Fn([f64; 2]) -> C64 + Send + Sync>;

/// Phase-space observable `a(x, ξ) = Σ_k â_k(ξ) e^{2πi k·x}` with finitely
/// many x-modes and callable ξ-coefficients.
#[derive(Clone)]
pub struct Symbol {
    modes: Vec<([i64; 2], CoefFn)>,
    pub class: SymbolClass,
    pub real: bool,
}

impl Symbol {
    pub fn new(modes: Vec<([i64; 2], CoefFn)>, class: SymbolClass, real: bool) -> Self {
        Self { modes, class, real }
    }

    pub fn constant(c: f64) -> Self {
        Self::xi_function(move |_| C64::new(c, 0.0), SymbolClass::Bounded)
    }

    /// x-independent symbol `a = a(ξ)`.
    pub fn xi_function(f: impl Fn([f64; 2]) -> C64 + Send + Sync + 'static, class: SymbolClass) -> Self {
        Self {
            modes: vec![([0, 0], Arc::new(f))],
            class,
            real: false,
        }
    }

    /// Single oscillating mode `e^{2πi m·x}`.
    pub fn exp_mode(m: [i64; 2]) -> Self {
        Self {
            modes: vec![(m, Arc::new(|_| C64::ONE))],
            class: SymbolClass::Bounded,
            real: m == [0, 0],
        }
    }

    /// Kinetic symbol `‖ξ‖²/2`.
    pub fn kinetic() -> Self {
        let mut s = Self::xi_function(
            |xi| C64::new(0.5 * (xi[0] * xi[0] + xi[1] * xi[1]), 0.0),
            SymbolClass::PolyDeg2,
        );
        s.real = true;
        s
    }

    /// Multiplication symbol from a real trigonometric polynomial.
    pub fn from_field(v: &crate::potential::FourierField) -> Self {
        let modes = v
            .modes()
            .map(|(k, c)| (k, Arc::new(move |_: [f64; 2]| c) as CoefFn))
            .collect();
        Self {
            modes,
            class: SymbolClass::Bounded,
            real: true,
        }
    }

    pub fn modes(&self) -> &[([i64; 2], CoefFn)] {
        &self.modes
    }

    pub fn max_mode(&self) -> i64 {
        self.modes
            .iter()
            .map(|(m, _)| m[0].abs().max(m[1].abs()))
            .max()
            .unwrap_or(0)
    }

    /// `a(x, δξ)` for the change-of-scale identity.
    pub fn xi_scaled(&self, delta: f64) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|(m, f)| {
                let f = f.clone();
                (
                    *m,
                    Arc::new(move |xi: [f64; 2]| f([delta * xi[0], delta * xi[1]])) as CoefFn,
                )
            })
            .collect();
        Self {
            modes,
            class: self.class,
            real: self.real,
        }
    }

    /// Mode filter onto Λ at the symbol level.
    pub fn average_along(&self, lattice: &PrimitiveLattice) -> Self {
        let modes = self
            .modes
            .iter()
            .filter(|(m, _)| lattice.member(*m).is_some())
            .cloned()
            .collect();
        Self {
            modes,
            class: self.class,
            real: self.real,
        }
    }

    /// Largest deviation from `â_{-k}(ξ) = conj(â_k(ξ))` over a spot grid;
    /// meaningful for symbols tagged real.
    pub fn reality_deviation(&self, xi_samples: &[[f64; 2]]) -> f64 {
        let mut grouped: BTreeMap<[i64; 2], Vec<&CoefFn>> = BTreeMap::new();
        for (m, f) in &self.modes {
            grouped.entry(*m).or_default().push(f);
        }
        let eval = |k: [i64; 2], xi: [f64; 2]| -> C64 {
            grouped
                .get(&k)
                .map(|fs| fs.iter().map(|f| f(xi)).sum())
                .unwrap_or(C64::ZERO)
        };
        let mut worst: f64 = 0.0;
        for (m, _) in &self.modes {
            for &xi in xi_samples {
                let dev = (eval([-m[0], -m[1]], xi) - eval(*m, xi).conj()).norm();
                worst = worst.max(dev);
            }
        }
        worst
    }
}

/// Dense operator on the truncated Fourier box.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub box_: FreqBox,
    pub hbar: f64,
    pub mat: Array2<C64>,
}

impl OperatorMatrix {
    pub fn zeros(box_: FreqBox, hbar: f64) -> Self {
        let d = box_.dim();
        Self {
            box_,
            hbar,
            mat: Array2::from_elem((d, d), C64::ZERO),
        }
    }

    pub fn identity(box_: FreqBox, hbar: f64) -> Self {
        let mut out = Self::zeros(box_, hbar);
        for i in 0..box_.dim() {
            out.mat[[i, i]] = C64::ONE;
        }
        out
    }

    pub fn apply(&self, v: &ndarray::Array1<C64>) -> ndarray::Array1<C64> {
        self.mat.dot(v)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.box_, other.box_);
        Self {
            box_: self.box_,
            hbar: self.hbar,
            mat: self.mat.dot(&other.mat),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.box_, other.box_);
        Self {
            box_: self.box_,
            hbar: self.hbar,
            mat: &self.mat - &other.mat,
        }
    }

    pub fn add_scaled(&self, other: &Self, factor: C64) -> Self {
        assert_eq!(self.box_, other.box_);
        Self {
            box_: self.box_,
            hbar: self.hbar,
            mat: &self.mat + &other.mat.mapv(|c| c * factor),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.box_, other.box_);
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.box_.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.mat[[i, j]] - self.mat[[j, i]].conj()).norm());
            }
        }
        worst
    }
}

/// `Op_ħ(a)` on the box: entry `(q, k) = â_{q-k}(πħ(q+k))`. Target
/// frequencies outside the box are dropped.
pub fn quantize(a: &Symbol, hbar: f64, box_: FreqBox) -> Result<OperatorMatrix> {
    if a.max_mode() > 2 * box_.n as i64 {
        let worst = a
            .modes
            .iter()
            .max_by_key(|(m, _)| m[0].abs().max(m[1].abs()))
            .map(|(m, _)| *m)
            .unwrap();
        return Err(Error::TruncationTooSmall {
            mode: worst,
            n: box_.n,
        });
    }
    let mut out = OperatorMatrix::zeros(box_, hbar);
    for (m, f) in &a.modes {
        for k in box_.iter() {
            let q = [k[0] + m[0], k[1] + m[1]];
            if !box_.contains(q) {
                continue;
            }
            let xi = [
                PI * hbar * (q[0] + k[0]) as f64,
                PI * hbar * (q[1] + k[1]) as f64,
            ];
            out.mat[[box_.index(q), box_.index(k)]] += f(xi);
        }
    }
    Ok(out)
}

/// Schur-test bound `sqrt(sup_q Σ_k |A_qk| · sup_k Σ_q |A_qk|)`; dominates
/// the spectral norm of the truncated matrix.
pub fn schur_norm_bound(a: &Symbol, hbar: f64, box_: FreqBox) -> Result<f64> {
    let op = quantize(a, hbar, box_)?;
    let d = box_.dim();
    let mut row_sum = vec![0.0f64; d];
    let mut col_sum = vec![0.0f64; d];
    for q in 0..d {
        for k in 0..d {
            let a = op.mat[[q, k]].norm();
            row_sum[q] += a;
            col_sum[k] += a;
        }
    }
    let r = row_sum.iter().cloned().fold(0.0, f64::max);
    let c = col_sum.iter().cloned().fold(0.0, f64::max);
    Ok((r * c).sqrt())
}

/// Diagonal matrix of `D_Λ^⊥ = (1/i)(e^⊥/L)·∇`, with `D_Λ^⊥ e_k = (2π⟨k,e^⊥⟩/L) e_k`.
pub fn d_lambda_perp_matrix(lattice: &PrimitiveLattice, box_: FreqBox) -> OperatorMatrix {
    let mut out = OperatorMatrix::zeros(box_, 1.0);
    for k in box_.iter() {
        let val = TAU * lattice.pair_perp(k) as f64 / lattice.length();
        out.mat[[box_.index(k), box_.index(k)]] = C64::new(val, 0.0);
    }
    out
}

/// Conjugation average `(1/M) Σ_j U(s_j) A U(-s_j)` along the periodic flow
/// `e^{i s D_Λ^⊥}`, with M equispaced nodes on `[0, L_Λ)`. M exceeds twice
/// the largest attainable `|⟨q-k, e^⊥⟩|` so the discrete average of each
/// entry's phase is exact; surviving entries have `q - k ∈ Λ`.
pub fn weinstein_average(lattice: &PrimitiveLattice, a: &OperatorMatrix) -> OperatorMatrix {
    let box_ = a.box_;
    let perp = lattice.perp();
    let reach = 2 * box_.n as i64 * (perp[0].abs() + perp[1].abs());
    let m = (2 * reach + 1) as usize;
    // discrete phase average per pairing value d = <q-k, e^⊥>
    let mut factor: BTreeMap<i64, C64> = BTreeMap::new();
    let mut avg_for = |d: i64| -> C64 {
        *factor.entry(d).or_insert_with(|| {
            let mut acc = C64::ZERO;
            for j in 0..m {
                acc += C64::from_polar(1.0, TAU * (j as i64 * d) as f64 / m as f64);
            }
            acc / m as f64
        })
    };
    let mut out = OperatorMatrix::zeros(box_, a.hbar);
    for q in box_.iter() {
        for k in box_.iter() {
            let d = lattice.pair_perp([q[0] - k[0], q[1] - k[1]]);
            let f = avg_for(d);
            if f.norm() > 0.0 {
                let (qi, ki) = (box_.index(q), box_.index(k));
                out.mat[[qi, ki]] = a.mat[[qi, ki]] * f;
            }
        }
    }
    out
}

/// `AB - BA`.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    a.matmul(b).sub(&b.matmul(a))
}

// ---------------------------------------------------------------------------
// Polynomial symbols and the exact leading Moyal term
// ---------------------------------------------------------------------------

/// Polynomial in (ξ₁, ξ₂) with complex coefficients, indexed by exponents.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct XiPoly {
    terms: BTreeMap<(u8, u8), C64>,
}

impl XiPoly {
    pub fn constant(c: C64) -> Self {
        let mut terms = BTreeMap::new();
        if c != C64::ZERO {
            terms.insert((0, 0), c);
        }
        Self { terms }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = ((u8, u8), C64)>) -> Self {
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            if c != C64::ZERO {
                *map.entry(e).or_insert(C64::ZERO) += c;
            }
        }
        Self { terms: map }
    }

    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|&(i, j)| (i + j) as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, xi: [f64; 2]) -> C64 {
        self.terms
            .iter()
            .map(|(&(i, j), &c)| c * xi[0].powi(i as i32) * xi[1].powi(j as i32))
            .sum()
    }

    pub fn partial(&self, axis: usize) -> Self {
        let terms = self.terms.iter().filter_map(|(&(i, j), &c)| {
            let e = if axis == 0 { i } else { j };
            if e == 0 {
                return None;
            }
            let k = if axis == 0 { (i - 1, j) } else { (i, j - 1) };
            Some((k, c * e as f64))
        });
        Self::from_terms(terms)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = BTreeMap::new();
        for (&(i1, j1), &c1) in &self.terms {
            for (&(i2, j2), &c2) in &other.terms {
                *out.entry((i1 + i2, j1 + j2)).or_insert(C64::ZERO) += c1 * c2;
            }
        }
        Self::from_terms(out)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self::from_terms(self.terms.iter().map(|(&e, &c)| (e, c * factor)))
    }
}

/// Symbol with polynomial ξ-coefficients: trig-polynomial × ξ-polynomial
/// data on which the leading Moyal term is computed analytically.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolySymbol {
    pub modes: BTreeMap<[i64; 2], XiPoly>,
}

impl PolySymbol {
    pub fn from_modes(modes: impl IntoIterator<Item = ([i64; 2], XiPoly)>) -> Self {
        let mut map: BTreeMap<[i64; 2], XiPoly> = BTreeMap::new();
        for (k, p) in modes {
            let entry = map.entry(k).or_default();
            for (&e, &c) in &p.terms {
                *entry.terms.entry(e).or_insert(C64::ZERO) += c;
            }
        }
        Self { modes: map }
    }

    pub fn kinetic() -> Self {
        Self::from_modes([(
            [0, 0],
            XiPoly::from_terms([((2, 0), C64::new(0.5, 0.0)), ((0, 2), C64::new(0.5, 0.0))]),
        )])
    }

    pub fn exp_mode(m: [i64; 2]) -> Self {
        Self::from_modes([(m, XiPoly::constant(C64::ONE))])
    }

    pub fn degree(&self) -> usize {
        self.modes.values().map(XiPoly::degree).max().unwrap_or(0)
    }

    pub fn is_x_independent(&self) -> bool {
        self.modes.keys().all(|&m| m == [0, 0])
    }

    pub fn to_symbol(&self, class: SymbolClass, real: bool) -> Symbol {
        let modes = self
            .modes
            .iter()
            .map(|(&m, p)| {
                let p = p.clone();
                (m, Arc::new(move |xi: [f64; 2]| p.eval(xi)) as CoefFn)
            })
            .collect();
        Symbol::new(modes, class, real)
    }
}

/// Leading Moyal commutator term `iħ{a, b}` with the mechanics convention
/// `{a,b} = ∂_x a·∂_ξ b − ∂_ξ a·∂_x b`; exact for `[Op(a), Op(b)]` when b
/// is an x-independent ξ-polynomial of degree ≤ 2.
pub fn moyal_leading(a: &PolySymbol, b: &PolySymbol, hbar: f64) -> Result<PolySymbol> {
    if b.degree() > 2 {
        return Err(Error::DegreeTooHigh(b.degree()));
    }
    let mut out = PolySymbol::default();
    let ih = C64::new(0.0, hbar);
    for (&ma, pa) in &a.modes {
        for (&mb, pb) in &b.modes {
            let m = [ma[0] + mb[0], ma[1] + mb[1]];
            for axis in 0..2 {
                // ∂_x on a mode multiplies by 2πi m_axis
                let dxa = pa.scaled(C64::new(0.0, TAU * ma[axis] as f64));
                let dxb = pb.scaled(C64::new(0.0, TAU * mb[axis] as f64));
                let term = dxa
                    .mul(&pb.partial(axis))
                    .mul(&XiPoly::constant(ih))
                    .terms
                    .into_iter()
                    .chain(
                        pa.partial(axis)
                            .mul(&dxb)
                            .scaled(-ih)
                            .terms
                            .into_iter(),
                    );
                let poly = XiPoly::from_terms(term);
                if !poly.terms.is_empty() {
                    out = PolySymbol::from_modes(
                        out.modes.into_iter().chain(std::iter::once((m, poly))),
                    );
                }
            }
        }
    }
    out.modes.retain(|_, p| !p.terms.is_empty());
    Ok(out)
}

// ---------------------------------------------------------------------------
// Two-microlocal symbols
// ---------------------------------------------------------------------------

pub type TwoMicroCoefFn = Arc<dyn Fn([f64; 2], f64) -> C64 + Send + Sync>;

/// Observable `a(x, ξ, η)` on `T*T² × (R ∪ {±∞})`: finitely many x-modes
/// with coefficient functions of (ξ, η) and declared limits at η = ±∞.
#[derive(Clone)]
pub struct TwoMicroSymbol {
    modes: Vec<([i64; 2], TwoMicroCoefFn, [C64; 2])>,
    pub eta_cutoff: f64,
}

pub const DEFAULT_ETA_CUTOFF: f64 = 1e3;

impl TwoMicroSymbol {
    /// Builds the symbol, checking on a spot grid that the declared limits
    /// are attained at the cutoff within `limit_tol`.
    pub fn new(
        modes: Vec<([i64; 2], TwoMicroCoefFn, [C64; 2])>,
        eta_cutoff: f64,
        limit_tol: f64,
    ) -> Result<Self> {
        let spot: [[f64; 2]; 4] = [[0.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.7, 1.3]];
        for (m, f, limits) in &modes {
            for &xi in &spot {
                for (sign, lim) in [(-1.0, limits[0]), (1.0, limits[1])] {
                    let dev = (f(xi, sign * eta_cutoff) - lim).norm();
                    if dev > limit_tol {
                        return Err(Error::Config(format!(
                            "mode {m:?}: declared η→{}∞ limit missed by {dev:.3e} at the cutoff",
                            if sign < 0.0 { "-" } else { "+" }
                        )));
                    }
                }
            }
        }
        Ok(Self { modes, eta_cutoff })
    }

    /// x-independent observable `a = a(ξ, η)`.
    pub fn xi_eta(
        f: impl Fn([f64; 2], f64) -> C64 + Send + Sync + 'static,
        limits: [C64; 2],
    ) -> Result<Self> {
        Self::new(
            vec![([0, 0], Arc::new(f), limits)],
            DEFAULT_ETA_CUTOFF,
            1e-6,
        )
    }

    /// Promotes an ordinary symbol (η-independent observable).
    pub fn from_symbol(a: &Symbol) -> Self {
        let modes = a
            .modes()
            .iter()
            .map(|(m, f)| {
                let f = f.clone();
                let g: TwoMicroCoefFn = Arc::new(move |xi, _eta| f(xi));
                // η-independent: the value itself is the limit in η, but it
                // still varies in ξ; declare limits lazily via the cutoff
                // evaluation in to_symbol instead.
                (*m, g, [C64::ZERO, C64::ZERO])
            })
            .collect();
        Self {
            modes,
            eta_cutoff: f64::INFINITY,
        }
    }

    pub fn modes(&self) -> &[([i64; 2], TwoMicroCoefFn, [C64; 2])] {
        &self.modes
    }

    /// Multiplies by `e^{2πi k0·x}`, shifting every mode.
    pub fn mode_shifted(&self, k0: [i64; 2]) -> Self {
        let modes = self
            .modes
            .iter()
            .map(|(m, f, l)| ([m[0] + k0[0], m[1] + k0[1]], f.clone(), *l))
            .collect();
        Self {
            modes,
            eta_cutoff: self.eta_cutoff,
        }
    }

    /// Ordinary symbol `b(x, ξ) = a(x, ξ, H_Λ(ξ)/(ε))` obtained by freezing
    /// η at its two-microlocal value (H_Λ is x-independent on the torus).
    pub fn to_symbol(&self, lattice: &PrimitiveLattice, eps: f64) -> Symbol {
        let cutoff = self.eta_cutoff;
        let lat = *lattice;
        let modes = self
            .modes
            .iter()
            .map(|(m, f, limits)| {
                let f = f.clone();
                let limits = *limits;
                let g: CoefFn = Arc::new(move |xi: [f64; 2]| {
                    let eta = lat.h_lambda(xi) / eps;
                    if eta < -cutoff {
                        limits[0]
                    } else if eta > cutoff {
                        limits[1]
                    } else {
                        f(xi, eta)
                    }
                });
                (*m, g)
            })
            .collect();
        Symbol::new(modes, SymbolClass::Bounded, false)
    }

    /// The rescaled symbol `a(x, εξ, H_Λ(ξ))` whose quantization at ħ/ε
    /// reproduces `quantize_two_micro` exactly (change-of-scale identity).
    pub fn rescaled_symbol(&self, lattice: &PrimitiveLattice, eps: f64) -> Symbol {
        let cutoff = self.eta_cutoff;
        let lat = *lattice;
        let modes = self
            .modes
            .iter()
            .map(|(m, f, limits)| {
                let f = f.clone();
                let limits = *limits;
                let g: CoefFn = Arc::new(move |xi: [f64; 2]| {
                    let eta = lat.h_lambda(xi);
                    if eta < -cutoff {
                        limits[0]
                    } else if eta > cutoff {
                        limits[1]
                    } else {
                        f([eps * xi[0], eps * xi[1]], eta)
                    }
                });
                (*m, g)
            })
            .collect();
        Symbol::new(modes, SymbolClass::Bounded, false)
    }
}

/// Quantization of a two-microlocal observable at scale ε around Λ^⊥.
pub fn quantize_two_micro(
    lattice: &PrimitiveLattice,
    a: &TwoMicroSymbol,
    hbar: f64,
    eps: f64,
    box_: FreqBox,
) -> Result<OperatorMatrix> {
    assert!(eps > 0.0);
    quantize(&a.to_symbol(lattice, eps), hbar, box_)
}
