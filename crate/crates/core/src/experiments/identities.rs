//! Machine-precision identity suite over randomized symbols, lattices and ħ:
//! Hermiticity of quantization, the conjugation average as a mode filter
//! commuting with the transverse derivative, the change-of-scale identity,
//! the kinetic-energy splitting along any lattice, the exact leading
//! commutator, and dominance of the Schur norm bound.

use super::config::ExperimentConfig;
use super::report::{Report, Row};
use crate::lattice::PrimitiveLattice;
use crate::weyl::{
    d_lambda_perp_matrix, moyal_leading, quantize, schur_norm_bound, CoefFn, FreqBox,
    OperatorMatrix, PolySymbol, Symbol, SymbolClass,
};
use crate::C64;
use ndarray::Array1;
use rand::Rng;
use rand::SeedableRng;
use std::sync::Arc;

const LATTICES: [[i64; 2]; 4] = [[1, 0], [0, 1], [1, 1], [2, 1]];

pub fn run_identities(cfg: &ExperimentConfig) -> crate::Result<Report> {
    let trials = cfg.raw.usize("trials", 100)?;
    let tol = cfg.raw.f64("tolerance", 1e-10)?;
    let max_n = cfg.raw.usize("max_box", 16)? as i32;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut report = Report::new("identities");
    let names = [
        "hermiticity",
        "average filter",
        "average commutes",
        "change of scale",
        "kinetic split",
        "exact commutator",
    ];
    let mut worst = [0.0f64; 6];
    let mut schur_margin = f64::INFINITY;

    for trial in 0..trials {
        let n = rng.random_range(3..=max_n);
        let box_ = FreqBox::new(n);
        let hbar = rng.random_range(0.01..0.5);
        let lattice = PrimitiveLattice::new(LATTICES[rng.random_range(0..LATTICES.len())]).unwrap();
        let sym = random_real_symbol(&mut rng, 2);
        let op = quantize(&sym, hbar, box_)?;

        let residuals = [
            op.hermiticity_deviation(),
            {
                let averaged = crate::weyl::weinstein_average(&lattice, &op);
                let filtered = quantize(&sym.average_along(&lattice), hbar, box_)?;
                averaged.max_abs_diff(&filtered)
            },
            {
                let averaged = crate::weyl::weinstein_average(&lattice, &op);
                commutator_with_diagonal(&d_lambda_perp_matrix(&lattice, box_), &averaged)
            },
            {
                let delta = rng.random_range(0.1..3.0);
                let rescaled = quantize(&sym.xi_scaled(delta), hbar / delta, box_)?;
                op.max_abs_diff(&rescaled)
            },
            kinetic_split_residual(&lattice, hbar, box_)?,
            exact_commutator_residual(&mut rng, hbar, box_)?,
        ];
        for (i, (&name, &res)) in names.iter().zip(residuals.iter()).enumerate() {
            worst[i] = worst[i].max(res);
            report.rows.push(Row {
                hbar,
                eps: 0.0,
                tau: 0.0,
                t: trial as f64,
                observable: format!("residual {name}"),
                quantum: res,
                reference: 0.0,
            });
        }

        let bound = schur_norm_bound(&sym, hbar, box_)?;
        let estimate = power_iteration_norm(&op, 60);
        schur_margin = schur_margin.min(bound - estimate);
        report.rows.push(Row {
            hbar,
            eps: 0.0,
            tau: 0.0,
            t: trial as f64,
            observable: "schur margin".into(),
            quantum: bound,
            reference: estimate,
        });
    }

    // Hamiltonian Hermiticity across the semiclassical ladder
    let mut ham_worst: f64 = 0.0;
    for &hbar in &cfg.hbars {
        let spec = crate::quantum::HamiltonianSpec::new(hbar, cfg.eps(hbar), cfg.potential.clone())?;
        let h = spec.matrix(FreqBox::new(8))?;
        ham_worst = ham_worst.max(h.hermiticity_deviation());
    }

    for (name, res) in names.iter().zip(worst.iter()) {
        report.push_verdict(name, *res <= tol, format!("max residual {res:.3e} (tol {tol:.1e})"));
    }
    report.push_verdict(
        "schur dominance",
        schur_margin >= -1e-9,
        format!("minimum bound-minus-estimate margin {schur_margin:.3e}"),
    );
    report.push_verdict(
        "hamiltonian hermitian",
        ham_worst <= tol,
        format!("max deviation over the ladder {ham_worst:.3e}"),
    );
    Ok(report)
}

/// Random real symbol: Gaussian ξ-profiles attached to ± mode pairs.
pub(crate) fn random_real_symbol(rng: &mut impl Rng, mode_bound: i64) -> Symbol {
    let mut modes: Vec<([i64; 2], CoefFn)> = Vec::new();
    for _ in 0..3 {
        let m = [
            rng.random_range(-mode_bound..=mode_bound),
            rng.random_range(-mode_bound..=mode_bound),
        ];
        let amp = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let center = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let width: f64 = rng.random_range(0.5..2.0);
        let f = move |xi: [f64; 2]| {
            let d2 = (xi[0] - center[0]).powi(2) + (xi[1] - center[1]).powi(2);
            amp * (-d2 / (2.0 * width * width)).exp()
        };
        let g = move |xi: [f64; 2]| {
            let d2 = (xi[0] - center[0]).powi(2) + (xi[1] - center[1]).powi(2);
            amp.conj() * (-d2 / (2.0 * width * width)).exp()
        };
        modes.push((m, Arc::new(f)));
        modes.push(([-m[0], -m[1]], Arc::new(g)));
    }
    Symbol::new(modes, SymbolClass::Bounded, true)
}

/// `max |DA - AD|` for diagonal D without forming products.
fn commutator_with_diagonal(d: &OperatorMatrix, a: &OperatorMatrix) -> f64 {
    let dim = a.box_.dim();
    let mut worst: f64 = 0.0;
    for q in 0..dim {
        for k in 0..dim {
            let v = a.mat[[q, k]] * (d.mat[[q, q]] - d.mat[[k, k]]);
            worst = worst.max(v.norm());
        }
    }
    worst
}

fn kinetic_split_residual(
    lattice: &PrimitiveLattice,
    hbar: f64,
    box_: FreqBox,
) -> crate::Result<f64> {
    let l = *lattice;
    let h2 = Symbol::xi_function(move |xi| C64::new(l.h_lambda(xi).powi(2), 0.0), SymbolClass::PolyDeg2);
    let hp2 = Symbol::xi_function(
        move |xi| C64::new(l.h_lambda_perp(xi).powi(2), 0.0),
        SymbolClass::PolyDeg2,
    );
    let norm2 = Symbol::xi_function(
        |xi| C64::new(xi[0] * xi[0] + xi[1] * xi[1], 0.0),
        SymbolClass::PolyDeg2,
    );
    let lhs = quantize(&h2, hbar, box_)?.add_scaled(&quantize(&hp2, hbar, box_)?, C64::ONE);
    Ok(lhs.max_abs_diff(&quantize(&norm2, hbar, box_)?))
}

/// `[Op(e^{2πim·x}), Op(‖ξ‖²/2)]` against the quantized leading bracket;
/// the diagonal right factor keeps this quadratic in the dimension.
fn exact_commutator_residual(rng: &mut impl Rng, hbar: f64, box_: FreqBox) -> crate::Result<f64> {
    let m = [rng.random_range(-2..=2i64), rng.random_range(-2..=2i64)];
    let a = PolySymbol::exp_mode(m);
    let kin = PolySymbol::kinetic();
    let lead = moyal_leading(&a, &kin, hbar)?;
    let a_op = quantize(&a.to_symbol(SymbolClass::Bounded, false), hbar, box_)?;
    let kin_op = quantize(&kin.to_symbol(SymbolClass::PolyDeg2, true), hbar, box_)?;
    let rhs = quantize(&lead.to_symbol(SymbolClass::Bounded, false), hbar, box_)?;
    let dim = box_.dim();
    let mut worst: f64 = 0.0;
    for q in 0..dim {
        for k in 0..dim {
            let lhs = a_op.mat[[q, k]] * (kin_op.mat[[k, k]] - kin_op.mat[[q, q]]);
            worst = worst.max((lhs - rhs.mat[[q, k]]).norm());
        }
    }
    Ok(worst)
}

pub(crate) fn power_iteration_norm(op: &OperatorMatrix, iters: usize) -> f64 {
    let d = op.box_.dim();
    let mut v = Array1::from_elem(d, C64::new(1.0, 0.3));
    let nrm = v.iter().map(|x: &C64| x.norm_sqr()).sum::<f64>().sqrt();
    v.mapv_inplace(|x| x / nrm);
    let adj = op.mat.t().mapv(|x| x.conj());
    let mut lam = 0.0;
    for _ in 0..iters {
        let w = adj.dot(&op.mat.dot(&v));
        lam = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if lam == 0.0 {
            return 0.0;
        }
        v = w.mapv(|x| x / lam);
    }
    lam.sqrt()
}
