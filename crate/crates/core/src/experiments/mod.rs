//! Reproducible experiment harness: each runner takes a parsed config,
//! produces a deterministic [`report::Report`] (verdicts plus per-observable
//! rows), and the CLI serializes it as `report.json` + CSV files.

pub mod config;
pub mod report;

mod identities;
mod infinity;
mod support;
mod projection;
mod quasimode;
mod regimes;

pub use config::ExperimentConfig;
pub use identities::run_identities;
pub use infinity::run_infinity;
pub use projection::run_projection;
pub use quasimode::run_quasimode;
pub use regimes::run_regimes;

/// Observable presets understood by the runners (`--list-observables`).
pub fn observable_presets() -> Vec<(&'static str, &'static str)> {
    vec![
        (
            "mode:<n>",
            "averaged Fourier mode exp(2\u{3c0}i n e\u{b7}x); real and imaginary parts recorded separately",
        ),
        (
            "eta_bump",
            "two-microlocal symbol 1/(1+\u{3b7}\u{b2}); vanishing limits at \u{3b7} = \u{b1}\u{221e}",
        ),
        (
            "eta_escape",
            "two-microlocal symbol \u{3b7}\u{b2}/(1+\u{3b7}\u{b2}); limits 1 at \u{3b7} = \u{b1}\u{221e}, witnesses escape",
        ),
        (
            "ring",
            "radial bump centered on the unit speed shell \u{2016}\u{3be}\u{2016} = 1",
        ),
        (
            "tube:<center>:<radius>",
            "position mass of the flat tube around the closed geodesic at the given internal coordinate",
        ),
    ]
}
