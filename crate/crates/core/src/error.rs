//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("generator components share a factor {0} > 1; lattice would not be primitive")]
    NotPrimitive(i64),
    #[error("zero vector is not a valid direction")]
    ZeroVector,
    #[error("symbol mode {mode:?} exceeds the 2N window of box N = {n}")]
    TruncationTooSmall { mode: [i64; 2], n: i32 },
    #[error("averaged potential is constant in the direction of the lattice")]
    DegenerateDirection,
    #[error("exact commutator path requires xi-polynomial degree <= 2, got {0}")]
    DegreeTooHigh(usize),
    #[error("frequency {0:?} does not lie in the sublattice")]
    KNotInLambda([i64; 2]),
    #[error("grid of {m} points per axis aliases a box of size N = {n}; need m >= 2(2N+1)")]
    AliasedGrid { m: usize, n: i32 },
    #[error("base point lies in the critical set; flows degenerate there")]
    CriticalPoint,
    #[error("orbit did not return within the detection horizon")]
    NonperiodicOrbit,
    #[error("no eigenpair qualifies as a quasimode at the requested order")]
    NoQuasimodes,
    #[error("oscillation / truncation diagnostics failed: {0}")]
    DiagnosticsFailed(String),
    #[error("config violates the perturbation-size regime: {0}")]
    RegimeViolation(String),
    #[error("state normalization off by {0:.3e}, beyond the loader tolerance")]
    Normalization(f64),
    #[error("reality constraint violated: coefficient at {k:?} vs {neg_k:?} differ by {dev:.3e}")]
    NotReal {
        k: [i64; 2],
        neg_k: [i64; 2],
        dev: f64,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
