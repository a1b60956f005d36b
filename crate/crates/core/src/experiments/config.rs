//! Plain-text experiment configuration.
//!
//! Format: one `key = value` pair per line, `#` starts a comment, blank
//! lines ignored. Lists are comma-separated. The potential is a
//! whitespace-separated list of `cos:k1,k2:amp` terms (a cosine pair of
//! modes ±(k1,k2) with real amplitude `amp`).

use crate::error::{Error, Result};
use crate::lattice::PrimitiveLattice;
use crate::potential::FourierField;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("{key}: not a number: {v}"))),
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("{key}: not an integer: {v}"))),
        }
    }

    pub fn u64(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("{key}: not an integer: {v}"))),
        }
    }

    pub fn f64_list(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("{key}: not a number: {s}")))
                })
                .collect(),
        }
    }

    pub fn i64_pair(&self, key: &str, default: [i64; 2]) -> Result<[i64; 2]> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => {
                let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                if parts.len() != 2 {
                    return Err(Error::Config(format!("{key}: expected two integers")));
                }
                Ok([
                    parts[0]
                        .parse()
                        .map_err(|_| Error::Config(format!("{key}: bad integer {}", parts[0])))?,
                    parts[1]
                        .parse()
                        .map_err(|_| Error::Config(format!("{key}: bad integer {}", parts[1])))?,
                ])
            }
        }
    }
}

/// Shared knobs for every runner; experiment-specific keys are read by the
/// runners from [`RawConfig`] directly.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub raw: RawConfig,
    pub lattice: PrimitiveLattice,
    pub potential: FourierField,
    /// strictly decreasing semiclassical ladder
    pub hbars: Vec<f64>,
    /// ε = ħ^α, α ∈ (0, 1)
    pub alpha: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let lattice = PrimitiveLattice::new(raw.i64_pair("lattice", [1, 0])?)?;
        let potential = match raw.get("potential") {
            None => FourierField::cosine([1, 0], 1.0),
            Some(text) => parse_potential(text)?,
        };
        let hbars = raw.f64_list("hbar_ladder", &[1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0])?;
        if hbars.is_empty() || hbars.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::RegimeViolation(
                "hbar_ladder must be nonempty and strictly decreasing".into(),
            ));
        }
        if hbars.iter().any(|&h| !(h > 0.0 && h < 1.0)) {
            return Err(Error::RegimeViolation("hbar values must lie in (0, 1)".into()));
        }
        let alpha = raw.f64("alpha", 0.5)?;
        // ε = ħ^α with α ∈ (0,1) keeps ħ/ε → 0 while ε → 0
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::RegimeViolation(format!(
                "alpha = {alpha} leaves the perturbation-size regime (need 0 < alpha < 1)"
            )));
        }
        let seed = raw.u64("seed", 7)?;
        Ok(Self {
            raw,
            lattice,
            potential,
            hbars,
            alpha,
            seed,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_raw(RawConfig::parse(text)?)
    }

    pub fn eps(&self, hbar: f64) -> f64 {
        hbar.powf(self.alpha)
    }
}

fn parse_potential(text: &str) -> Result<FourierField> {
    let mut field = FourierField::zero();
    for term in text.split_whitespace() {
        let parts: Vec<&str> = term.split(':').collect();
        match parts.as_slice() {
            ["cos", k, amp] => {
                let ks: Vec<&str> = k.split(',').collect();
                if ks.len() != 2 {
                    return Err(Error::Config(format!("potential term {term}: bad mode")));
                }
                let k = [
                    ks[0]
                        .parse()
                        .map_err(|_| Error::Config(format!("potential term {term}: bad mode")))?,
                    ks[1]
                        .parse()
                        .map_err(|_| Error::Config(format!("potential term {term}: bad mode")))?,
                ];
                let amp: f64 = amp
                    .parse()
                    .map_err(|_| Error::Config(format!("potential term {term}: bad amplitude")))?;
                field = field.sum(&FourierField::cosine(k, amp));
            }
            _ => {
                return Err(Error::Config(format!(
                    "potential term {term}: expected cos:k1,k2:amp"
                )))
            }
        }
    }
    Ok(field)
}
