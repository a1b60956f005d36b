//! Experiment outputs: measurement rows, pass/fail verdicts, and the
//! serialization contract (`report.json` plus one CSV per observable with
//! header `hbar,eps,tau,t,observable,quantum,reference,abs_error`).

use crate::error::Result;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub hbar: f64,
    pub eps: f64,
    pub tau: f64,
    pub t: f64,
    pub observable: String,
    pub quantum: f64,
    pub reference: f64,
}

impl Row {
    pub fn abs_error(&self) -> f64 {
        (self.quantum - self.reference).abs()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    /// per-rung bookkeeping: (ħ, ε, τ, ħ/ε, τε)
    pub regime_table: Vec<RegimeRecord>,
    pub diagnostics: serde_json::Value,
    pub rows: Vec<Row>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
    /// grid densities exported as `density_<label>.csv`
    #[serde(skip)]
    pub densities: Vec<DensityGrid>,
}

/// An M×M density grid on the torus with its provenance metadata.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    pub label: String,
    pub hbar: f64,
    pub eps: f64,
    pub t: f64,
    pub grid: ndarray::Array2<f64>,
}

impl DensityGrid {
    /// CSV body: one metadata comment line, then `x1,x2,density` rows.
    pub fn to_csv(&self) -> String {
        let m = self.grid.nrows();
        let mut body = format!(
            "# hbar={},eps={},t={}\nx1,x2,density\n",
            fmt(self.hbar),
            fmt(self.eps),
            fmt(self.t)
        );
        for j0 in 0..m {
            for j1 in 0..m {
                writeln!(
                    body,
                    "{},{},{}",
                    fmt(j0 as f64 / m as f64),
                    fmt(j1 as f64 / m as f64),
                    fmt(self.grid[[j0, j1]])
                )
                .expect("string write");
            }
        }
        body
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeRecord {
    pub hbar: f64,
    pub eps: f64,
    pub tau: f64,
    pub hbar_over_eps: f64,
    pub tau_eps: f64,
}

impl RegimeRecord {
    pub fn new(hbar: f64, eps: f64, tau: f64) -> Self {
        Self {
            hbar,
            eps,
            tau,
            hbar_over_eps: hbar / eps,
            tau_eps: tau * eps,
        }
    }
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            regime_table: Vec::new(),
            diagnostics: serde_json::Value::Null,
            rows: Vec::new(),
            verdicts: Vec::new(),
            passed: true,
            densities: Vec::new(),
        }
    }

    pub fn push_verdict(&mut self, name: &str, passed: bool, detail: String) {
        self.passed &= passed;
        self.verdicts.push(Verdict::new(name, passed, detail));
    }

    /// Writes `report.json` and one CSV per observable into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let json = serde_json::json!({
            "experiment": self.experiment,
            "passed": self.passed,
            "regime_table": self.regime_table,
            "diagnostics": self.diagnostics,
            "verdicts": self.verdicts,
            "row_count": self.rows.len(),
        });
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&json)?)?;
        for (name, csv) in self.csv_bodies() {
            std::fs::write(dir.join(format!("{name}.csv")), csv)?;
        }
        for d in &self.densities {
            std::fs::write(
                dir.join(format!("density_{}.csv", sanitize(&d.label))),
                d.to_csv(),
            )?;
        }
        Ok(())
    }

    /// Deterministic CSV bodies keyed by sanitized observable name.
    pub fn csv_bodies(&self) -> BTreeMap<String, String> {
        let mut grouped: BTreeMap<String, Vec<&Row>> = BTreeMap::new();
        for row in &self.rows {
            grouped.entry(sanitize(&row.observable)).or_default().push(row);
        }
        grouped
            .into_iter()
            .map(|(name, rows)| {
                let mut body = String::from("hbar,eps,tau,t,observable,quantum,reference,abs_error\n");
                for r in rows {
                    writeln!(
                        body,
                        "{},{},{},{},{},{},{},{}",
                        fmt(r.hbar),
                        fmt(r.eps),
                        fmt(r.tau),
                        fmt(r.t),
                        r.observable,
                        fmt(r.quantum),
                        fmt(r.reference),
                        fmt(r.abs_error())
                    )
                    .expect("string write");
                }
                (name, body)
            })
            .collect()
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.12e}")
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Strict monotone-decrease check used by the trend verdicts.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_shape_and_determinism() {
        let mut rep = Report::new("demo");
        rep.rows.push(Row {
            hbar: 1.0 / 32.0,
            eps: 0.17,
            tau: 2.0,
            t: 1.0,
            observable: "mode:1 re".into(),
            quantum: 0.5,
            reference: 0.25,
        });
        let a = rep.csv_bodies();
        let b = rep.csv_bodies();
        assert_eq!(a, b);
        let body = &a["mode_1_re"];
        assert!(body.starts_with("hbar,eps,tau,t,observable,quantum,reference,abs_error\n"));
        assert!(body.contains("2.500000000000e-1"));
    }

    #[test]
    fn verdicts_gate_passed() {
        let mut rep = Report::new("demo");
        rep.push_verdict("a", true, "ok".into());
        assert!(rep.passed);
        rep.push_verdict("b", false, "bad".into());
        assert!(!rep.passed);
    }

    #[test]
    fn trend_helper() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0, 1.0]));
    }
}
