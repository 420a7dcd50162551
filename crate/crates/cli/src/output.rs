//! Run headers, CSV tables and log-log slope fits.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::config::StudyConfig;
use crate::error::CliError;

/// Run metadata written into every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunInfo {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub rng: String,
    pub config: StudyConfig,
}

impl RunInfo {
    pub fn new(command: &str, config: &StudyConfig) -> Result<Self, CliError> {
        Ok(Self {
            command: command.to_string(),
            version: sparsepoly::VERSION.to_string(),
            config_hash: sparsepoly::testbed::config_hash(config)?,
            seed: config.seed,
            rng: "chacha8".to_string(),
            config: config.clone(),
        })
    }

    /// `#`-prefixed lines placed before the CSV header.
    pub fn csv_preamble(&self) -> Result<String, CliError> {
        let mut s = String::new();
        writeln!(s, "# sparsepoly {}", self.version).unwrap();
        writeln!(s, "# command {}", self.command).unwrap();
        writeln!(s, "# config-hash {}", self.config_hash).unwrap();
        writeln!(s, "# seed {} rng {}", self.seed, self.rng).unwrap();
        writeln!(s, "# config {}", serde_json::to_string(&self.config)?).unwrap();
        Ok(s)
    }
}

#[derive(Debug, Clone)]
pub enum Cell {
    Int(usize),
    Float(f64),
    Text(String),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) => write!(f, "{v:.16e}"),
            Cell::Text(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub footer: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_f64(&self, name: &str) -> Vec<f64> {
        let Some(i) = self.columns.iter().position(|c| *c == name) else { return Vec::new() };
        self.rows
            .iter()
            .map(|r| match r[i] {
                Cell::Int(v) => v as f64,
                Cell::Float(v) => v,
                Cell::Text(_) => f64::NAN,
            })
            .collect()
    }

    /// Appends slope lines for each error column against `n`.
    pub fn add_slopes(&mut self, errors: &[&str]) {
        let n = self.column_f64("n");
        for name in errors {
            let e = self.column_f64(name);
            if let Some(fit) = loglog_slope(&n, &e) {
                self.footer.push(format!(
                    "slope {name} {:.16e} ci95 {:.16e} {:.16e}",
                    fit.slope, fit.lo, fit.hi
                ));
            }
        }
    }

    pub fn render(&self, preamble: &str) -> String {
        let mut s = preamble.to_string();
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        for line in &self.footer {
            writeln!(s, "# {line}").unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Least-squares line through `(ln n, ln e)` with a two-sided 95%
/// confidence interval on the slope. Needs three points with positive
/// errors.
pub fn loglog_slope(n: &[f64], e: &[f64]) -> Option<SlopeFit> {
    let pts: Vec<(f64, f64)> = n
        .iter()
        .zip(e)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (sse / (k - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, k - 2.0).ok()?.inverse_cdf(0.975);
    Some(SlopeFit { slope, lo: slope - t * se, hi: slope + t * se })
}

/// Writes `text` to `dir/name`, or to stdout when no directory is given.
pub fn emit(dir: Option<&Path>, name: &str, text: &str) -> Result<(), CliError> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            std::fs::write(d.join(name), text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// One JSON record per line, the run header first.
pub fn jsonl<T: Serialize>(info: &RunInfo, records: &[T]) -> Result<String, CliError> {
    let mut s = serde_json::to_string(&serde_json::json!({ "run": info }))?;
    s.push('\n');
    for r in records {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_has_zero_width_interval() {
        let n = [5.0, 10.0, 20.0, 40.0];
        let e: Vec<f64> = n.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
        let fit = loglog_slope(&n, &e).unwrap();
        assert!((fit.slope + 1.5).abs() < 1e-12);
        assert!(fit.hi - fit.lo < 1e-9);
    }

    #[test]
    fn too_few_points() {
        assert!(loglog_slope(&[1.0, 2.0], &[1.0, 0.5]).is_none());
        assert!(loglog_slope(&[1.0, 2.0, 4.0], &[1.0, 0.0, 0.5]).is_none());
    }

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(Cell::Float(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(Cell::Float(2.0).to_string(), "2.0000000000000000e0");
    }
}
