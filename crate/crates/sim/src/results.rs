//! Sweep results, SNR-gap read-off and file emission.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One solver's outcome in one trial at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverRecord {
    pub iui: f64,
    pub mse_objective: f64,
    pub beta: f64,
    pub bit_errors: u64,
    pub bits: u64,
}

/// Everything one trial produced, ordered series-major then grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// Master seed; the trial's streams are keyed by `(seed, trial)`.
    pub seed: u64,
    pub records: Vec<SolverRecord>,
}

/// Aggregate over all trials for one series at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Solver name, suffixed with `@...` when the run spans several load
    /// factors or alphabets.
    pub solver: String,
    pub grid_var_name: String,
    pub grid_var_value: f64,
    /// Pooled bit errors over pooled bits.
    pub ber: Option<f64>,
    /// Standard error of `ber` from the spread of per-trial error rates.
    pub ber_std_err: Option<f64>,
    /// `10 log10` of the mean IUI; `None` when the mean is zero.
    pub iui_db: Option<f64>,
    pub beta_mean: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub bits: u64,
}

/// SNR at which a series crosses the target BER, relative to a reference series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrGap {
    pub reference: String,
    pub solver: String,
    pub target_ber: f64,
    pub reference_snr_db: Option<f64>,
    pub solver_snr_db: Option<f64>,
    pub gap_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub algorithm: String,
    pub n: usize,
    pub k: usize,
    pub iterations: Option<usize>,
    pub memory: Option<usize>,
    pub first_iteration: f64,
    pub per_iteration: f64,
    pub total: f64,
    /// `total` at two significant digits.
    pub total_rounded: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub experiment: ExperimentKind,
    pub toolkit_version: String,
    pub config: ExperimentConfig,
    pub points: Vec<SweepPoint>,
    pub gaps: Vec<SnrGap>,
    pub complexity: Vec<ComplexityRow>,
}

impl SweepResult {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment,
            toolkit_version: TOOLKIT_VERSION.to_string(),
            config: config.clone(),
            points: Vec::new(),
            gaps: Vec::new(),
            complexity: Vec::new(),
        }
    }

    /// Points of one series, in grid order.
    pub fn series(&self, solver: &str) -> Vec<&SweepPoint> {
        self.points.iter().filter(|p| p.solver == solver).collect()
    }

    pub fn point(&self, solver: &str, grid_value: f64) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|p| p.solver == solver && p.grid_var_value == grid_value)
    }

    pub fn gap(&self, solver: &str) -> Option<&SnrGap> {
        self.gaps.iter().find(|g| g.solver == solver)
    }
}

/// SNR where the BER curve crosses `target`, interpolating linearly in
/// `log10(BER)` between the two bracketing grid points. `None` when the curve
/// never crosses or the crossing lands on a zero-error point.
pub fn snr_at_ber(points: &[(f64, f64)], target: f64) -> Option<f64> {
    let lt = target.log10();
    for w in points.windows(2) {
        let (x0, b0) = w[0];
        let (x1, b1) = w[1];
        if b0 >= target && b1 <= target {
            if b0 == target {
                return Some(x0);
            }
            if b1 <= 0.0 {
                return None;
            }
            let (l0, l1) = (b0.log10(), b1.log10());
            if l0 == l1 {
                return Some(x0);
            }
            return Some(x0 + (lt - l0) / (l1 - l0) * (x1 - x0));
        }
    }
    None
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const SWEEP_HEADER: [&str; 9] = [
    "experiment",
    "solver",
    "grid_var_name",
    "grid_var_value",
    "ber",
    "iui_db",
    "beta_mean",
    "trials",
    "seed",
];

pub fn sweep_csv(result: &SweepResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    for p in &result.points {
        w.write_record([
            result.experiment.name().to_string(),
            p.solver.clone(),
            p.grid_var_name.clone(),
            p.grid_var_value.to_string(),
            fmt_opt(p.ber),
            fmt_opt(p.iui_db),
            p.beta_mean.to_string(),
            p.trials.to_string(),
            result.config.seed.to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}

pub fn gaps_csv(result: &SweepResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "reference",
        "solver",
        "target_ber",
        "reference_snr_db",
        "solver_snr_db",
        "gap_db",
    ])?;
    for g in &result.gaps {
        w.write_record([
            g.reference.clone(),
            g.solver.clone(),
            g.target_ber.to_string(),
            fmt_opt(g.reference_snr_db),
            fmt_opt(g.solver_snr_db),
            fmt_opt(g.gap_db),
        ])?;
    }
    Ok(w.into_inner()?)
}

pub fn complexity_csv(result: &SweepResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "algorithm",
        "n",
        "k",
        "iterations",
        "memory",
        "first_iteration",
        "per_iteration",
        "total",
        "total_rounded",
    ])?;
    for r in &result.complexity {
        w.write_record([
            r.algorithm.clone(),
            r.n.to_string(),
            r.k.to_string(),
            r.iterations.map(|v| v.to_string()).unwrap_or_default(),
            r.memory.map(|v| v.to_string()).unwrap_or_default(),
            r.first_iteration.to_string(),
            r.per_iteration.to_string(),
            r.total.to_string(),
            r.total_rounded.to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(bytes)
        .with_context(|| format!("writing {}", path.display()))
}

/// Writes `result` into `<out>/<experiment>-<config hash>/` and returns that directory.
///
/// The directory holds `config.toml` plus `results.csv` (with `gaps.csv` or
/// `complexity.csv` where they apply) or a single `results.json`.
pub fn emit_results(result: &SweepResult, out: &Path, format: Format) -> Result<PathBuf> {
    let dir = out.join(format!("{}-{}", result.experiment, result.config.hash()));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_file(&dir.join("config.toml"), result.config.to_toml().as_bytes())?;
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(result)?;
            text.push('\n');
            write_file(&dir.join("results.json"), text.as_bytes())?;
        }
        Format::Csv => {
            if result.experiment == ExperimentKind::ComplexityTable {
                write_file(&dir.join("complexity.csv"), &complexity_csv(result)?)?;
            } else {
                write_file(&dir.join("results.csv"), &sweep_csv(result)?)?;
            }
            if !result.gaps.is_empty() {
                write_file(&dir.join("gaps.csv"), &gaps_csv(result)?)?;
            }
        }
    }
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SweepResult {
        let mut r = SweepResult::new(&ExperimentConfig::defaults(ExperimentKind::BerSweep));
        for (i, snr) in [0.0, 4.0].iter().enumerate() {
            r.points.push(SweepPoint {
                solver: "ide".into(),
                grid_var_name: "snr_db".into(),
                grid_var_value: *snr,
                ber: Some(0.1 / (i + 1) as f64),
                ber_std_err: Some(0.01),
                iui_db: Some(-3.25),
                beta_mean: 0.7,
                trials: 10,
                bit_errors: 3,
                bits: 320,
            });
        }
        r
    }

    #[test]
    fn empty_sweep_is_header_only() {
        let r = SweepResult::new(&ExperimentConfig::defaults(ExperimentKind::BerSweep));
        let text = String::from_utf8(sweep_csv(&r).unwrap()).unwrap();
        assert_eq!(text, format!("{}\n", SWEEP_HEADER.join(",")));
    }

    #[test]
    fn csv_rows_match_points() {
        let text = String::from_utf8(sweep_csv(&sample()).unwrap()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("ber-sweep,ide,snr_db,0,0.1,-3.25,0.7,10,1"));
    }

    #[test]
    fn json_round_trip() {
        let r = sample();
        let text = serde_json::to_string_pretty(&r).unwrap();
        let back: SweepResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn log_linear_crossing() {
        let pts = [(0.0, 1e-1), (2.0, 1e-2), (4.0, 1e-4)];
        assert!((snr_at_ber(&pts, 1e-2).unwrap() - 2.0).abs() < 1e-12);
        assert!((snr_at_ber(&pts, 1e-3).unwrap() - 3.0).abs() < 1e-12);
        assert!((snr_at_ber(&pts, 10f64.powf(-1.5)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(snr_at_ber(&pts, 1e-5), None);
        assert_eq!(snr_at_ber(&[(0.0, 1e-2), (2.0, 0.0)], 1e-3), None);
    }

    #[test]
    fn emission_is_byte_stable() {
        let dir = tempfile::tempdir().unwrap();
        let r = sample();
        let a = emit_results(&r, dir.path(), Format::Csv).unwrap();
        let first = fs::read(a.join("results.csv")).unwrap();
        let b = emit_results(&r, dir.path(), Format::Csv).unwrap();
        assert_eq!(a, b);
        assert_eq!(first, fs::read(b.join("results.csv")).unwrap());
        assert!(a.join("config.toml").exists());
        let j = emit_results(&r, dir.path(), Format::Json).unwrap();
        let back: SweepResult =
            serde_json::from_slice(&fs::read(j.join("results.json")).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn unwritable_path_reports_context() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, b"x").unwrap();
        let err = emit_results(&sample(), &blocker, Format::Csv).unwrap_err();
        assert!(format!("{err:#}").contains("file"));
    }
}
