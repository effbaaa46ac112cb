use std::path::Path;

use faprec_sim::config::{ExperimentConfig, ExperimentKind, SolverKind};
use faprec_sim::experiments::{run, run_sweep};
use faprec_sim::results::{sweep_csv, SweepResult};

fn std_dev(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn bers(r: &SweepResult, solver: &str) -> Vec<f64> {
    r.series(solver).iter().map(|p| p.ber.unwrap()).collect()
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = ExperimentConfig::load(&path)
                .unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
            assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
            seen += 1;
        }
    }
    assert!(seen >= 7);
}

#[test]
fn convergence_traces() {
    let cfg = ExperimentConfig::defaults(ExperimentKind::Convergence);
    let r = run(&cfg, 1).unwrap();
    for s in ["admm", "admm2", "admm3", "ide", "ide2"] {
        assert_eq!(r.series(s).len(), cfg.iterations, "{s}");
    }
    let trace = |s: &str| -> Vec<f64> { r.series(s).iter().map(|p| p.iui_db.unwrap()).collect() };
    let last = |s: &str| *trace(s).last().unwrap();
    assert!(last("ide") < last("admm3"));
    let tail = |s: &str| std_dev(&trace(s)[cfg.iterations - 50..]);
    assert!(
        tail("admm") > tail("admm2"),
        "{} vs {}",
        tail("admm"),
        tail("admm2")
    );
}

#[test]
fn sweep_shape_and_pooled_ber() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::BerSweep);
    cfg.trials = 30;
    cfg.iterations = 20;
    cfg.load_factors = vec![2, 4];
    cfg.solvers = vec![SolverKind::Ide, SolverKind::Zf, SolverKind::QuantizedWf];
    let (r, trials) = run_sweep(&cfg, 2).unwrap();
    let width = cfg.load_factors.len() * cfg.solvers.len() * cfg.snr_db.len();
    assert_eq!(r.points.len(), width);
    let csv = String::from_utf8(sweep_csv(&r).unwrap()).unwrap();
    assert_eq!(csv.lines().count(), width + 1);
    assert!(r.point("ide@R=2", 0.0).is_some());

    assert_eq!(trials.len(), cfg.trials);
    for (i, p) in r.points.iter().enumerate() {
        let errors: u64 = trials.iter().map(|t| t.records[i].bit_errors).sum();
        let bits: u64 = trials.iter().map(|t| t.records[i].bits).sum();
        assert!(trials
            .iter()
            .all(|t| t.records[i].bit_errors <= t.records[i].bits));
        assert_eq!(
            (p.bit_errors, p.bits, p.trials),
            (errors, bits, cfg.trials as u64)
        );
        assert_eq!(p.ber.unwrap(), errors as f64 / bits as f64);
        assert!((0.0..=1.0).contains(&p.ber.unwrap()));
    }
}

#[test]
fn noiseless_wiener_filter_is_error_free() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::BerSweep);
    cfg.trials = 50;
    cfg.snr_db = vec![80.0];
    cfg.solvers = vec![SolverKind::Wf, SolverKind::Zf];
    let (r, _) = run_sweep(&cfg, 1).unwrap();
    assert_eq!(bers(&r, "wf"), [0.0]);
    assert_eq!(bers(&r, "zf"), [0.0]);
}

#[test]
fn ide_beats_quantized_wf_at_r8() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::BerSweep);
    cfg.load_factors = vec![8];
    cfg.snr_db = vec![0.0, 5.0, 10.0];
    cfg.solvers = vec![SolverKind::Ide, SolverKind::QuantizedWf];
    let (r, _) = run_sweep(&cfg, 1).unwrap();
    for snr in &cfg.snr_db {
        let (i, q) = (
            r.point("ide", *snr).unwrap(),
            r.point("quantized-wf", *snr).unwrap(),
        );
        assert!(
            i.ber.unwrap() <= q.ber.unwrap(),
            "{snr} dB: {:?} vs {:?}",
            i.ber,
            q.ber
        );
    }
}

#[test]
fn csi_error_degrades_monotonically() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::CsiError);
    cfg.trials = 300;
    cfg.solvers = vec![SolverKind::Ide2, SolverKind::QuantizedWf];
    let (r, _) = run_sweep(&cfg, 1).unwrap();
    for s in ["ide2", "quantized-wf"] {
        let b = bers(&r, s);
        assert!(b.windows(2).all(|w| w[0] <= w[1]), "{s}: {b:?}");
    }
}

#[test]
fn oracle_cap_is_enforced() {
    let mut cfg = ExperimentConfig::defaults(ExperimentKind::OracleGap);
    cfg.load_factors = vec![8];
    assert!(run_sweep(&cfg, 1).is_err());
}

#[test]
fn complexity_table_rows() {
    let cfg = ExperimentConfig::defaults(ExperimentKind::ComplexityTable);
    let r = run(&cfg, 1).unwrap();
    assert_eq!(
        r.complexity.len(),
        4 * cfg.complexity_antennas.len() + cfg.tb_cep_memory_fractions.len()
    );
    let ide2: Vec<f64> = r
        .complexity
        .iter()
        .filter(|c| c.algorithm == "IDE2")
        .map(|c| c.total_rounded)
        .collect();
    assert_eq!(ide2, [2.1e5, 4.3e5]);
}
