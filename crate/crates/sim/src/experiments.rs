use anyhow::{ensure, Context, Result};
use faprec_core::complexity::{Algorithm, ComplexityModel, ProblemSize};
use faprec_core::model::complex_normal_vec;
use faprec_core::{
    generate_channel, iui, mse_objective, perturb_channel, run_admm, run_admm2, run_admm3,
    snr_to_sigma2, to_db, transmit_with_noise, two_significant, Alphabet, BetaMode, Channel,
    Constellation, Matrix, C64,
};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{AlphabetSpec, ExperimentConfig, ExperimentKind, SolverKind};
use crate::results::{
    snr_at_ber, ComplexityRow, SnrGap, SolverRecord, SweepPoint, SweepResult, TrialRecord,
};
use crate::seeds::{stream, Purpose};
use crate::solvers::{Outcome, SolverSet};

/// One antenna count and alphabet combination of a sweep.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub n: usize,
    pub alphabet_spec: AlphabetSpec,
    pub alphabet: Alphabet,
    /// Appended to solver names, e.g. `@R=8,psk-16`; empty when unambiguous.
    pub suffix: String,
}

impl Scenario {
    pub fn p_tx(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn label(&self, solver: SolverKind) -> String {
        format!("{solver}{}", self.suffix)
    }
}

pub fn scenarios(cfg: &ExperimentConfig) -> Result<Vec<Scenario>> {
    let specs = cfg.alphabet_specs()?;
    let specs = if cfg.experiment == ExperimentKind::PskSweep {
        specs
    } else {
        specs[..1].to_vec()
    };
    let mut out = Vec::new();
    for &r in &cfg.load_factors {
        for spec in &specs {
            let n = r * cfg.k;
            let mut parts = Vec::new();
            if cfg.load_factors.len() > 1 {
                parts.push(format!("R={r}"));
            }
            if specs.len() > 1 {
                parts.push(spec.to_string());
            }
            let suffix = if parts.is_empty() {
                String::new()
            } else {
                format!("@{}", parts.join(","))
            };
            out.push(Scenario {
                n,
                alphabet_spec: spec.clone(),
                alphabet: spec
                    .build(1.0 / n as f64)
                    .with_context(|| format!("building {spec}"))?,
                suffix,
            });
        }
    }
    Ok(out)
}

/// What a sweep varies across its grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Snr(Vec<f64>),
    Epsilon { snr_db: f64, epsilon: Vec<f64> },
}

impl Grid {
    pub fn of(cfg: &ExperimentConfig) -> Self {
        match cfg.experiment {
            ExperimentKind::CsiError => Grid::Epsilon {
                snr_db: cfg.csi_snr_db,
                epsilon: cfg.epsilon.clone(),
            },
            _ => Grid::Snr(cfg.snr_db.clone()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Grid::Snr(_) => "snr_db",
            Grid::Epsilon { .. } => "epsilon",
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Grid::Snr(v) => v,
            Grid::Epsilon { epsilon, .. } => epsilon,
        }
    }
}

/// The channel, symbols and unit noise one trial draws for one antenna count.
#[derive(Debug, Clone)]
pub struct TrialDraw {
    pub channel: Channel<f64>,
    pub bits: Vec<bool>,
    pub s: Vec<C64>,
    pub unit_noise: Vec<C64>,
}

/// Draws trial `trial`'s instance with `k` users and `n` antennas.
///
/// Channel, bits and noise come from separate streams, so every solver and
/// every grid point of the trial sees the same realization.
pub fn draw_trial(
    seed: u64,
    trial: u64,
    k: usize,
    n: usize,
    constellation: &Constellation<f64>,
) -> Result<TrialDraw> {
    let aux = n as u64;
    let channel = generate_channel(k, n, &mut stream(seed, trial, Purpose::Channel, aux));
    let mut rb = stream(seed, trial, Purpose::Bits, aux);
    let bits: Vec<bool> = (0..k * constellation.bits_per_symbol())
        .map(|_| rb.random())
        .collect();
    let s = constellation.modulate(&bits)?;
    let unit_noise = complex_normal_vec(k, &mut stream(seed, trial, Purpose::Noise, aux));
    Ok(TrialDraw {
        channel,
        bits,
        s,
        unit_noise,
    })
}

fn evaluate(
    draw: &TrialDraw,
    out: &Outcome,
    sigma2: f64,
    constellation: &Constellation<f64>,
) -> Result<SolverRecord> {
    let h = draw.channel.matrix();
    let y = transmit_with_noise(&draw.channel, &out.x, sigma2, &draw.unit_noise)?;
    let (_, bits_hat) = constellation.detect(&y, out.beta)?;
    let errors = bits_hat
        .iter()
        .zip(&draw.bits)
        .filter(|(a, b)| a != b)
        .count();
    Ok(SolverRecord {
        iui: iui(&draw.s, out.beta, h, &out.x)?,
        mse_objective: mse_objective(&draw.s, out.beta, h, &out.x, sigma2)?,
        beta: out.beta,
        bit_errors: errors as u64,
        bits: draw.bits.len() as u64,
    })
}

/// Shared read-only state of one sweep.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub cfg: ExperimentConfig,
    pub scenarios: Vec<Scenario>,
    pub grid: Grid,
    pub solvers: SolverSet,
    pub constellation: Constellation<f64>,
}

impl Sweep {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            scenarios: scenarios(cfg)?,
            grid: Grid::of(cfg),
            solvers: SolverSet::from_config(cfg),
            constellation: Constellation::new(cfg.modulation()?),
        })
    }

    /// Runs one trial: every scenario, then every solver, then every grid point.
    pub fn run_trial(&self, trial: u64) -> Result<TrialRecord> {
        let cfg = &self.cfg;
        let mut records = Vec::new();
        for sc in &self.scenarios {
            let draw = draw_trial(cfg.seed, trial, cfg.k, sc.n, &self.constellation)?;
            match &self.grid {
                Grid::Snr(snrs) => {
                    let sigma2s: Vec<f64> = snrs
                        .iter()
                        .map(|&db| snr_to_sigma2(db, sc.n, sc.p_tx()))
                        .collect();
                    for &solver in &cfg.solvers {
                        let outs = self
                            .solvers
                            .precode_grid(
                                solver,
                                draw.channel.matrix(),
                                &draw.s,
                                &sc.alphabet,
                                &sigma2s,
                            )
                            .with_context(|| format!("{} in trial {trial}", sc.label(solver)))?;
                        for (out, &s2) in outs.iter().zip(&sigma2s) {
                            records.push(evaluate(&draw, out, s2, &self.constellation)?);
                        }
                    }
                }
                Grid::Epsilon { snr_db, epsilon } => {
                    let sigma2 = snr_to_sigma2(*snr_db, sc.n, sc.p_tx());
                    // one error draw per trial, scaled by each epsilon
                    let estimates = epsilon
                        .iter()
                        .map(|&e| {
                            let mut rng =
                                stream(cfg.seed, trial, Purpose::ChannelError, sc.n as u64);
                            perturb_channel(&draw.channel, e, &mut rng)
                        })
                        .collect::<faprec_core::Result<Vec<_>>>()?;
                    for &solver in &cfg.solvers {
                        for h_est in &estimates {
                            let out = self
                                .solvers
                                .precode(solver, h_est.matrix(), &draw.s, &sc.alphabet, sigma2)
                                .with_context(|| {
                                    format!("{} in trial {trial}", sc.label(solver))
                                })?;
                            records.push(evaluate(&draw, &out, sigma2, &self.constellation)?);
                        }
                    }
                }
            }
        }
        Ok(TrialRecord {
            trial,
            seed: cfg.seed,
            records,
        })
    }

    /// All trials on a pool of `workers` threads, returned in trial order.
    pub fn run_trials(&self, workers: usize) -> Result<Vec<TrialRecord>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .context("building worker pool")?;
        pool.install(|| {
            (0..self.cfg.trials as u64)
                .into_par_iter()
                .map(|t| self.run_trial(t))
                .collect()
        })
    }

    /// Series labels in record order.
    pub fn series(&self) -> Vec<String> {
        self.scenarios
            .iter()
            .flat_map(|sc| self.cfg.solvers.iter().map(|s| sc.label(*s)))
            .collect()
    }

    /// Pools trial records into one point per series and grid value.
    pub fn aggregate(&self, trials: &[TrialRecord]) -> Result<SweepResult> {
        let grid = self.grid.values();
        let series = self.series();
        let width = series.len() * grid.len();
        let mut result = SweepResult::new(&self.cfg);
        for t in trials {
            ensure!(
                t.records.len() == width,
                "trial {} has {} records, expected {width}",
                t.trial,
                t.records.len()
            );
        }
        let count = trials.len() as f64;
        for (si, name) in series.iter().enumerate() {
            for (gi, &g) in grid.iter().enumerate() {
                let idx = si * grid.len() + gi;
                let (mut errors, mut bits, mut iui_sum, mut beta_sum) = (0u64, 0u64, 0.0, 0.0);
                let mut rates = Vec::with_capacity(trials.len());
                for t in trials {
                    let r = &t.records[idx];
                    errors += r.bit_errors;
                    bits += r.bits;
                    iui_sum += r.iui;
                    beta_sum += r.beta;
                    rates.push(r.bit_errors as f64 / r.bits as f64);
                }
                let ber = (bits > 0).then(|| errors as f64 / bits as f64);
                let ber_std_err = (trials.len() > 1).then(|| {
                    let mean = rates.iter().sum::<f64>() / count;
                    let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (count - 1.0);
                    (var / count).sqrt()
                });
                let mean_iui = iui_sum / count;
                result.points.push(SweepPoint {
                    solver: name.clone(),
                    grid_var_name: self.grid.name().into(),
                    grid_var_value: g,
                    ber,
                    ber_std_err,
                    iui_db: (mean_iui > 0.0).then(|| to_db(mean_iui)),
                    beta_mean: beta_sum / count,
                    trials: trials.len() as u64,
                    bit_errors: errors,
                    bits,
                });
            }
        }
        if let Grid::Snr(_) = self.grid {
            result.gaps = self.gaps(&result);
        }
        Ok(result)
    }

    /// Gaps at the target BER against the oracle, or against WF when there is no oracle.
    fn gaps(&self, result: &SweepResult) -> Vec<SnrGap> {
        let reference = [SolverKind::Oracle, SolverKind::Wf]
            .into_iter()
            .find(|r| self.cfg.solvers.contains(r));
        let Some(reference) = reference else {
            return Vec::new();
        };
        let curve = |name: &str| -> Vec<(f64, f64)> {
            result
                .series(name)
                .iter()
                .filter_map(|p| p.ber.map(|b| (p.grid_var_value, b)))
                .collect()
        };
        let target = self.cfg.target_ber;
        let mut gaps = Vec::new();
        for sc in &self.scenarios {
            let ref_name = sc.label(reference);
            let ref_snr = snr_at_ber(&curve(&ref_name), target);
            for &solver in self.cfg.solvers.iter().filter(|s| **s != reference) {
                let name = sc.label(solver);
                let snr = snr_at_ber(&curve(&name), target);
                gaps.push(SnrGap {
                    reference: ref_name.clone(),
                    solver: name,
                    target_ber: target,
                    reference_snr_db: ref_snr,
                    solver_snr_db: snr,
                    gap_db: ref_snr.zip(snr).map(|(a, b)| b - a),
                });
            }
        }
        gaps
    }
}

/// Monte-Carlo sweep for `ber-sweep`, `iui-sweep`, `csi-error`, `oracle-gap` and `psk-sweep`.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<(SweepResult, Vec<TrialRecord>)> {
    let sweep = Sweep::new(cfg)?;
    let trials = sweep.run_trials(workers)?;
    Ok((sweep.aggregate(&trials)?, trials))
}

/// The single convergence instance: trial 0 of the first scenario.
pub fn convergence_instance(cfg: &ExperimentConfig) -> Result<(Matrix, Vec<C64>, Alphabet)> {
    let sc = scenarios(cfg)?.remove(0);
    let constellation = Constellation::new(cfg.modulation()?);
    let draw = draw_trial(cfg.seed, 0, cfg.k, sc.n, &constellation)?;
    Ok((draw.channel.into_matrix(), draw.s, sc.alphabet))
}

/// Per-iteration IUI of each solver on [`convergence_instance`], as one point per iteration.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    ensure!(
        cfg.experiment == ExperimentKind::Convergence,
        "not a convergence config"
    );
    let (h, s, alphabet) = convergence_instance(cfg)?;
    let set = SolverSet::from_config(cfg);
    let beta = match set.ide.beta_mode {
        BetaMode::Fixed(b) => b,
        BetaMode::Adaptive => cfg.beta,
    };
    let h_tilde = h.scaled(beta);
    let mut result = SweepResult::new(cfg);
    for &solver in &cfg.solvers {
        let trace: Vec<f64> = match solver {
            SolverKind::Admm => run_admm(&h_tilde, &s, &alphabet, cfg.gamma0, cfg.iterations)?.iui,
            SolverKind::Admm2 => {
                run_admm2(
                    &h_tilde,
                    &s,
                    &alphabet,
                    cfg.gamma0,
                    cfg.alpha,
                    cfg.iterations,
                )?
                .iui
            }
            SolverKind::Admm3 => {
                run_admm3(
                    &h_tilde,
                    &s,
                    &alphabet,
                    cfg.gamma0,
                    cfg.alpha,
                    cfg.iterations,
                )?
                .iui
            }
            SolverKind::Ide | SolverKind::Ide2 => {
                let mut ide = set.ide;
                ide.beta_mode = BetaMode::Fixed(beta);
                let run = if solver == SolverKind::Ide {
                    faprec_core::ide_run
                } else {
                    faprec_core::ide2_run
                };
                run(&h, &s, &alphabet, &ide, 0.0)?.iui_trace
            }
            other => anyhow::bail!("{other} has no iteration trace"),
        };
        for (t, v) in trace.iter().enumerate() {
            result.points.push(SweepPoint {
                solver: solver.to_string(),
                grid_var_name: "iteration".into(),
                grid_var_value: (t + 1) as f64,
                ber: None,
                ber_std_err: None,
                iui_db: (*v > 0.0).then(|| to_db(*v)),
                beta_mean: beta,
                trials: 1,
                bit_errors: 0,
                bits: 0,
            });
        }
    }
    Ok(result)
}

/// Closed-form multiplication counts per algorithm and antenna count.
pub fn run_complexity_table(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let mut result = SweepResult::new(cfg);
    let row = |alg: Algorithm, size: ProblemSize| -> Result<ComplexityRow> {
        let m = ComplexityModel::new(alg, size)?;
        Ok(ComplexityRow {
            algorithm: alg.to_string(),
            n: size.n,
            k: size.k,
            iterations: alg.is_iterative().then_some(size.t),
            memory: (!alg.is_iterative()).then_some(size.l),
            first_iteration: m.first_iteration(),
            per_iteration: m.per_iteration(),
            total: m.total(),
            total_rounded: two_significant(m.total()),
        })
    };
    for alg in [
        Algorithm::Squid,
        Algorithm::C1po,
        Algorithm::Ide,
        Algorithm::Ide2,
    ] {
        let t = match alg {
            Algorithm::Squid => cfg.squid_iterations,
            Algorithm::C1po => cfg.c1po_iterations,
            _ => cfg.iterations,
        };
        for &n in &cfg.complexity_antennas {
            result
                .complexity
                .push(row(alg, ProblemSize::new(n, cfg.k, t))?);
        }
    }
    let n = cfg.complexity_antennas[0];
    for &frac in &cfg.tb_cep_memory_fractions {
        let l = (frac * n as f64).round() as usize;
        let size = ProblemSize {
            n,
            k: cfg.k,
            t: 1,
            m: cfg.tb_cep_psk_order,
            l,
        };
        result.complexity.push(row(Algorithm::TbCep, size)?);
    }
    Ok(result)
}

/// Dispatches on the configured experiment kind.
pub fn run(cfg: &ExperimentConfig, workers: usize) -> Result<SweepResult> {
    match cfg.experiment {
        ExperimentKind::Convergence => run_convergence(cfg),
        ExperimentKind::ComplexityTable => run_complexity_table(cfg),
        _ => Ok(run_sweep(cfg, workers)?.0),
    }
}
