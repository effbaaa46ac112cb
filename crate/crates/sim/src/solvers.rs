//! Uniform entry point over every precoder the harness can run.

use anyhow::Result;
use faprec_core::{
    exhaustive_precode, exhaustive_with_beta_multi, ide2_run, ide_run, quantized_wf, run_admm,
    run_admm2, run_admm3, wf_precode, zf_precode, Alphabet, IdeConfig64, Matrix, C64,
};

use crate::config::{BetaSetting, ExperimentConfig, SolverKind};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub x: Vec<C64>,
    /// Precoding factor the receivers scale by.
    pub beta: f64,
}

/// Solver settings shared by all trials of one run.
#[derive(Debug, Clone)]
pub struct SolverSet {
    pub ide: IdeConfig64,
    pub beta_mode: BetaSetting,
    pub beta: f64,
    pub gamma0: f64,
    pub alpha: f64,
    pub iterations: usize,
    pub beta_min: f64,
    pub oracle_cap: u64,
}

impl SolverSet {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            ide: cfg.ide_config(),
            beta_mode: cfg.beta_mode,
            beta: cfg.beta,
            gamma0: cfg.gamma0,
            alpha: cfg.alpha,
            iterations: cfg.iterations,
            beta_min: cfg.beta_min,
            oracle_cap: cfg.oracle_cap,
        }
    }

    /// Whether the precoder's output changes with the noise level. ADMM
    /// variants always run at the fixed `beta`.
    pub fn noise_dependent(&self, kind: SolverKind) -> bool {
        match kind {
            SolverKind::Admm | SolverKind::Admm2 | SolverKind::Admm3 | SolverKind::Zf => false,
            SolverKind::Ide | SolverKind::Ide2 | SolverKind::Oracle => {
                self.beta_mode == BetaSetting::Adaptive
            }
            SolverKind::Wf | SolverKind::QuantizedWf => true,
        }
    }

    /// Precodes `s` for channel estimate `h` at noise level `sigma2`.
    pub fn precode(
        &self,
        kind: SolverKind,
        h: &Matrix,
        s: &[C64],
        alphabet: &Alphabet,
        sigma2: f64,
    ) -> Result<Outcome> {
        let b = self.beta;
        let fixed = |x: Vec<C64>| Outcome { x, beta: b };
        Ok(match kind {
            SolverKind::Admm => {
                fixed(run_admm(&h.scaled(b), s, alphabet, self.gamma0, self.iterations)?.x)
            }
            SolverKind::Admm2 => fixed(
                run_admm2(
                    &h.scaled(b),
                    s,
                    alphabet,
                    self.gamma0,
                    self.alpha,
                    self.iterations,
                )?
                .x,
            ),
            SolverKind::Admm3 => fixed(
                run_admm3(
                    &h.scaled(b),
                    s,
                    alphabet,
                    self.gamma0,
                    self.alpha,
                    self.iterations,
                )?
                .x,
            ),
            SolverKind::Ide => {
                let r = ide_run(h, s, alphabet, &self.ide, sigma2)?;
                Outcome {
                    x: r.x,
                    beta: r.beta,
                }
            }
            SolverKind::Ide2 => {
                let r = ide2_run(h, s, alphabet, &self.ide, sigma2)?;
                Outcome {
                    x: r.x,
                    beta: r.beta,
                }
            }
            SolverKind::Zf => {
                let r = zf_precode(h, s, alphabet.p_tx())?;
                Outcome {
                    x: r.x,
                    beta: r.beta,
                }
            }
            SolverKind::Wf => {
                let r = wf_precode(h, s, alphabet.p_tx(), sigma2)?;
                Outcome {
                    x: r.x,
                    beta: r.beta,
                }
            }
            SolverKind::QuantizedWf => {
                let r = quantized_wf(h, s, alphabet.p_tx(), sigma2, alphabet, self.beta_min)?;
                Outcome {
                    x: r.x,
                    beta: r.beta,
                }
            }
            SolverKind::Oracle => {
                return Ok(self
                    .precode_grid(kind, h, s, alphabet, &[sigma2])?
                    .remove(0))
            }
        })
    }

    /// [`SolverSet::precode`] at each noise level, solving once when the
    /// output does not depend on it.
    pub fn precode_grid(
        &self,
        kind: SolverKind,
        h: &Matrix,
        s: &[C64],
        alphabet: &Alphabet,
        sigma2s: &[f64],
    ) -> Result<Vec<Outcome>> {
        if kind == SolverKind::Oracle {
            return Ok(match self.beta_mode {
                BetaSetting::Fixed => {
                    let r = exhaustive_precode(&h.scaled(self.beta), s, alphabet, self.oracle_cap)?;
                    vec![
                        Outcome {
                            x: r.x_star,
                            beta: self.beta
                        };
                        sigma2s.len()
                    ]
                }
                BetaSetting::Adaptive => {
                    exhaustive_with_beta_multi(h, s, alphabet, sigma2s, self.oracle_cap)?
                        .into_iter()
                        .map(|r| Outcome {
                            x: r.x_star,
                            beta: r.beta_star.unwrap_or(self.beta_min).max(self.beta_min),
                        })
                        .collect()
                }
            });
        }
        if !self.noise_dependent(kind) {
            let Some(&first) = sigma2s.first() else {
                return Ok(Vec::new());
            };
            let out = self.precode(kind, h, s, alphabet, first)?;
            return Ok(vec![out; sigma2s.len()]);
        }
        sigma2s
            .iter()
            .map(|&s2| self.precode(kind, h, s, alphabet, s2))
            .collect()
    }
}
