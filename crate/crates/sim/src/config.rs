//! Declarative experiment configuration (TOML, schema version 1).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use faprec_core::{
    hybrid_sumset, one_bit, psk, uniform_dac, Alphabet, BetaMode, GammaSource, IdeConfig64,
    Modulation,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Convergence,
    BerSweep,
    IuiSweep,
    CsiError,
    OracleGap,
    PskSweep,
    ComplexityTable,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Convergence => "convergence",
            Self::BerSweep => "ber-sweep",
            Self::IuiSweep => "iui-sweep",
            Self::CsiError => "csi-error",
            Self::OracleGap => "oracle-gap",
            Self::PskSweep => "psk-sweep",
            Self::ComplexityTable => "complexity-table",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Admm,
    Admm2,
    Admm3,
    Ide,
    Ide2,
    Zf,
    Wf,
    QuantizedWf,
    Oracle,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Admm => "admm",
            Self::Admm2 => "admm2",
            Self::Admm3 => "admm3",
            Self::Ide => "ide",
            Self::Ide2 => "ide2",
            Self::Zf => "zf",
            Self::Wf => "wf",
            Self::QuantizedWf => "quantized-wf",
            Self::Oracle => "oracle",
        }
    }

    /// Whether the solver ignores the finite alphabet.
    pub fn is_infinite_resolution(self) -> bool {
        matches!(self, Self::Zf | Self::Wf)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaSetting {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaSetting {
    Damped,
    Raw,
}

/// Transmit alphabet by name: `one-bit`, `psk-M`, `dac-B`, or `hybrid-B-M-NRF`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlphabetSpec {
    OneBit,
    Psk(usize),
    Dac(u32),
    Hybrid {
        dac_bits: u32,
        psk_order: usize,
        n_rf: usize,
    },
}

impl AlphabetSpec {
    /// Builds the alphabet at per-antenna power `p_tx`.
    pub fn build(&self, p_tx: f64) -> Result<Alphabet> {
        Ok(match *self {
            Self::OneBit => one_bit(p_tx)?,
            Self::Psk(m) => psk(m, p_tx)?,
            Self::Dac(b) => uniform_dac(b, p_tx)?,
            Self::Hybrid {
                dac_bits,
                psk_order,
                n_rf,
            } => hybrid_sumset(
                &uniform_dac(dac_bits, p_tx)?,
                &psk(psk_order, 1.0)?,
                n_rf,
                faprec_core::alphabet::DEFAULT_SUMSET_CAP,
            )?,
        })
    }
}

impl FromStr for AlphabetSpec {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('-').collect();
        let num = |p: &str| {
            p.parse::<usize>()
                .with_context(|| format!("bad number in alphabet `{s}`"))
        };
        Ok(match parts.as_slice() {
            ["one", "bit"] => Self::OneBit,
            ["psk", m] => Self::Psk(num(m)?),
            ["dac", b] => Self::Dac(u32::try_from(num(b)?)?),
            ["hybrid", b, m, r] => Self::Hybrid {
                dac_bits: u32::try_from(num(b)?)?,
                psk_order: num(m)?,
                n_rf: num(r)?,
            },
            _ => bail!("unknown alphabet `{s}` (expected one-bit, psk-M, dac-B or hybrid-B-M-NRF)"),
        })
    }
}

impl fmt::Display for AlphabetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OneBit => f.write_str("one-bit"),
            Self::Psk(m) => write!(f, "psk-{m}"),
            Self::Dac(b) => write!(f, "dac-{b}"),
            Self::Hybrid {
                dac_bits,
                psk_order,
                n_rf,
            } => write!(f, "hybrid-{dac_bits}-{psk_order}-{n_rf}"),
        }
    }
}

fn d_k() -> usize {
    16
}
fn d_load() -> Vec<usize> {
    vec![4]
}
fn d_modulation() -> String {
    "qpsk".into()
}
fn d_alphabets() -> Vec<String> {
    vec!["one-bit".into()]
}
fn d_snr() -> Vec<f64> {
    vec![0.0, 4.0, 8.0]
}
fn d_eps() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}
fn d_csi_snr() -> f64 {
    12.0
}
fn d_trials() -> usize {
    2000
}
fn d_solvers() -> Vec<SolverKind> {
    vec![SolverKind::Ide, SolverKind::Ide2, SolverKind::QuantizedWf]
}
fn d_iterations() -> usize {
    100
}
fn d_alpha() -> f64 {
    0.95
}
fn d_one() -> f64 {
    1.0
}
fn d_beta_mode() -> BetaSetting {
    BetaSetting::Fixed
}
fn d_period() -> usize {
    10
}
fn d_beta_min() -> f64 {
    1e-6
}
fn d_gamma_source() -> GammaSetting {
    GammaSetting::Damped
}
fn d_seed() -> u64 {
    1
}
fn d_target() -> f64 {
    1e-3
}
fn d_cap() -> u64 {
    faprec_core::oracle::DEFAULT_CANDIDATE_CAP
}
fn d_complexity_n() -> Vec<usize> {
    vec![64, 128]
}
fn d_squid_t() -> usize {
    100
}
fn d_c1po_t() -> usize {
    24
}
fn d_tb_m() -> usize {
    4
}
fn d_tb_fracs() -> Vec<f64> {
    vec![0.1, 0.5, 0.9]
}

/// One experiment. Missing keys take the defaults below; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default = "d_k")]
    pub k: usize,
    /// Antenna-to-user ratios; `N = R K`.
    #[serde(default = "d_load")]
    pub load_factors: Vec<usize>,
    #[serde(default = "d_modulation")]
    pub modulation: String,
    /// Transmit alphabets; only `psk-sweep` uses more than the first.
    #[serde(default = "d_alphabets")]
    pub alphabets: Vec<String>,
    #[serde(default = "d_snr")]
    pub snr_db: Vec<f64>,
    #[serde(default = "d_eps")]
    pub epsilon: Vec<f64>,
    /// SNR of the channel-error study.
    #[serde(default = "d_csi_snr")]
    pub csi_snr_db: f64,
    #[serde(default = "d_trials")]
    pub trials: usize,
    #[serde(default = "d_solvers")]
    pub solvers: Vec<SolverKind>,
    #[serde(default = "d_iterations")]
    pub iterations: usize,
    #[serde(default = "d_alpha")]
    pub alpha: f64,
    #[serde(default = "d_one")]
    pub gamma0: f64,
    #[serde(default = "d_beta_mode")]
    pub beta_mode: BetaSetting,
    /// Precoding factor when `beta_mode = "fixed"`.
    #[serde(default = "d_one")]
    pub beta: f64,
    #[serde(default = "d_period")]
    pub beta_update_period: usize,
    #[serde(default = "d_beta_min")]
    pub beta_min: f64,
    #[serde(default = "d_gamma_source")]
    pub gamma_source: GammaSetting,
    #[serde(default = "d_seed")]
    pub seed: u64,
    #[serde(default = "d_target")]
    pub target_ber: f64,
    #[serde(default = "d_cap")]
    pub oracle_cap: u64,
    #[serde(default = "d_complexity_n")]
    pub complexity_antennas: Vec<usize>,
    #[serde(default = "d_squid_t")]
    pub squid_iterations: usize,
    #[serde(default = "d_c1po_t")]
    pub c1po_iterations: usize,
    #[serde(default = "d_tb_m")]
    pub tb_cep_psk_order: usize,
    /// Trellis memory `L` as a fraction of `N`.
    #[serde(default = "d_tb_fracs")]
    pub tb_cep_memory_fractions: Vec<f64>,
}

impl ExperimentConfig {
    /// The configuration an empty file of this kind would produce.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let text = format!("schema_version = {SCHEMA_VERSION}\nexperiment = \"{kind}\"\n");
        let mut cfg: Self = toml::from_str(&text).expect("defaults parse");
        match kind {
            ExperimentKind::Convergence => {
                cfg.trials = 1;
                cfg.solvers = vec![
                    SolverKind::Admm,
                    SolverKind::Admm2,
                    SolverKind::Admm3,
                    SolverKind::Ide,
                    SolverKind::Ide2,
                ];
            }
            ExperimentKind::BerSweep | ExperimentKind::IuiSweep => {
                cfg.beta_mode = BetaSetting::Adaptive;
            }
            ExperimentKind::CsiError => {}
            ExperimentKind::OracleGap => {
                cfg.k = 2;
                cfg.alphabets = vec!["psk-4".into()];
                cfg.trials = 10_000;
                cfg.solvers = vec![SolverKind::Oracle, SolverKind::Ide, SolverKind::Ide2];
                cfg.snr_db = (0..=8).map(|i| 2.0 * i as f64).collect();
            }
            ExperimentKind::PskSweep => {
                cfg.alphabets = vec!["psk-4".into(), "psk-8".into(), "psk-16".into()];
                cfg.solvers = vec![SolverKind::Ide, SolverKind::Ide2];
            }
            ExperimentKind::ComplexityTable => {}
        }
        cfg
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("invalid experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.schema_version == SCHEMA_VERSION,
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            self.schema_version
        );
        ensure!(self.k >= 1, "k must be >= 1");
        ensure!(self.trials >= 1, "trials must be >= 1");
        ensure!(
            !self.load_factors.is_empty(),
            "load_factors must be nonempty"
        );
        ensure!(
            self.load_factors.iter().all(|r| *r >= 1),
            "load factors must be >= 1"
        );
        ensure!(!self.alphabets.is_empty(), "alphabets must be nonempty");
        for a in &self.alphabets {
            a.parse::<AlphabetSpec>()?;
        }
        self.modulation()?;
        ensure!(self.iterations >= 1, "iterations must be >= 1");
        ensure!(
            (0.0..=1.0).contains(&self.alpha),
            "alpha must lie in [0, 1]"
        );
        ensure!(self.gamma0 > 0.0, "gamma0 must be positive");
        ensure!(self.beta > 0.0, "beta must be positive");
        ensure!(
            self.beta_update_period >= 1,
            "beta_update_period must be >= 1"
        );
        ensure!(self.beta_min > 0.0, "beta_min must be positive");
        ensure!(
            self.target_ber > 0.0 && self.target_ber < 0.5,
            "target_ber must lie in (0, 0.5)"
        );
        ensure!(
            self.snr_db.iter().all(|v| v.is_finite()),
            "snr_db entries must be finite"
        );
        ensure!(self.csi_snr_db.is_finite(), "csi_snr_db must be finite");
        match self.experiment {
            ExperimentKind::ComplexityTable => {
                ensure!(
                    !self.complexity_antennas.is_empty(),
                    "complexity_antennas must be nonempty"
                );
                ensure!(
                    self.complexity_antennas.iter().all(|n| *n >= 1),
                    "complexity_antennas must be >= 1"
                );
                ensure!(
                    self.squid_iterations >= 1 && self.c1po_iterations >= 1,
                    "iteration counts must be >= 1"
                );
                ensure!(self.tb_cep_psk_order >= 2, "tb_cep_psk_order must be >= 2");
                ensure!(
                    self.tb_cep_memory_fractions
                        .iter()
                        .all(|f| *f >= 0.0 && f.is_finite()),
                    "tb_cep_memory_fractions must be finite and >= 0"
                );
            }
            ExperimentKind::CsiError => {
                ensure!(!self.epsilon.is_empty(), "epsilon grid must be nonempty");
                ensure!(
                    self.epsilon.iter().all(|e| (0.0..=1.0).contains(e)),
                    "epsilon values must lie in [0, 1]"
                );
                ensure!(!self.solvers.is_empty(), "solvers must be nonempty");
            }
            ExperimentKind::Convergence => {
                ensure!(self.trials == 1, "convergence runs a single trial");
                ensure!(!self.solvers.is_empty(), "solvers must be nonempty");
                ensure!(
                    self.solvers.iter().all(|s| matches!(
                        s,
                        SolverKind::Admm
                            | SolverKind::Admm2
                            | SolverKind::Admm3
                            | SolverKind::Ide
                            | SolverKind::Ide2
                    )),
                    "convergence traces exist only for admm, admm2, admm3, ide and ide2"
                );
            }
            _ => {
                ensure!(!self.snr_db.is_empty(), "snr_db grid must be nonempty");
                ensure!(!self.solvers.is_empty(), "solvers must be nonempty");
            }
        }
        if self.experiment == ExperimentKind::OracleGap {
            ensure!(
                self.solvers.contains(&SolverKind::Oracle),
                "oracle-gap needs the oracle in its solver list"
            );
        }
        if self.solvers.contains(&SolverKind::Oracle) {
            for alphabet in self.alphabet_specs()? {
                let card = alphabet.build(1.0)?.cardinality() as f64;
                for &lf in &self.load_factors {
                    let count = card.powi((lf * self.k) as i32);
                    ensure!(
                        count <= self.oracle_cap as f64,
                        "oracle would enumerate {count:.3e} candidates for {alphabet} at N={}, above the cap {}",
                        lf * self.k,
                        self.oracle_cap
                    );
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        ensure!(
            self.solvers.iter().all(|s| seen.insert(*s)),
            "solvers must not repeat"
        );
        Ok(())
    }

    pub fn modulation(&self) -> Result<Modulation> {
        Ok(self.modulation.parse::<Modulation>()?)
    }

    pub fn alphabet_specs(&self) -> Result<Vec<AlphabetSpec>> {
        self.alphabets.iter().map(|a| a.parse()).collect()
    }

    pub fn antennas(&self) -> Vec<usize> {
        self.load_factors.iter().map(|r| r * self.k).collect()
    }

    pub fn ide_config(&self) -> IdeConfig64 {
        IdeConfig64 {
            max_iterations: self.iterations,
            alpha: self.alpha,
            gamma0: self.gamma0,
            beta_mode: match self.beta_mode {
                BetaSetting::Fixed => BetaMode::Fixed(self.beta),
                BetaSetting::Adaptive => BetaMode::Adaptive,
            },
            beta_update_period: self.beta_update_period,
            beta_min: self.beta_min,
            gamma_source: match self.gamma_source {
                GammaSetting::Damped => GammaSource::Damped,
                GammaSetting::Raw => GammaSource::Raw,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = ExperimentConfig::from_toml("schema_version = 1\nexperiment = \"ber-sweep\"\n")
            .unwrap();
        assert_eq!(cfg.k, 16);
        assert_eq!(cfg.antennas(), vec![64]);
        assert_eq!(cfg.iterations, 100);
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        assert!(ExperimentConfig::from_toml(
            "schema_version = 1\nexperiment = \"ber-sweep\"\nfoo = 1\n"
        )
        .is_err());
        assert!(
            ExperimentConfig::from_toml("schema_version = 2\nexperiment = \"ber-sweep\"\n")
                .is_err()
        );
        assert!(ExperimentConfig::from_toml("experiment = \"ber-sweep\"\n").is_err());
        assert!(ExperimentConfig::from_toml(
            "schema_version = 1\nexperiment = \"ber-sweep\"\ntrials = 0\n"
        )
        .is_err());
        assert!(ExperimentConfig::from_toml(
            "schema_version = 1\nexperiment = \"ber-sweep\"\nsnr_db = []\n"
        )
        .is_err());
        assert!(
            ExperimentConfig::from_toml("schema_version = 1\nexperiment = \"nope\"\n").is_err()
        );
    }

    #[test]
    fn oracle_cap_is_checked_up_front() {
        let text = "schema_version = 1\nexperiment = \"oracle-gap\"\nk = 2\nload_factors = [8]\nalphabets = [\"psk-4\"]\nsolvers = [\"oracle\"]\n";
        assert!(ExperimentConfig::from_toml(text).is_err());
    }

    #[test]
    fn alphabet_names_round_trip() {
        for s in ["one-bit", "psk-8", "dac-3", "hybrid-1-4-2"] {
            assert_eq!(s.parse::<AlphabetSpec>().unwrap().to_string(), s);
        }
        assert!("psk".parse::<AlphabetSpec>().is_err());
        assert!("dac-x".parse::<AlphabetSpec>().is_err());
    }

    #[test]
    fn defaults_validate_and_hash_is_stable() {
        for kind in [
            ExperimentKind::Convergence,
            ExperimentKind::BerSweep,
            ExperimentKind::IuiSweep,
            ExperimentKind::CsiError,
            ExperimentKind::OracleGap,
            ExperimentKind::PskSweep,
            ExperimentKind::ComplexityTable,
        ] {
            let cfg = ExperimentConfig::defaults(kind);
            cfg.validate().unwrap();
            let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.hash(), cfg.hash());
        }
        let a = ExperimentConfig::defaults(ExperimentKind::BerSweep);
        let mut b = a.clone();
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }
}
