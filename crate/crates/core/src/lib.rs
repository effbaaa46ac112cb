//! Finite-alphabet precoding for the massive MU-MIMO downlink.
//!
//! The base station picks a transmit vector `x` from a discrete alphabet
//! `X^N` so that the users see `y = H x + z` close to `s / beta`. This crate
//! holds the system model, the alphabets, linear baselines, the ADMM family,
//! the IDE/IDE2 solvers, an exhaustive-search oracle and closed-form
//! multiplication counts.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`). The aliases at the
//! crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admm;
pub mod alphabet;
pub mod complexity;
pub mod constellation;
pub mod error;
pub mod ide;
pub mod linalg;
pub mod linear;
pub mod model;
pub mod oracle;
pub mod scalar;

pub use admm::{
    run_admm, run_admm2, run_admm3, AdmmSolver, AdmmState, AdmmVariant, IterationTrace,
};
pub use alphabet::{hybrid_sumset, one_bit, psk, uniform_dac, AlphabetKind, FiniteAlphabet};
pub use complexity::{
    predicted_multiplications, two_significant, Algorithm, ComplexityModel, ProblemSize,
};
pub use constellation::{Constellation, Modulation};
pub use error::{PrecodeError, Result};
pub use ide::{
    ide2_run, ide_run, ide_run_observed, lmmse_matrix, unbiasing_matrix, update_beta, BetaMode,
    GammaSource, IdeConfig, IdeIterate, LmmseStep, PrecodeResult,
};
pub use linalg::{CMatrix, CVector, Cholesky};
pub use linear::{quantized_wf, wf_matrix, wf_precode, zf_precode, LinearPrecodeResult};
pub use model::{
    generate_channel, iui, mse_objective, perturb_channel, sigma2_to_snr, snr_to_sigma2, to_db,
    transmit, transmit_with_noise, Channel, SystemConfig,
};
pub use oracle::{
    exhaustive_precode, exhaustive_with_beta, exhaustive_with_beta_multi, OracleResult,
};
pub use scalar::{Cx, Real};

pub type C64 = num_complex::Complex<f64>;
pub type Matrix = CMatrix<f64>;
pub type Vector = CVector<f64>;
pub type Alphabet = FiniteAlphabet<f64>;
pub type IdeConfig64 = IdeConfig<f64>;
