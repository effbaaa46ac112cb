//! Iterative discrete estimation (IDE) and its inversion-free variant IDE2.
//!
//! Each iteration takes an unbiased linear estimate around the damped iterate
//! `x_d` and projects it onto the alphabet:
//!
//! ```text
//! x^{t+1}   = Pi_X(x_d^t + D W (s - H̃ x_d^t))
//! x_d^{t+1} = alpha x_d^t + (1 - alpha) x^{t+1}
//! ```
//!
//! IDE uses `W = (H̃^H H̃ + gamma I)^{-1} H̃^H` and `D = diag(W H̃)^{-1}`, with
//! `gamma` re-estimated from the residual. IDE2 replaces the product `D W` by
//! `diag(H̃^H H̃)^{-1} H̃^H`, its large-gamma limit. Here `H̃ = beta H`; in
//! adaptive mode `beta` is refit in closed form every few iterations.

use num_complex::Complex;

use crate::admm::damp;
use crate::alphabet::FiniteAlphabet;
use crate::complexity::{predicted_multiplications, Algorithm};
use crate::error::{PrecodeError, Result};
use crate::linalg::{dot_conj, norm_sqr, CMatrix, Cholesky};
use crate::scalar::{czero, Real};

/// Residual energy below which IDE stops: the iterate already reproduces `s`.
pub const ZERO_RESIDUAL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaMode<T> {
    Fixed(T),
    /// Start from 1 and refit every `beta_update_period` iterations.
    Adaptive,
}

/// Which penalty feeds the LMMSE step of the next iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaSource {
    /// The damped `gamma_d`.
    Damped,
    /// The raw residual estimate `tr(H̃^H H̃) / ||s - H̃ x||^2`.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdeConfig<T> {
    pub max_iterations: usize,
    pub alpha: T,
    pub gamma0: T,
    pub beta_mode: BetaMode<T>,
    pub beta_update_period: usize,
    pub beta_min: T,
    pub gamma_source: GammaSource,
}

impl<T: Real> Default for IdeConfig<T> {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            alpha: T::lit(0.95),
            gamma0: T::one(),
            beta_mode: BetaMode::Fixed(T::one()),
            beta_update_period: 10,
            beta_min: T::lit(1e-6),
            gamma_source: GammaSource::Damped,
        }
    }
}

impl<T: Real> IdeConfig<T> {
    pub fn adaptive() -> Self {
        Self {
            beta_mode: BetaMode::Adaptive,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(PrecodeError::Domain(m));
        if self.max_iterations == 0 {
            return bad("max_iterations must be >= 1".into());
        }
        if !(self.alpha >= T::zero() && self.alpha <= T::one()) {
            return bad(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        if !(self.gamma0 > T::zero()) {
            return bad(format!("gamma0 must be positive, got {}", self.gamma0));
        }
        if self.beta_update_period == 0 {
            return bad("beta_update_period must be >= 1".into());
        }
        if !(self.beta_min > T::zero()) {
            return bad(format!("beta_min must be positive, got {}", self.beta_min));
        }
        if let BetaMode::Fixed(b) = self.beta_mode {
            if !(b > T::zero()) {
                return bad(format!("fixed beta must be positive, got {b}"));
            }
        }
        Ok(())
    }

    fn initial_beta(&self) -> T {
        match self.beta_mode {
            BetaMode::Fixed(b) => b,
            BetaMode::Adaptive => T::one(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecodeResult<T> {
    pub x: Vec<Complex<T>>,
    pub beta: T,
    /// `||s - H̃ x^t||^2` per iteration, with the `beta` in force at that iteration.
    pub iui_trace: Vec<T>,
    pub iterations: usize,
    /// Predicted real multiplications for the iterations run.
    pub mult_count: f64,
}

/// What one IDE iteration used, handed to observers.
#[derive(Debug)]
pub struct IdeIterate<'a, T> {
    /// 1-based iteration index.
    pub t: usize,
    pub beta: T,
    pub gamma: T,
    /// `diag(W H̃)` as formed by the solver.
    pub diag_wh: &'a [T],
    pub x: &'a [Complex<T>],
    pub iui: T,
}

/// LMMSE matrix `W = (H̃^H H̃ + gamma I)^{-1} H̃^H`, formed through the K×K
/// system as `(1/gamma)(H̃^H - H̃^H (H̃H̃^H + gamma I)^{-1} H̃H̃^H)`.
pub fn lmmse_matrix<T: Real>(h_tilde: &CMatrix<T>, gamma: T) -> Result<CMatrix<T>> {
    if !(gamma > T::zero()) {
        return Err(PrecodeError::Domain(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let gram = h_tilde.gram_rows();
    let mut m = gram.clone();
    m.add_diagonal(gamma);
    let q = Cholesky::new(&m)?.solve_matrix(&gram);
    let ha = h_tilde.adjoint();
    let correction = ha.matmul(&q)?;
    let inv_g = gamma.recip();
    Ok(CMatrix::from_fn(ha.rows(), ha.cols(), |i, j| {
        (ha[(i, j)] - correction[(i, j)]) * inv_g
    }))
}

/// Diagonal of `D = [diag(W H̃)]^{-1}`; only the N diagonal entries of `W H̃` are formed.
pub fn unbiasing_matrix<T: Real>(w: &CMatrix<T>, h_tilde: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    if w.cols() != h_tilde.rows() || w.rows() != h_tilde.cols() {
        return Err(PrecodeError::DimensionMismatch(format!(
            "W is {}x{}, H̃ is {}x{}",
            w.rows(),
            w.cols(),
            h_tilde.rows(),
            h_tilde.cols()
        )));
    }
    (0..w.rows())
        .map(|n| {
            let d = (0..w.cols()).fold(czero(), |acc, k| acc + w[(n, k)] * h_tilde[(k, n)]);
            if d.norm() == T::zero() {
                Err(PrecodeError::DegenerateChannel(format!(
                    "diag(W H̃) vanishes at antenna {n}"
                )))
            } else {
                Ok(d.inv())
            }
        })
        .collect()
}

/// Closed-form `beta = Re{s^H H x} / (||Hx||^2 + K sigma2)`, floored at `beta_min`.
pub fn update_beta<T: Real>(
    h: &CMatrix<T>,
    s: &[Complex<T>],
    x: &[Complex<T>],
    sigma2: T,
    beta_min: T,
) -> Result<T> {
    if s.len() != h.rows() {
        return Err(PrecodeError::DimensionMismatch(format!(
            "{} symbols for {} users",
            s.len(),
            h.rows()
        )));
    }
    let hx = h.mul_vec(x)?;
    let k = T::from_usize_lossy(h.rows());
    let den = norm_sqr(&hx) + k * sigma2;
    if !(den > T::zero()) {
        return Err(PrecodeError::DegenerateChannel(
            "Hx = 0 with noiseless receivers leaves beta undefined".into(),
        ));
    }
    let beta = dot_conj(s, &hx).re / den;
    Ok(if beta > beta_min { beta } else { beta_min })
}

/// `H H^H`, `tr(H^H H)` and `diag(H^H H)` of the unscaled channel; the `H̃ = beta H`
/// versions follow by scaling with `beta^2`.
#[derive(Debug, Clone)]
struct GramCache<T> {
    gram: CMatrix<T>,
    col_norms: Vec<T>,
    trace: T,
}

impl<T: Real> GramCache<T> {
    fn new(h: &CMatrix<T>) -> Self {
        let col_norms = h.column_norms_sqr();
        let trace = col_norms.iter().copied().sum();
        Self {
            gram: h.gram_rows(),
            col_norms,
            trace,
        }
    }
}

/// Per-iteration LMMSE factor for fixed `H̃` and `gamma`.
///
/// Factors `H̃H̃^H + gamma I` once; `W r = H̃^H (H̃H̃^H + gamma I)^{-1} r` and
/// `(W H̃)_nn = ||L^{-1} h_n||^2` follow from the factor.
#[derive(Debug, Clone)]
pub struct LmmseStep<T> {
    chol: Cholesky<T>,
    diag: Vec<T>,
}

impl<T: Real> LmmseStep<T> {
    pub fn new(h_tilde: &CMatrix<T>, gamma: T) -> Result<Self> {
        Self::with_gram(h_tilde, &h_tilde.gram_rows(), gamma)
    }

    fn with_gram(h_tilde: &CMatrix<T>, gram: &CMatrix<T>, gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) {
            return Err(PrecodeError::Domain(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        let mut m = gram.clone();
        m.add_diagonal(gamma);
        let chol = Cholesky::new(&m)?;
        let diag = (0..h_tilde.cols())
            .map(|n| norm_sqr(&chol.forward(&h_tilde.column(n))))
            .collect::<Vec<_>>();
        if let Some(n) = diag.iter().position(|d| !(*d > T::zero())) {
            return Err(PrecodeError::DegenerateChannel(format!(
                "diag(W H̃) vanishes at antenna {n}"
            )));
        }
        Ok(Self { chol, diag })
    }

    /// `diag(W H̃)`.
    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    /// `W r`.
    pub fn apply(&self, h_tilde: &CMatrix<T>, r: &[Complex<T>]) -> Vec<Complex<T>> {
        h_tilde.adjoint_mul_vec_unchecked(&self.chol.solve(r))
    }

    /// `x_d + D W r`.
    pub fn estimate(
        &self,
        h_tilde: &CMatrix<T>,
        x_d: &[Complex<T>],
        r: &[Complex<T>],
    ) -> Vec<Complex<T>> {
        self.apply(h_tilde, r)
            .into_iter()
            .zip(&self.diag)
            .zip(x_d)
            .map(|((w, d), xd)| xd + w / *d)
            .collect()
    }
}

fn check_inputs<T: Real>(
    h: &CMatrix<T>,
    s: &[Complex<T>],
    sigma2: T,
    config: &IdeConfig<T>,
) -> Result<()> {
    config.validate()?;
    if s.len() != h.rows() {
        return Err(PrecodeError::DimensionMismatch(format!(
            "{} symbols for {} users",
            s.len(),
            h.rows()
        )));
    }
    if !(sigma2 >= T::zero()) {
        return Err(PrecodeError::Domain(format!(
            "sigma2 must be >= 0, got {sigma2}"
        )));
    }
    Ok(())
}

fn residual<T: Real>(
    h: &CMatrix<T>,
    beta: T,
    s: &[Complex<T>],
    x: &[Complex<T>],
) -> Vec<Complex<T>> {
    let hx = h.mul_vec_unchecked(x);
    s.iter().zip(&hx).map(|(a, b)| a - b * beta).collect()
}

/// IDE with adaptive penalty.
pub fn ide_run<T: Real>(
    h: &CMatrix<T>,
    s: &[Complex<T>],
    alphabet: &FiniteAlphabet<T>,
    config: &IdeConfig<T>,
    sigma2: T,
) -> Result<PrecodeResult<T>> {
    ide_run_observed(h, s, alphabet, config, sigma2, |_| {})
}

/// [`ide_run`] with a callback after every iteration.
pub fn ide_run_observed<T: Real>(
    h: &CMatrix<T>,
    s: &[Complex<T>],
    alphabet: &FiniteAlphabet<T>,
    config: &IdeConfig<T>,
    sigma2: T,
    mut observe: impl FnMut(&IdeIterate<'_, T>),
) -> Result<PrecodeResult<T>> {
    check_inputs(h, s, sigma2, config)?;
    let cache = GramCache::new(h);
    let n = h.cols();
    let alpha = config.alpha;
    let mut beta = config.initial_beta();
    let mut h_tilde = h.scaled(beta);
    let mut gram = cache.gram.scaled(beta * beta);
    let mut trace_t = cache.trace * beta * beta;

    let mut x_d = vec![czero(); n];
    let mut x = vec![czero(); n];
    let mut gamma = config.gamma0;
    let mut gamma_d = config.gamma0;
    let mut iui_trace = Vec::with_capacity(config.max_iterations);

    for t in 1..=config.max_iterations {
        let g = match config.gamma_source {
            GammaSource::Damped => gamma_d,
            GammaSource::Raw => gamma,
        };
        let step = LmmseStep::with_gram(&h_tilde, &gram, g)?;
        let r = residual(&h_tilde, T::one(), s, &x_d);
        alphabet.project_into(&step.estimate(&h_tilde, &x_d, &r), &mut x);
        let res = norm_sqr(&residual(&h_tilde, T::one(), s, &x));
        iui_trace.push(res);
        observe(&IdeIterate {
            t,
            beta,
            gamma: g,
            diag_wh: step.diag(),
            x: &x,
            iui: res,
        });
        if res < T::lit(ZERO_RESIDUAL) {
            break;
        }
        gamma = trace_t / res;
        damp(&mut x_d, &x, alpha);
        gamma_d = alpha * gamma_d + (T::one() - alpha) * gamma;
        if config.beta_mode == BetaMode::Adaptive && t % config.beta_update_period == 0 {
            beta = update_beta(h, s, &x, sigma2, config.beta_min)?;
            h_tilde = h.scaled(beta);
            gram = cache.gram.scaled(beta * beta);
            trace_t = cache.trace * beta * beta;
        }
    }

    let iterations = iui_trace.len();
    Ok(PrecodeResult {
        mult_count: predicted_multiplications(Algorithm::Ide, n, h.rows(), iterations)?,
        x,
        beta,
        iui_trace,
        iterations,
    })
}

/// IDE2: `diag(H̃^H H̃)^{-1} H̃^H` in place of the LMMSE step, no matrix inversion.
pub fn ide2_run<T: Real>(
    h: &CMatrix<T>,
    s: &[Complex<T>],
    alphabet: &FiniteAlphabet<T>,
    config: &IdeConfig<T>,
    sigma2: T,
) -> Result<PrecodeResult<T>> {
    check_inputs(h, s, sigma2, config)?;
    let cache = GramCache::new(h);
    if let Some(n) = cache.col_norms.iter().position(|c| !(*c > T::zero())) {
        return Err(PrecodeError::DegenerateChannel(format!(
            "zero channel column at antenna {n}"
        )));
    }
    let n = h.cols();
    let alpha = config.alpha;
    let mut beta = config.initial_beta();
    let mut h_tilde = h.scaled(beta);
    // 1 / diag(H̃^H H̃)
    let mut inv_norms: Vec<T> = cache
        .col_norms
        .iter()
        .map(|c| (*c * beta * beta).recip())
        .collect();

    let mut x_d = vec![czero(); n];
    let mut x = vec![czero(); n];
    let mut iui_trace = Vec::with_capacity(config.max_iterations);

    for t in 1..=config.max_iterations {
        let r = residual(&h_tilde, T::one(), s, &x_d);
        let g = h_tilde.adjoint_mul_vec_unchecked(&r);
        for i in 0..n {
            x[i] = alphabet.project_scalar(x_d[i] + g[i] * inv_norms[i]);
        }
        iui_trace.push(norm_sqr(&residual(&h_tilde, T::one(), s, &x)));
        damp(&mut x_d, &x, alpha);
        if config.beta_mode == BetaMode::Adaptive && t % config.beta_update_period == 0 {
            beta = update_beta(h, s, &x, sigma2, config.beta_min)?;
            h_tilde = h.scaled(beta);
            inv_norms = cache
                .col_norms
                .iter()
                .map(|c| (*c * beta * beta).recip())
                .collect();
        }
    }

    let iterations = iui_trace.len();
    Ok(PrecodeResult {
        mult_count: predicted_multiplications(Algorithm::Ide2, n, h.rows(), iterations)?,
        x,
        beta,
        iui_trace,
        iterations,
    })
}
