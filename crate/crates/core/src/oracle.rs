//! Exhaustive search over `X^N` for small instances.
//!
//! Candidates are visited in reflected mixed-radix Gray order, so consecutive
//! candidates differ in one antenna and one alphabet step. The received vector
//! `H x` is then updated with one column per candidate instead of being
//! recomputed. The winner's objective is recomputed from scratch before it is
//! returned.

use num_complex::Complex;

use crate::alphabet::FiniteAlphabet;
use crate::error::{PrecodeError, Result};
use crate::linalg::{dot_conj, norm_sqr, CMatrix};
use crate::model::{iui, mse_objective};
use crate::scalar::Real;

/// Default limit on the number of candidates.
pub const DEFAULT_CANDIDATE_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<T> {
    pub x_star: Vec<Complex<T>>,
    pub objective: T,
    pub candidates_evaluated: u64,
    /// Jointly optimal `beta`; `None` when `beta` was fixed.
    pub beta_star: Option<T>,
    /// Best objective over the supplied `beta` grid at `x_star`, if a grid was given.
    pub grid_objective: Option<T>,
}

/// `|X|^N`, or an error if it exceeds `cap`.
pub fn candidate_count<T: Real>(alphabet: &FiniteAlphabet<T>, n: usize, cap: u64) -> Result<u64> {
    let m = alphabet.cardinality() as f64;
    let count = m.powi(n as i32);
    if count > cap as f64 {
        return Err(PrecodeError::CandidateCap { count, cap });
    }
    Ok(count as u64)
}

/// Reflected Gray walk over `radix^n` digit strings.
struct GrayWalk {
    digits: Vec<usize>,
    up: Vec<bool>,
    radix: usize,
}

impl GrayWalk {
    fn new(n: usize, radix: usize) -> Self {
        Self {
            digits: vec![0; n],
            up: vec![true; n],
            radix,
        }
    }

    /// Advances one step; returns `(position, old digit, new digit)` or `None` when done.
    fn advance(&mut self) -> Option<(usize, usize, usize)> {
        for j in 0..self.digits.len() {
            let d = self.digits[j];
            let next = if self.up[j] {
                (d + 1 < self.radix).then_some(d + 1)
            } else {
                d.checked_sub(1)
            };
            match next {
                Some(nd) => {
                    self.digits[j] = nd;
                    return Some((j, d, nd));
                }
                None => self.up[j] = !self.up[j],
            }
        }
        None
    }
}

fn check<T: Real>(h: &CMatrix<T>, s: &[Complex<T>]) -> Result<()> {
    if s.len() != h.rows() {
        return Err(PrecodeError::DimensionMismatch(format!(
            "{} symbols for {} users",
            s.len(),
            h.rows()
        )));
    }
    Ok(())
}

/// Visits every candidate, calling `visit(x_digits, hx)` for each in Gray order.
fn enumerate<T: Real>(
    h: &CMatrix<T>,
    alphabet: &FiniteAlphabet<T>,
    mut visit: impl FnMut(&[usize], &[Complex<T>]),
) -> u64 {
    let (k, n) = h.shape();
    let pts = alphabet.points();
    let cols: Vec<Vec<Complex<T>>> = (0..n).map(|j| h.column(j)).collect();
    let x0 = vec![pts[0]; n];
    let mut hx = h.mul_vec_unchecked(&x0);
    let mut walk = GrayWalk::new(n, pts.len());
    let mut visited = 1;
    visit(&walk.digits, &hx);
    while let Some((j, old, new)) = walk.advance() {
        let delta = pts[new] - pts[old];
        for (acc, c) in hx.iter_mut().zip(&cols[j]).take(k) {
            *acc += c * delta;
        }
        visited += 1;
        visit(&walk.digits, &hx);
    }
    visited
}

fn to_points<T: Real>(alphabet: &FiniteAlphabet<T>, digits: &[usize]) -> Vec<Complex<T>> {
    digits.iter().map(|&d| alphabet.points()[d]).collect()
}

/// Minimizer of `||s - H̃ x||^2` over `X^N`; ties go to the first candidate in enumeration order.
pub fn exhaustive_precode<T: Real>(
    h_tilde: &CMatrix<T>,
    s: &[Complex<T>],
    alphabet: &FiniteAlphabet<T>,
    cap: u64,
) -> Result<OracleResult<T>> {
    check(h_tilde, s)?;
    candidate_count(alphabet, h_tilde.cols(), cap)?;
    let mut best = T::infinity();
    let mut best_digits = Vec::new();
    let visited = enumerate(h_tilde, alphabet, |digits, hx| {
        let f = s
            .iter()
            .zip(hx)
            .fold(T::zero(), |acc, (a, b)| acc + (a - b).norm_sqr());
        if f < best {
            best = f;
            best_digits = digits.to_vec();
        }
    });
    let x_star = to_points(alphabet, &best_digits);
    let objective = iui(s, T::one(), h_tilde, &x_star)?;
    Ok(OracleResult {
        x_star,
        objective,
        candidates_evaluated: visited,
        beta_star: None,
        grid_objective: None,
    })
}

/// For one candidate: `(Re{s^H H x}, ||H x||^2)`.
fn correlation<T: Real>(s: &[Complex<T>], hx: &[Complex<T>]) -> (T, T) {
    (dot_conj(s, hx).re, norm_sqr(hx))
}

/// `||s||^2 - Re^2 / (||Hx||^2 + K sigma2)` for `Re > 0`; candidates with no
/// positive correlation only approach `||s||^2` as `beta -> 0`.
fn joint_value<T: Real>(s_energy: T, re: T, hx2: T, ks2: T) -> T {
    let den = hx2 + ks2;
    if re > T::zero() && den > T::zero() {
        s_energy - re * re / den
    } else {
        s_energy
    }
}

/// Joint minimizer of `||s - beta H x||^2 + beta^2 K sigma2` over `x in X^N`
/// and `beta > 0`, with `beta` in closed form per candidate. `beta_grid`, if
/// nonempty, is scanned at the winner for cross-checking.
pub fn exhaustive_with_beta<T: Real>(
    h: &CMatrix<T>,
    s: &[Complex<T>],
    alphabet: &FiniteAlphabet<T>,
    sigma2: T,
    beta_grid: &[T],
    cap: u64,
) -> Result<OracleResult<T>> {
    let mut out = exhaustive_with_beta_multi(h, s, alphabet, &[sigma2], cap)?;
    let mut r = out.pop().expect("one noise level in, one result out");
    if !beta_grid.is_empty() {
        let mut g = T::infinity();
        for &b in beta_grid {
            if !(b > T::zero()) {
                return Err(PrecodeError::Domain(format!(
                    "beta grid must be positive, got {b}"
                )));
            }
            g = g.min(mse_objective(s, b, h, &r.x_star, sigma2)?);
        }
        r.grid_objective = Some(g);
    }
    Ok(r)
}

/// [`exhaustive_with_beta`] for several noise levels in a single enumeration.
pub fn exhaustive_with_beta_multi<T: Real>(
    h: &CMatrix<T>,
    s: &[Complex<T>],
    alphabet: &FiniteAlphabet<T>,
    sigma2s: &[T],
    cap: u64,
) -> Result<Vec<OracleResult<T>>> {
    check(h, s)?;
    if let Some(bad) = sigma2s.iter().find(|v| !(**v >= T::zero())) {
        return Err(PrecodeError::Domain(format!(
            "sigma2 must be >= 0, got {bad}"
        )));
    }
    candidate_count(alphabet, h.cols(), cap)?;
    let k = T::from_usize_lossy(h.rows());
    let ks2: Vec<T> = sigma2s.iter().map(|v| k * *v).collect();
    let s_energy = norm_sqr(s);
    let mut best = vec![T::infinity(); sigma2s.len()];
    let mut best_digits = vec![Vec::new(); sigma2s.len()];
    let visited = enumerate(h, alphabet, |digits, hx| {
        let (re, hx2) = correlation(s, hx);
        for i in 0..ks2.len() {
            let f = joint_value(s_energy, re, hx2, ks2[i]);
            if f < best[i] {
                best[i] = f;
                best_digits[i] = digits.to_vec();
            }
        }
    });
    sigma2s
        .iter()
        .zip(best_digits)
        .map(|(&sigma2, digits)| {
            let x_star = to_points(alphabet, &digits);
            let hx = h.mul_vec(&x_star)?;
            let (re, hx2) = correlation(s, &hx);
            let den = hx2 + k * sigma2;
            let beta = if re > T::zero() && den > T::zero() {
                re / den
            } else {
                T::zero()
            };
            let objective = if beta > T::zero() {
                mse_objective(s, beta, h, &x_star, sigma2)?
            } else {
                s_energy
            };
            Ok(OracleResult {
                x_star,
                objective,
                candidates_evaluated: visited,
                beta_star: Some(beta),
                grid_objective: None,
            })
        })
        .collect()
}
