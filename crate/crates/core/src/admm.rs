//! ADMM on the consensus split `min ||s - H̃ x1||^2 + I_X(x)`, `x1 = x`,
//! plus the damped (`Damped`) and dual-free (`NoDual`) variants.
//!
//! None of these converge reliably on a discrete feasible set; they are kept
//! to reproduce that behaviour next to the IDE solvers.

use num_complex::Complex;

use crate::alphabet::FiniteAlphabet;
use crate::error::{PrecodeError, Result};
use crate::linalg::{norm_sqr, CMatrix, Cholesky};
use crate::scalar::{czero, Real};

/// Applies `(H̃^H H̃ + gamma I)^{-1}` through the K×K system
/// `H̃ H̃^H + gamma I`, factored once.
#[derive(Debug, Clone)]
pub struct RidgeInverse<T> {
    gamma: T,
    chol: Cholesky<T>,
}

impl<T: Real> RidgeInverse<T> {
    pub fn new(h: &CMatrix<T>, gamma: T) -> Result<Self> {
        if !(gamma > T::zero()) {
            return Err(PrecodeError::Domain(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        let mut m = h.gram_rows();
        m.add_diagonal(gamma);
        Ok(Self {
            gamma,
            chol: Cholesky::new(&m)?,
        })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// `(1/gamma) (v - H̃^H (H̃H̃^H + gamma I)^{-1} H̃ v)`.
    pub fn apply(&self, h: &CMatrix<T>, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let hv = h.mul_vec_unchecked(v);
        let back = h.adjoint_mul_vec_unchecked(&self.chol.solve(&hv));
        let inv_g = self.gamma.recip();
        v.iter().zip(&back).map(|(a, b)| (a - b) * inv_g).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdmmVariant<T> {
    /// Plain ADMM with the consensus dual update.
    Plain,
    /// Damped shadows `x_d`, `u_d` replace `x` in the x1-update and `u` in the dual update.
    Damped { alpha: T },
    /// Dual removed; x1-update pulls towards the damped `x_d`.
    NoDual { alpha: T },
}

/// Iterates of one ADMM-family run. All vectors have length N.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState<T> {
    pub x1: Vec<Complex<T>>,
    pub x: Vec<Complex<T>>,
    pub u: Vec<Complex<T>>,
    pub x_d: Vec<Complex<T>>,
    pub u_d: Vec<Complex<T>>,
    pub gamma: T,
    pub t: usize,
}

impl<T: Real> AdmmState<T> {
    pub fn zeros(n: usize, gamma: T) -> Self {
        let z = vec![czero(); n];
        Self {
            x1: z.clone(),
            x: z.clone(),
            u: z.clone(),
            x_d: z.clone(),
            u_d: z,
            gamma,
            t: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace<T> {
    /// `||s - H̃ x^t||^2` for t = 1..=iterations.
    pub iui: Vec<T>,
    pub x: Vec<Complex<T>>,
    pub iterations: usize,
    /// Last iteration (1-based) at which the projected iterate changed, 0 if never.
    pub last_change: usize,
}

/// Stepper for the ADMM family on a fixed `H̃`, `s` and `gamma`.
#[derive(Debug, Clone)]
pub struct AdmmSolver<'a, T> {
    h: &'a CMatrix<T>,
    s: &'a [Complex<T>],
    alphabet: &'a FiniteAlphabet<T>,
    ridge: RidgeInverse<T>,
    hs: Vec<Complex<T>>,
    variant: AdmmVariant<T>,
}

impl<'a, T: Real> AdmmSolver<'a, T> {
    pub fn new(
        h: &'a CMatrix<T>,
        s: &'a [Complex<T>],
        alphabet: &'a FiniteAlphabet<T>,
        gamma: T,
        variant: AdmmVariant<T>,
    ) -> Result<Self> {
        if s.len() != h.rows() {
            return Err(PrecodeError::DimensionMismatch(format!(
                "{} symbols for {} users",
                s.len(),
                h.rows()
            )));
        }
        if let AdmmVariant::Damped { alpha } | AdmmVariant::NoDual { alpha } = variant {
            if !(alpha >= T::zero() && alpha <= T::one()) {
                return Err(PrecodeError::Domain(format!(
                    "alpha must lie in [0, 1], got {alpha}"
                )));
            }
        }
        Ok(Self {
            h,
            s,
            alphabet,
            ridge: RidgeInverse::new(h, gamma)?,
            hs: h.adjoint_mul_vec_unchecked(s),
            variant,
        })
    }

    pub fn initial_state(&self) -> AdmmState<T> {
        AdmmState::zeros(self.h.cols(), self.ridge.gamma())
    }

    /// Advances `state` by one iteration and returns the new IUI.
    pub fn step(&self, state: &mut AdmmState<T>) -> T {
        let g = self.ridge.gamma();
        let half_inv_g = (T::lit(2.0) * g).recip();
        match self.variant {
            AdmmVariant::Plain => {
                let rhs = self.rhs(&state.x, Some(&state.u));
                state.x1 = self.ridge.apply(self.h, &rhs);
                state.x = self.project_shifted(&state.x1, &state.u, half_inv_g);
                for ((u, x1), x) in state.u.iter_mut().zip(&state.x1).zip(&state.x) {
                    *u += (x1 - x) * g;
                }
            }
            AdmmVariant::Damped { alpha } => {
                let rhs = self.rhs(&state.x_d, Some(&state.u));
                state.x1 = self.ridge.apply(self.h, &rhs);
                state.x = self.project_shifted(&state.x1, &state.u, half_inv_g);
                for i in 0..state.u.len() {
                    state.u[i] = state.u_d[i] + (state.x1[i] - state.x[i]) * g;
                }
                damp(&mut state.x_d, &state.x, alpha);
                damp(&mut state.u_d, &state.u, alpha);
            }
            AdmmVariant::NoDual { alpha } => {
                let rhs = self.rhs(&state.x_d, None);
                state.x1 = self.ridge.apply(self.h, &rhs);
                state.x = self.alphabet.project(&state.x1);
                damp(&mut state.x_d, &state.x, alpha);
            }
        }
        state.t += 1;
        residual_norm(self.h, self.s, &state.x)
    }

    pub fn run(&self, iterations: usize) -> IterationTrace<T> {
        let mut state = self.initial_state();
        let mut iui = Vec::with_capacity(iterations);
        let mut last_change = 0;
        for t in 1..=iterations {
            let prev = state.x.clone();
            iui.push(self.step(&mut state));
            if state.x != prev {
                last_change = t;
            }
        }
        IterationTrace {
            iui,
            x: state.x,
            iterations,
            last_change,
        }
    }

    // H̃^H s + gamma v - u
    fn rhs(&self, v: &[Complex<T>], u: Option<&[Complex<T>]>) -> Vec<Complex<T>> {
        let g = self.ridge.gamma();
        let mut out: Vec<_> = self.hs.iter().zip(v).map(|(a, b)| a + b * g).collect();
        if let Some(u) = u {
            for (o, ui) in out.iter_mut().zip(u) {
                *o -= ui;
            }
        }
        out
    }

    fn project_shifted(&self, x1: &[Complex<T>], u: &[Complex<T>], scale: T) -> Vec<Complex<T>> {
        x1.iter()
            .zip(u)
            .map(|(a, b)| self.alphabet.project_scalar(a + b * scale))
            .collect()
    }
}

pub(crate) fn damp<T: Real>(shadow: &mut [Complex<T>], fresh: &[Complex<T>], alpha: T) {
    let beta = T::one() - alpha;
    for (d, x) in shadow.iter_mut().zip(fresh) {
        *d = *d * alpha + x * beta;
    }
}

pub(crate) fn residual_norm<T: Real>(h: &CMatrix<T>, s: &[Complex<T>], x: &[Complex<T>]) -> T {
    let hx = h.mul_vec_unchecked(x);
    let r: Vec<_> = s.iter().zip(&hx).map(|(a, b)| a - b).collect();
    norm_sqr(&r)
}

fn check_iterations(t: usize) -> Result<()> {
    if t == 0 {
        Err(PrecodeError::Domain("need at least one iteration".into()))
    } else {
        Ok(())
    }
}

/// Plain ADMM from `x = u = 0`.
pub fn run_admm<T: Real>(
    h_tilde: &CMatrix<T>,
    s: &[Complex<T>],
    alphabet: &FiniteAlphabet<T>,
    gamma: T,
    iterations: usize,
) -> Result<IterationTrace<T>> {
    check_iterations(iterations)?;
    Ok(AdmmSolver::new(h_tilde, s, alphabet, gamma, AdmmVariant::Plain)?.run(iterations))
}

/// ADMM with damping factor `alpha` on `x` and `u`.
pub fn run_admm2<T: Real>(
    h_tilde: &CMatrix<T>,
    s: &[Complex<T>],
    alphabet: &FiniteAlphabet<T>,
    gamma: T,
    alpha: T,
    iterations: usize,
) -> Result<IterationTrace<T>> {
    check_iterations(iterations)?;
    Ok(
        AdmmSolver::new(h_tilde, s, alphabet, gamma, AdmmVariant::Damped { alpha })?
            .run(iterations),
    )
}

/// Damped ADMM with the dual vector removed.
pub fn run_admm3<T: Real>(
    h_tilde: &CMatrix<T>,
    s: &[Complex<T>],
    alphabet: &FiniteAlphabet<T>,
    gamma: T,
    alpha: T,
    iterations: usize,
) -> Result<IterationTrace<T>> {
    check_iterations(iterations)?;
    Ok(
        AdmmSolver::new(h_tilde, s, alphabet, gamma, AdmmVariant::NoDual { alpha })?
            .run(iterations),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{one_bit, psk};
    use crate::model::{complex_normal_vec, generate_channel};
    use crate::scalar::cx;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn instance(seed: u64) -> (CMatrix<f64>, Vec<Complex<f64>>, FiniteAlphabet<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = generate_channel::<f64, _>(4, 12, &mut rng).into_matrix();
        let s = complex_normal_vec(4, &mut rng);
        (h, s, one_bit(1.0 / 12.0).unwrap())
    }

    #[test]
    fn first_admm_step_by_hand() {
        // H̃ = I, gamma = 1: x1 = (I + I)^{-1} s = s/2, x = Pi(s/2 + 0)
        let a = psk(4, 1.0).unwrap();
        let s = vec![cx(1.0, 0.0), cx(0.0, -1.0), cx(-1.0, 0.0)];
        let h = CMatrix::identity(3);
        let solver = AdmmSolver::new(&h, &s, &a, 1.0, AdmmVariant::Plain).unwrap();
        let mut st = solver.initial_state();
        solver.step(&mut st);
        let half: Vec<_> = s.iter().map(|z| z * 0.5).collect();
        for (a, b) in st.x1.iter().zip(&half) {
            assert!((a - b).norm() < 1e-15);
        }
        assert_eq!(st.x, a.project(&half));
        // u = gamma (x1 - x)
        for i in 0..3 {
            assert!((st.u[i] - (st.x1[i] - st.x[i])).norm() < 1e-15);
        }
    }

    #[test]
    fn undamped_admm2_equals_admm() {
        for seed in 0..5 {
            let (h, s, a) = instance(seed);
            let t1 = run_admm(&h, &s, &a, 1.0, 40).unwrap();
            let t2 = run_admm2(&h, &s, &a, 1.0, 0.0, 40).unwrap();
            assert_eq!(t1, t2);
        }
    }

    #[test]
    fn fully_damped_admm2_freezes_shadow() {
        let (h, s, a) = instance(3);
        let solver = AdmmSolver::new(&h, &s, &a, 1.0, AdmmVariant::Damped { alpha: 1.0 }).unwrap();
        let mut st = solver.initial_state();
        solver.step(&mut st);
        let ridge = RidgeInverse::new(&h, 1.0).unwrap();
        let expect = ridge.apply(&h, &h.adjoint_mul_vec(&s).unwrap());
        for (a, b) in st.x1.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-14);
        }
        for _ in 0..10 {
            solver.step(&mut st);
            assert!(st.x_d.iter().all(|z| *z == czero()));
            assert!(st.u_d.iter().all(|z| *z == czero()));
        }
    }

    #[test]
    fn admm3_on_identity_hits_the_symbols() {
        // s in X^N, H̃ = I: x1 = (s + gamma x_d) / (1 + gamma) projects back onto s
        let a = psk(4, 1.0).unwrap();
        let s = vec![cx(1.0, 0.0), cx(0.0, 1.0), cx(0.0, -1.0), cx(-1.0, 0.0)];
        let h = CMatrix::identity(4);
        let tr = run_admm3(&h, &s, &a, 1.0, 0.95, 10).unwrap();
        assert_eq!(tr.x, s);
        assert_eq!(tr.last_change, 1);
        assert!(tr.iui.iter().all(|v| *v < 1e-30));
    }

    #[test]
    fn iterates_stay_in_alphabet_and_runs_repeat() {
        let (h, s, a) = instance(9);
        for tr in [
            run_admm(&h, &s, &a, 1.0, 30).unwrap(),
            run_admm2(&h, &s, &a, 1.0, 0.95, 30).unwrap(),
            run_admm3(&h, &s, &a, 1.0, 0.95, 30).unwrap(),
        ] {
            assert!(tr.x.iter().all(|z| a.contains(z)));
            assert_eq!(tr.iui.len(), 30);
        }
        assert_eq!(
            run_admm2(&h, &s, &a, 1.0, 0.9, 25).unwrap(),
            run_admm2(&h, &s, &a, 1.0, 0.9, 25).unwrap()
        );
        assert!(run_admm(&h, &s, &a, 0.0, 3).is_err());
        assert!(run_admm2(&h, &s, &a, 1.0, 1.5, 3).is_err());
        assert!(run_admm3(&h, &s, &a, 1.0, 0.5, 0).is_err());
    }

    #[test]
    fn x1_update_is_the_penalized_least_squares_minimizer() {
        let (h, s, a) = instance(4);
        let gamma = 1.3;
        let solver =
            AdmmSolver::new(&h, &s, &a, gamma, AdmmVariant::NoDual { alpha: 0.9 }).unwrap();
        let mut st = solver.initial_state();
        for _ in 0..3 {
            solver.step(&mut st);
        }
        let x_d = st.x_d.clone();
        solver.step(&mut st);
        let cost = |v: &[Complex<f64>]| {
            residual_norm(&h, &s, v)
                + gamma
                    * v.iter()
                        .zip(&x_d)
                        .map(|(p, q)| (p - q).norm_sqr())
                        .sum::<f64>()
        };
        let base = cost(&st.x1);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let delta: Vec<Complex<f64>> = complex_normal_vec(12, &mut rng);
            let moved: Vec<_> = st
                .x1
                .iter()
                .zip(&delta)
                .map(|(a, d)| a + d * 1e-3)
                .collect();
            assert!(base <= cost(&moved) + 1e-9);
        }
    }
}
