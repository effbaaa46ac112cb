//! Infinite-resolution linear precoders (ZF, WF) and directly quantized WF.

use num_complex::Complex;

use crate::alphabet::FiniteAlphabet;
use crate::error::{PrecodeError, Result};
use crate::ide::update_beta;
use crate::linalg::{condition_number_1, CMatrix, Cholesky};
use crate::model::iui;
use crate::scalar::Real;

/// Gram matrices with a 1-norm condition estimate above this are treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearPrecodeResult<T> {
    pub x: Vec<Complex<T>>,
    pub beta: T,
    /// `||s - beta H x||^2`.
    pub residual: T,
}

fn check_dims<T: Real>(h: &CMatrix<T>, s: &[Complex<T>], p_tx: T) -> Result<()> {
    if s.len() != h.rows() {
        return Err(PrecodeError::DimensionMismatch(format!(
            "{} symbols for {} users",
            s.len(),
            h.rows()
        )));
    }
    if h.rows() > h.cols() {
        return Err(PrecodeError::DimensionMismatch(format!(
            "linear precoding needs K <= N, got K={} N={}",
            h.rows(),
            h.cols()
        )));
    }
    if !(p_tx > T::zero()) {
        return Err(PrecodeError::Domain(format!(
            "P_tx must be positive, got {p_tx}"
        )));
    }
    Ok(())
}

/// Factors `A = H H^H + reg I` and returns the factor with `A^{-1}`.
fn regularized_inverse<T: Real>(h: &CMatrix<T>, reg: T) -> Result<(Cholesky<T>, CMatrix<T>)> {
    let mut a = h.gram_rows();
    a.add_diagonal(reg);
    let limit = SINGULAR_CONDITION;
    let chol = Cholesky::new(&a).map_err(|_| PrecodeError::SingularChannel {
        cond: f64::INFINITY,
        limit,
    })?;
    let inv = chol.inverse();
    let cond = condition_number_1(&a, &inv).to_f64_lossy();
    if !(cond <= limit) {
        return Err(PrecodeError::SingularChannel { cond, limit });
    }
    Ok((chol, inv))
}

/// Zero-forcing: `x = (1/beta) H^H (H H^H)^{-1} s` with
/// `beta = sqrt(tr((H H^H)^{-1}) / (N P_tx))`.
pub fn zf_precode<T: Real>(
    h: &CMatrix<T>,
    s: &[Complex<T>],
    p_tx: T,
) -> Result<LinearPrecodeResult<T>> {
    check_dims(h, s, p_tx)?;
    let n = T::from_usize_lossy(h.cols());
    let (chol, inv) = regularized_inverse(h, T::zero())?;
    let beta = (inv.trace().re / (n * p_tx)).sqrt();
    let v = chol.solve(s);
    let x: Vec<_> = h
        .adjoint_mul_vec_unchecked(&v)
        .into_iter()
        .map(|z| z / beta)
        .collect();
    let residual = iui(s, beta, h, &x)?;
    Ok(LinearPrecodeResult { x, beta, residual })
}

/// Explicit WF matrix `W_WF = H^H (H H^H + K sigma2 / (N P_tx) I)^{-1}`.
pub fn wf_matrix<T: Real>(h: &CMatrix<T>, p_tx: T, sigma2: T) -> Result<CMatrix<T>> {
    let k = T::from_usize_lossy(h.rows());
    let n = T::from_usize_lossy(h.cols());
    if !(sigma2 >= T::zero()) {
        return Err(PrecodeError::Domain(format!(
            "sigma2 must be >= 0, got {sigma2}"
        )));
    }
    let (_, inv) = regularized_inverse(h, k * sigma2 / (n * p_tx))?;
    h.adjoint().matmul(&inv)
}

/// Wiener filter precoder, normalized by `beta_WF = sqrt(tr(W^H W) / (N P_tx))`.
pub fn wf_precode<T: Real>(
    h: &CMatrix<T>,
    s: &[Complex<T>],
    p_tx: T,
    sigma2: T,
) -> Result<LinearPrecodeResult<T>> {
    check_dims(h, s, p_tx)?;
    let n = T::from_usize_lossy(h.cols());
    let w = wf_matrix(h, p_tx, sigma2)?;
    let beta = (w.frobenius_norm_sqr() / (n * p_tx)).sqrt();
    let x: Vec<_> = w
        .mul_vec_unchecked(s)
        .into_iter()
        .map(|z| z / beta)
        .collect();
    let residual = iui(s, beta, h, &x)?;
    Ok(LinearPrecodeResult { x, beta, residual })
}

/// WF followed by entrywise quantization to `alphabet`, with `beta` refit in
/// closed form for the quantized vector.
pub fn quantized_wf<T: Real>(
    h: &CMatrix<T>,
    s: &[Complex<T>],
    p_tx: T,
    sigma2: T,
    alphabet: &FiniteAlphabet<T>,
    beta_min: T,
) -> Result<LinearPrecodeResult<T>> {
    let wf = wf_precode(h, s, p_tx, sigma2)?;
    let x = alphabet.project(&wf.x);
    let beta = update_beta(h, s, &x, sigma2, beta_min)?;
    let residual = iui(s, beta, h, &x)?;
    Ok(LinearPrecodeResult { x, beta, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::one_bit;
    use crate::model::{complex_normal_vec, generate_channel, mse_objective};
    use crate::scalar::cx;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar(v: f64) -> CMatrix<f64> {
        CMatrix::from_rows(&[vec![cx(v, 0.0)]]).unwrap()
    }

    #[test]
    fn zf_scalar_and_identity() {
        let r = zf_precode(&scalar(2.0), &[cx(1.0, 0.0)], 1.0).unwrap();
        assert!((r.beta - 0.5).abs() < 1e-15);
        assert!((r.x[0] - cx(1.0, 0.0)).norm() < 1e-15);
        assert!(r.residual < 1e-30);

        let s = vec![cx(0.3, 0.1), cx(-1.0, 0.5), cx(0.0, -0.7)];
        let r = zf_precode(&CMatrix::<f64>::identity(3), &s, 1.0).unwrap();
        assert!((r.beta - 1.0).abs() < 1e-15);
        for (a, b) in r.x.iter().zip(&s) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn zf_cancels_interference() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let h = generate_channel::<f64, _>(2, 4, &mut rng).into_matrix();
            let s = complex_normal_vec::<f64, _>(2, &mut rng);
            let r = zf_precode(&h, &s, 0.25).unwrap();
            let ns: f64 = s.iter().map(|z| z.norm_sqr()).sum::<f64>();
            assert!(r.residual.sqrt() <= 1e-9 * ns.sqrt());
        }
    }

    #[test]
    fn zf_rejects_rank_deficient() {
        let row = vec![cx(1.0, 0.0), cx(0.5, -0.5)];
        let h = CMatrix::from_rows(&[row.clone(), row]).unwrap();
        assert!(matches!(
            zf_precode(&h, &[cx(1.0, 0.0), cx(0.0, 1.0)], 1.0),
            Err(PrecodeError::SingularChannel { .. })
        ));
        assert!(wf_precode(&h, &[cx(1.0, 0.0), cx(0.0, 1.0)], 1.0, 0.1).is_ok());
        assert!(zf_precode(&CMatrix::zeros(3, 2), &[cx(1.0, 0.0); 3], 1.0).is_err());
    }

    #[test]
    fn zf_meets_average_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = generate_channel::<f64, _>(4, 16, &mut rng).into_matrix();
        let p_tx = 1.0 / 16.0;
        let draws = 20_000;
        let powers: Vec<f64> = (0..draws)
            .map(|_| {
                let s = complex_normal_vec::<f64, _>(4, &mut rng);
                let r = zf_precode(&h, &s, p_tx).unwrap();
                r.x.iter().map(|z| z.norm_sqr()).sum::<f64>() / 16.0
            })
            .collect();
        let mean = powers.iter().sum::<f64>() / draws as f64;
        let var = powers.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (draws as f64 - 1.0);
        let se = (var / draws as f64).sqrt();
        assert!((mean - p_tx).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn wf_scalar_closed_form() {
        let r = wf_precode(&scalar(1.0), &[cx(1.0, 0.0)], 1.0, 1.0).unwrap();
        assert!((r.beta - 0.5).abs() < 1e-15);
        assert!((r.x[0] - cx(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn wf_tends_to_zf_and_beats_it_on_mse() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = generate_channel::<f64, _>(3, 8, &mut rng).into_matrix();
        let s = complex_normal_vec::<f64, _>(3, &mut rng);
        let zf = zf_precode(&h, &s, 1.0 / 8.0).unwrap();
        for s2 in [0.0, 1e-12] {
            let wf = wf_precode(&h, &s, 1.0 / 8.0, s2).unwrap();
            let num: f64 =
                wf.x.iter()
                    .zip(&zf.x)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum();
            let den: f64 = zf.x.iter().map(|z| z.norm_sqr()).sum();
            assert!((num / den).sqrt() < 1e-6);
        }
        let wf = wf_precode(&h, &s, 1.0 / 8.0, 0.5).unwrap();
        let f_wf = mse_objective(&s, wf.beta, &h, &wf.x, 0.5).unwrap();
        let f_zf = mse_objective(&s, zf.beta, &h, &zf.x, 0.5).unwrap();
        assert!(f_wf <= f_zf, "{f_wf} > {f_zf}");
    }

    #[test]
    fn quantized_wf_scalar_case() {
        let a = one_bit(2.0).unwrap();
        let r = quantized_wf(&scalar(1.0), &[cx(1.0, 0.0)], 2.0, 0.0, &a, 1e-6).unwrap();
        assert_eq!(r.x, vec![cx(1.0, 1.0)]);
        assert!((r.beta - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantized_wf_on_fine_grid_is_wf() {
        let h = scalar(1.0);
        let s = [cx(0.6, -0.2)];
        let wf = wf_precode(&h, &s, 1.0, 0.0).unwrap();
        let a = FiniteAlphabet::explicit(vec![wf.x[0], cx(5.0, 5.0), cx(-5.0, 0.0)], 1.0).unwrap();
        let q = quantized_wf(&h, &s, 1.0, 0.0, &a, 1e-6).unwrap();
        assert_eq!(q.x, wf.x);
        assert!((q.beta - wf.beta).abs() < 1e-12);
    }
}
