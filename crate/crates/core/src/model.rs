//! Flat-fading downlink system model: `y = Hx + z`.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{PrecodeError, Result};
use crate::linalg::{norm_sqr, CMatrix};
use crate::scalar::Real;

/// Antenna/user counts and power budget of one system instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig<T> {
    /// BS antennas.
    pub n: usize,
    /// Single-antenna users.
    pub k: usize,
    /// Transmit power per antenna (linear).
    pub p_tx: T,
    /// Receiver noise variance (linear).
    pub sigma2: T,
}

impl<T: Real> SystemConfig<T> {
    pub fn new(n: usize, k: usize, p_tx: T, sigma2: T) -> Result<Self> {
        if k == 0 || n < k {
            return Err(PrecodeError::Domain(format!(
                "need N >= K >= 1, got N={n}, K={k}"
            )));
        }
        if !(p_tx > T::zero()) {
            return Err(PrecodeError::Domain(format!(
                "P_tx must be positive, got {p_tx}"
            )));
        }
        if !(sigma2 >= T::zero()) {
            return Err(PrecodeError::Domain(format!(
                "sigma2 must be >= 0, got {sigma2}"
            )));
        }
        Ok(Self { n, k, p_tx, sigma2 })
    }

    /// System with total transmit power 1 (`P_tx = 1/N`) at the given SNR.
    pub fn unit_power(n: usize, k: usize, snr_db: T) -> Result<Self> {
        let p_tx = T::one() / T::from_usize_lossy(n.max(1));
        Self::new(n, k, p_tx, snr_to_sigma2(snr_db, n, p_tx))
    }

    /// Load factor `N / K`.
    pub fn load_factor(&self) -> T {
        T::from_usize_lossy(self.n) / T::from_usize_lossy(self.k)
    }
}

/// Downlink channel matrix, K×N.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel<T> {
    h: CMatrix<T>,
}

impl<T: Real> Channel<T> {
    pub fn new(h: CMatrix<T>) -> Result<Self> {
        if h.rows() == 0 || h.cols() == 0 {
            return Err(PrecodeError::DimensionMismatch("empty channel".into()));
        }
        Ok(Self { h })
    }

    pub fn users(&self) -> usize {
        self.h.rows()
    }

    pub fn antennas(&self) -> usize {
        self.h.cols()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.h
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.h
    }
}

/// One `CN(0, 1)` draw: real and imaginary parts independent `N(0, 1/2)`.
pub fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex::new(T::lit(re * s), T::lit(im * s))
}

pub fn complex_normal_vec<T: Real, R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<Complex<T>> {
    (0..len).map(|_| complex_normal(rng)).collect()
}

/// I.i.d. Rayleigh channel with `CN(0, 1)` entries, drawn row by row.
pub fn generate_channel<T: Real, R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Channel<T> {
    Channel {
        h: CMatrix::from_fn(k, n, |_, _| complex_normal(rng)),
    }
}

/// Imperfect CSI `sqrt(1-eps) H + sqrt(eps) E`, `E` i.i.d. `CN(0, 1)`.
pub fn perturb_channel<T: Real, R: Rng + ?Sized>(
    h: &Channel<T>,
    epsilon: T,
    rng: &mut R,
) -> Result<Channel<T>> {
    if !(epsilon >= T::zero() && epsilon <= T::one()) {
        return Err(PrecodeError::Domain(format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )));
    }
    let keep = (T::one() - epsilon).sqrt();
    let mix = epsilon.sqrt();
    let m = h.matrix();
    let out = CMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        let e: Complex<T> = complex_normal(rng);
        m[(i, j)] * keep + e * mix
    });
    Ok(Channel { h: out })
}

/// `y = Hx + z`, `z ~ CN(0, sigma2 I)`.
pub fn transmit<T: Real, R: Rng + ?Sized>(
    h: &Channel<T>,
    x: &[Complex<T>],
    sigma2: T,
    rng: &mut R,
) -> Result<Vec<Complex<T>>> {
    let noise = complex_normal_vec(h.users(), rng);
    transmit_with_noise(h, x, sigma2, &noise)
}

/// `y = Hx + sigma z` for a supplied unit-variance noise draw `z`.
///
/// Lets several precoders share one noise realization.
pub fn transmit_with_noise<T: Real>(
    h: &Channel<T>,
    x: &[Complex<T>],
    sigma2: T,
    unit_noise: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    if !(sigma2 >= T::zero()) {
        return Err(PrecodeError::Domain(format!(
            "sigma2 must be >= 0, got {sigma2}"
        )));
    }
    if unit_noise.len() != h.users() {
        return Err(PrecodeError::DimensionMismatch(format!(
            "noise of length {} for {} users",
            unit_noise.len(),
            h.users()
        )));
    }
    let mut y = h.matrix().mul_vec(x)?;
    if sigma2 > T::zero() {
        let sigma = sigma2.sqrt();
        for (yk, zk) in y.iter_mut().zip(unit_noise) {
            *yk += zk * sigma;
        }
    }
    Ok(y)
}

fn residual<T: Real>(
    s: &[Complex<T>],
    beta: T,
    h: &CMatrix<T>,
    x: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    if s.len() != h.rows() {
        return Err(PrecodeError::DimensionMismatch(format!(
            "{} symbols for {} users",
            s.len(),
            h.rows()
        )));
    }
    let hx = h.mul_vec(x)?;
    Ok(s.iter().zip(&hx).map(|(a, b)| a - b * beta).collect())
}

/// Inter-user interference of one realization, `||s - beta H x||^2`.
pub fn iui<T: Real>(s: &[Complex<T>], beta: T, h: &CMatrix<T>, x: &[Complex<T>]) -> Result<T> {
    Ok(norm_sqr(&residual(s, beta, h, x)?))
}

/// Receiver MSE `||s - beta H x||^2 + beta^2 K sigma2`.
pub fn mse_objective<T: Real>(
    s: &[Complex<T>],
    beta: T,
    h: &CMatrix<T>,
    x: &[Complex<T>],
    sigma2: T,
) -> Result<T> {
    let k = T::from_usize_lossy(h.rows());
    Ok(iui(s, beta, h, x)? + beta * beta * k * sigma2)
}

/// Noise variance for `SNR = N P_tx / sigma2`.
pub fn snr_to_sigma2<T: Real>(snr_db: T, n: usize, p_tx: T) -> T {
    let ten = T::lit(10.0);
    T::from_usize_lossy(n) * p_tx / ten.powf(snr_db / ten)
}

pub fn sigma2_to_snr<T: Real>(sigma2: T, n: usize, p_tx: T) -> T {
    T::lit(10.0) * (T::from_usize_lossy(n) * p_tx / sigma2).log10()
}

pub fn to_db<T: Real>(v: T) -> T {
    T::lit(10.0) * v.log10()
}
