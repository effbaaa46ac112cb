//! Finite transmit alphabets and the entrywise projection onto them.

use std::cmp::Ordering;

use num_complex::Complex;

use crate::error::{PrecodeError, Result};
use crate::scalar::Real;

/// Default bound on the number of points `hybrid_sumset` may produce.
pub const DEFAULT_SUMSET_CAP: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub enum AlphabetKind<T> {
    /// Same real level set on the in-phase and quadrature rails (DAC output).
    PerDimensionLevels(Vec<T>),
    /// `M` equally spaced phases at constant amplitude (phase shifter output).
    PskPhases(usize),
    /// Arbitrary point set.
    ExplicitSet(Vec<Complex<T>>),
}

/// A finite alphabet `X` with its projection rule.
///
/// Per-dimension and PSK alphabets carry `|chi|^2 = P_tx` on average (exactly
/// for one-bit and PSK). Projection ties go to the point with the larger real
/// part, then the larger imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteAlphabet<T> {
    kind: AlphabetKind<T>,
    p_tx: T,
    points: Vec<Complex<T>>,
}

fn check_power<T: Real>(p_tx: T) -> Result<()> {
    if p_tx > T::zero() && p_tx.is_finite() {
        Ok(())
    } else {
        Err(PrecodeError::Domain(format!(
            "P_tx must be positive, got {p_tx}"
        )))
    }
}

impl<T: Real> FiniteAlphabet<T> {
    /// Per-dimension levels; must be strictly ascending and symmetric about zero.
    pub fn per_dimension(levels: Vec<T>, p_tx: T) -> Result<Self> {
        check_power(p_tx)?;
        if levels.is_empty() {
            return Err(PrecodeError::Domain("empty level set".into()));
        }
        if levels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(PrecodeError::Domain(
                "levels must be strictly ascending".into(),
            ));
        }
        let n = levels.len();
        let tol = T::lit(1e-12) * levels[n - 1].abs().max(T::one());
        if (0..n).any(|i| (levels[i] + levels[n - 1 - i]).abs() > tol) {
            return Err(PrecodeError::Domain(
                "levels must be symmetric about zero".into(),
            ));
        }
        let points = levels
            .iter()
            .flat_map(|&re| levels.iter().map(move |&im| Complex::new(re, im)))
            .collect();
        Ok(Self {
            kind: AlphabetKind::PerDimensionLevels(levels),
            p_tx,
            points,
        })
    }

    /// Explicit point set; must be nonempty with distinct points.
    pub fn explicit(points: Vec<Complex<T>>, p_tx: T) -> Result<Self> {
        check_power(p_tx)?;
        if points.is_empty() {
            return Err(PrecodeError::Domain("empty point set".into()));
        }
        if points
            .iter()
            .any(|p| !(p.re.is_finite() && p.im.is_finite()))
        {
            return Err(PrecodeError::Domain("non-finite alphabet point".into()));
        }
        let mut sorted = points.clone();
        sorted.sort_by(lex_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(PrecodeError::Domain("duplicate alphabet points".into()));
        }
        Ok(Self {
            kind: AlphabetKind::ExplicitSet(points.clone()),
            p_tx,
            points,
        })
    }

    pub fn kind(&self) -> &AlphabetKind<T> {
        &self.kind
    }

    pub fn p_tx(&self) -> T {
        self.p_tx
    }

    /// Every complex point of the alphabet.
    ///
    /// Per-dimension alphabets are listed real-level major.
    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    /// Number of complex points `|X|`.
    pub fn cardinality(&self) -> usize {
        self.points.len()
    }

    /// Quantization levels `M`: per dimension for DAC alphabets, phases for
    /// PSK, points for explicit sets.
    pub fn levels(&self) -> usize {
        match &self.kind {
            AlphabetKind::PerDimensionLevels(l) => l.len(),
            AlphabetKind::PskPhases(m) => *m,
            AlphabetKind::ExplicitSet(p) => p.len(),
        }
    }

    /// `B = log2(M)` when `M` is a power of two.
    pub fn bits(&self) -> Option<u32> {
        let m = self.levels();
        m.is_power_of_two().then(|| m.trailing_zeros())
    }

    /// Mean `|chi|^2` under uniform use of the points.
    pub fn average_power(&self) -> T {
        self.points.iter().map(|p| p.norm_sqr()).sum::<T>() / T::from_usize_lossy(self.points.len())
    }

    pub fn contains(&self, z: &Complex<T>) -> bool {
        self.points.iter().any(|p| p == z)
    }

    /// Nearest alphabet point to `z`.
    pub fn project_scalar(&self, z: Complex<T>) -> Complex<T> {
        match &self.kind {
            AlphabetKind::PerDimensionLevels(levels) => {
                Complex::new(nearest_level(levels, z.re), nearest_level(levels, z.im))
            }
            AlphabetKind::PskPhases(m) => {
                let m = *m;
                let phase = z.im.atan2(z.re);
                let pos = phase * T::from_usize_lossy(m) / T::TAU();
                let lo = pos.floor();
                let lo_idx = (lo.to_i64().unwrap_or(0)).rem_euclid(m as i64) as usize;
                let hi_idx = (lo_idx + 1) % m;
                let a = self.points[lo_idx];
                let b = self.points[hi_idx];
                pick_nearer(z, a, b)
            }
            AlphabetKind::ExplicitSet(points) => {
                let mut best = points[0];
                for &p in &points[1..] {
                    best = pick_nearer(z, best, p);
                }
                best
            }
        }
    }

    /// Entrywise projection `Pi_X(v)`.
    pub fn project(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        v.iter().map(|&z| self.project_scalar(z)).collect()
    }

    pub fn project_into(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        for (o, &z) in out.iter_mut().zip(v) {
            *o = self.project_scalar(z);
        }
    }
}

fn lex_cmp<T: Real>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    a.re.partial_cmp(&b.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// Closer of `a` and `b` to `z`; exact ties prefer larger real, then larger imaginary part.
fn pick_nearer<T: Real>(z: Complex<T>, a: Complex<T>, b: Complex<T>) -> Complex<T> {
    let da = (z - a).norm_sqr();
    let db = (z - b).norm_sqr();
    match db.partial_cmp(&da) {
        Some(Ordering::Less) => b,
        Some(Ordering::Greater) => a,
        _ => {
            if lex_cmp(&b, &a) == Ordering::Greater {
                b
            } else {
                a
            }
        }
    }
}

fn nearest_level<T: Real>(levels: &[T], x: T) -> T {
    let idx = levels.partition_point(|&l| l < x);
    if idx == 0 {
        return levels[0];
    }
    if idx == levels.len() {
        return levels[idx - 1];
    }
    let (a, b) = (levels[idx - 1], levels[idx]);
    if (b - x) <= (x - a) {
        b
    } else {
        a
    }
}

/// One-bit DAC alphabet `sqrt(P_tx/2) (±1 ± j)`, so `|chi|^2 = P_tx`.
pub fn one_bit<T: Real>(p_tx: T) -> Result<FiniteAlphabet<T>> {
    check_power(p_tx)?;
    let a = (p_tx / T::lit(2.0)).sqrt();
    FiniteAlphabet::per_dimension(vec![-a, a], p_tx)
}

/// Constant-envelope `M`-PSK alphabet `sqrt(P_tx) e^{j 2 pi k / M}`.
pub fn psk<T: Real>(m: usize, p_tx: T) -> Result<FiniteAlphabet<T>> {
    check_power(p_tx)?;
    if m < 2 {
        return Err(PrecodeError::Domain(format!("PSK needs M >= 2, got {m}")));
    }
    let r = p_tx.sqrt();
    let mf = T::from_usize_lossy(m);
    let points = (0..m)
        .map(|k| {
            // exact values on the axes so that e.g. 4-PSK is {1, j, -1, -j}
            match (4 * k) % m == 0 {
                true => match (4 * k / m) % 4 {
                    0 => Complex::new(r, T::zero()),
                    1 => Complex::new(T::zero(), r),
                    2 => Complex::new(-r, T::zero()),
                    _ => Complex::new(T::zero(), -r),
                },
                false => Complex::from_polar(r, T::TAU() * T::from_usize_lossy(k) / mf),
            }
        })
        .collect();
    Ok(FiniteAlphabet {
        kind: AlphabetKind::PskPhases(m),
        p_tx,
        points,
    })
}

/// Uniform mid-rise `B`-bit DAC: levels `±(2i-1) Δ/2`, `i = 1..2^(B-1)`,
/// with `Δ` chosen so the mean point power under uniform use is `P_tx`.
pub fn uniform_dac<T: Real>(bits: u32, p_tx: T) -> Result<FiniteAlphabet<T>> {
    check_power(p_tx)?;
    if bits == 0 || bits > 16 {
        return Err(PrecodeError::Domain(format!(
            "DAC resolution must be 1..=16 bits, got {bits}"
        )));
    }
    if bits == 1 {
        return one_bit(p_tx);
    }
    let half = 1usize << (bits - 1);
    let hf = T::from_usize_lossy(half);
    // mean over i of ((2i-1) Δ/2)^2 is Δ^2 (4 L^2 - 1) / 12 with L = 2^(B-1)
    let delta = (T::lit(6.0) * p_tx / (T::lit(4.0) * hf * hf - T::one())).sqrt();
    let pos: Vec<T> = (1..=half)
        .map(|i| T::from_usize_lossy(2 * i - 1) * delta / T::lit(2.0))
        .collect();
    let levels = pos
        .iter()
        .rev()
        .map(|&l| -l)
        .chain(pos.iter().copied())
        .collect();
    FiniteAlphabet::per_dimension(levels, p_tx)
}

/// Output alphabet of a hybrid DAC + phase-shifter front end: all sums of
/// `n_rf` products (one DAC point times one unit PSK phase each),
/// deduplicated and rescaled to the DAC's average power.
pub fn hybrid_sumset<T: Real>(
    dac: &FiniteAlphabet<T>,
    psk: &FiniteAlphabet<T>,
    n_rf: usize,
    cap: usize,
) -> Result<FiniteAlphabet<T>> {
    if n_rf == 0 {
        return Err(PrecodeError::Domain("n_rf must be >= 1".into()));
    }
    let bound = ((dac.cardinality() * psk.cardinality()) as f64).powi(n_rf as i32);
    if bound > cap as f64 {
        return Err(PrecodeError::CandidateCap {
            count: bound,
            cap: cap as u64,
        });
    }
    let phases: Vec<Complex<T>> = psk
        .points()
        .iter()
        .map(|p| {
            let r = p.norm();
            if r > T::zero() {
                p / r
            } else {
                *p
            }
        })
        .collect();
    let scale = dac
        .points()
        .iter()
        .map(|p| p.norm())
        .fold(T::zero(), T::max)
        .max(T::one());
    let products = dedup(
        dac.points()
            .iter()
            .flat_map(|d| phases.iter().map(move |p| d * p))
            .collect(),
        scale,
    );
    let mut set = products.clone();
    for _ in 1..n_rf {
        let sums = set
            .iter()
            .flat_map(|a| products.iter().map(move |b| a + b))
            .collect();
        set = dedup(sums, scale);
    }
    let power = set.iter().map(|p| p.norm_sqr()).sum::<T>() / T::from_usize_lossy(set.len());
    if !(power > T::zero()) {
        return Err(PrecodeError::Domain("sumset has zero average power".into()));
    }
    let g = (dac.p_tx() / power).sqrt();
    FiniteAlphabet::explicit(set.into_iter().map(|p| p * g).collect(), dac.p_tx())
}

fn dedup<T: Real>(mut pts: Vec<Complex<T>>, scale: T) -> Vec<Complex<T>> {
    let tol = T::lit(1e-9) * scale;
    // snap near-zero parts so that sorting groups duplicates together
    for p in &mut pts {
        let q = (p.re / tol).round() * tol;
        let r = (p.im / tol).round() * tol;
        *p = Complex::new(
            if q == T::zero() { T::zero() } else { p.re },
            if r == T::zero() { T::zero() } else { p.im },
        );
    }
    let key = |p: &Complex<T>| {
        (
            (p.re / tol).round().to_i64().unwrap_or(i64::MAX),
            (p.im / tol).round().to_i64().unwrap_or(i64::MAX),
        )
    };
    pts.sort_by_key(key);
    pts.dedup_by(|a, b| key(a) == key(b));
    pts
}
