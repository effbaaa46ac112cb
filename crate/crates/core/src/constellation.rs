//! Gray-labelled square QAM constellations and the user-side detector.
//!
//! Each axis carries `m = bits_per_symbol / 2` bits. Axis level index `i`
//! (ascending amplitude, `2i - (L-1)` before normalization) holds the
//! reflected Gray label `i ^ (i >> 1)`. The in-phase label occupies the
//! leading `m` bits of a symbol, the quadrature label the trailing `m` bits,
//! MSB first. For QPSK this gives
//!
//! | bits | point          |
//! |------|----------------|
//! | 00   | (-1 - j) / √2  |
//! | 01   | (-1 + j) / √2  |
//! | 11   | ( 1 + j) / √2  |
//! | 10   | ( 1 - j) / √2  |

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{PrecodeError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "16qam",
            Modulation::Qam64 => "64qam",
        })
    }
}

impl FromStr for Modulation {
    type Err = PrecodeError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" | "4qam" | "4-qam" => Ok(Modulation::Qpsk),
            "16qam" | "16-qam" | "qam16" => Ok(Modulation::Qam16),
            "64qam" | "64-qam" | "qam64" => Ok(Modulation::Qam64),
            other => Err(PrecodeError::Domain(format!(
                "unknown constellation `{other}`"
            ))),
        }
    }
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Unit-energy square QAM; `points[label]` is the point carrying `label`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<T> {
    modulation: Modulation,
    points: Vec<Complex<T>>,
}

impl<T: Real> Constellation<T> {
    pub fn new(modulation: Modulation) -> Self {
        let bps = modulation.bits_per_symbol();
        let m = bps / 2;
        let levels = 1usize << m;
        // label -> ascending level index
        let mut index_of = vec![0usize; levels];
        for i in 0..levels {
            index_of[gray(i)] = i;
        }
        // mean |p|^2 of the unnormalized grid is 2 (L^2 - 1) / 3
        let l = T::from_usize_lossy(levels);
        let scale = (T::lit(2.0) * (l * l - T::one()) / T::lit(3.0))
            .sqrt()
            .recip();
        let amp = |label: usize| {
            let i = T::from_usize_lossy(index_of[label]);
            (T::lit(2.0) * i - (l - T::one())) * scale
        };
        let points = (0..1usize << bps)
            .map(|label| Complex::new(amp(label >> m), amp(label & (levels - 1))))
            .collect();
        Self { modulation, points }
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.modulation.bits_per_symbol()
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Result<Complex<T>> {
        self.points
            .get(label)
            .copied()
            .ok_or(PrecodeError::UnknownLabel(label))
    }

    /// Maps a bit stream (one `bool` per bit, MSB of each symbol first) to symbols.
    pub fn modulate(&self, bits: &[bool]) -> Result<Vec<Complex<T>>> {
        let bps = self.bits_per_symbol();
        if !bits.len().is_multiple_of(bps) {
            return Err(PrecodeError::DimensionMismatch(format!(
                "{} bits is not a multiple of {bps} bits per symbol",
                bits.len()
            )));
        }
        bits.chunks(bps)
            .map(|chunk| {
                let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                self.point(label)
            })
            .collect()
    }

    pub fn label_bits(&self, label: usize, out: &mut Vec<bool>) {
        let bps = self.bits_per_symbol();
        for b in (0..bps).rev() {
            out.push((label >> b) & 1 == 1);
        }
    }

    /// Nearest point to `z`; ties go to the lowest label.
    pub fn nearest(&self, z: Complex<T>) -> usize {
        let mut best = 0;
        let mut best_d = (z - self.points[0]).norm_sqr();
        for (label, p) in self.points.iter().enumerate().skip(1) {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = label;
                best_d = d;
            }
        }
        best
    }

    /// Rescales each received sample by `beta` and slices it to the nearest point.
    ///
    /// Returns the labels (one per user) and the concatenated bits.
    pub fn detect(&self, y: &[Complex<T>], beta: T) -> Result<(Vec<usize>, Vec<bool>)> {
        if !(beta > T::zero()) {
            return Err(PrecodeError::Domain(format!(
                "beta must be positive, got {beta}"
            )));
        }
        let labels: Vec<usize> = y.iter().map(|&yk| self.nearest(yk * beta)).collect();
        let mut bits = Vec::with_capacity(labels.len() * self.bits_per_symbol());
        for &l in &labels {
            self.label_bits(l, &mut bits);
        }
        Ok((labels, bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ALL: [Modulation; 3] = [Modulation::Qpsk, Modulation::Qam16, Modulation::Qam64];

    #[test]
    fn qpsk_label_table() {
        let c = Constellation::<f64>::new(Modulation::Qpsk);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bits = [false, false, false, true, true, true, true, false];
        let s = c.modulate(&bits).unwrap();
        let expect = [cx(-r, -r), cx(-r, r), cx(r, r), cx(r, -r)];
        for (a, b) in s.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn unit_average_energy() {
        for m in ALL {
            let c = Constellation::<f64>::new(m);
            let e = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / c.points().len() as f64;
            assert!((e - 1.0).abs() < 1e-12, "{m}: {e}");
        }
    }

    #[test]
    fn labels_are_a_bijection_with_gray_neighbours() {
        for m in ALL {
            let c = Constellation::<f64>::new(m);
            let pts = c.points();
            for i in 0..pts.len() {
                for j in 0..i {
                    assert!((pts[i] - pts[j]).norm() > 1e-9);
                }
            }
            // horizontally or vertically adjacent points differ in one bit
            let step = pts
                .iter()
                .flat_map(|a| pts.iter().map(move |b| (a - b).norm()))
                .filter(|d| *d > 1e-9)
                .fold(f64::INFINITY, f64::min);
            for (i, a) in pts.iter().enumerate() {
                for (j, b) in pts.iter().enumerate() {
                    if ((a - b).norm() - step).abs() < 1e-9 {
                        assert_eq!((i ^ j).count_ones(), 1, "{m}: labels {i} {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn noiseless_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for m in ALL {
            let c = Constellation::<f64>::new(m);
            let bits: Vec<bool> = (0..c.bits_per_symbol() * 50)
                .map(|_| rng.random())
                .collect();
            let s = c.modulate(&bits).unwrap();
            let (_, back) = c.detect(&s, 1.0).unwrap();
            assert_eq!(back, bits);
        }
        let c = Constellation::<f64>::new(Modulation::Qpsk);
        assert!(c.modulate(&[true, false, true]).is_err());
        assert!(c.point(4).is_err());
    }

    #[test]
    fn qpsk_decisions() {
        let c = Constellation::<f64>::new(Modulation::Qpsk);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (l, _) = c.detect(&[cx(0.9, 1.1)], 1.0).unwrap();
        assert!((c.points()[l[0]] - cx(r, r)).norm() < 1e-15);
        let (l, _) = c.detect(&[cx(2.0, -2.0)], 0.5).unwrap();
        assert!((c.points()[l[0]] - cx(r, -r)).norm() < 1e-15);
        assert!(c.detect(&[cx(1.0, 1.0)], 0.0).is_err());
    }

    #[test]
    fn qam16_detection_matches_brute_force() {
        let c = Constellation::<f64>::new(Modulation::Qam16);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..2000 {
            let y = cx(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let (l, _) = c.detect(&[y], 1.0).unwrap();
            let best = (0..16)
                .min_by(|&a, &b| {
                    (y - c.points()[a])
                        .norm()
                        .partial_cmp(&(y - c.points()[b]).norm())
                        .unwrap()
                })
                .unwrap();
            assert_eq!(l[0], best);
        }
    }

    #[test]
    fn parses_names() {
        assert_eq!("QPSK".parse::<Modulation>().unwrap(), Modulation::Qpsk);
        assert_eq!("16qam".parse::<Modulation>().unwrap(), Modulation::Qam16);
        assert!("8psk".parse::<Modulation>().is_err());
    }
}
