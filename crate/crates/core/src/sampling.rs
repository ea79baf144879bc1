//! Reproducible random streams, uniform order statistics and Gaussian draws.
//!
//! Every stream is a ChaCha8 generator whose key is derived from
//! `(master_seed, substream)` and whose 64-bit stream id is the replicate
//! index, so any replicate can be regenerated independently of how the work
//! is scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tag separating independent streams drawn for the same replicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Substream {
    Uniform,
    Gaussian,
}

impl Substream {
    fn tag(self) -> u64 {
        match self {
            Substream::Uniform => 1,
            Substream::Gaussian => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
    pub substream: Substream,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64, substream: Substream) -> Self {
        SeedSpec { master_seed, stream_index, substream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self.master_seed ^ self.substream.tag().wrapping_mul(0xD1B5_4A32_D192_ED03);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Uniform draw of the form `(2m + 1) / 2^53`, `m < 2^52`.
///
/// Never 0 or 1, and never a dyadic rational of level below 53, so a draw
/// cannot land on a cell boundary of any supported grid.
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let m = rng.random::<u64>() >> 12;
    (2 * m + 1) as f64 * (-53f64).exp2()
}

/// Order statistics `U_(1) < ... < U_(n)` of a sample in `(0, 1)`.
///
/// Construction rejects ties, so every accepted sample is tie-free.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    sorted: Vec<f64>,
}

impl EmpiricalSample {
    /// Sorts `values` and validates them.
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::SampleOutOfRange { index, value });
        }
        values.sort_unstable_by(f64::total_cmp);
        Self::from_sorted(values)
    }

    pub fn from_sorted(sorted: Vec<f64>) -> Result<Self> {
        if sorted.is_empty() {
            return Err(Error::SampleTooSmall { n: 0, min: 1 });
        }
        for (index, &value) in sorted.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::SampleOutOfRange { index, value });
            }
        }
        for (i, w) in sorted.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(Error::Ties { value: w[0] });
            }
            if w[0] > w[1] {
                return Err(Error::Unsorted { index: i + 1 });
            }
        }
        Ok(EmpiricalSample { sorted })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    /// Always `false`; tied samples are rejected at construction.
    pub fn has_ties(&self) -> bool {
        false
    }
}

pub fn sample_uniform(n: usize, seed: SeedSpec) -> Result<EmpiricalSample> {
    if n < 2 {
        return Err(Error::SampleTooSmall { n, min: 2 });
    }
    let mut rng = seed.rng();
    let mut values: Vec<f64> = (0..n).map(|_| open_unit(&mut rng)).collect();
    values.sort_unstable_by(f64::total_cmp);
    EmpiricalSample::from_sorted(values)
}

pub fn sample_gaussian(n: usize, seed: SeedSpec) -> Vec<f64> {
    let mut rng = seed.rng();
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed(stream: u64) -> SeedSpec {
        SeedSpec::new(42, stream, Substream::Uniform)
    }

    /// Two-sample KS statistic on sorted inputs.
    fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
        let (mut i, mut j, mut d) = (0, 0, 0.0f64);
        while i < a.len() && j < b.len() {
            let x = a[i].min(b[j]);
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        d
    }

    /// 1% critical value of the two-sample KS statistic (asymptotic, c(0.01) = 1.628).
    fn ks_critical(n: usize, m: usize) -> f64 {
        1.628 * (((n + m) as f64) / ((n * m) as f64)).sqrt()
    }

    #[test]
    fn uniform_is_deterministic() {
        let a = sample_uniform(1000, seed(3)).unwrap();
        let b = sample_uniform(1000, seed(3)).unwrap();
        assert_eq!(a, b);
        assert!(!a.has_ties());
    }

    #[test]
    fn uniform_mean() {
        let s = sample_uniform(100_000, seed(0)).unwrap();
        let mean = s.sorted_values().iter().sum::<f64>() / 1e5;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn neighbouring_streams_pass_two_sample_ks() {
        for i in [0u64, 1, 7, 1000] {
            let a = sample_uniform(10_000, seed(i)).unwrap();
            let b = sample_uniform(10_000, seed(i + 1)).unwrap();
            let d = ks_two_sample(a.sorted_values(), b.sorted_values());
            assert!(d < ks_critical(10_000, 10_000), "stream {i}: D = {d}");
        }
    }

    #[test]
    fn substreams_differ() {
        let u = sample_gaussian(8, SeedSpec::new(1, 0, Substream::Uniform));
        let g = sample_gaussian(8, SeedSpec::new(1, 0, Substream::Gaussian));
        assert_ne!(u, g);
        let other_master = sample_gaussian(8, SeedSpec::new(2, 0, Substream::Gaussian));
        assert_ne!(g, other_master);
    }

    #[test]
    fn open_unit_never_hits_dyadic_points() {
        let mut rng = seed(9).rng();
        for _ in 0..100_000 {
            let u = open_unit(&mut rng);
            assert!(u > 0.0 && u < 1.0);
            let scaled = u * 2f64.powi(52);
            assert_ne!(scaled.fract(), 0.0);
        }
    }

    #[test]
    fn small_and_tied_samples_rejected() {
        assert!(matches!(sample_uniform(1, seed(0)), Err(Error::SampleTooSmall { n: 1, .. })));
        assert!(matches!(EmpiricalSample::from_values(vec![0.3, 0.1, 0.3]), Err(Error::Ties { .. })));
        assert!(EmpiricalSample::from_values(vec![0.0, 0.5]).is_err());
        assert!(EmpiricalSample::from_values(vec![0.5, 1.0]).is_err());
        assert!(EmpiricalSample::from_sorted(vec![0.5, 0.2]).is_err());
    }

    #[test]
    fn gaussian_moments() {
        let g = sample_gaussian(100_000, SeedSpec::new(42, 0, Substream::Gaussian));
        assert_eq!(g, sample_gaussian(100_000, SeedSpec::new(42, 0, Substream::Gaussian)));
        let n = g.len() as f64;
        let mean = g.iter().sum::<f64>() / n;
        let var = g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((0.97..=1.03).contains(&var), "variance {var}");
        let tail = g.iter().filter(|x| x.abs() > 1.96).count() as f64 / n;
        assert!((tail - 0.05).abs() <= 0.002, "tail fraction {tail}");
    }
}
