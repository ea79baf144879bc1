//! Mergeable power sums for means, variances and their standard errors.

use serde::{Deserialize, Serialize};

/// Raw power sums `sum x^r`, `r = 1..=4`, with an observation count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerSums {
    pub count: u64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub s4: f64,
}

impl PowerSums {
    #[inline]
    pub fn push(&mut self, x: f64) {
        let x2 = x * x;
        self.count += 1;
        self.s1 += x;
        self.s2 += x2;
        self.s3 += x2 * x;
        self.s4 += x2 * x2;
    }

    pub fn merge(&mut self, other: &PowerSums) {
        self.count += other.count;
        self.s1 += other.s1;
        self.s2 += other.s2;
        self.s3 += other.s3;
        self.s4 += other.s4;
    }

    pub fn mean(&self) -> f64 {
        self.s1 / self.count as f64
    }

    /// Central moment of order 2 or 4 (population normalization).
    fn central(&self, order: u32) -> f64 {
        let n = self.count as f64;
        let m = self.mean();
        let (e1, e2, e3, e4) = (m, self.s2 / n, self.s3 / n, self.s4 / n);
        match order {
            2 => (e2 - e1 * e1).max(0.0),
            4 => (e4 - 4.0 * m * e3 + 6.0 * m * m * e2 - 3.0 * m.powi(4)).max(0.0),
            _ => unreachable!(),
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.count as f64;
        self.central(2) * n / (n - 1.0)
    }

    pub fn se_mean(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    /// Large-sample standard error of [`PowerSums::variance`]:
    /// `sqrt((mu4 - s^4 (R - 3)/(R - 1)) / R)`.
    pub fn se_variance(&self) -> f64 {
        let n = self.count as f64;
        let s2 = self.variance();
        ((self.central(4) - s2 * s2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }
}

/// Binomial standard error of a frequency estimated from `count` trials.
pub fn binomial_se(frequency: f64, count: usize) -> f64 {
    (frequency * (1.0 - frequency) / count as f64).sqrt()
}
