//! Exact moments of the cell statistics by enumeration.
//!
//! Under the uniform model each observation falls into one of the `2^{j+1}`
//! half-cells of level `j` with equal probability. Summing over every
//! occupation vector, weighted by its multinomial count, gives the exact
//! distribution of `H_jk = (sum_i Z_jk(i))^2` and of `sum_k H_jk`. All
//! arithmetic is over `i128` rationals.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

pub const MAX_ORACLE_N: usize = 6;
pub const MAX_ORACLE_HALF_CELLS: usize = 16;
pub const MAX_ORACLE_OUTCOMES: u64 = 20_000_000;

/// Exact moments for a given `(n, j)`. Cell-level quantities refer to cell
/// `k = 1` and the pair `(k, k') = (1, 2)`; by symmetry every cell agrees.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    pub n: usize,
    pub j: u32,
    /// `E[H_jk]`.
    pub mean_h: Rational,
    /// `E[H_jk^2]`.
    pub mean_h_sq: Rational,
    /// `Var(G_jk)` with `G_jk = 2^j H_jk / n`.
    pub var_g: Rational,
    /// `E[H_jk H_jk']`, `k != k'`; absent at `j = 0`.
    pub mean_hh_pair: Option<Rational>,
    /// `Var(sum_k G_jk)`.
    pub var_sum_g: Rational,
    /// `P(|2^{-j} sum_k G_jk - 1| >= 1/2)`.
    pub concentration_probability: Rational,
}

/// Whether `(n, j)` is small enough to enumerate.
pub fn enumerable(n: usize, j: u32) -> bool {
    check_instance(n, j).is_ok()
}

fn check_instance(n: usize, j: u32) -> Result<()> {
    if n == 0 || n > MAX_ORACLE_N {
        return Err(Error::InstanceTooLarge(format!("n = {n} outside 1..={MAX_ORACLE_N}")));
    }
    if j >= 4 {
        return Err(Error::InstanceTooLarge(format!("level {j} has more than {MAX_ORACLE_HALF_CELLS} half-cells")));
    }
    let outcomes = (2u64 << j).pow(n as u32);
    if outcomes > MAX_ORACLE_OUTCOMES {
        return Err(Error::InstanceTooLarge(format!("{outcomes} outcomes exceed {MAX_ORACLE_OUTCOMES}")));
    }
    Ok(())
}

#[derive(Default)]
struct Sums {
    h: i128,
    h_sq: i128,
    hh_pair: i128,
    t: i128,
    t_sq: i128,
    tail: i128,
}

struct Enumerator {
    n: usize,
    half_cells: usize,
    factorial: Vec<i128>,
    counts: Vec<usize>,
    sums: Sums,
}

impl Enumerator {
    fn walk(&mut self, cell: usize, remaining: usize) {
        if cell + 1 == self.half_cells {
            self.counts[cell] = remaining;
            self.visit();
            return;
        }
        for c in 0..=remaining {
            self.counts[cell] = c;
            self.walk(cell + 1, remaining - c);
        }
    }

    fn visit(&mut self) {
        let weight = self.counts.iter().fold(self.factorial[self.n], |w, &c| w / self.factorial[c]);
        let h: Vec<i128> = self
            .counts
            .chunks_exact(2)
            .map(|p| {
                let s = p[0] as i128 - p[1] as i128;
                s * s
            })
            .collect();
        let t: i128 = h.iter().sum();
        let n = self.n as i128;
        let s = &mut self.sums;
        s.h += weight * h[0];
        s.h_sq += weight * h[0] * h[0];
        if h.len() > 1 {
            s.hh_pair += weight * h[0] * h[1];
        }
        s.t += weight * t;
        s.t_sq += weight * t * t;
        // |t/n - 1| >= 1/2  <=>  2|t - n| >= n
        if 2 * (t - n).abs() >= n {
            s.tail += weight;
        }
    }
}

pub fn enumeration_oracle(n: usize, j: u32) -> Result<ExactMoments> {
    check_instance(n, j)?;
    let half_cells = 2usize << j;
    let mut factorial = vec![1i128; n + 1];
    for i in 1..=n {
        factorial[i] = factorial[i - 1] * i as i128;
    }
    let mut e = Enumerator { n, half_cells, factorial, counts: vec![0; half_cells], sums: Sums::default() };
    e.walk(0, n);
    let total = (half_cells as i128).pow(n as u32);
    let ex = |x: i128| Rational::new(x, total);
    let s = &e.sums;
    let mean_h = ex(s.h);
    let mean_h_sq = ex(s.h_sq);
    let g_scale = Rational::new(1 << j, n as i128);
    let g_scale_sq = g_scale * g_scale;
    let mean_t = ex(s.t);
    Ok(ExactMoments {
        n,
        j,
        mean_h,
        mean_h_sq,
        var_g: g_scale_sq * (mean_h_sq - mean_h * mean_h),
        mean_hh_pair: (j >= 1).then(|| ex(s.hh_pair)),
        var_sum_g: g_scale_sq * (ex(s.t_sq) - mean_t * mean_t),
        concentration_probability: ex(s.tail),
    })
}

/// Closed-form moment expressions, reported next to the exact values.
pub mod closed_form {
    use super::Rational;

    fn pow2(j: u32) -> i128 {
        1i128 << j
    }

    /// `E(H_jk) = n / 2^j`.
    pub fn mean_h(n: usize, j: u32) -> Rational {
        Rational::new(n as i128, pow2(j))
    }

    /// `E(H_jk H_jk') = n (n - 1) / 2^{2j}`.
    pub fn mean_hh_pair(n: usize, j: u32) -> Rational {
        Rational::new(n as i128 * (n as i128 - 1), pow2(2 * j))
    }

    /// `eps_nj = 2^{-j} (3 - 3/n)`.
    pub fn epsilon(n: usize, j: u32) -> Rational {
        let n = n as i128;
        Rational::new(3 * (n - 1), n * pow2(j))
    }

    /// Chebyshev bound `4 eps_nj`.
    pub fn chebyshev_bound(n: usize, j: u32) -> Rational {
        epsilon(n, j) * 4
    }

    /// `Var(sum_k G_jk) = 2^{2j} eps_nj`.
    pub fn var_sum_g(n: usize, j: u32) -> Rational {
        epsilon(n, j) * pow2(2 * j)
    }

    /// Per-cell variance in the form used inside the sum display,
    /// `(2^j / n) (1 + (3n - 4) / 2^j)`.
    pub fn var_g(n: usize, j: u32) -> Rational {
        let n = n as i128;
        Rational::new(pow2(j), n) * (Rational::from_integer(1) + Rational::new(3 * n - 4, pow2(j)))
    }

    /// Solves `Var(G_jk) = (2^j / n) [1 + (n (c - 1) - c) / 2^j]` for `c`.
    pub fn implied_c(n: usize, j: u32, var_g: Rational) -> Option<Rational> {
        if n < 2 {
            return None;
        }
        let n = n as i128;
        let x = (var_g * Rational::new(n, pow2(j)) - 1) * pow2(j);
        Some((x + n) / (n - 1))
    }
}

/// Rational rendered both as `p/q` text and as the nearest `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactValue {
    pub exact: String,
    pub value: f64,
}

impl From<Rational> for ExactValue {
    fn from(r: Rational) -> Self {
        ExactValue {
            exact: if *r.denom() == 1 { r.numer().to_string() } else { format!("{}/{}", r.numer(), r.denom()) },
            value: to_f64(r),
        }
    }
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i128, b: i128) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn n3_j1() {
        let m = enumeration_oracle(3, 1).unwrap();
        assert_eq!(m.mean_h, r(3, 2));
        assert_eq!(m.mean_hh_pair, Some(r(3, 2)));
        assert_eq!(m.var_sum_g, r(8, 3));
    }

    #[test]
    fn n2_j1_variance_and_tail() {
        let m = enumeration_oracle(2, 1).unwrap();
        assert_eq!(m.var_sum_g, r(2, 1));
        assert_eq!(closed_form::var_sum_g(2, 1), r(3, 1));
        assert_eq!(m.concentration_probability, r(1, 2));
        assert_eq!(closed_form::chebyshev_bound(2, 1), r(3, 1));
    }

    #[test]
    fn level_zero_has_no_pair() {
        let m = enumeration_oracle(4, 0).unwrap();
        assert_eq!(m.mean_hh_pair, None);
        assert_eq!(m.mean_h, r(4, 1));
    }

    #[test]
    fn implied_constant_is_three() {
        for n in 2..=5 {
            for j in 0..=2 {
                let m = enumeration_oracle(n, j).unwrap();
                assert_eq!(closed_form::implied_c(n, j, m.var_g), Some(r(3, 1)), "n={n} j={j}");
            }
        }
    }

    #[test]
    fn size_limits() {
        assert!(enumeration_oracle(7, 0).is_err());
        assert!(enumeration_oracle(0, 0).is_err());
        assert!(enumeration_oracle(2, 4).is_err());
        assert!(enumeration_oracle(6, 3).is_ok());
        assert!(enumerable(6, 3));
        assert!(!enumerable(3, 4));
    }

    #[test]
    fn exact_value_text() {
        assert_eq!(ExactValue::from(r(8, 3)).exact, "8/3");
        assert_eq!(ExactValue::from(r(4, 2)).exact, "2");
    }
}
