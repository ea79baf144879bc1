//! Level statistics and the Besov sequence-space norm
//!
//! ```text
//! ||mu||_{p,inf}^alpha = max( |mu0|, |mu1|, sup_j 2^{-j e} (sum_k |mu_jk|^p)^{1/p} ),
//! e = alpha + 1/p - 1/2
//! ```
//!
//! With this exponent the level statistic at `alpha = 1/2` is the normalized
//! power mean `(2^{-j} sum_k |mu_jk|^p)^{1/p}`. All weights go through
//! [`BesovParams::level_weight`].

use serde::{Deserialize, Serialize};

use crate::dyadic::{CoefficientTriangle, DyadicPathValues};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    p: f64,
    alpha: f64,
}

impl BesovParams {
    pub fn new(p: f64, alpha: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::setting("p", format!("must satisfy p >= 1 (got {p})")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::setting("alpha", format!("must lie in (0, 1] (got {alpha})")));
        }
        Ok(BesovParams { p, alpha })
    }

    /// `p = 2`, `alpha = 1/2`.
    pub fn quadratic() -> Self {
        BesovParams { p: 2.0, alpha: 0.5 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `e(alpha, p) = alpha + 1/p - 1/2`.
    pub fn weight_exponent(&self) -> f64 {
        (self.alpha - 0.5) + 1.0 / self.p
    }

    /// `2^{-j e}`.
    pub fn level_weight(&self, j: u32) -> f64 {
        (-(j as f64) * self.weight_exponent()).exp2()
    }

    /// `2^{-j e p}`, the weight applied inside the p-th root.
    ///
    /// `e p = (alpha - 1/2) p + 1` is written so that it is exactly 1 at
    /// `alpha = 1/2`.
    fn inner_weight(&self, j: u32) -> f64 {
        let ep = (self.alpha - 0.5) * self.p + 1.0;
        let e = -(j as f64) * ep;
        if e.fract() == 0.0 && e.abs() < 1000.0 {
            2f64.powi(e as i32)
        } else {
            e.exp2()
        }
    }
}

pub(crate) fn abs_pow(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else if p == 1.0 {
        x.abs()
    } else {
        x.abs().powf(p)
    }
}

pub(crate) fn root(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x.sqrt()
    } else if p == 1.0 {
        x
    } else {
        x.powf(1.0 / p)
    }
}

fn level_of(coeffs: &CoefficientTriangle, j: u32) -> Result<&[f64]> {
    coeffs.level(j).ok_or(Error::LevelOutOfRange { level: j, min: 0, max: coeffs.max_level() })
}

/// `2^{-j e} (sum_k |mu_jk|^p)^{1/p}`.
pub fn level_statistic(coeffs: &CoefficientTriangle, j: u32, params: BesovParams) -> Result<f64> {
    let level = level_of(coeffs, j)?;
    let p = params.p();
    let sum: f64 = level.iter().map(|&x| abs_pow(x, p)).sum();
    Ok(root(params.inner_weight(j) * sum, p))
}

pub fn level_statistics(coeffs: &CoefficientTriangle, params: BesovParams) -> Vec<f64> {
    (0..=coeffs.max_level()).map(|j| level_statistic(coeffs, j, params).expect("level in range")).collect()
}

/// Max of the boundary terms and every level statistic up to the triangle's max level.
pub fn besov_norm(coeffs: &CoefficientTriangle, params: BesovParams) -> f64 {
    level_statistics(coeffs, params).into_iter().fold(coeffs.mu0().abs().max(coeffs.mu1().abs()), f64::max)
}

/// Minimum `J` for which a tail summary is meaningful.
pub const MIN_PROFILE_LEVEL: u32 = 6;

/// Per-level statistics with running supremum and suffix minima.
///
/// `tail_min[j] = min_{i >= j} L_i`; the finite-`J` liminf proxy is the
/// minimum over the last `ceil(J/3)` levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelProfile {
    pub statistics: Vec<f64>,
    pub running_sup: Vec<f64>,
    pub tail_min: Vec<f64>,
    pub sup: f64,
    pub tail_start: usize,
    pub tail_minimum: f64,
}

impl LevelProfile {
    pub fn from_statistics(statistics: Vec<f64>) -> Self {
        let mut running_sup = Vec::with_capacity(statistics.len());
        let mut acc = f64::NEG_INFINITY;
        for &s in &statistics {
            acc = acc.max(s);
            running_sup.push(acc);
        }
        let mut tail_min = vec![0.0; statistics.len()];
        let mut acc = f64::INFINITY;
        for (i, &s) in statistics.iter().enumerate().rev() {
            acc = acc.min(s);
            tail_min[i] = acc;
        }
        let len = statistics.len();
        let top = len.saturating_sub(1);
        let tail_start = if len == 0 { 0 } else { len - top.div_ceil(3).max(1) };
        LevelProfile {
            sup: running_sup.last().copied().unwrap_or(0.0),
            tail_minimum: tail_min.get(tail_start).copied().unwrap_or(0.0),
            statistics,
            running_sup,
            tail_min,
            tail_start,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.statistics.is_empty()
    }

    pub fn len(&self) -> usize {
        self.statistics.len()
    }
}

pub fn little_o_profile(coeffs: &CoefficientTriangle, params: BesovParams) -> Result<LevelProfile> {
    if coeffs.max_level() < MIN_PROFILE_LEVEL {
        return Err(Error::LevelOutOfRange {
            level: coeffs.max_level(),
            min: MIN_PROFILE_LEVEL,
            max: crate::dyadic::MAX_LEVEL,
        });
    }
    Ok(LevelProfile::from_statistics(level_statistics(coeffs, params)))
}

fn interpolate(values: &[f64], x: f64) -> f64 {
    let cells = values.len() - 1;
    let pos = x * cells as f64;
    let i = (pos.floor() as usize).min(cells - 1);
    let frac = pos - i as f64;
    values[i] + frac * (values[i + 1] - values[i])
}

/// Estimate of `w_p(f, t) = sup_{|h| <= t} ( int_{h}^{1} |f(x - h) - f(x)|^p dx )^{1/p}`.
///
/// Shifts run over the fixed lattice `h = i * 2^{-J} / refinement`, so the
/// estimate is nondecreasing in `t`. Each integral uses the composite midpoint
/// rule with `2^J * refinement` nodes on `[h, 1]` and linear interpolation
/// between grid values. Negative shifts give the same integrals.
pub fn modulus_of_continuity(path: &DyadicPathValues, t: f64, p: f64, grid_refinement: usize) -> Result<f64> {
    if path.level() < 4 {
        return Err(Error::LevelOutOfRange { level: path.level(), min: 4, max: crate::dyadic::MAX_LEVEL });
    }
    if t.is_nan() || t <= 0.0 {
        return Err(Error::setting("t", format!("must be positive (got {t})")));
    }
    if p.is_nan() || p < 1.0 {
        return Err(Error::setting("p", format!("must satisfy p >= 1 (got {p})")));
    }
    if grid_refinement == 0 {
        return Err(Error::setting("grid_refinement", "must be at least 1"));
    }
    let values = path.values();
    let fine = (1usize << path.level()) * grid_refinement;
    let step = 1.0 / fine as f64;
    let shifts = ((t.min(1.0) * fine as f64).floor() as usize).min(fine - 1);
    let mut best = 0.0f64;
    for i in 1..=shifts {
        let h = i as f64 * step;
        let width = (1.0 - h) / fine as f64;
        let integral: f64 = (0..fine)
            .map(|m| {
                let x = h + (m as f64 + 0.5) * width;
                abs_pow(interpolate(values, x - h) - interpolate(values, x), p)
            })
            .sum::<f64>()
            * width;
        best = best.max(root(integral, p));
    }
    Ok(best)
}

/// Checks `L_j(p1) <= L_j(p2)` at every level.
///
/// At fixed `alpha` the level statistic is `2^{-j(alpha - 1/2)}` times the
/// normalized power mean of order `p`, so this is the power-mean inequality.
/// Comparisons allow a relative slack of `1e-12` for rounding in the equal case.
pub fn p_monotonicity_check(coeffs: &CoefficientTriangle, p1: f64, p2: f64, alpha: f64) -> Result<bool> {
    if p1 > p2 {
        return Err(Error::setting("p1", format!("must not exceed p2 (got p1 = {p1}, p2 = {p2})")));
    }
    let lo = BesovParams::new(p1, alpha)?;
    let hi = BesovParams::new(p2, alpha)?;
    Ok((0..=coeffs.max_level()).all(|j| {
        let a = level_statistic(coeffs, j, lo).expect("level in range");
        let b = level_statistic(coeffs, j, hi).expect("level in range");
        a <= b * (1.0 + 1e-12)
    }))
}
