//! Step and continuous empirical distribution functions of a uniform sample,
//! the associated empirical processes and their dyadic coefficients.

use serde::{Deserialize, Serialize};

use crate::dyadic::{self, extract_coefficients, CoefficientTriangle, DyadicPathValues};
use crate::error::{Error, Result};
use crate::sampling::EmpiricalSample;

/// Which version of the empirical CDF a computation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CdfVersion {
    /// `F~_n(s) = #{U_i <= s} / n`.
    Step,
    /// The piecewise-linear interpolation `F_n` through the order-statistic midpoints.
    Continuous,
}

impl std::fmt::Display for CdfVersion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CdfVersion::Step => "step",
            CdfVersion::Continuous => "continuous",
        })
    }
}

impl std::str::FromStr for CdfVersion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "step" => Ok(CdfVersion::Step),
            "continuous" => Ok(CdfVersion::Continuous),
            other => Err(format!("unknown source `{other}` (expected step|continuous)")),
        }
    }
}

fn check_point(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::PointOutOfRange(s))
    }
}

/// Step empirical CDF, right-continuous: counts observations `<= s`.
pub fn ecdf_eval(sample: &EmpiricalSample, s: f64) -> Result<f64> {
    check_point(s)?;
    let count = sample.sorted_values().partition_point(|&u| u <= s);
    Ok(count as f64 / sample.n() as f64)
}

/// Continuous version of the empirical CDF.
///
/// Interpolation nodes are `(0, 0)`, `(m_k, k/n)` for `k = 1..n-1` with
/// `m_k = (U_(k) + U_(k+1)) / 2`, and `(1, 1)`. On each interior segment
/// `[m_k, m_{k+1}]` this coincides with
/// `F~_n(U_(k)) + 2 (s - m_k) (F~_n(U_(k+1)) - F~_n(U_(k))) / (U_(k+2) - U_(k))`;
/// the two boundary segments are linear pieces to `(0, 0)` and `(1, 1)`.
#[derive(Debug, Clone)]
pub struct ContinuousEcdf {
    sample: EmpiricalSample,
    nodes: Vec<f64>,
}

impl ContinuousEcdf {
    pub fn new(sample: EmpiricalSample) -> Result<Self> {
        let n = sample.n();
        if n < 2 {
            return Err(Error::SampleTooSmall { n, min: 2 });
        }
        let u = sample.sorted_values();
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(0.0);
        nodes.extend(u.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        nodes.push(1.0);
        for w in nodes.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::DegenerateSpacing { value: w[0] });
            }
        }
        Ok(ContinuousEcdf { sample, nodes })
    }

    pub fn sample(&self) -> &EmpiricalSample {
        &self.sample
    }

    /// Node abscissae `0 = x_0 < m_1 < ... < m_{n-1} < x_n = 1`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_value(&self, i: usize) -> f64 {
        i as f64 / self.sample.n() as f64
    }

    /// Evaluates the linear piece of segment `i` (between nodes `i` and `i + 1`) at `s`.
    pub fn segment_eval(&self, i: usize, s: f64) -> f64 {
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let n = self.sample.n() as f64;
        self.node_value(i) + (s - x0) / (x1 - x0) / n
    }

    fn segment_of(&self, s: f64) -> usize {
        let last = self.nodes.len() - 2;
        self.nodes.partition_point(|&x| x <= s).saturating_sub(1).min(last)
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        check_point(s)?;
        Ok(self.segment_eval(self.segment_of(s), s))
    }

    /// Exact `sup_s |F_n(s) - F~_n(s)|`.
    ///
    /// Segment `i` contains exactly one jump of the step CDF, at `U_(i+1)`.
    /// With `t` the relative position of that jump inside the segment, the
    /// difference is `t / n` just left of the jump and `(1 - t) / n` at it,
    /// and it vanishes at both nodes.
    pub fn sup_distance(&self) -> f64 {
        let n = self.sample.n() as f64;
        self.sample
            .sorted_values()
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
                let t = ((u - x0) / (x1 - x0)).clamp(0.0, 1.0);
                t.max(1.0 - t) / n
            })
            .fold(0.0, f64::max)
    }

    /// `alpha_n(s) = sqrt(n) (F_n(s) - s)`.
    pub fn process_eval(&self, s: f64) -> Result<f64> {
        let n = self.sample.n() as f64;
        Ok(n.sqrt() * (self.eval(s)? - s))
    }
}

pub fn continuous_ecdf_eval(ecdf: &ContinuousEcdf, s: f64) -> Result<f64> {
    ecdf.eval(s)
}

pub fn sup_distance(ecdf: &ContinuousEcdf) -> f64 {
    ecdf.sup_distance()
}

/// `sqrt(n) (CDF(s) - s)` for the requested CDF version.
pub fn empirical_process_eval(sample: &EmpiricalSample, s: f64, version: CdfVersion) -> Result<f64> {
    let n = sample.n() as f64;
    match version {
        CdfVersion::Step => Ok(n.sqrt() * (ecdf_eval(sample, s)? - s)),
        CdfVersion::Continuous => ContinuousEcdf::new(sample.clone())?.process_eval(s),
    }
}

/// `Z_jk(u)`: `+1` on `[(k-1)/2^j, (k-1/2)/2^j)`, `-1` on `[(k-1/2)/2^j, k/2^j)`, else 0.
pub fn z_indicator(u: f64, j: u32, k: u64) -> Result<i8> {
    if j > dyadic::MAX_LEVEL {
        return Err(Error::LevelOutOfRange { level: j, min: 0, max: dyadic::MAX_LEVEL });
    }
    let cells = 1u64 << j;
    if k == 0 || k > cells {
        return Err(Error::CellOutOfRange { level: j, k, max: cells });
    }
    let width = dyadic::pow2(-(j as i32));
    let left = (k - 1) as f64 * width;
    let mid = (k as f64 - 0.5) * width;
    let right = k as f64 * width;
    Ok(if left <= u && u < mid {
        1
    } else if mid <= u && u < right {
        -1
    } else {
        0
    })
}

/// Half-cell occupation counts of a sample at every level up to `max_level`.
///
/// `counts[j]` has `2^{j+1}` entries: entry `2(k-1)` counts the left half of
/// cell `(j, k)` and entry `2(k-1) + 1` its right half, using the same
/// half-open intervals as [`z_indicator`].
#[derive(Debug, Clone)]
pub struct HalfCellCounts {
    n: usize,
    counts: Vec<Vec<u32>>,
}

impl HalfCellCounts {
    pub fn new(sample: &EmpiricalSample, max_level: u32) -> Result<Self> {
        if max_level >= dyadic::MAX_LEVEL {
            return Err(Error::LevelOutOfRange { level: max_level, min: 0, max: dyadic::MAX_LEVEL - 1 });
        }
        let finest_len = 1usize << (max_level + 1);
        let scale = finest_len as f64;
        let mut finest = vec![0u32; finest_len];
        for &u in sample.sorted_values() {
            let idx = ((u * scale) as usize).min(finest_len - 1);
            finest[idx] += 1;
        }
        let mut counts = vec![finest];
        while counts.len() <= max_level as usize {
            let coarser = counts.last().unwrap().chunks_exact(2).map(|p| p[0] + p[1]).collect();
            counts.push(coarser);
        }
        counts.reverse();
        Ok(HalfCellCounts { n: sample.n(), counts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_level(&self) -> u32 {
        self.counts.len() as u32 - 1
    }

    pub fn level(&self, j: u32) -> &[u32] {
        &self.counts[j as usize]
    }

    /// `sum_i Z_jk(U_i)` for every cell of level `j`.
    pub fn contrasts(&self, j: u32) -> impl Iterator<Item = i64> + '_ {
        self.counts[j as usize].chunks_exact(2).map(|p| p[0] as i64 - p[1] as i64)
    }

    /// `sum_k H_jk = sum_k (sum_i Z_jk(i))^2` as an exact integer.
    pub fn sum_h(&self, j: u32) -> u64 {
        self.contrasts(j).map(|s| (s * s) as u64).sum()
    }

    /// Closed-form step coefficients `2^{j/2} / sqrt(n) * sum_i Z_jk(i)`.
    pub fn coefficients(&self) -> CoefficientTriangle {
        let root_n = (self.n as f64).sqrt();
        let levels = (0..=self.max_level())
            .map(|j| {
                let scale = dyadic::level_scale(j);
                self.contrasts(j).map(|s| s as f64 * scale / root_n).collect()
            })
            .collect();
        CoefficientTriangle::new(0.0, 0.0, levels).expect("finite coefficients")
    }
}

/// `alpha_n` sampled on the dyadic grid of the given level.
pub fn continuous_process_path(ecdf: &ContinuousEcdf, level: u32) -> Result<DyadicPathValues> {
    let mut values = Vec::with_capacity((1usize << level) + 1);
    let grid = dyadic::dyadic_grid(level)?;
    for k in 0..grid.len() {
        values.push(ecdf.process_eval(grid.point(k))?);
    }
    DyadicPathValues::new(level, values)
}

/// Coefficient triangle with levels `0..=max_level` of the empirical process.
///
/// `Step` uses cell counting; `Continuous` samples `alpha_n` on the level
/// `max_level + 1` grid and takes second differences.
pub fn empirical_coefficients(
    sample: &EmpiricalSample,
    max_level: u32,
    source: CdfVersion,
) -> Result<CoefficientTriangle> {
    if sample.n() < 2 {
        return Err(Error::SampleTooSmall { n: sample.n(), min: 2 });
    }
    if !(1..dyadic::MAX_LEVEL).contains(&max_level) {
        return Err(Error::LevelOutOfRange { level: max_level, min: 1, max: dyadic::MAX_LEVEL - 1 });
    }
    match source {
        CdfVersion::Step => Ok(HalfCellCounts::new(sample, max_level)?.coefficients()),
        CdfVersion::Continuous => {
            let ecdf = ContinuousEcdf::new(sample.clone())?;
            let path = continuous_process_path(&ecdf, max_level + 1)?;
            let t = extract_coefficients(&path)?;
            // alpha_n vanishes at both endpoints.
            CoefficientTriangle::new(0.0, 0.0, t.levels().to_vec())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(v: &[f64]) -> EmpiricalSample {
        EmpiricalSample::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn step_cdf_values() {
        let s = sample(&[0.1, 0.2, 0.6, 0.8]);
        assert_eq!(ecdf_eval(&s, 0.05).unwrap(), 0.0);
        assert_eq!(ecdf_eval(&s, 0.9).unwrap(), 1.0);
        assert_eq!(ecdf_eval(&s, 0.5).unwrap(), 0.5);
        assert_eq!(ecdf_eval(&s, 0.2).unwrap(), 0.5, "right-continuous at U_(2)");
        assert!(ecdf_eval(&s, 1.5).is_err());
        assert!(ecdf_eval(&s, -0.1).is_err());
    }

    #[test]
    fn continuous_cdf_hand_values() {
        let e = ContinuousEcdf::new(sample(&[0.2, 0.4, 0.8])).unwrap();
        assert_eq!(e.nodes().len(), 4);
        assert!((e.nodes()[1] - 0.3).abs() < 1e-15);
        assert!((e.nodes()[2] - 0.6).abs() < 1e-15);
        assert!((e.eval(0.45).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(e.eval(0.0).unwrap(), 0.0);
        assert_eq!(e.eval(1.0).unwrap(), 1.0);
        assert_eq!(e.eval(e.nodes()[1]).unwrap(), 1.0 / 3.0);
        assert_eq!(e.eval(e.nodes()[2]).unwrap(), 2.0 / 3.0);
        assert!(e.eval(1.01).is_err());
    }

    #[test]
    fn continuous_requires_two_points() {
        assert!(matches!(ContinuousEcdf::new(sample(&[0.5])), Err(Error::SampleTooSmall { .. })));
    }

    #[test]
    fn sup_distance_two_points() {
        let e = ContinuousEcdf::new(sample(&[0.25, 0.75])).unwrap();
        for s in [0.0, 0.1, 0.5, 0.9, 1.0] {
            assert!((e.eval(s).unwrap() - s).abs() < 1e-15);
        }
        assert_eq!(e.sup_distance(), 0.25);
    }

    #[test]
    fn process_vanishes_at_endpoints() {
        let s = sample(&[0.1, 0.35, 0.6]);
        for v in [CdfVersion::Step, CdfVersion::Continuous] {
            assert_eq!(empirical_process_eval(&s, 0.0, v).unwrap(), 0.0);
            assert_eq!(empirical_process_eval(&s, 1.0, v).unwrap(), 0.0);
        }
        let s = sample(&[0.1, 0.2, 0.6, 0.8]);
        assert_eq!(empirical_process_eval(&s, 0.5, CdfVersion::Step).unwrap(), 0.0);
    }

    #[test]
    fn z_indicator_cells() {
        assert_eq!(z_indicator(0.1, 1, 1).unwrap(), 1);
        assert_eq!(z_indicator(0.3, 1, 1).unwrap(), -1);
        assert_eq!(z_indicator(0.7, 1, 1).unwrap(), 0);
        assert_eq!(z_indicator(0.25, 1, 1).unwrap(), -1, "midpoint is in the right half");
        assert_eq!(z_indicator(0.5, 1, 1).unwrap(), 0, "right end is open");
        assert_eq!(z_indicator(0.5, 1, 2).unwrap(), 1);
        assert!(z_indicator(0.5, 1, 0).is_err());
        assert!(z_indicator(0.5, 1, 3).is_err());
    }

    #[test]
    fn all_in_right_half_gives_minus_root_n() {
        let s = sample(&[0.5, 0.6, 0.7, 0.8]);
        let t = empirical_coefficients(&s, 3, CdfVersion::Step).unwrap();
        assert_eq!(t.level(0).unwrap()[0], -2.0);
    }

    #[test]
    fn two_point_cancellation() {
        let s = sample(&[0.1, 0.3]);
        let t = empirical_coefficients(&s, 2, CdfVersion::Step).unwrap();
        assert_eq!(t.get(1, 1), Some(0.0));
        assert_eq!((t.mu0(), t.mu1()), (0.0, 0.0));
    }

    #[test]
    fn counts_aggregate_consistently() {
        let s = sample(&[0.01, 0.26, 0.27, 0.51, 0.99]);
        let c = HalfCellCounts::new(&s, 3).unwrap();
        assert_eq!(c.level(0), &[3, 2]);
        assert_eq!(c.level(1), &[1, 2, 1, 1]);
        for j in 0..=3 {
            assert_eq!(c.level(j).iter().sum::<u32>(), 5);
        }
        let z: Vec<i64> = c.contrasts(1).collect();
        assert_eq!(z, vec![-1, 0]);
    }

    #[test]
    fn level_bounds() {
        let s = sample(&[0.2, 0.7]);
        assert!(empirical_coefficients(&s, 0, CdfVersion::Step).is_err());
        assert!(empirical_coefficients(&s, 30, CdfVersion::Step).is_err());
        let t = empirical_coefficients(&s, 4, CdfVersion::Continuous).unwrap();
        assert_eq!(t.max_level(), 4);
    }
}
