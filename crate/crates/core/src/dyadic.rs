//! Dyadic grids, coefficient triangles and the second-difference map.
//!
//! A path sampled on the level-`J` dyadic grid `k / 2^J` is mapped to the
//! triangle of Faber–Schauder coefficients
//!
//! ```text
//! f_jk = 2^{j/2} [ 2 f((k - 1/2)/2^j) - f((k - 1)/2^j) - f(k/2^j) ],   k = 1..2^j
//! ```
//!
//! for levels `j = 0..J-1`, together with the boundary pair
//! `mu0 = f(0)`, `mu1 = f(1) - f(0)`. [`reconstruct_path`] is the exact
//! inverse.
//!
//! Cell indices are 1-based in the formula above and 0-based in storage:
//! `levels[j][k - 1]` holds `f_jk`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported grid level.
pub const MAX_LEVEL: u32 = 30;

/// `2^{j/2}`, exact for even `j`.
pub fn level_scale(j: u32) -> f64 {
    let half = pow2(j as i32 / 2);
    if j.is_multiple_of(2) {
        half
    } else {
        half * std::f64::consts::SQRT_2
    }
}

/// `2^{-j/2}`, exact for even `j`.
pub fn inv_level_scale(j: u32) -> f64 {
    let half = pow2(-(j as i32 / 2));
    if j.is_multiple_of(2) {
        half
    } else {
        half * std::f64::consts::FRAC_1_SQRT_2
    }
}

pub(crate) fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

fn check_level(level: u32) -> Result<()> {
    if level > MAX_LEVEL {
        return Err(Error::LevelOutOfRange { level, min: 0, max: MAX_LEVEL });
    }
    Ok(())
}

/// The equispaced points `k / 2^J`, `k = 0..=2^J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicGrid {
    level: u32,
}

impl DyadicGrid {
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Number of grid points, `2^J + 1`.
    pub fn len(&self) -> usize {
        (1usize << self.level) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, k: usize) -> f64 {
        k as f64 * pow2(-(self.level as i32))
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }
}

pub fn dyadic_grid(level: u32) -> Result<DyadicGrid> {
    check_level(level)?;
    Ok(DyadicGrid { level })
}

/// Path values on the level-`J` dyadic grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathRepr", into = "PathRepr")]
pub struct DyadicPathValues {
    level: u32,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PathRepr {
    #[serde(rename = "J")]
    level: u32,
    values: Vec<f64>,
}

impl TryFrom<PathRepr> for DyadicPathValues {
    type Error = Error;

    fn try_from(repr: PathRepr) -> Result<Self> {
        DyadicPathValues::new(repr.level, repr.values)
    }
}

impl From<DyadicPathValues> for PathRepr {
    fn from(path: DyadicPathValues) -> Self {
        PathRepr { level: path.level, values: path.values }
    }
}

impl DyadicPathValues {
    pub fn new(level: u32, values: Vec<f64>) -> Result<Self> {
        check_level(level)?;
        let expected = (1usize << level) + 1;
        if values.len() != expected {
            return Err(Error::LengthMismatch { level, expected, actual: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { location: format!("grid index {i}") });
        }
        Ok(DyadicPathValues { level, values })
    }

    /// Samples `f` at every grid point of the given level.
    pub fn from_fn(level: u32, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let grid = dyadic_grid(level)?;
        let values = (0..grid.len()).map(|k| f(grid.point(k))).collect();
        Self::new(level, values)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> DyadicGrid {
        DyadicGrid { level: self.level }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Boundary pair plus per-level second-difference coefficients.
///
/// Levels are stored jagged and contiguous: `levels[j]` has `2^j` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TriangleRepr", into = "TriangleRepr")]
pub struct CoefficientTriangle {
    mu0: f64,
    mu1: f64,
    levels: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct TriangleRepr {
    #[serde(rename = "J")]
    max_level: u32,
    mu0: f64,
    mu1: f64,
    levels: Vec<Vec<f64>>,
}

impl TryFrom<TriangleRepr> for CoefficientTriangle {
    type Error = Error;

    fn try_from(repr: TriangleRepr) -> Result<Self> {
        if repr.levels.len() != repr.max_level as usize + 1 {
            return Err(Error::Malformed(format!("J = {} but {} levels present", repr.max_level, repr.levels.len())));
        }
        CoefficientTriangle::new(repr.mu0, repr.mu1, repr.levels)
    }
}

impl From<CoefficientTriangle> for TriangleRepr {
    fn from(t: CoefficientTriangle) -> Self {
        TriangleRepr { max_level: t.max_level(), mu0: t.mu0, mu1: t.mu1, levels: t.levels }
    }
}

impl CoefficientTriangle {
    pub fn new(mu0: f64, mu1: f64, levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Malformed("triangle needs at least level 0".into()));
        }
        check_level(levels.len() as u32 - 1)?;
        for (j, level) in levels.iter().enumerate() {
            let expected = 1usize << j;
            if level.len() != expected {
                return Err(Error::LengthMismatch { level: j as u32, expected, actual: level.len() });
            }
            if let Some(k) = level.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { location: format!("coefficient (j={j}, k={})", k + 1) });
            }
        }
        if !mu0.is_finite() || !mu1.is_finite() {
            return Err(Error::NonFinite { location: "boundary coefficients".into() });
        }
        Ok(CoefficientTriangle { mu0, mu1, levels })
    }

    /// All-zero triangle with levels `0..=max_level`.
    pub fn zeros(max_level: u32) -> Result<Self> {
        Self::filled(max_level, 0.0)
    }

    /// Triangle with every level coefficient equal to `value` and zero boundary terms.
    pub fn filled(max_level: u32, value: f64) -> Result<Self> {
        check_level(max_level)?;
        let levels = (0..=max_level).map(|j| vec![value; 1 << j]).collect();
        Self::new(0.0, 0.0, levels)
    }

    pub fn max_level(&self) -> u32 {
        self.levels.len() as u32 - 1
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn level(&self, j: u32) -> Option<&[f64]> {
        self.levels.get(j as usize).map(Vec::as_slice)
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Coefficient at level `j` and 1-based cell index `k`.
    pub fn get(&self, j: u32, k: u64) -> Option<f64> {
        let level = self.levels.get(j as usize)?;
        let idx = usize::try_from(k.checked_sub(1)?).ok()?;
        level.get(idx).copied()
    }

    /// Entrywise `a * self + b * other`; both must share the same max level.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.max_level() != other.max_level() {
            return Err(Error::Malformed(format!(
                "cannot combine triangles of max level {} and {}",
                self.max_level(),
                other.max_level()
            )));
        }
        let levels = self
            .levels
            .iter()
            .zip(&other.levels)
            .map(|(x, y)| x.iter().zip(y).map(|(x, y)| a * x + b * y).collect())
            .collect();
        Self::new(a * self.mu0 + b * other.mu0, a * self.mu1 + b * other.mu1, levels)
    }
}

/// Second-difference coefficients of a level-`J` path; the result has levels `0..J-1`.
pub fn extract_coefficients(path: &DyadicPathValues) -> Result<CoefficientTriangle> {
    let top = path.level();
    if top == 0 {
        return Err(Error::NoMidpoints);
    }
    let v = path.values();
    let last = v.len() - 1;
    let levels = (0..top)
        .map(|j| {
            let stride = 1usize << (top - j);
            let half = stride / 2;
            let scale = level_scale(j);
            (0..1usize << j)
                .map(|k| {
                    let left = k * stride;
                    scale * (2.0 * v[left + half] - v[left] - v[left + stride])
                })
                .collect()
        })
        .collect();
    CoefficientTriangle::new(v[0], v[last] - v[0], levels)
}

/// Inverse of [`extract_coefficients`]: midpoint refinement from the affine
/// boundary interpolant, yielding a path of level `max_level + 1`.
pub fn reconstruct_path(coeffs: &CoefficientTriangle) -> Result<DyadicPathValues> {
    let top = coeffs.max_level() + 1;
    check_level(top)?;
    let len = (1usize << top) + 1;
    let mut v = vec![0.0; len];
    v[0] = coeffs.mu0();
    v[len - 1] = coeffs.mu0() + coeffs.mu1();
    for (j, level) in coeffs.levels().iter().enumerate() {
        let stride = 1usize << (top - j as u32);
        let half = stride / 2;
        let inv = inv_level_scale(j as u32);
        for (k, &c) in level.iter().enumerate() {
            let left = k * stride;
            let right = left + stride;
            v[left + half] = 0.5 * (v[left] + v[right]) + 0.5 * inv * c;
        }
    }
    DyadicPathValues::new(top, v)
}

/// Multiplies every stored coefficient, boundary terms included, by `c`.
pub fn scale_triangle(coeffs: &CoefficientTriangle, c: f64) -> Result<CoefficientTriangle> {
    let levels = coeffs.levels().iter().map(|level| level.iter().map(|x| c * x).collect()).collect();
    CoefficientTriangle::new(c * coeffs.mu0(), c * coeffs.mu1(), levels)
}
