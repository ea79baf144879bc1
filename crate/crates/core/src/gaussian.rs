//! Brownian motion by Faber–Schauder midpoint displacement, and the Brownian bridge.

use serde::{Deserialize, Serialize};

use crate::dyadic::{extract_coefficients, reconstruct_path, CoefficientTriangle, DyadicPathValues};
use crate::error::{Error, Result};
use crate::sampling::{sample_gaussian, SeedSpec};

pub const MAX_PATH_LEVEL: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    Motion,
    Bridge,
}

impl PathKind {
    fn name(self) -> &'static str {
        match self {
            PathKind::Motion => "motion",
            PathKind::Bridge => "bridge",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPath {
    kind: PathKind,
    path: DyadicPathValues,
    seed: SeedSpec,
}

impl GaussianPath {
    pub fn kind(&self) -> PathKind {
        self.kind
    }

    pub fn path(&self) -> &DyadicPathValues {
        &self.path
    }

    pub fn seed(&self) -> SeedSpec {
        self.seed
    }
}

/// The i.i.d. standard normal triangle driving [`brownian_motion`]: `mu0 = 0`,
/// `mu1 = W(1)`, and levels `0..level-1` filled in level order.
pub fn synthesis_triangle(level: u32, seed: SeedSpec) -> Result<CoefficientTriangle> {
    if !(1..=MAX_PATH_LEVEL).contains(&level) {
        return Err(Error::LevelOutOfRange { level, min: 1, max: MAX_PATH_LEVEL });
    }
    let draws = sample_gaussian(1usize << level, seed);
    let (w1, rest) = draws.split_first().expect("at least two draws");
    let mut offset = 0;
    let levels = (0..level)
        .map(|j| {
            let len = 1usize << j;
            let lvl = rest[offset..offset + len].to_vec();
            offset += len;
            lvl
        })
        .collect();
    CoefficientTriangle::new(0.0, *w1, levels)
}

/// Brownian motion on the level-`level` dyadic grid, exact in distribution.
///
/// Draws `W(1)` and every `g_jk` as independent standard normals and
/// rebuilds the path by midpoint displacement, so the extracted
/// coefficients are the draws themselves.
pub fn brownian_motion(level: u32, seed: SeedSpec) -> Result<GaussianPath> {
    let triangle = synthesis_triangle(level, seed)?;
    Ok(GaussianPath { kind: PathKind::Motion, path: reconstruct_path(&triangle)?, seed })
}

/// `b(t) = W(t) - t W(1)` on the same grid.
pub fn brownian_bridge(motion: &GaussianPath) -> Result<GaussianPath> {
    if motion.kind != PathKind::Motion {
        return Err(Error::WrongKind { expected: PathKind::Motion.name(), actual: motion.kind.name() });
    }
    let grid = motion.path.grid();
    let values = motion.path.values();
    let w1 = values[values.len() - 1];
    let bridge: Vec<f64> = values.iter().enumerate().map(|(k, &w)| w - grid.point(k) * w1).collect();
    Ok(GaussianPath { kind: PathKind::Bridge, path: DyadicPathValues::new(grid.level(), bridge)?, seed: motion.seed })
}

pub fn gaussian_coefficients(path: &GaussianPath) -> Result<CoefficientTriangle> {
    extract_coefficients(&path.path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Substream;

    fn seed(i: u64) -> SeedSpec {
        SeedSpec::new(11, i, Substream::Gaussian)
    }

    #[test]
    fn starts_at_zero_and_recovers_draws() {
        let m = brownian_motion(8, seed(0)).unwrap();
        assert_eq!(m.path().values()[0], 0.0);
        assert_eq!(m.path().level(), 8);
        let drawn = synthesis_triangle(8, seed(0)).unwrap();
        let got = gaussian_coefficients(&m).unwrap();
        assert!((got.mu1() - drawn.mu1()).abs() < 1e-15);
        for (a, b) in got.levels().iter().flatten().zip(drawn.levels().iter().flatten()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn level_limits() {
        assert!(brownian_motion(0, seed(0)).is_err());
        assert!(brownian_motion(25, seed(0)).is_err());
        assert!(brownian_motion(1, seed(0)).is_ok());
    }

    #[test]
    fn bridge_pins_both_ends() {
        let m = brownian_motion(6, seed(3)).unwrap();
        let b = brownian_bridge(&m).unwrap();
        assert_eq!(b.kind(), PathKind::Bridge);
        assert_eq!(b.path().values()[0], 0.0);
        assert_eq!(*b.path().values().last().unwrap(), 0.0);
        assert!(matches!(brownian_bridge(&b), Err(Error::WrongKind { .. })));
    }

    #[test]
    fn bridge_midpoint_formula() {
        let path = DyadicPathValues::new(1, vec![0.0, 1.3, 2.0]).unwrap();
        let m = GaussianPath { kind: PathKind::Motion, path, seed: seed(0) };
        let b = brownian_bridge(&m).unwrap();
        assert!((b.path().values()[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn bridge_shares_levels_with_motion() {
        let m = brownian_motion(10, seed(5)).unwrap();
        let b = brownian_bridge(&m).unwrap();
        let cm = gaussian_coefficients(&m).unwrap();
        let cb = gaussian_coefficients(&b).unwrap();
        assert_eq!(cb.mu1(), 0.0);
        for (a, b) in cm.levels().iter().flatten().zip(cb.levels().iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
