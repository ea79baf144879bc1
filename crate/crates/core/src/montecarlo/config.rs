use serde::{Deserialize, Serialize};

use crate::besov::BesovParams;
use crate::empirical::CdfVersion;
use crate::error::{Error, Result};
use crate::gaussian::MAX_PATH_LEVEL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    EmpiricalStep,
    EmpiricalContinuous,
    Brownian,
    Bridge,
}

impl ProcessKind {
    pub fn cdf_version(self) -> Option<CdfVersion> {
        match self {
            ProcessKind::EmpiricalStep => Some(CdfVersion::Step),
            ProcessKind::EmpiricalContinuous => Some(CdfVersion::Continuous),
            _ => None,
        }
    }

    pub fn is_gaussian(self) -> bool {
        matches!(self, ProcessKind::Brownian | ProcessKind::Bridge)
    }
}

impl std::str::FromStr for ProcessKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|_| {
            format!("unknown process `{s}` (expected empirical-step|empirical-continuous|brownian|bridge)")
        })
    }
}

/// Settings shared by every experiment runner.
///
/// `j_max` is the largest coefficient level examined. Thresholds default to
/// the values used by the verification suite and can be overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub process: ProcessKind,
    pub n: usize,
    pub j_max: u32,
    pub replicates: usize,
    pub p: f64,
    pub alpha: f64,
    pub seed: u64,
    pub sandwich_confidence: f64,
    /// Sample sizes scanned by the concentration experiment.
    pub n_values: Vec<usize>,
    /// Lowest level scanned by the concentration experiment.
    pub j_min: u32,
    pub se_multiplier: f64,
    pub oracle_se_multiplier: f64,
    pub moment_coverage: f64,
    /// Cells with `j <= moment_level_cap` count towards moment coverage.
    pub moment_level_cap: u32,
    pub roynette_tolerance: f64,
    pub roynette_coverage: f64,
    pub sup_ceiling: f64,
    pub tail_floor: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            process: ProcessKind::EmpiricalStep,
            n: 100,
            j_max: 12,
            replicates: 2000,
            p: 2.0,
            alpha: 0.5,
            seed: 42,
            sandwich_confidence: 0.95,
            n_values: vec![10, 100, 1000],
            j_min: 4,
            se_multiplier: 3.0,
            oracle_se_multiplier: 4.0,
            moment_coverage: 0.99,
            moment_level_cap: 8,
            roynette_tolerance: 0.1,
            roynette_coverage: 0.99,
            sup_ceiling: 10.0,
            tail_floor: 0.1,
        }
    }
}

fn unit_open(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::setting(key, format!("must lie in (0, 1) (got {v})")))
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::setting(key, format!("must be positive (got {v})")))
    }
}

impl ExperimentConfig {
    pub fn params(&self) -> Result<BesovParams> {
        BesovParams::new(self.p, self.alpha)
    }

    /// Checks the invariants common to all experiments.
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 100 {
            return Err(Error::setting("replicates", format!("must be at least 100 (got {})", self.replicates)));
        }
        if self.j_max < 6 {
            return Err(Error::setting("j_max", format!("must be at least 6 (got {})", self.j_max)));
        }
        if self.process.is_gaussian() {
            if self.j_max >= MAX_PATH_LEVEL {
                return Err(Error::setting(
                    "j_max",
                    format!("must be below {MAX_PATH_LEVEL} for Gaussian paths (got {})", self.j_max),
                ));
            }
        } else {
            if self.n < 2 {
                return Err(Error::setting("n", format!("must be at least 2 (got {})", self.n)));
            }
            if self.j_max > 20 {
                return Err(Error::setting(
                    "j_max",
                    format!("must be at most 20 for empirical processes (got {})", self.j_max),
                ));
            }
        }
        self.params()?;
        unit_open("sandwich_confidence", self.sandwich_confidence)?;
        unit_open("moment_coverage", self.moment_coverage)?;
        unit_open("roynette_coverage", self.roynette_coverage)?;
        positive("se_multiplier", self.se_multiplier)?;
        positive("oracle_se_multiplier", self.oracle_se_multiplier)?;
        positive("roynette_tolerance", self.roynette_tolerance)?;
        positive("sup_ceiling", self.sup_ceiling)?;
        positive("tail_floor", self.tail_floor)?;
        if self.j_min > self.j_max {
            return Err(Error::setting(
                "j_min",
                format!("must not exceed j_max = {} (got {})", self.j_max, self.j_min),
            ));
        }
        if let Some(&bad) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(Error::setting("n_values", format!("every entry must be at least 2 (got {bad})")));
        }
        Ok(())
    }

    pub(crate) fn require_empirical(&self) -> Result<CdfVersion> {
        self.process
            .cdf_version()
            .ok_or_else(|| Error::setting("process", "this experiment needs an empirical process"))
    }

    pub(crate) fn require_gaussian(&self) -> Result<()> {
        if self.process.is_gaussian() {
            Ok(())
        } else {
            Err(Error::setting("process", "this experiment needs brownian or bridge"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn bad_settings_name_their_key() {
        type Mutation = Box<dyn Fn(&mut ExperimentConfig)>;
        let cases: Vec<(&str, Mutation)> = vec![
            ("replicates", Box::new(|c| c.replicates = 10)),
            ("j_max", Box::new(|c| c.j_max = 3)),
            ("n", Box::new(|c| c.n = 1)),
            ("p", Box::new(|c| c.p = 0.5)),
            ("alpha", Box::new(|c| c.alpha = 0.0)),
            ("sandwich_confidence", Box::new(|c| c.sandwich_confidence = 1.0)),
            ("j_min", Box::new(|c| c.j_min = 13)),
            ("n_values", Box::new(|c| c.n_values = vec![10, 1])),
        ];
        for (key, mutate) in cases {
            let mut c = ExperimentConfig::default();
            mutate(&mut c);
            match c.validate() {
                Err(Error::InvalidSetting { key: k, .. }) => assert_eq!(k, key),
                other => panic!("{key}: {other:?}"),
            }
        }
    }

    #[test]
    fn process_names() {
        assert_eq!("bridge".parse::<ProcessKind>().unwrap(), ProcessKind::Bridge);
        assert_eq!("empirical-continuous".parse::<ProcessKind>().unwrap(), ProcessKind::EmpiricalContinuous);
        assert!("levy".parse::<ProcessKind>().is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<ExperimentConfig>(r#"{"seed": 1, "bogus": 2}"#).unwrap_err();
        assert!(err.to_string().contains("bogus"));
        let c: ExperimentConfig = serde_json::from_str(r#"{"seed": 7, "n": 50}"#).unwrap();
        assert_eq!((c.seed, c.n, c.j_max), (7, 50, 12));
    }
}
