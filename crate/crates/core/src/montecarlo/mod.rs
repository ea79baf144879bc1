//! Monte Carlo verification of the moment, concentration and sandwich
//! statements for empirical-process coefficients, and of the Brownian
//! level-statistic limits, with an exact enumeration oracle.

pub mod concentration;
pub mod config;
pub mod executor;
pub mod moments;
pub mod oracle;
pub mod sandwich;
pub mod stats;

pub use concentration::{run_concentration_experiment, ConcentrationCell, ConcentrationReport};
pub use config::{ExperimentConfig, ProcessKind};
pub use executor::{aggregate, Executor, Mergeable, Partial};
pub use moments::{run_moment_experiment, MomentReport};
pub use oracle::{enumeration_oracle, ExactMoments};
pub use sandwich::{run_roynette_experiment, run_sandwich_experiment, run_sandwich_with, SandwichReport};

use crate::dyadic::CoefficientTriangle;
use crate::empirical::{empirical_coefficients, CdfVersion};
use crate::error::Result;
use crate::sampling::{sample_uniform, EmpiricalSample, SeedSpec, Substream};

pub(crate) fn replicate_sample(seed: u64, replicate: usize, n: usize) -> Result<EmpiricalSample> {
    sample_uniform(n, SeedSpec::new(seed, replicate as u64, Substream::Uniform))
}

pub(crate) fn replicate_triangle(
    seed: u64,
    replicate: usize,
    n: usize,
    max_level: u32,
    version: CdfVersion,
) -> Result<CoefficientTriangle> {
    let sample = replicate_sample(seed, replicate, n)?;
    empirical_coefficients(&sample, max_level, version)
}
