//! Concentration experiment: frequency of `|2^{-j} sum_k G_jk - 1| >= 1/2`
//! against the Chebyshev bound `4 eps_nj`.

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ProcessKind};
use super::executor::{aggregate, Executor, Mergeable};
use super::oracle::{self, closed_form, to_f64, ExactValue};
use super::replicate_sample;
use super::stats::binomial_se;
use crate::besov::{level_statistic, BesovParams};
use crate::empirical::{empirical_coefficients, CdfVersion, HalfCellCounts};
use crate::error::Result;
use crate::sampling::EmpiricalSample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationCell {
    pub n: usize,
    pub j: u32,
    pub frequency: f64,
    pub bound: f64,
    pub se: f64,
    pub pass: bool,
    /// Exact event probability when `(n, j)` is enumerable.
    pub exact_probability: Option<ExactValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub process: ProcessKind,
    pub replicates: usize,
    pub seed: u64,
    pub se_multiplier: f64,
    pub cells: Vec<ConcentrationCell>,
    pub pass: bool,
}

/// `4 eps_nj = 4 * 2^{-j} (3 - 3/n)`.
pub fn chebyshev_bound(n: usize, j: u32) -> f64 {
    to_f64(closed_form::chebyshev_bound(n, j))
}

struct Counts(Vec<u64>);

impl Mergeable for Counts {
    fn merge(&mut self, later: Self) {
        self.0.iter_mut().zip(later.0).for_each(|(a, b)| *a += b);
    }
}

/// Event indicators for levels `j_min..=j_max`.
fn deviations(sample: &EmpiricalSample, j_min: u32, j_max: u32, version: CdfVersion) -> Result<Vec<bool>> {
    let n = sample.n() as u64;
    match version {
        // Exact: 2^{-j} sum_k G_jk = sum_k H_jk / n.
        CdfVersion::Step => {
            let counts = HalfCellCounts::new(sample, j_max)?;
            Ok((j_min..=j_max).map(|j| 2 * counts.sum_h(j).abs_diff(n) >= n).collect())
        }
        CdfVersion::Continuous => {
            let t = empirical_coefficients(sample, j_max, version)?;
            (j_min..=j_max)
                .map(|j| {
                    let l = level_statistic(&t, j, BesovParams::quadratic())?;
                    Ok((l * l - 1.0).abs() >= 0.5)
                })
                .collect()
        }
    }
}

pub fn run_concentration_experiment(config: &ExperimentConfig, executor: &Executor) -> Result<ConcentrationReport> {
    config.validate()?;
    let version = config.require_empirical()?;
    let (j_min, j_max) = (config.j_min, config.j_max);
    let width = (j_max - j_min + 1) as usize;
    let n_values = &config.n_values;
    let partials = executor.run(
        config.replicates,
        || Counts(vec![0; width * n_values.len()]),
        |r, acc| {
            for (i, &n) in n_values.iter().enumerate() {
                let sample = replicate_sample(config.seed, r, n)?;
                for (l, hit) in deviations(&sample, j_min, j_max, version)?.into_iter().enumerate() {
                    acc.0[i * width + l] += hit as u64;
                }
            }
            Ok(())
        },
    )?;
    let counts = aggregate(partials, config.replicates)?.0;
    let reps = config.replicates;
    let cells: Vec<ConcentrationCell> = n_values
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| {
            let counts = &counts;
            (j_min..=j_max).map(move |j| {
                let frequency = counts[i * width + (j - j_min) as usize] as f64 / reps as f64;
                let bound = chebyshev_bound(n, j);
                let se = binomial_se(frequency, reps);
                ConcentrationCell {
                    n,
                    j,
                    frequency,
                    bound,
                    se,
                    pass: frequency <= bound + config.se_multiplier * se,
                    exact_probability: oracle::enumeration_oracle(n, j)
                        .ok()
                        .map(|m| m.concentration_probability.into()),
                }
            })
        })
        .collect();
    Ok(ConcentrationReport {
        process: config.process,
        replicates: reps,
        seed: config.seed,
        se_multiplier: config.se_multiplier,
        pass: cells.iter().all(|c| c.pass),
        cells,
    })
}
