//! Level-statistic band experiments.
//!
//! The sandwich experiment tracks `2^{-j} sum_k |alpha_jk|^2` for the
//! empirical process and checks that it lies in `[1/2, 3/2]` at the top
//! levels, together with the per-replicate supremum and tail minimum of the
//! level statistic. The Roynette experiment does the same for the
//! coefficients of Brownian motion or the Brownian bridge, where the level
//! statistic of order `p` concentrates at `(E|N(0,1)|^p)^{1/p}`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::config::{ExperimentConfig, ProcessKind};
use super::executor::{aggregate, Executor, Mergeable};
use super::replicate_sample;
use super::stats::{binomial_se, PowerSums};
use crate::besov::{level_statistics, BesovParams, LevelProfile};
use crate::dyadic::{self, CoefficientTriangle};
use crate::empirical::{empirical_coefficients, CdfVersion, HalfCellCounts};
use crate::error::{Error, Result};
use crate::gaussian::{brownian_bridge, brownian_motion, gaussian_coefficients};
use crate::sampling::{SeedSpec, Substream};

/// Which per-level quantity the band applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandTarget {
    /// `L_j^2`, i.e. `2^{-j} sum_k |mu_jk|^2` at `p = 2`, `alpha = 1/2`.
    SquaredStatistic,
    /// `L_j` itself.
    Statistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub target: BandTarget,
    pub low: f64,
    pub high: f64,
}

impl Band {
    fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandLevel {
    pub j: u32,
    pub in_band_frequency: f64,
    pub se: f64,
    pub mean_statistic: f64,
    pub se_statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateProfile {
    pub replicate: usize,
    pub sup: f64,
    pub tail_min: f64,
}

/// Step versus continuous coefficients, per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VersionComparison {
    pub j: u32,
    pub mean_squared_statistic_step: f64,
    pub mean_squared_statistic_continuous: f64,
    /// `max |alpha_jk(step) - alpha_jk(continuous)|` over cells and replicates.
    pub max_discrepancy: f64,
    /// `4 * 2^{j/2} / sqrt(n)`.
    pub discrepancy_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub process: ProcessKind,
    pub n: Option<usize>,
    pub j_max: u32,
    pub replicates: usize,
    pub seed: u64,
    pub p: f64,
    pub alpha: f64,
    pub band: Band,
    /// Gaussian concentration point of `L_J`, for the Roynette experiment.
    pub target: Option<f64>,
    pub levels: Vec<BandLevel>,
    pub checked_levels: Vec<u32>,
    pub required_frequency: f64,
    pub band_pass: bool,
    pub replicate_profiles: Vec<ReplicateProfile>,
    pub max_sup: f64,
    pub sup_ceiling: f64,
    pub sup_pass: bool,
    pub tail_floor: f64,
    pub tail_exceed_fraction: f64,
    pub tail_pass: bool,
    pub version_comparison: Option<Vec<VersionComparison>>,
    pub pass: bool,
}

fn close(a: f64, b: f64, rel_tol: f64) -> bool {
    a == b || (a - b).abs() <= rel_tol * a.abs().max(b.abs())
}

impl SandwichReport {
    /// Same settings, counts and pass flags, with float statistics equal up
    /// to `rel_tol`; the process label is ignored. Used to compare motion and
    /// bridge runs, whose coefficients agree only to rounding.
    pub fn agrees_with(&self, other: &SandwichReport, rel_tol: f64) -> bool {
        let exact = self.n == other.n
            && self.j_max == other.j_max
            && self.replicates == other.replicates
            && self.seed == other.seed
            && self.p == other.p
            && self.alpha == other.alpha
            && self.band == other.band
            && self.target == other.target
            && self.checked_levels == other.checked_levels
            && self.band_pass == other.band_pass
            && self.sup_pass == other.sup_pass
            && self.tail_pass == other.tail_pass
            && self.tail_exceed_fraction == other.tail_exceed_fraction
            && self.pass == other.pass
            && self.levels.len() == other.levels.len()
            && self.replicate_profiles.len() == other.replicate_profiles.len()
            && self.version_comparison.is_some() == other.version_comparison.is_some();
        exact
            && close(self.max_sup, other.max_sup, rel_tol)
            && self.levels.iter().zip(&other.levels).all(|(a, b)| {
                a.j == b.j
                    && a.in_band_frequency == b.in_band_frequency
                    && close(a.mean_statistic, b.mean_statistic, rel_tol)
                    && close(a.se_statistic, b.se_statistic, rel_tol)
            })
            && self.replicate_profiles.iter().zip(&other.replicate_profiles).all(|(a, b)| {
                a.replicate == b.replicate && close(a.sup, b.sup, rel_tol) && close(a.tail_min, b.tail_min, rel_tol)
            })
    }
}

/// Per-replicate inputs to the band accumulator.
#[derive(Debug, Clone)]
struct ReplicateLevels {
    banded: Vec<f64>,
    statistics: Vec<f64>,
    comparison: Option<Vec<(f64, f64, f64)>>,
}

#[derive(Debug, Clone)]
struct BandAcc {
    in_band: Vec<u64>,
    statistic: Vec<PowerSums>,
    profiles: Vec<ReplicateProfile>,
    step_sq: Vec<f64>,
    cont_sq: Vec<f64>,
    max_disc: Vec<f64>,
    compared: bool,
}

impl BandAcc {
    fn new(levels: usize) -> Self {
        BandAcc {
            in_band: vec![0; levels],
            statistic: vec![PowerSums::default(); levels],
            profiles: Vec::new(),
            step_sq: vec![0.0; levels],
            cont_sq: vec![0.0; levels],
            max_disc: vec![0.0; levels],
            compared: false,
        }
    }

    fn push(&mut self, replicate: usize, band: &Band, r: ReplicateLevels) {
        for (j, (&b, &s)) in r.banded.iter().zip(&r.statistics).enumerate() {
            self.in_band[j] += band.contains(b) as u64;
            self.statistic[j].push(s);
        }
        let profile = LevelProfile::from_statistics(r.statistics);
        self.profiles.push(ReplicateProfile { replicate, sup: profile.sup, tail_min: profile.tail_minimum });
        if let Some(cmp) = r.comparison {
            self.compared = true;
            for (j, (step, cont, disc)) in cmp.into_iter().enumerate() {
                self.step_sq[j] += step;
                self.cont_sq[j] += cont;
                self.max_disc[j] = self.max_disc[j].max(disc);
            }
        }
    }
}

impl Mergeable for BandAcc {
    fn merge(&mut self, later: Self) {
        self.in_band.iter_mut().zip(&later.in_band).for_each(|(a, b)| *a += b);
        self.statistic.iter_mut().zip(&later.statistic).for_each(|(a, b)| a.merge(b));
        self.profiles.extend(later.profiles);
        self.step_sq.iter_mut().zip(&later.step_sq).for_each(|(a, b)| *a += b);
        self.cont_sq.iter_mut().zip(&later.cont_sq).for_each(|(a, b)| *a += b);
        self.max_disc.iter_mut().zip(&later.max_disc).for_each(|(a, b)| *a = a.max(*b));
        self.compared |= later.compared;
    }
}

struct Plan {
    band: Band,
    checked_levels: Vec<u32>,
    required_frequency: f64,
    target: Option<f64>,
    n: Option<usize>,
}

fn run_plan<F>(config: &ExperimentConfig, executor: &Executor, plan: Plan, replicate: F) -> Result<SandwichReport>
where
    F: Fn(usize) -> Result<ReplicateLevels> + Sync,
{
    let levels = config.j_max as usize + 1;
    let band = &plan.band;
    let partials = executor.run(
        config.replicates,
        || BandAcc::new(levels),
        |r, acc| {
            let lv = replicate(r)?;
            if lv.banded.len() != levels || lv.statistics.len() != levels {
                return Err(Error::Malformed(format!(
                    "replicate {r} produced {} levels, expected {levels}",
                    lv.statistics.len()
                )));
            }
            acc.push(r, band, lv);
            Ok(())
        },
    )?;
    let acc = aggregate(partials, config.replicates)?;
    let reps = config.replicates;
    let band_levels: Vec<BandLevel> = (0..levels)
        .map(|j| {
            let freq = acc.in_band[j] as f64 / reps as f64;
            BandLevel {
                j: j as u32,
                in_band_frequency: freq,
                se: binomial_se(freq, reps),
                mean_statistic: acc.statistic[j].mean(),
                se_statistic: acc.statistic[j].se_mean(),
            }
        })
        .collect();
    let band_pass =
        plan.checked_levels.iter().all(|&j| band_levels[j as usize].in_band_frequency >= plan.required_frequency);
    let max_sup = acc.profiles.iter().map(|p| p.sup).fold(0.0, f64::max);
    let sup_pass = max_sup.is_finite() && max_sup < config.sup_ceiling;
    let tail_exceed_fraction =
        acc.profiles.iter().filter(|p| p.tail_min > config.tail_floor).count() as f64 / reps as f64;
    let tail_pass = tail_exceed_fraction >= config.sandwich_confidence;
    let version_comparison = (acc.compared && plan.n.is_some()).then(|| {
        let root_n = (plan.n.unwrap() as f64).sqrt();
        (0..levels)
            .map(|j| VersionComparison {
                j: j as u32,
                mean_squared_statistic_step: acc.step_sq[j] / reps as f64,
                mean_squared_statistic_continuous: acc.cont_sq[j] / reps as f64,
                max_discrepancy: acc.max_disc[j],
                discrepancy_bound: 4.0 * dyadic::level_scale(j as u32) / root_n,
            })
            .collect()
    });
    Ok(SandwichReport {
        process: config.process,
        n: plan.n,
        j_max: config.j_max,
        replicates: reps,
        seed: config.seed,
        p: config.p,
        alpha: config.alpha,
        band: plan.band,
        target: plan.target,
        levels: band_levels,
        checked_levels: plan.checked_levels,
        required_frequency: plan.required_frequency,
        band_pass,
        replicate_profiles: acc.profiles,
        max_sup,
        sup_ceiling: config.sup_ceiling,
        sup_pass,
        tail_floor: config.tail_floor,
        tail_exceed_fraction,
        tail_pass,
        version_comparison,
        pass: band_pass && sup_pass && tail_pass,
    })
}

fn sandwich_plan(config: &ExperimentConfig, n: Option<usize>) -> Result<Plan> {
    if config.j_max < 10 {
        return Err(Error::setting(
            "j_max",
            format!("the sandwich experiment needs j_max >= 10 (got {})", config.j_max),
        ));
    }
    Ok(Plan {
        band: Band { target: BandTarget::SquaredStatistic, low: 0.5, high: 1.5 },
        checked_levels: (config.j_max - 2..=config.j_max).collect(),
        required_frequency: config.sandwich_confidence,
        target: None,
        n,
    })
}

/// Sandwich statistics for an arbitrary per-replicate triangle source.
///
/// Levels are summarized with `p = 2`, `alpha = 1/2`; `generator` must return
/// triangles with max level `config.j_max`.
pub fn run_sandwich_with<F>(config: &ExperimentConfig, executor: &Executor, generator: F) -> Result<SandwichReport>
where
    F: Fn(usize) -> Result<CoefficientTriangle> + Sync,
{
    let plan = sandwich_plan(config, None)?;
    run_plan(config, executor, plan, |r| {
        let stats = level_statistics(&generator(r)?, BesovParams::quadratic());
        Ok(ReplicateLevels { banded: stats.iter().map(|l| l * l).collect(), statistics: stats, comparison: None })
    })
}

pub fn run_sandwich_experiment(config: &ExperimentConfig, executor: &Executor) -> Result<SandwichReport> {
    config.validate()?;
    let version = config.require_empirical()?;
    let plan = sandwich_plan(config, Some(config.n))?;
    let (n, top) = (config.n, config.j_max);
    run_plan(config, executor, plan, |r| {
        let sample = replicate_sample(config.seed, r, n)?;
        let counts = HalfCellCounts::new(&sample, top)?;
        let step = counts.coefficients();
        let cont = empirical_coefficients(&sample, top, CdfVersion::Continuous)?;
        let step_stats = level_statistics(&step, BesovParams::quadratic());
        let cont_stats = level_statistics(&cont, BesovParams::quadratic());
        let comparison = step
            .levels()
            .iter()
            .zip(cont.levels())
            .enumerate()
            .map(|(j, (a, b))| {
                let disc = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                let (ls, lc) = (step_stats[j], cont_stats[j]);
                (ls * ls, lc * lc, disc)
            })
            .collect();
        let (banded, statistics) = match version {
            CdfVersion::Step => ((0..=top).map(|j| counts.sum_h(j) as f64 / n as f64).collect(), step_stats),
            CdfVersion::Continuous => (cont_stats.iter().map(|l| l * l).collect(), cont_stats),
        };
        Ok(ReplicateLevels { banded, statistics, comparison: Some(comparison) })
    })
}

/// `(E|N(0,1)|^p)^{1/p}`.
pub fn gaussian_abs_moment_root(p: f64) -> f64 {
    let moment = 2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / std::f64::consts::PI.sqrt();
    moment.powf(1.0 / p)
}

pub fn run_roynette_experiment(config: &ExperimentConfig, executor: &Executor) -> Result<SandwichReport> {
    config.validate()?;
    config.require_gaussian()?;
    let params = config.params()?;
    let top = config.j_max;
    // L_J = 2^{-J (alpha - 1/2)} times the normalized power mean.
    let target = gaussian_abs_moment_root(config.p) * (-(top as f64) * (config.alpha - 0.5)).exp2();
    let plan = Plan {
        band: Band {
            target: BandTarget::Statistic,
            low: target - config.roynette_tolerance,
            high: target + config.roynette_tolerance,
        },
        checked_levels: vec![top],
        required_frequency: config.roynette_coverage,
        target: Some(target),
        n: None,
    };
    let bridge = config.process == ProcessKind::Bridge;
    run_plan(config, executor, plan, |r| {
        let seed = SeedSpec::new(config.seed, r as u64, Substream::Gaussian);
        let motion = brownian_motion(top + 1, seed)?;
        let path = if bridge { brownian_bridge(&motion)? } else { motion };
        let stats = level_statistics(&gaussian_coefficients(&path)?, params);
        Ok(ReplicateLevels { banded: stats.clone(), statistics: stats, comparison: None })
    })
}
