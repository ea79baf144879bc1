//! Moment experiment: per-cell means of `alpha_jk`, `G_jk = alpha_jk^2` and
//! `H_jk = n G_jk / 2^j`, pooled cross moments `E[H_jk H_jk']` and the
//! variance of `sum_k G_jk`, compared against exact values where enumerable.

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ProcessKind};
use super::executor::{aggregate, Executor, Mergeable};
use super::oracle::{self, closed_form, enumeration_oracle, to_f64, ExactValue};
use super::replicate_triangle;
use super::stats::PowerSums;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellMoments {
    pub j: u32,
    /// 1-based cell index.
    pub k: u64,
    pub mean_alpha: f64,
    pub se_alpha: f64,
    pub mean_g: f64,
    pub se_g: f64,
    pub mean_h: f64,
    pub se_h: f64,
    pub mean_h_sq: f64,
    pub se_h_sq: f64,
    pub var_g: f64,
    pub se_var_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMoments {
    pub j: u32,
    /// Pooled `E[H_jk H_jk']` over all pairs `k < k'`; absent at `j = 0`.
    pub pair_hh: Option<f64>,
    pub se_pair_hh: Option<f64>,
    pub closed_form_pair_hh: Option<f64>,
    pub mean_sum_g: f64,
    pub se_mean_sum_g: f64,
    pub var_sum_g: f64,
    pub se_var_sum_g: f64,
    /// `2^{2j} eps_nj`.
    pub closed_form_var_sum_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub level_cap: u32,
    pub cells: usize,
    pub within: usize,
    pub fraction: f64,
    pub threshold: f64,
    pub se_multiplier: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEntry {
    pub moment: String,
    pub exact: ExactValue,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub j: u32,
    pub entries: Vec<OracleEntry>,
    /// `E[H_jk] = n / 2^j` holds exactly.
    pub mean_h_identity: bool,
    /// `E[H_jk H_jk'] = n (n-1) / 2^{2j}` holds exactly (vacuous at `j = 0`).
    pub pair_identity: bool,
    pub closed_form_var_sum_g: ExactValue,
    pub closed_form_var_g: ExactValue,
    pub implied_c: Option<ExactValue>,
    pub exact_concentration_probability: ExactValue,
    /// Exact `Var(sum_k G_jk)` differs from `2^{2j} eps_nj`.
    pub variance_mismatch: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub process: ProcessKind,
    pub n: usize,
    pub j_max: u32,
    pub replicates: usize,
    pub seed: u64,
    pub cells: Vec<CellMoments>,
    pub levels: Vec<LevelMoments>,
    pub coverage: Coverage,
    pub oracle: Vec<OracleCheck>,
    pub variance_mismatch_flag: bool,
    pub pass: bool,
}

#[derive(Debug, Clone)]
struct Accumulator {
    alpha: Vec<PowerSums>,
    g: Vec<PowerSums>,
    pair: Vec<PowerSums>,
    sum_g: Vec<PowerSums>,
}

impl Accumulator {
    fn new(max_level: u32) -> Self {
        let cells = (2usize << max_level) - 1;
        let levels = max_level as usize + 1;
        Accumulator {
            alpha: vec![PowerSums::default(); cells],
            g: vec![PowerSums::default(); cells],
            pair: vec![PowerSums::default(); levels],
            sum_g: vec![PowerSums::default(); levels],
        }
    }
}

impl Mergeable for Accumulator {
    fn merge(&mut self, later: Self) {
        let zip = |a: &mut Vec<PowerSums>, b: &Vec<PowerSums>| {
            a.iter_mut().zip(b).for_each(|(x, y)| x.merge(y));
        };
        zip(&mut self.alpha, &later.alpha);
        zip(&mut self.g, &later.g);
        zip(&mut self.pair, &later.pair);
        zip(&mut self.sum_g, &later.sum_g);
    }
}

fn cell_offset(j: u32) -> usize {
    (1usize << j) - 1
}

fn entry(moment: &str, exact: oracle::Rational, estimate: f64, se: f64, k_se: f64) -> OracleEntry {
    let target = to_f64(exact);
    let diff = estimate - target;
    let z = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    };
    OracleEntry {
        moment: moment.to_owned(),
        exact: exact.into(),
        estimate,
        se,
        z: if z.is_finite() { z } else { f64::MAX.copysign(z) },
        pass: z.abs() <= k_se,
    }
}

pub fn run_moment_experiment(config: &ExperimentConfig, executor: &Executor) -> Result<MomentReport> {
    config.validate()?;
    let version = config.require_empirical()?;
    let (n, top) = (config.n, config.j_max);
    let partials = executor.run(
        config.replicates,
        || Accumulator::new(top),
        |r, acc| {
            let t = replicate_triangle(config.seed, r, n, top, version)?;
            for (j, level) in t.levels().iter().enumerate() {
                let j = j as u32;
                let off = cell_offset(j);
                let h_scale = n as f64 / (1u64 << j) as f64;
                let (mut sum_g, mut sum_h, mut sum_h_sq) = (0.0, 0.0, 0.0);
                for (k, &a) in level.iter().enumerate() {
                    let g = a * a;
                    acc.alpha[off + k].push(a);
                    acc.g[off + k].push(g);
                    let h = g * h_scale;
                    sum_g += g;
                    sum_h += h;
                    sum_h_sq += h * h;
                }
                acc.sum_g[j as usize].push(sum_g);
                if j > 0 {
                    let cells = level.len() as f64;
                    acc.pair[j as usize].push((sum_h * sum_h - sum_h_sq) / (cells * (cells - 1.0)));
                }
            }
            Ok(())
        },
    )?;
    let acc = aggregate(partials, config.replicates)?;

    let mut cells = Vec::with_capacity(acc.g.len());
    for j in 0..=top {
        let off = cell_offset(j);
        let h_scale = n as f64 / (1u64 << j) as f64;
        for k in 0..1usize << j {
            let (a, g) = (&acc.alpha[off + k], &acc.g[off + k]);
            // H^2 moments from the G power sums: E[H^2] = h_scale^2 E[G^2].
            let mean_g_sq = g.s2 / g.count as f64;
            let var_g_sq =
                (g.s4 / g.count as f64 - mean_g_sq * mean_g_sq).max(0.0) * g.count as f64 / (g.count as f64 - 1.0);
            cells.push(CellMoments {
                j,
                k: k as u64 + 1,
                mean_alpha: a.mean(),
                se_alpha: a.se_mean(),
                mean_g: g.mean(),
                se_g: g.se_mean(),
                mean_h: h_scale * g.mean(),
                se_h: h_scale * g.se_mean(),
                mean_h_sq: h_scale * h_scale * mean_g_sq,
                se_h_sq: h_scale * h_scale * (var_g_sq / g.count as f64).sqrt(),
                var_g: g.variance(),
                se_var_g: g.se_variance(),
            });
        }
    }

    let levels: Vec<LevelMoments> = (0..=top)
        .map(|j| {
            let pair = &acc.pair[j as usize];
            let sg = &acc.sum_g[j as usize];
            LevelMoments {
                j,
                pair_hh: (j > 0).then(|| pair.mean()),
                se_pair_hh: (j > 0).then(|| pair.se_mean()),
                closed_form_pair_hh: (j > 0).then(|| to_f64(closed_form::mean_hh_pair(n, j))),
                mean_sum_g: sg.mean(),
                se_mean_sum_g: sg.se_mean(),
                var_sum_g: sg.variance(),
                se_var_sum_g: sg.se_variance(),
                closed_form_var_sum_g: to_f64(closed_form::var_sum_g(n, j)),
            }
        })
        .collect();

    let k_se = config.se_multiplier;
    let checked: Vec<&CellMoments> = cells.iter().filter(|c| c.j <= config.moment_level_cap).collect();
    let within = checked.iter().filter(|c| (c.mean_g - 1.0).abs() <= k_se * c.se_g).count();
    let fraction = within as f64 / checked.len() as f64;
    let coverage = Coverage {
        level_cap: config.moment_level_cap.min(top),
        cells: checked.len(),
        within,
        fraction,
        threshold: config.moment_coverage,
        se_multiplier: k_se,
        pass: fraction >= config.moment_coverage,
    };

    let mut oracle_checks = Vec::new();
    for j in 0..=top.min(3) {
        if !oracle::enumerable(n, j) {
            continue;
        }
        let exact = enumeration_oracle(n, j)?;
        let cell = &cells[cell_offset(j)];
        let level = &levels[j as usize];
        let ko = config.oracle_se_multiplier;
        let mut entries = vec![
            entry("E[H_jk]", exact.mean_h, cell.mean_h, cell.se_h, ko),
            entry("E[H_jk^2]", exact.mean_h_sq, cell.mean_h_sq, cell.se_h_sq, ko),
            entry("Var(G_jk)", exact.var_g, cell.var_g, cell.se_var_g, ko),
        ];
        if let (Some(pair), Some(est), Some(se)) = (exact.mean_hh_pair, level.pair_hh, level.se_pair_hh) {
            entries.push(entry("E[H_jk H_jk']", pair, est, se, ko));
        }
        entries.push(entry("Var(sum_k G_jk)", exact.var_sum_g, level.var_sum_g, level.se_var_sum_g, ko));
        let closed_form_var = closed_form::var_sum_g(n, j);
        oracle_checks.push(OracleCheck {
            j,
            entries,
            mean_h_identity: exact.mean_h == closed_form::mean_h(n, j),
            pair_identity: exact.mean_hh_pair.is_none_or(|v| v == closed_form::mean_hh_pair(n, j)),
            closed_form_var_sum_g: closed_form_var.into(),
            closed_form_var_g: closed_form::var_g(n, j).into(),
            implied_c: closed_form::implied_c(n, j, exact.var_g).map(Into::into),
            exact_concentration_probability: exact.concentration_probability.into(),
            variance_mismatch: exact.var_sum_g != closed_form_var,
        });
    }

    let oracle_pass =
        oracle_checks.iter().all(|o| o.entries.iter().all(|e| e.pass) && o.mean_h_identity && o.pair_identity);
    Ok(MomentReport {
        process: config.process,
        n,
        j_max: top,
        replicates: config.replicates,
        seed: config.seed,
        pass: coverage.pass && oracle_pass,
        variance_mismatch_flag: oracle_checks.iter().any(|o| o.variance_mismatch),
        cells,
        levels,
        coverage,
        oracle: oracle_checks,
    })
}
