//! Plot-ready CSV tables and their loaders.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::besov::LevelProfile;
use crate::error::Result;
use crate::montecarlo::concentration::ConcentrationReport;
use crate::montecarlo::moments::MomentReport;
use crate::montecarlo::oracle::{closed_form, enumeration_oracle, ExactValue};

pub const PROFILE_HEADER: &[&str] = &["j", "level_statistic", "running_sup", "tail_min"];
pub const CONCENTRATION_HEADER: &[&str] = &["n", "j", "frequency", "bound", "se", "pass"];
pub const MOMENT_CELL_HEADER: &[&str] = &[
    "j",
    "k",
    "mean_alpha",
    "se_alpha",
    "mean_g",
    "se_g",
    "mean_h",
    "se_h",
    "mean_h_sq",
    "se_h_sq",
    "var_g",
    "se_var_g",
];
pub const MOMENT_LEVEL_HEADER: &[&str] = &[
    "j",
    "pair_hh",
    "se_pair_hh",
    "closed_form_pair_hh",
    "mean_sum_g",
    "se_mean_sum_g",
    "var_sum_g",
    "se_var_sum_g",
    "closed_form_var_sum_g",
];
pub const ORACLE_CHECK_HEADER: &[&str] = &["j", "moment", "exact", "exact_value", "estimate", "se", "z", "pass"];
pub const BAND_LEVEL_HEADER: &[&str] = &["j", "in_band_frequency", "se", "mean_statistic", "se_statistic"];
pub const REPLICATE_HEADER: &[&str] = &["replicate", "sup", "tail_min"];
pub const COMPARISON_HEADER: &[&str] =
    &["j", "mean_squared_statistic_step", "mean_squared_statistic_continuous", "max_discrepancy", "discrepancy_bound"];
pub const IDENTITY_HEADER: &[&str] = &[
    "n",
    "j",
    "mean_h",
    "mean_hh_pair",
    "var_g",
    "var_sum_g",
    "closed_form_var_sum_g",
    "concentration_probability",
    "mean_h_identity",
    "pair_identity",
    "variance_mismatch",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub j: u32,
    pub level_statistic: f64,
    pub running_sup: f64,
    pub tail_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub j: u32,
    pub frequency: f64,
    pub bound: f64,
    pub se: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCheckRow {
    pub j: u32,
    pub moment: String,
    pub exact: String,
    pub exact_value: f64,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub pass: bool,
}

/// Exact moments of one enumerable `(n, j)` next to the closed forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub n: usize,
    pub j: u32,
    pub mean_h: String,
    pub mean_hh_pair: Option<String>,
    pub var_g: String,
    pub var_sum_g: String,
    pub closed_form_var_sum_g: String,
    pub concentration_probability: String,
    pub mean_h_identity: bool,
    pub pair_identity: bool,
    pub variance_mismatch: bool,
}

/// Writes `header` followed by one row per record; an empty slice gives a
/// header-only file.
pub fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn profile_rows(profile: &LevelProfile) -> Vec<ProfileRow> {
    (0..profile.len())
        .map(|j| ProfileRow {
            j: j as u32,
            level_statistic: profile.statistics[j],
            running_sup: profile.running_sup[j],
            tail_min: profile.tail_min[j],
        })
        .collect()
}

pub fn write_profile_csv(path: &Path, profile: &LevelProfile) -> Result<()> {
    write_rows(path, PROFILE_HEADER, &profile_rows(profile))
}

pub fn concentration_rows(report: &ConcentrationReport) -> Vec<ConcentrationRow> {
    report
        .cells
        .iter()
        .map(|c| ConcentrationRow { n: c.n, j: c.j, frequency: c.frequency, bound: c.bound, se: c.se, pass: c.pass })
        .collect()
}

pub fn oracle_check_rows(report: &MomentReport) -> Vec<OracleCheckRow> {
    report
        .oracle
        .iter()
        .flat_map(|o| {
            o.entries.iter().map(move |e| OracleCheckRow {
                j: o.j,
                moment: e.moment.clone(),
                exact: e.exact.exact.clone(),
                exact_value: e.exact.value,
                estimate: e.estimate,
                se: e.se,
                z: e.z,
                pass: e.pass,
            })
        })
        .collect()
}

/// Enumerates every `(n, j)` with `2 <= n <= max_n`, `j <= max_j`.
pub fn identity_rows(max_n: usize, max_j: u32) -> Result<Vec<IdentityRow>> {
    let text = |r| ExactValue::from(r).exact;
    let mut rows = Vec::new();
    for n in 2..=max_n {
        for j in 0..=max_j {
            let m = enumeration_oracle(n, j)?;
            let closed_form_var = closed_form::var_sum_g(n, j);
            rows.push(IdentityRow {
                n,
                j,
                mean_h: text(m.mean_h),
                mean_hh_pair: m.mean_hh_pair.map(text),
                var_g: text(m.var_g),
                var_sum_g: text(m.var_sum_g),
                closed_form_var_sum_g: text(closed_form_var),
                concentration_probability: text(m.concentration_probability),
                mean_h_identity: m.mean_h == closed_form::mean_h(n, j),
                pair_identity: m.mean_hh_pair.is_none_or(|v| v == closed_form::mean_hh_pair(n, j)),
                variance_mismatch: m.var_sum_g != closed_form_var,
            });
        }
    }
    Ok(rows)
}
