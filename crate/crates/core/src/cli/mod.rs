//! Command-line interface: argument parsing, config merging, command
//! dispatch and report emission.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 when a
//! verification command ran but some pass flag is false.

pub mod settings;
pub mod tables;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::{Deserialize, Serialize};

use crate::besov::{besov_norm, level_statistics, BesovParams, LevelProfile};
use crate::dyadic::{extract_coefficients, CoefficientTriangle, DyadicPathValues};
use crate::empirical::{empirical_coefficients, CdfVersion, ContinuousEcdf};
use crate::error::{Error, Result};
use crate::gaussian::{brownian_bridge, brownian_motion, gaussian_coefficients, PathKind, MAX_PATH_LEVEL};
use crate::io::{read_json, read_triangle_csv, read_triangle_json, write_json, write_triangle_csv};
use crate::montecarlo::{
    run_concentration_experiment, run_moment_experiment, run_roynette_experiment, run_sandwich_experiment,
    ConcentrationReport, Executor, ExperimentConfig, MomentReport, ProcessKind, SandwichReport,
};
use crate::sampling::{sample_uniform, SeedSpec, Substream};
use settings::Settings;
use tables::*;

#[derive(Debug, Parser)]
#[command(name = "besov-empirica", version, about = "Dyadic coefficients, Besov norms and Monte Carlo checks")]
struct Cli {
    /// Increase log verbosity (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Source {
    Step,
    Continuous,
}

impl Source {
    fn process(self) -> ProcessKind {
        match self {
            Source::Step => ProcessKind::EmpiricalStep,
            Source::Continuous => ProcessKind::EmpiricalContinuous,
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "j-max")]
    j_max: Option<u32>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// JSON file of settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "BESOV_EMPIRICA_WORKERS")]
    workers: Option<usize>,
}

impl Common {
    fn settings(&self) -> Result<Settings> {
        let mut s = Settings::load(self.config.as_deref())?;
        s.set("seed", self.seed)?;
        s.set("n", self.n)?;
        s.set("j_max", self.j_max)?;
        s.set("replicates", self.replicates)?;
        s.set("p", self.p)?;
        s.set("alpha", self.alpha)?;
        Ok(s)
    }

    fn executor(&self) -> Result<Executor> {
        let workers = self.workers.unwrap_or(1);
        if workers == 0 {
            return Err(Error::setting("workers", "must be at least 1"));
        }
        Executor::new(workers)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a uniform empirical process and write its coefficient triangle.
    SimulateEmpirical {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        source: Option<Source>,
        #[arg(long, default_value = "coeffs.json")]
        out: PathBuf,
    },
    /// Sample a Brownian motion (or bridge) path on the level-J grid.
    SimulateBm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        bridge: bool,
        #[arg(long, default_value = "path.json")]
        out: PathBuf,
    },
    /// Extract the coefficient triangle of a path file.
    Coeffs {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        path: PathBuf,
        /// Output file; `.csv` selects the flat CSV layout.
        #[arg(long, default_value = "coeffs.json")]
        out: PathBuf,
    },
    /// Besov sequence norm and level profile of a coefficient file.
    Norm {
        #[command(flatten)]
        common: Common,
        /// Triangle in JSON or CSV (by extension).
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    VerifyMoments(VerifyArgs),
    VerifyConcentration(VerifyArgs),
    VerifySandwich(VerifyArgs),
    VerifyRoynette {
        #[command(flatten)]
        args: VerifyArgs,
        #[arg(long)]
        bridge: bool,
    },
    /// Run the full verification suite into one output tree.
    VerifyAll(VerifyArgs),
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    source: Option<Source>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl VerifyArgs {
    fn settings(&self) -> Result<Settings> {
        let mut s = self.common.settings()?;
        s.set("process", self.source.map(Source::process))?;
        Ok(s)
    }
}

enum Outcome {
    Done,
    Failed,
}

pub fn main() -> ExitCode {
    run(std::env::args_os())
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            eprintln!("{line}");
            return ExitCode::from(1);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    match dispatch(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::SimulateEmpirical { common, source, out } => {
            let mut s = common.settings()?;
            s.set("process", source.map(Source::process))?;
            simulate_empirical(&s.experiment()?, &out)
        }
        Command::SimulateBm { common, bridge, out } => simulate_bm(&common.settings()?.experiment()?, bridge, &out),
        Command::Coeffs { path, out, .. } => coeffs(&path, &out),
        Command::Norm { common, coeffs, profile, out } => {
            norm(&common.settings()?.experiment()?, &coeffs, profile.as_deref(), out.as_deref())
        }
        Command::VerifyMoments(a) => {
            let (config, ex) = (a.settings()?.experiment()?, a.common.executor()?);
            let report = run_moment_experiment(&config, &ex)?;
            emit_moments(&a.out, "moments", &report)?;
            Ok(outcome(report.pass))
        }
        Command::VerifyConcentration(a) => {
            let (config, ex) = (a.settings()?.experiment()?, a.common.executor()?);
            let report = run_concentration_experiment(&config, &ex)?;
            emit_concentration(&a.out, "concentration", &report)?;
            Ok(outcome(report.pass))
        }
        Command::VerifySandwich(a) => {
            let (config, ex) = (a.settings()?.experiment()?, a.common.executor()?);
            let report = run_sandwich_experiment(&config, &ex)?;
            emit_band(&a.out, "sandwich", &report)?;
            Ok(outcome(report.pass))
        }
        Command::VerifyRoynette { args, bridge } => {
            let mut s = args.settings()?;
            if bridge {
                s.set("process", Some(ProcessKind::Bridge))?;
            }
            s.set_default("process", ProcessKind::Brownian)?;
            let (config, ex) = (s.experiment()?, args.common.executor()?);
            let report = run_roynette_experiment(&config, &ex)?;
            emit_band(&args.out, "roynette", &report)?;
            Ok(outcome(report.pass))
        }
        Command::VerifyAll(a) => verify_all(&a),
    }
}

fn outcome(pass: bool) -> Outcome {
    if pass {
        Outcome::Done
    } else {
        Outcome::Failed
    }
}

/// Metadata attached to `simulate-empirical` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMetadata {
    pub n: usize,
    pub seed: u64,
    pub source: CdfVersion,
    pub sup_distance: f64,
}

/// Reads the metadata block of a `simulate-empirical` file.
pub fn read_empirical_metadata(path: &Path) -> Result<EmpiricalMetadata> {
    let value: serde_json::Value = read_json(path)?;
    let meta = value.get("metadata").ok_or_else(|| Error::Malformed("no metadata block".into()))?;
    Ok(serde_json::from_value(meta.clone())?)
}

fn simulate_empirical(config: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let version = config.process.cdf_version().ok_or_else(|| Error::setting("process", "must be empirical"))?;
    if config.n < 2 {
        return Err(Error::setting("n", format!("must be at least 2 (got {})", config.n)));
    }
    if !(1..=20).contains(&config.j_max) {
        return Err(Error::setting("j_max", format!("must lie in 1..=20 (got {})", config.j_max)));
    }
    let sample = sample_uniform(config.n, SeedSpec::new(config.seed, 0, Substream::Uniform))?;
    let coeffs = empirical_coefficients(&sample, config.j_max, version)?;
    let sup_distance = ContinuousEcdf::new(sample)?.sup_distance();
    let mut doc = serde_json::to_value(&coeffs)?;
    doc["metadata"] =
        serde_json::to_value(EmpiricalMetadata { n: config.n, seed: config.seed, source: version, sup_distance })?;
    write_json(out, &doc)?;
    info!("wrote {}", out.display());
    Ok(Outcome::Done)
}

/// Layout of `simulate-bm` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDocument {
    #[serde(rename = "J")]
    pub level: u32,
    pub values: Vec<f64>,
    pub kind: PathKind,
    pub seed: u64,
    pub coefficients: CoefficientTriangle,
}

fn simulate_bm(config: &ExperimentConfig, bridge: bool, out: &Path) -> Result<Outcome> {
    if !(1..=MAX_PATH_LEVEL).contains(&config.j_max) {
        return Err(Error::setting("j_max", format!("must lie in 1..={MAX_PATH_LEVEL} (got {})", config.j_max)));
    }
    let motion = brownian_motion(config.j_max, SeedSpec::new(config.seed, 0, Substream::Gaussian))?;
    let path = if bridge { brownian_bridge(&motion)? } else { motion };
    let doc = PathDocument {
        level: config.j_max,
        values: path.path().values().to_vec(),
        kind: path.kind(),
        seed: config.seed,
        coefficients: gaussian_coefficients(&path)?,
    };
    write_json(out, &doc)?;
    info!("wrote {}", out.display());
    Ok(Outcome::Done)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Loads a triangle from JSON or, for `.csv` files, the flat CSV layout.
pub fn load_triangle(path: &Path) -> Result<CoefficientTriangle> {
    if is_csv(path) {
        read_triangle_csv(fs::File::open(path)?)
    } else {
        read_triangle_json(path)
    }
}

pub fn save_triangle(path: &Path, t: &CoefficientTriangle) -> Result<()> {
    if is_csv(path) {
        write_triangle_csv(std::io::BufWriter::new(fs::File::create(path)?), t)
    } else {
        write_json(path, t)
    }
}

fn coeffs(path: &Path, out: &Path) -> Result<Outcome> {
    let values: DyadicPathValues = read_json(path)?;
    save_triangle(out, &extract_coefficients(&values)?)?;
    Ok(Outcome::Done)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub p: f64,
    pub alpha: f64,
    #[serde(rename = "J")]
    pub max_level: u32,
    pub norm: f64,
    pub profile: LevelProfile,
}

fn norm(config: &ExperimentConfig, coeffs: &Path, profile_out: Option<&Path>, out: Option<&Path>) -> Result<Outcome> {
    let params = BesovParams::new(config.p, config.alpha)?;
    let t = load_triangle(coeffs)?;
    let value = besov_norm(&t, params);
    let profile = LevelProfile::from_statistics(level_statistics(&t, params));
    if let Some(path) = profile_out {
        write_profile_csv(path, &profile)?;
    }
    if let Some(path) = out {
        write_json(
            path,
            &NormReport { p: config.p, alpha: config.alpha, max_level: t.max_level(), norm: value, profile },
        )?;
    }
    println!("{value}");
    Ok(Outcome::Done)
}

fn emit_moments(dir: &Path, name: &str, report: &MomentReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join(format!("{name}.json")), report)?;
    write_rows(&dir.join(format!("{name}_cells.csv")), MOMENT_CELL_HEADER, &report.cells)?;
    write_rows(&dir.join(format!("{name}_levels.csv")), MOMENT_LEVEL_HEADER, &report.levels)?;
    write_rows(&dir.join(format!("{name}_oracle.csv")), ORACLE_CHECK_HEADER, &oracle_check_rows(report))
}

fn emit_concentration(dir: &Path, name: &str, report: &ConcentrationReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join(format!("{name}.json")), report)?;
    write_rows(&dir.join(format!("{name}.csv")), CONCENTRATION_HEADER, &concentration_rows(report))
}

fn emit_band(dir: &Path, name: &str, report: &SandwichReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join(format!("{name}.json")), report)?;
    write_rows(&dir.join(format!("{name}_levels.csv")), BAND_LEVEL_HEADER, &report.levels)?;
    write_rows(&dir.join(format!("{name}_replicates.csv")), REPLICATE_HEADER, &report.replicate_profiles)?;
    if let Some(cmp) = &report.version_comparison {
        write_rows(&dir.join(format!("{name}_versions.csv")), COMPARISON_HEADER, cmp)?;
    }
    Ok(())
}

/// Relative tolerance for motion/bridge report agreement.
pub const MOTION_BRIDGE_TOLERANCE: f64 = 1e-9;

/// Pass flags of a `verify-all` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub identities: bool,
    pub variance_mismatch_flag: bool,
    pub moments: bool,
    pub concentration: bool,
    pub sandwich: bool,
    pub roynette_motion: bool,
    pub roynette_bridge: bool,
    pub motion_bridge_identical: bool,
    pub pass: bool,
}

fn verify_all(a: &VerifyArgs) -> Result<Outcome> {
    let s = a.settings()?;
    let empirical = s.experiment()?;
    empirical.validate()?;
    if empirical.process.is_gaussian() {
        return Err(Error::setting("process", "verify-all takes an empirical process"));
    }
    let mut gaussian =
        ExperimentConfig { process: ProcessKind::Brownian, j_max: s.gaussian_j_max()?, ..empirical.clone() };
    gaussian.validate()?;
    let ex = a.common.executor()?;
    let dir = &a.out;
    fs::create_dir_all(dir)?;

    info!("oracle identities");
    let identities = identity_rows(5, 2)?;
    write_rows(&dir.join("oracle_identities.csv"), IDENTITY_HEADER, &identities)?;
    let identities_hold = identities.iter().all(|r| r.mean_h_identity && r.pair_identity);

    info!("moments");
    let moments = run_moment_experiment(&empirical, &ex)?;
    emit_moments(dir, "moments", &moments)?;
    info!("concentration");
    let concentration = run_concentration_experiment(&empirical, &ex)?;
    emit_concentration(dir, "concentration", &concentration)?;
    info!("sandwich");
    let sandwich = run_sandwich_experiment(&empirical, &ex)?;
    emit_band(dir, "sandwich", &sandwich)?;
    info!("roynette");
    let motion = run_roynette_experiment(&gaussian, &ex)?;
    emit_band(dir, "roynette_motion", &motion)?;
    gaussian.process = ProcessKind::Bridge;
    let bridge = run_roynette_experiment(&gaussian, &ex)?;
    emit_band(dir, "roynette_bridge", &bridge)?;

    let identical = motion.agrees_with(&bridge, MOTION_BRIDGE_TOLERANCE);
    let mut summary = Summary {
        seed: empirical.seed,
        identities: identities_hold,
        variance_mismatch_flag: identities.iter().any(|r| r.variance_mismatch),
        moments: moments.pass,
        concentration: concentration.pass,
        sandwich: sandwich.pass,
        roynette_motion: motion.pass,
        roynette_bridge: bridge.pass,
        motion_bridge_identical: identical,
        pass: false,
    };
    summary.pass = summary.identities
        && summary.moments
        && summary.concentration
        && summary.sandwich
        && summary.roynette_motion
        && summary.roynette_bridge
        && summary.motion_bridge_identical;
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(outcome(summary.pass))
}
