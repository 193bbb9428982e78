//! Subcommands behind the `stochexp` binary.
//!
//! Exit codes: 0 success, 1 statistical failure, 2 Novikov divergence,
//! 64 configuration or usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{Format, RunConfig, Scheme};
use crate::error::Error;
use crate::estimators::{self, EstimateReport, MartingaleTestReport, SubmartingaleScan};
use crate::export;
use crate::paths::{self, hex};
use crate::psi::{self, NovikovVerdict};
use crate::wick;

pub const EXIT_OK: i32 = 0;
pub const EXIT_STAT_FAIL: i32 = 1;
pub const EXIT_DIVERGENT: i32 = 2;
pub const EXIT_CONFIG: i32 = 64;

const INCREMENT_TEST_BINS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Self { code, stdout, stderr: String::new() }
    }

    fn from_error(e: &Error) -> Self {
        let code = match e {
            Error::Divergent { .. } => EXIT_DIVERGENT,
            _ => EXIT_CONFIG,
        };
        Self { code, stdout: String::new(), stderr: format!("error: {e}\n") }
    }
}

#[derive(Debug, Parser)]
#[command(name = "stochexp", version, about = "Martingale checks for the stochastic exponential")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether exp(½φ(T)) is finite.
    Novikov(Overrides),
    /// Simulate paths and write CSV and binary dumps.
    Simulate(Overrides),
    /// Run the statistical checks and write one report.
    Estimate(Overrides),
    /// Print the truncated MGF/CGF series and the log-relation check.
    Wick {
        #[command(flatten)]
        overrides: Overrides,
        /// Truncation order M (even, 2..=14).
        #[arg(long, default_value_t = 14)]
        order: usize,
    },
}

#[derive(Debug, Args)]
struct Overrides {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "n-paths")]
    n_paths: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, value_enum)]
    scheme: Option<Scheme>,
    /// Moment order; repeat for several.
    #[arg(long = "p")]
    p: Vec<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long = "out")]
    out: Option<PathBuf>,
    /// Pair every path with its sign-flipped twin.
    #[arg(long)]
    antithetic: bool,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
                RunConfig::from_json(&text)?
            }
            None => RunConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.n_paths {
            cfg.n_paths = v;
        }
        if let Some(v) = self.steps {
            cfg.steps = v;
        }
        if let Some(v) = self.horizon {
            cfg.horizon = v;
        }
        if let Some(v) = self.scheme {
            cfg.scheme = v;
        }
        if !self.p.is_empty() {
            cfg.p_values = self.p.clone();
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        if self.antithetic {
            cfg.antithetic = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
            return Outcome { code, stdout: String::new(), stderr: e.render().to_string() };
        }
    };
    let (overrides, order) = match &cli.command {
        Command::Novikov(o) | Command::Simulate(o) | Command::Estimate(o) => (o, None),
        Command::Wick { overrides, order } => (overrides, Some(*order)),
    };
    let cfg = match overrides.resolve() {
        Ok(c) => c,
        Err(e) => return Outcome::from_error(&e),
    };
    let exec = || match &cli.command {
        Command::Novikov(_) => cmd_novikov(&cfg),
        Command::Simulate(_) => cmd_simulate(&cfg),
        Command::Estimate(_) => cmd_estimate(&cfg),
        Command::Wick { .. } => cmd_wick(&cfg, order.unwrap_or(wick::MAX_ORDER)),
    };
    match overrides.workers {
        Some(0) => Outcome::from_error(&Error::InvalidArgument("--workers must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(exec),
            Err(e) => Outcome::from_error(&Error::InvalidArgument(e.to_string())),
        },
        None => exec(),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes `bytes` next to `path` and renames over it, so readers never see
/// a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::InvalidArgument("empty output path".into()))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::from(e)
    })
}

pub fn cmd_novikov(cfg: &RunConfig) -> Outcome {
    match psi::novikov_check(&cfg.psi, cfg.horizon) {
        Ok(r) => {
            let code = match r.verdict {
                NovikovVerdict::Finite => EXIT_OK,
                NovikovVerdict::Divergent => EXIT_DIVERGENT,
            };
            Outcome::ok(code, to_json(&r))
        }
        Err(e) => Outcome::from_error(&e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationManifest {
    pub seed: u64,
    pub stream: u64,
    pub scheme: Scheme,
    pub antithetic: bool,
    pub n_paths: usize,
    pub steps: usize,
    pub horizon: f64,
    pub increments_checksum: String,
    pub z_checksum: String,
    pub csv_sha256: String,
    pub nonpositive: usize,
    pub files: Vec<String>,
}

pub fn cmd_simulate(cfg: &RunConfig) -> Outcome {
    match simulate_inner(cfg) {
        Ok(m) => Outcome::ok(EXIT_OK, to_json(&m)),
        Err(e) => Outcome::from_error(&e),
    }
}

fn simulate_inner(cfg: &RunConfig) -> Result<SimulationManifest, Error> {
    let grid = cfg.grid()?;
    let bundle = paths::simulate(&cfg.psi, &grid, cfg.n_paths, cfg.seed_spec(), cfg.scheme, cfg.antithetic)?;
    let mut csv = Vec::new();
    export::write_csv(&bundle, &mut csv)?;
    let mut bin = Vec::new();
    export::write_binary(&bundle, &mut bin)?;
    let dir = &cfg.output_dir;
    write_atomic(&dir.join("paths.csv"), &csv)?;
    write_atomic(&dir.join("paths.bin"), &bin)?;
    let manifest = SimulationManifest {
        seed: bundle.seed.seed,
        stream: bundle.seed.stream,
        scheme: bundle.scheme,
        antithetic: bundle.antithetic,
        n_paths: bundle.n_paths,
        steps: grid.n_steps(),
        horizon: grid.horizon(),
        increments_checksum: bundle.increments.checksum(),
        z_checksum: bundle.z.checksum(),
        csv_sha256: hex(&Sha256::digest(&csv)),
        nonpositive: bundle.nonpositive,
        files: vec!["paths.csv".into(), "paths.bin".into()],
    };
    write_atomic(&dir.join("manifest.json"), to_json(&manifest).as_bytes())?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateDocument {
    pub config: RunConfig,
    pub mean_z: EstimateReport,
    pub p_moments: Vec<EstimateReport>,
    pub martingale_test: Option<MartingaleTestReport>,
    pub submartingale: Vec<SubmartingaleScan>,
    pub skipped: Vec<String>,
    pub all_pass: bool,
}

pub fn cmd_estimate(cfg: &RunConfig) -> Outcome {
    let doc = match estimate_document(cfg) {
        Ok(d) => d,
        Err(e) => return Outcome::from_error(&e),
    };
    let (name, body) = match cfg.format {
        Format::Json => ("estimate_report.json", to_json(&doc)),
        Format::Csv => {
            let mut rows: Vec<&EstimateReport> = vec![&doc.mean_z];
            rows.extend(doc.p_moments.iter());
            for scan in &doc.submartingale {
                rows.extend(scan.profile.iter().map(|n| &n.estimate));
            }
            ("estimate_report.csv", estimators::reports_to_csv(&rows))
        }
    };
    if let Err(e) = write_atomic(&cfg.output_dir.join(name), body.as_bytes()) {
        return Outcome::from_error(&e);
    }
    let code = if doc.all_pass { EXIT_OK } else { EXIT_STAT_FAIL };
    Outcome::ok(code, body)
}

/// Runs every estimator on one bundle drawn from `cfg`.
pub fn estimate_document(cfg: &RunConfig) -> Result<EstimateDocument, Error> {
    let grid = cfg.grid()?;
    let bundle = paths::simulate(&cfg.psi, &grid, cfg.n_paths, cfg.seed_spec(), cfg.scheme, cfg.antithetic)?;
    let last = grid.n_steps();
    let mean_z = estimators::estimate_mean_z(&bundle, last)?;
    let p_moments =
        cfg.p_values.iter().map(|&p| estimators::estimate_p_moment(&bundle, last, p)).collect::<Result<Vec<_>, _>>()?;

    let mut skipped = Vec::new();
    let s_index = grid.nearest_index(0.5 * grid.horizon());
    let martingale_test = if s_index == 0 {
        skipped.push("martingale increment test: grid has no interior node near T/2".into());
        None
    } else if bundle.n_paths < estimators::MIN_INCREMENT_TEST_PATHS {
        skipped
            .push(format!("martingale increment test: needs at least {} paths", estimators::MIN_INCREMENT_TEST_PATHS));
        None
    } else {
        Some(estimators::martingale_increment_test(&bundle, s_index, last, INCREMENT_TEST_BINS)?)
    };

    let submartingale = cfg
        .p_values
        .iter()
        .filter(|&&p| p > 1.0)
        .map(|&p| estimators::scan_bundle(&bundle, p))
        .collect::<Result<Vec<_>, _>>()?;

    let all_pass = mean_z.pass == Some(true)
        && p_moments.iter().all(|r| r.pass == Some(true))
        && martingale_test.as_ref().is_none_or(|m| m.pass)
        && submartingale.iter().all(|s| s.statistical_pass);
    Ok(EstimateDocument { config: cfg.clone(), mean_z, p_moments, martingale_test, submartingale, skipped, all_pass })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WickDocument {
    pub t: f64,
    pub order: usize,
    pub mgf: wick::SeriesTruncation,
    pub cgf: wick::SeriesTruncation,
    pub log_relation: wick::LogRelation,
}

pub fn cmd_wick(cfg: &RunConfig, order: usize) -> Outcome {
    if !(2..=wick::MAX_ORDER).contains(&order) || order % 2 == 1 {
        return Outcome::from_error(&Error::InvalidArgument(format!(
            "--order must be even and in 2..={}, got {order}",
            wick::MAX_ORDER
        )));
    }
    let doc = (|| -> Result<WickDocument, Error> {
        let t = cfg.horizon;
        Ok(WickDocument {
            t,
            order,
            mgf: wick::mgf_truncated(&cfg.psi, t, order)?,
            cgf: wick::cgf_truncated(&cfg.psi, t, order)?,
            log_relation: wick::check_log_relation(&cfg.psi, t, order)?,
        })
    })();
    match doc {
        Ok(d) => {
            let code = if d.log_relation.pass { EXIT_OK } else { EXIT_STAT_FAIL };
            Outcome::ok(code, to_json(&d))
        }
        Err(e) => Outcome::from_error(&e),
    }
}
