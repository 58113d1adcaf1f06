//! Command-line front end: constant tables, experiment runs and the
//! verification suites.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{run_experiment, samples_to_text, to_csv, to_json, write_atomic, ExperimentConfig};
use crate::model::{alpha, constant_c0, constant_cdky, limit_probability, theta, RadiusLaw, ScalingSchedule, ScheduleVariant};
use crate::verify::{verify_constants, verify_oracle, verify_predicates, SuiteReport};

#[derive(Debug, Parser)]
#[command(name = "spbm", version, about = "Coverage studies of spherical Poisson Boolean models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    #[default]
    Table,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Predicates,
    Oracle,
    Constants,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the model constants for one dimension, order and mark law.
    Constants {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
        d: u32,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        k: u32,
        /// det:<c>, unif:<a>:<b> or disc:<v1>@<w1>,<v2>@<w2>,...
        #[arg(long)]
        law: RadiusLaw,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        beta: f64,
        /// Volume of the region for the limit probability.
        #[arg(long, default_value_t = 1.0)]
        area: f64,
        #[arg(long, value_enum, default_value_t)]
        format: TableFormat,
    },
    /// Run the studies of a configuration file and write the report.
    Run {
        /// JSON configuration, or a CSV report whose first line echoes one.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Report path; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Path for the raw threshold samples.
        #[arg(long)]
        samples_out: Option<PathBuf>,
    },
    /// Run a cross-validation suite; exits nonzero if any check fails.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Samples or configurations per check.
        #[arg(long)]
        n: Option<usize>,
        /// Restrict to one dimension.
        #[arg(long)]
        d: Option<usize>,
        /// Random instances for the oracle suite.
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        /// Grid nodes per axis for the oracle suite.
        #[arg(long, default_value_t = 1024)]
        resolution: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Where and how a run writes its report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub samples_out: Option<PathBuf>,
}

/// Configuration file of `run`: an experiment block and an optional output
/// block. A bare experiment object is accepted as well.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub output: OutputSpec,
}

const ECHO_PREFIX: &str = "# config: ";

impl RunConfig {
    /// Parses and validates; errors carry the line and column for syntax or
    /// schema problems.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim_start_matches('\u{feff}');
        let cfg = if let Some(rest) = text.strip_prefix(ECHO_PREFIX) {
            let line = rest.lines().next().unwrap_or("");
            RunConfig {
                experiment: serde_json::from_str(line)?,
                output: OutputSpec::default(),
            }
        } else {
            let value: serde_json::Value = serde_json::from_str(text)?;
            if value.get("experiment").is_some() {
                serde_json::from_str(text)?
            } else {
                RunConfig {
                    experiment: serde_json::from_str(text)?,
                    output: OutputSpec::default(),
                }
            }
        };
        cfg.experiment.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Serialize)]
struct ConstantsRow {
    d: u32,
    k: u32,
    law: String,
    beta: f64,
    area: f64,
    theta_d: f64,
    alpha: f64,
    c_dky: f64,
    c0: f64,
    limit_prob: f64,
}

/// How a command ended.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Checks ran but some failed.
    ChecksFailed,
}

fn emit(out: &mut dyn Write, s: &str) -> Result<()> {
    out.write_all(s.as_bytes())?;
    Ok(())
}

fn suite_result(report: SuiteReport, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    emit(out, &report.to_string())?;
    if report.passed() {
        return Ok(Outcome::Success);
    }
    for c in report.failures() {
        writeln!(err, "failed: {} ({})", c.name, c.margin)?;
    }
    Ok(Outcome::ChecksFailed)
}

/// Runs one parsed command.
pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    match cli.command {
        Command::Constants {
            d,
            k,
            law,
            beta,
            area,
            format,
        } => {
            law.validate()?;
            if !(area > 0.0 && area.is_finite()) {
                return Err(Error::Config(format!("area must be positive, got {area}")));
            }
            let sched = ScalingSchedule::new(d as usize, k as usize, beta, ScheduleVariant::HallJanson)?;
            let du = d as usize;
            let row = ConstantsRow {
                d,
                k,
                law: law.to_string(),
                beta,
                area,
                theta_d: theta(du),
                alpha: alpha(du, &law),
                c_dky: constant_cdky(du, k as usize, &law),
                c0: constant_c0(du, &law),
                limit_prob: limit_probability(&sched, &law, area),
            };
            match format {
                TableFormat::Json => emit(out, &format!("{}\n", serde_json::to_string_pretty(&row)?))?,
                TableFormat::Table => {
                    let lines = [
                        ("d", row.d.to_string()),
                        ("k", row.k.to_string()),
                        ("law", row.law.clone()),
                        ("beta", row.beta.to_string()),
                        ("area", row.area.to_string()),
                        ("theta_d", row.theta_d.to_string()),
                        ("alpha", row.alpha.to_string()),
                        ("c_dky", row.c_dky.to_string()),
                        ("c0", row.c0.to_string()),
                        ("limit_prob", row.limit_prob.to_string()),
                    ];
                    for (name, v) in lines {
                        writeln!(out, "{name:<11}{v}")?;
                    }
                }
            }
            Ok(Outcome::Success)
        }
        Command::Run {
            config,
            seed,
            workers,
            format,
            out: out_path,
            samples_out,
        } => {
            let mut rc = RunConfig::load(&config)?;
            if let Some(s) = seed {
                rc.experiment.seed = s;
            }
            if let Some(w) = workers {
                rc.experiment.workers = w;
            }
            if let Some(f) = format {
                rc.output.format = f;
            }
            if out_path.is_some() {
                rc.output.out = out_path;
            }
            if samples_out.is_some() {
                rc.output.samples_out = samples_out;
            }
            rc.experiment.validate()?;
            let report = run_experiment(&rc.experiment)?;
            let text = match rc.output.format {
                Format::Csv => {
                    let mut s = to_csv(&report)?;
                    if let Some(fit) = &report.rate_fit {
                        s.push_str(&format!("# rate_fit: {}\n", serde_json::to_string(fit)?));
                    }
                    for w in &report.warnings {
                        s.push_str(&format!("# warning: {w}\n"));
                    }
                    s
                }
                Format::Json => to_json(&report)?,
            };
            match &rc.output.out {
                Some(p) => write_atomic(p, &text)?,
                None => emit(out, &text)?,
            }
            if let Some(p) = &rc.output.samples_out {
                write_atomic(p, &samples_to_text(&report.threshold_samples))?;
            }
            for w in &report.warnings {
                writeln!(err, "warning: {w}")?;
            }
            Ok(Outcome::Success)
        }
        Command::Verify {
            suite,
            n,
            d,
            instances,
            resolution,
            seed,
        } => {
            let dims: Vec<usize> = match d {
                Some(d) if d == 2 || d == 3 => vec![d],
                Some(d) => return Err(Error::UnsupportedDimension(d)),
                None => vec![2, 3],
            };
            let report = match suite {
                Suite::Predicates => verify_predicates(&dims, n.unwrap_or(100_000), seed)?,
                Suite::Oracle => verify_oracle(n.unwrap_or(instances), resolution, seed)?,
                Suite::Constants => verify_constants(&dims, n.unwrap_or(1_000_000), seed)?,
            };
            suite_result(report, out, err)
        }
    }
}
