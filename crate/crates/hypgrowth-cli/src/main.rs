//! `hypgrowth --config exp.json [--mode paper|practical] [--budget N] [--out DIR] [--seed S]`
//!
//! Writes `<out>/<name>.json` and `<out>/<name>.csv` and exits with 0 (ok),
//! 1 (verify-all failure), 2 (certified-bound violation), 3 (budget
//! truncation) or 4 (config error, diagnostics as JSON on stderr).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hypgrowth::config::{run, ConfigError, ExperimentConfig, Report};
use hypgrowth::mode::Mode;
use serde_json::json;

const CONFIG_ERROR: u8 = 4;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Paper,
    Practical,
}

#[derive(Debug, Parser)]
#[command(name = "hypgrowth", version, about = "Product-set growth experiments")]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's mode. `practical` keeps any practical
    /// overrides present in the config.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Maximal number of distinct elements per product set.
    #[arg(long)]
    budget: Option<usize>,
    /// Output directory; overrides `output.dir`. Default `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random sets and the verify-all suite.
    #[arg(long)]
    seed: Option<u64>,
}

fn diagnose(kind: &str, message: String) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(CONFIG_ERROR)
}

fn load(args: &Args) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", args.config.display())))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    match (args.mode, &config.mode) {
        (Some(ModeArg::Paper), _) => config.mode = Mode::Paper,
        (Some(ModeArg::Practical), Mode::Paper) => config.mode = Mode::default(),
        _ => {}
    }
    if args.budget.is_some() {
        config.budget = args.budget;
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if let Some(out) = &args.out {
        config.output.dir = Some(out.display().to_string());
    }
    config.validate()?;
    Ok(config)
}

fn write_report(dir: &Path, name: &str, report: &Report) -> Result<(), Box<dyn std::error::Error>> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(dir.join(format!("{name}.json")), text)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(dir.join(format!("{name}.csv")))?;
    w.write_record(["n", "size", "exponent", "bound", "bound_approx", "holds"])?;
    for row in &report.sizes {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match load(&args) {
        Ok(c) => c,
        Err(e) => return diagnose("config", e.to_string()),
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => return diagnose("config", e.to_string()),
    };
    let dir = PathBuf::from(config.output.dir.as_deref().unwrap_or("out"));
    let name = config.output.name.as_deref().unwrap_or("report");
    if let Err(e) = write_report(&dir, name, &report) {
        return diagnose("output", e.to_string());
    }
    for line in &report.case_trace {
        println!("{line}");
    }
    println!("status: {:?} ({})", report.status, dir.join(format!("{name}.json")).display());
    ExitCode::from(report.status.exit_code() as u8)
}
