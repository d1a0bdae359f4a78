//! `qpc`: rates, sweeps, optimization, bound tables, resource counts and
//! self-checks for parity-code repeater chains.
//!
//! Values come from built-in defaults, then an optional JSON config file, then
//! command-line flags. Exit codes: 0 success, 1 runtime failure, 2 config
//! error, 3 self-check failure.

mod commands;
mod config;
mod error;
mod selfcheck;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use commands::{Report, Table};
use config::{Axis, Detector, Format, ModelKind, ObjectiveKind, RunConfig, Tie};
use error::CliError;
use qpc_repeater::CodeParams;

#[derive(Parser, Debug)]
#[command(name = "qpc", version, about = "Parity-code repeater chain calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Single-point evaluation.
    Rates {
        /// Include the physical, block and logical matrices.
        #[arg(long)]
        matrices: bool,
    },
    /// Vary one parameter and tabulate rates and bounds.
    Sweep(SweepArgs),
    /// Grid search over codes and spacings.
    Optimize(OptimizeArgs),
    /// Per-mode rate against repeaterless bounds along the chain length.
    Bounds(BoundsArgs),
    /// Source and module counts for encoded Bell states.
    Resources(ResourceArgs),
    /// Run the built-in invariant checks.
    Selfcheck {
        #[arg(value_enum, default_value = "quick")]
        level: selfcheck::Level,
    },
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    model: Option<ModelKind>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    m: Option<usize>,
    #[arg(long = "l0-km", global = true)]
    l0_km: Option<f64>,
    #[arg(long = "ltot-km", global = true)]
    l_tot_km: Option<f64>,
    #[arg(long = "latt-km", global = true)]
    l_att_km: Option<f64>,
    #[arg(long = "eta-d", global = true)]
    eta_d: Option<f64>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long = "p-adv", global = true)]
    p_adv: Option<f64>,
    #[arg(long, global = true)]
    nbar: Option<f64>,
    #[arg(long, global = true)]
    kappa: Option<usize>,
    #[arg(long, global = true, value_enum)]
    tie: Option<Tie>,
    #[arg(long, global = true, value_enum)]
    detector: Option<Detector>,
    #[arg(long, global = true, value_enum)]
    objective: Option<ObjectiveKind>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: Option<Axis>,
    #[arg(long)]
    from: Option<f64>,
    #[arg(long)]
    to: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Explicit comma-separated values; overrides the range.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<f64>>,
    /// Comma-separated codes written `n:m`.
    #[arg(long, value_delimiter = ',', value_parser = parse_code)]
    codes: Option<Vec<CodeParams>>,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    #[arg(long = "n-max")]
    n_max: Option<usize>,
    #[arg(long = "m-max")]
    m_max: Option<usize>,
    #[arg(long = "l0-min-km")]
    l0_min_km: Option<f64>,
    #[arg(long = "l0-max-km")]
    l0_max_km: Option<f64>,
    #[arg(long = "l0-step-km")]
    l0_step_km: Option<f64>,
    /// Report every evaluated point.
    #[arg(long)]
    grid: bool,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[arg(long = "ltot-from")]
    from: Option<f64>,
    #[arg(long = "ltot-to")]
    to: Option<f64>,
    #[arg(long = "ltot-step")]
    step: Option<f64>,
}

#[derive(Args, Debug)]
struct ResourceArgs {
    #[arg(long = "p-bm")]
    p_bm: Option<f64>,
    #[arg(long = "eta-sg")]
    eta_sg: Option<f64>,
    #[arg(long = "p-sg")]
    p_sg: Option<f64>,
    #[arg(long = "n-bm-boost")]
    n_bm_boost: Option<u32>,
}

fn parse_code(s: &str) -> Result<CodeParams, String> {
    let (n, m) = s.split_once(':').ok_or_else(|| format!("`{s}` is not of the form n:m"))?;
    let n = n.trim().parse().map_err(|e| format!("n in `{s}`: {e}"))?;
    let m = m.trim().parse().map_err(|e| format!("m in `{s}`: {e}"))?;
    CodeParams::new(n, m).map_err(|e| e.to_string())
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Defaults, then the file, then the flags.
fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let a = &cli.common;
    let mut c = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    set(&mut c.model, a.model);
    set(&mut c.n, a.n);
    set(&mut c.m, a.m);
    set(&mut c.l0_km, a.l0_km);
    set(&mut c.l_tot_km, a.l_tot_km);
    set(&mut c.l_att_km, a.l_att_km);
    set(&mut c.eta_d, a.eta_d);
    set(&mut c.epsilon, a.eps);
    set(&mut c.p_adv, a.p_adv);
    set(&mut c.nbar, a.nbar);
    set(&mut c.tie, a.tie);
    set(&mut c.objective, a.objective);
    set(&mut c.format, a.format);
    set(&mut c.seed, a.seed);
    if a.kappa.is_some() {
        c.kappa = a.kappa;
    }
    if a.detector.is_some() {
        c.detector = a.detector;
    }
    if a.threads.is_some() {
        c.threads = a.threads;
    }
    match &cli.command {
        Command::Rates { matrices } => c.include_matrices |= *matrices,
        Command::Sweep(s) => {
            set(&mut c.sweep.axis, s.axis);
            set(&mut c.sweep.start, s.from);
            set(&mut c.sweep.stop, s.to);
            set(&mut c.sweep.step, s.step);
            if s.values.is_some() {
                c.sweep.values = s.values.clone();
            }
            set(&mut c.sweep.codes, s.codes.clone());
        }
        Command::Optimize(o) => {
            set(&mut c.search.n_max, o.n_max);
            set(&mut c.search.m_max, o.m_max);
            set(&mut c.search.l0_min_km, o.l0_min_km);
            set(&mut c.search.l0_max_km, o.l0_max_km);
            set(&mut c.search.l0_step_km, o.l0_step_km);
            c.search.include_grid |= o.grid;
        }
        Command::Bounds(b) => {
            set(&mut c.bounds.l_tot_start_km, b.from);
            set(&mut c.bounds.l_tot_stop_km, b.to);
            set(&mut c.bounds.l_tot_step_km, b.step);
        }
        Command::Resources(r) => {
            set(&mut c.resources.p_bm, r.p_bm);
            set(&mut c.resources.eta_sg, r.eta_sg);
            set(&mut c.resources.p_sg, r.p_sg);
            set(&mut c.resources.n_bm_boost, r.n_bm_boost);
        }
        Command::Selfcheck { .. } => {}
    }
    c.resolve();
    Ok(c)
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    match threads {
        Some(0) => Err(CliError::Config("threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}"))),
        None => Ok(()),
    }
}

fn render(report: &Report, cfg: &RunConfig) -> Result<String, CliError> {
    match cfg.format {
        Format::Json => {
            let doc = json!({
                "command": report.command,
                "config": cfg,
                "result": report.result,
            });
            Ok(serde_json::to_string_pretty(&doc)? + "\n")
        }
        Format::Csv => render_csv(&report.table),
    }
}

fn render_csv(table: &Table) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header).map_err(csv_error)?;
    for row in &table.rows {
        w.write_record(row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn selfcheck_report(summary: &selfcheck::Summary) -> Report {
    Report {
        command: "selfcheck",
        result: serde_json::to_value(summary).unwrap_or_default(),
        table: Table {
            header: vec!["check", "passed", "detail"],
            rows: summary
                .checks
                .iter()
                .map(|c| vec![c.name.to_string(), c.passed.to_string(), c.detail.clone()])
                .collect(),
        },
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    configure_threads(cfg.threads)?;
    let report = match &cli.command {
        Command::Rates { .. } => commands::rates(&cfg)?,
        Command::Sweep(_) => commands::sweep(&cfg)?,
        Command::Optimize(_) => commands::optimize(&cfg)?,
        Command::Bounds(_) => commands::bounds(&cfg)?,
        Command::Resources(_) => commands::resources(&cfg)?,
        Command::Selfcheck { level } => {
            let summary = selfcheck::run(*level, cfg.seed);
            emit(&render(&selfcheck_report(&summary), &cfg)?, cli.common.out.as_ref())?;
            return match summary.first_failure {
                Some(name) => Err(CliError::SelfCheck(name.to_string())),
                None => Ok(()),
            };
        }
    };
    emit(&render(&report, &cfg)?, cli.common.out.as_ref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let diag = json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{diag}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use commands::num;

    #[test]
    fn codes_parse() {
        assert_eq!(parse_code("10:3").unwrap(), CodeParams::new(10, 3).unwrap());
        assert!(parse_code("10x3").is_err());
        assert!(parse_code("0:3").is_err());
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        let x = 0.1 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn flags_override_file_values() {
        let dir = std::env::temp_dir().join(format!("qpc-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"n": 10, "m": 3, "l0_km": 1.5}"#).unwrap();
        let cli = Cli::parse_from(["qpc", "rates", "--config", path.to_str().unwrap(), "--n", "12"]);
        let c = resolve_config(&cli).unwrap();
        assert_eq!((c.n, c.m, c.l0_km), (12, 3, 1.5));
        std::fs::remove_dir_all(dir).ok();
    }
}
