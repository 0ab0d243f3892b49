//! `smes`: train, sweep, summarize, self-check and plot.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | self-check failure |
//! | 2 | usage error (bad flags, missing `--config`) |
//! | 3 | configuration error (unreadable or invalid config, unknown key) |
//! | 4 | divergence: the run diverged, or some sweep cells diverged or failed |
//! | 5 | I/O failure (reading records, writing outputs) |

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use smes_core::config::{self, KEYS};
use smes_core::sweep::{self, SweepOptions, SweepSummary};
use smes_core::{plot, selfcheck, Error};

/// Environment variable that replaces the default output directory.
const OUT_DIR_ENV: &str = "SMES_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "smes-out";

const EXIT_SELFCHECK: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_DIVERGED: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "smes",
    version,
    about = "Second-moment exponential scaling optimizers: training, alpha sweeps and checks",
    after_help = "Output goes to --out DIR, or $SMES_OUT_DIR, or ./smes-out.\n\
                  Exit codes: 0 ok, 1 self-check failed, 2 usage, 3 config, 4 divergence, 5 I/O."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key (repeatable), e.g. --set alpha=-0.08
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct RecordArgs {
    /// Record file (defaults to OUT/records.jsonl).
    #[arg(long)]
    records: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train one (alpha, seed) cell: the first grid alpha and first seed.
    Train(RunArgs),
    /// Run the full alpha x seed grid, resuming any completed cells in OUT.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Discard existing records instead of resuming.
        #[arg(long)]
        fresh: bool,
    },
    /// Recompute the per-alpha summary table from a record file.
    Summarize(RecordArgs),
    /// Run the embedded numerical checks.
    Selfcheck,
    /// Emit an SVG chart of mean test error vs alpha, plus its data table.
    Plot(RecordArgs),
    /// List accepted config keys.
    Keys,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn config(e: Error) -> Self {
        match e {
            Error::Io(io) => Failure::new(EXIT_CONFIG, format!("cannot read config: {io}")),
            e => Failure::new(EXIT_CONFIG, e.to_string()),
        }
    }

    fn io(e: impl std::fmt::Display) -> Self {
        Failure::new(EXIT_IO, e.to_string())
    }
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::io(format!("cannot create {}: {e}", dir.display())))
}

fn load(run: &RunArgs) -> Result<smes_core::SweepSpec, Failure> {
    let path = run
        .config
        .as_ref()
        .ok_or_else(|| Failure::new(EXIT_USAGE, "missing --config PATH\n\nUsage: smes <train|sweep> --config PATH [--set KEY=VALUE]... [--out DIR]"))?;
    config::load_config(path, &run.overrides).map_err(Failure::config)
}

fn print_summary(summary: &SweepSummary) {
    print!("{}", sweep::summary_csv(summary));
    match summary.argmin_alpha {
        Some(a) => println!("argmin alpha: {a}"),
        None => println!("argmin alpha: none (no completed runs)"),
    }
}

fn cmd_train(run: &RunArgs) -> Result<(), Failure> {
    let spec = load(run)?;
    let dir = out_dir(&run.out);
    prepare_out(&dir)?;
    let cell = spec.resolve(spec.alphas[0], spec.seeds[0]);
    let record = sweep::train_one(&cell).map_err(Failure::config)?;
    let path = dir.join("train_record.jsonl");
    sweep::write_records(std::slice::from_ref(&record), &path).map_err(Failure::io)?;
    println!("record: {}", path.display());
    match (record.final_test_err_pct, record.diverged_at_epoch) {
        (Some(err), _) => {
            println!("alpha {} seed {}: final test error {err:.2}%", record.alpha, record.seed);
            Ok(())
        }
        (None, Some(epoch)) => Err(Failure::new(
            EXIT_DIVERGED,
            format!("alpha {} seed {} diverged in epoch {epoch}", record.alpha, record.seed),
        )),
        (None, None) => Err(Failure::new(EXIT_DIVERGED, "run produced no result")),
    }
}

fn cmd_sweep(run: &RunArgs, jobs: usize, fresh: bool) -> Result<(), Failure> {
    let spec = load(run)?;
    let dir = out_dir(&run.out);
    prepare_out(&dir)?;
    let records_path = dir.join("records.jsonl");
    let options = SweepOptions {
        jobs,
        records_path: Some(records_path.clone()),
        resume: !fresh,
    };
    let outcome = sweep::run_sweep(&spec, &options).map_err(|e| match e {
        Error::Io(io) => Failure::io(io),
        e => Failure::config(e),
    })?;
    let summary_path = dir.join("summary.csv");
    std::fs::write(&summary_path, sweep::summary_csv(&outcome.summary)).map_err(Failure::io)?;
    println!(
        "{} records ({} resumed) -> {}",
        outcome.records.len(),
        outcome.resumed,
        records_path.display()
    );
    println!("summary -> {}", summary_path.display());
    print_summary(&outcome.summary);
    let (diverged, failed) = (outcome.diverged(), outcome.failed());
    if diverged + failed > 0 {
        return Err(Failure::new(
            EXIT_DIVERGED,
            format!("partial failure: {diverged} diverged, {failed} failed of {} cells", outcome.records.len()),
        ));
    }
    Ok(())
}

fn read_records(args: &RecordArgs) -> Result<(PathBuf, Vec<smes_core::RunRecord>), Failure> {
    let dir = out_dir(&args.out);
    let path = args.records.clone().unwrap_or_else(|| dir.join("records.jsonl"));
    let records = sweep::read_records(&path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    Ok((dir, records))
}

fn cmd_summarize(args: &RecordArgs) -> Result<(), Failure> {
    let (dir, records) = read_records(args)?;
    prepare_out(&dir)?;
    let summary = sweep::summarize(&records);
    std::fs::write(dir.join("summary.csv"), sweep::summary_csv(&summary)).map_err(Failure::io)?;
    print_summary(&summary);
    Ok(())
}

fn cmd_plot(args: &RecordArgs) -> Result<(), Failure> {
    let (dir, records) = read_records(args)?;
    if records.is_empty() {
        return Err(Failure::io("record set is empty; nothing to plot"));
    }
    let summary = sweep::summarize(&records);
    let svg = plot::render_svg(&summary.rows, "Test error vs balance coefficient").map_err(Failure::io)?;
    prepare_out(&dir)?;
    let svg_path = dir.join("plot.svg");
    let csv_path = dir.join("plot.csv");
    std::fs::write(&svg_path, svg).map_err(Failure::io)?;
    std::fs::write(&csv_path, sweep::summary_csv(&summary)).map_err(Failure::io)?;
    println!("chart -> {}", svg_path.display());
    println!("table -> {}", csv_path.display());
    Ok(())
}

fn cmd_selfcheck() -> Result<(), Failure> {
    let suites = selfcheck::run_all().map_err(|e| Failure::new(EXIT_SELFCHECK, e.to_string()))?;
    let mut failed = 0;
    for s in &suites {
        println!(
            "[{}] {:<20} max_err={:.3e} tol={:.0e}  {}",
            if s.passed { "PASS" } else { "FAIL" },
            s.name,
            s.max_error,
            s.tolerance,
            s.detail
        );
        failed += usize::from(!s.passed);
    }
    if failed > 0 {
        return Err(Failure::new(EXIT_SELFCHECK, format!("{failed} suite(s) failed")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Train(run) => cmd_train(run),
        Command::Sweep { run, jobs, fresh } => cmd_sweep(run, *jobs, *fresh),
        Command::Summarize(args) => cmd_summarize(args),
        Command::Selfcheck => cmd_selfcheck(),
        Command::Plot(args) => cmd_plot(args),
        Command::Keys => {
            for k in KEYS {
                println!("{k}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
