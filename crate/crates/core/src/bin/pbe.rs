use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pbe_core::app::{self, AppError, TableFormat};
use pbe_core::refine::StrategyKind;

#[derive(Parser)]
#[command(name = "pbe", version, about = "Goal-oriented adaptive finite elements for the Poisson-Boltzmann equation")]
struct Cli {
    /// Run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the initial mesh, optionally refined uniformly.
    MeshGen {
        #[arg(long, default_value_t = 0)]
        levels: usize,
        /// Output mesh file; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Solve once and print the goal value.
    Solve {
        #[arg(long, default_value_t = 0)]
        levels: usize,
        /// Use quadratic elements.
        #[arg(long)]
        enriched: bool,
        /// Store the result as a reference file.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Print the estimated goal error split by source.
    Estimate {
        #[arg(long, default_value_t = 0)]
        levels: usize,
        #[arg(long, value_name = "PATH")]
        reference: Option<PathBuf>,
    },
    /// Run the adaptive refinement loop and emit one table row per level.
    Refine {
        /// uniform, ucr, acr or classical; overrides the configuration.
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<StrategyKind>,
        /// Number of refinement steps; overrides the configuration.
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, value_name = "PATH")]
        reference: Option<PathBuf>,
        /// csv or aligned.
        #[arg(long, default_value = "csv", value_parser = parse_format)]
        format: TableFormat,
        /// Output table file; overrides the configured output, stdout when neither is set.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Radial reference solution for a central charge in the generated ball.
    Oracle {
        #[arg(long, default_value_t = 100_000)]
        intervals: usize,
    },
}

fn parse_strategy(s: &str) -> Result<StrategyKind, String> {
    StrategyKind::parse(s).ok_or_else(|| format!("unknown strategy `{s}`"))
}

fn parse_format(s: &str) -> Result<TableFormat, String> {
    TableFormat::parse(s).ok_or_else(|| format!("unknown format `{s}`"))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), AppError> {
    match out {
        Some(p) => app::write_file(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    let cfg = app::load_config(cli.config.as_deref())?;
    let reference = |p: Option<PathBuf>| p.map(|p| app::load_reference(&p).map(|r| r.qoi)).transpose();
    match cli.command {
        Command::MeshGen { levels, out } => emit(&app::mesh_gen(&cfg, levels)?, out.as_ref()),
        Command::Solve { levels, enriched, out } => {
            let r = app::solve_goal(&cfg, levels, enriched)?;
            println!("{:.10e}", r.qoi);
            match out {
                Some(p) => app::write_file(&p, &app::write_reference(&r)),
                None => Ok(()),
            }
        }
        Command::Estimate { levels, reference: rp } => {
            let r = reference(rp)?;
            emit(&app::estimate_report(&cfg, levels, r)?, None)
        }
        Command::Refine { strategy, levels, reference: rp, format, out } => {
            let r = reference(rp)?;
            let records = app::refine_records(&cfg, strategy, levels, r)?;
            emit(&app::emit_table(&records, format), out.as_ref().or(cfg.output.as_ref()))
        }
        Command::Oracle { intervals } => emit(&app::oracle_report(&cfg, intervals)?, None),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.kind());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
