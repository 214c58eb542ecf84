use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use timebin::alist::to_alist;
use timebin::error::{AppError, AppResult};
use timebin::report::{emit_report, write_chain, write_sweep_csv, write_sweep_text, ReportFormat};
use timebin::{run_pipeline, run_sweep, ExperimentConfig};
use timebin_core::info::{build_downtime_chain, entropy_rate, stationary_distribution};
use timebin_core::reconcile::{code_for_rate, make_regular_ldpc_report};

#[derive(Parser)]
#[command(
    name = "timebin",
    version,
    about = "Time-bin entanglement QKD simulator"
)]
struct Cli {
    /// TOML experiment configuration; defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the text summary.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline once.
    Run,
    /// Sweep the number of bins per frame (uses the [sweep] table, or the
    /// default candidates when absent).
    Sweep,
    /// Detector-downtime Markov chain: transition listing and entropy rate.
    Chain {
        /// Bins per frame.
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// Downtime in bins.
        #[arg(long, default_value_t = 1)]
        d: u32,
        /// Per-bin arrival probability.
        #[arg(long, default_value_t = 0.3)]
        p: f64,
    },
    /// Build a regular LDPC code and write it in alist format.
    Codegen {
        /// Code length in bits.
        #[arg(long)]
        n_code: usize,
        #[arg(long, default_value_t = 3)]
        column_weight: usize,
        /// Row weight; ignored when --rate is given.
        #[arg(long, default_value_t = 6)]
        row_weight: usize,
        /// Design rate; 0 produces the identity (full disclosure) code.
        #[arg(long)]
        rate: Option<f64>,
    },
}

fn load_config(cli: &Cli) -> AppResult<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn stdout_err(e: std::io::Error) -> AppError {
    AppError::io(Path::new("<stdout>"), e)
}

fn execute(cli: &Cli) -> AppResult<()> {
    let mut stdout = std::io::stdout().lock();
    match &cli.command {
        Command::Run => {
            let cfg = load_config(cli)?;
            let run = run_pipeline(&cfg)?;
            if let Some(dir) = &cli.out {
                emit_report(&run, None, ReportFormat::CsvBundle, Some(dir), &mut stdout)?;
            }
            if !cli.quiet {
                emit_report(&run, None, ReportFormat::Text, None, &mut stdout)?;
            }
            if run.report.reconciliation.is_some() && !run.report.verified() {
                return Err(AppError::Verification(format!(
                    "{} residual bit errors",
                    run.report
                        .reconciliation
                        .as_ref()
                        .map_or(0, |r| r.residual_bit_errors)
                )));
            }
        }
        Command::Sweep => {
            let mut cfg = load_config(cli)?;
            cfg.sweep.get_or_insert_with(Default::default);
            let outcome = run_sweep(&cfg)?;
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
                write_sweep_csv(&dir.join("sweep.csv"), &outcome)?;
            }
            if !cli.quiet {
                write_sweep_text(&outcome, &mut stdout).map_err(stdout_err)?;
            }
        }
        Command::Chain { n, d, p } => {
            let stage = |e| AppError::stage("chain", e);
            let mc = build_downtime_chain(*n, *d, *p).map_err(stage)?;
            let pi = stationary_distribution(&mc).map_err(stage)?;
            let h = entropy_rate(&mc).map_err(stage)?;
            match &cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
                    let path = dir.join("chain.csv");
                    let file = std::fs::File::create(&path).map_err(|e| AppError::io(&path, e))?;
                    write_chain(file, &mc).map_err(|e| AppError::csv(&path, e))?;
                }
                None => write_chain(&mut stdout, &mc)
                    .map_err(|e| AppError::csv(Path::new("<stdout>"), e))?,
            }
            if !cli.quiet {
                let mut err = std::io::stderr().lock();
                let _ = writeln!(err, "states {}, entropy rate {h:.6} bits/frame", mc.len());
                for (label, mass) in mc.labels().iter().zip(&pi).take(64) {
                    let _ = writeln!(err, "  pi[{label}] = {mass:.6}");
                }
            }
        }
        Command::Codegen {
            n_code,
            column_weight,
            row_weight,
            rate,
        } => {
            let seed = load_config(cli)?.seed;
            let stage = |e| AppError::stage("codegen", e);
            let (code, summary) = match rate {
                Some(r) => {
                    let code = code_for_rate(*r, *n_code, seed).map_err(stage)?;
                    let cycles = code.count_four_cycles();
                    (code, format!("4-cycles {cycles}"))
                }
                None => {
                    let c = make_regular_ldpc_report(*n_code, *column_weight, *row_weight, seed)
                        .map_err(stage)?;
                    let s = format!(
                        "4-cycles {} (before repair {})",
                        c.four_cycles, c.raw_four_cycles
                    );
                    (c.code, s)
                }
            };
            let text = to_alist(&code);
            match &cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
                    let path = dir.join(format!("ldpc_{}_{}.alist", code.n(), code.m()));
                    std::fs::write(&path, text).map_err(|e| AppError::io(&path, e))?;
                }
                None => stdout.write_all(text.as_bytes()).map_err(stdout_err)?,
            }
            if !cli.quiet {
                eprintln!(
                    "n {} m {} rate {:.3}, {summary}",
                    code.n(),
                    code.m(),
                    code.design_rate()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
