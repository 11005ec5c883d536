use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qle_cli::{parse_config, run, CliError, Command, ExperimentConfig, Overrides, RunOptions};

#[derive(Parser)]
#[command(name = "qle", version, about = "Light transport through driven-dissipative atomic chains")]
struct Args {
    #[command(subcommand)]
    command: Cmd,

    /// TOML experiment file; built-in defaults are used without one.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// CSV output path; the metadata goes next to it as `<stem>.meta.json`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweep points.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Refuse chains longer than this for the many-body solvers.
    #[arg(long, global = true, default_value_t = qle_core::generator::DEFAULT_N_CAP)]
    n_cap: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Steady-state transmission, reflection and site populations.
    Steady,
    /// Time evolution from the ground or fully excited state.
    Transient,
    /// Steady state over a grid of drive frequencies.
    SweepFreq,
    /// Steady state over a grid of incident intensities.
    SweepPower,
    /// Transmission against chain length and the fitted exponent.
    Scaling {
        /// Lengths used for the power-law fit, as `LO:HI`.
        #[arg(long, value_parser = parse_window)]
        fit_window: Option<[usize; 2]>,
    },
    /// Exact single-photon transmission and reflection.
    Scatter,
    /// Sum-of-exponentials fits to power laws.
    FitLongrange,
    /// Oracle self-checks with a pass/fail table.
    Validate,
}

fn parse_window(s: &str) -> Result<[usize; 2], String> {
    let (lo, hi) = s.split_once(':').ok_or("expected LO:HI")?;
    let lo: usize = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: usize = hi.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err("LO must not exceed HI".into());
    }
    Ok([lo, hi])
}

fn main() -> ExitCode {
    let args = Args::parse();
    match real_main(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn real_main(args: Args) -> Result<(), CliError> {
    let (command, fit_window) = match args.command {
        Cmd::Steady => (Command::Steady, None),
        Cmd::Transient => (Command::Transient, None),
        Cmd::SweepFreq => (Command::SweepFreq, None),
        Cmd::SweepPower => (Command::SweepPower, None),
        Cmd::Scaling { fit_window } => (Command::Scaling, fit_window),
        Cmd::Scatter => (Command::Scatter, None),
        Cmd::FitLongrange => (Command::FitLongrange, None),
        Cmd::Validate => (Command::Validate, None),
    };
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
            parse_config(&text)?
        }
        None => parse_config("[medium]\nn = 2\n")?,
    };
    let cfg = ExperimentConfig::resolve(&file, command, &Overrides { output: args.out, fit_window })?;
    let mut opts = RunOptions { n_cap: args.n_cap, ..Default::default() };
    if let Some(k) = args.workers {
        opts.workers = k.max(1);
    }
    let out = run(&cfg, &opts)?;
    eprintln!("wrote {}", cfg.output.display());
    if command == Command::Validate {
        print_table(&out.table);
        if out.failures > 0 {
            return Err(CliError::Validation { failed: out.failures, total: out.table.rows.len() });
        }
    }
    Ok(())
}

fn print_table(t: &qle_cli::output::Table) {
    let widths: Vec<usize> = (0..t.columns.len())
        .map(|k| t.rows.iter().map(|r| r[k].len()).chain([t.columns[k].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: &[String]| {
        cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
    };
    println!("{}", line(&t.columns));
    for row in &t.rows {
        println!("{}", line(row));
    }
}
