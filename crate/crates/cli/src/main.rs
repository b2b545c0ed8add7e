use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use ctxprob::frequency::density::counterexample;
use ctxprob::frequency::{empirical_context_data, simulate_context, DEFAULT_N_MIN};
use ctxprob::io::{parse_context, write_sequence_csv};
use ctxprob::report::{analyze, recovery_report, render_text, stream_file_name, DensityDemoReport};
use ctxprob::{Error, Tolerances};

/// Contextual probability analysis for a pair of dichotomous observables.
#[derive(Debug, Parser)]
#[command(name = "ctxprob", version, about)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Absolute tolerance for structural checks on exact tables.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Output file (analyze, demo) or directory (simulate).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a context file and run every analysis on it.
    Analyze {
        /// Context file (JSON).
        file: PathBuf,
    },
    /// Simulate the observation streams of a context and estimate it back.
    Simulate {
        #[arg(long)]
        context: PathBuf,
        /// Length of every stream.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// z-multiplier for the statistical tolerances.
        #[arg(long, default_value_t = 4.0)]
        stat_z: f64,
    },
    /// Built-in demonstrations.
    Demo {
        #[command(subcommand)]
        which: Demo,
    },
}

#[derive(Debug, Subcommand)]
enum Demo {
    /// Two sets with density one half whose intersection has none.
    Density {
        #[arg(long, default_value_t = 1 << 22)]
        max_n: u64,
        /// First checkpoint counted as late for the stabilization test.
        #[arg(long, default_value_t = DEFAULT_N_MIN)]
        n_min: u64,
    },
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Schema { .. }
            | Error::Sequence { .. }
            | Error::InvalidArgument(_)
            | Error::Io { .. }
            | Error::Json(_)
            | Error::MissingStream(_)
            | Error::SequenceTooShort { .. } => Failure::Input(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => render_text(value),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Input(format!("stdout: {e}")))
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_input(bytes: &[u8]) -> Result<ctxprob::ContextData, Failure> {
    let text = std::str::from_utf8(bytes).map_err(|e| Failure::Input(format!("context file is not UTF-8: {e}")))?;
    Ok(parse_context(text)?)
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let tol = Tolerances::new(cli.tol, 4.0)?;
    match cli.command {
        Command::Analyze { file } => {
            let bytes = read(&file)?;
            let data = parse_input(&bytes)?;
            let report = analyze(&data, &bytes, &tol)?;
            let broken = report.check_invariants();
            if !broken.is_empty() {
                return Err(Failure::Internal(broken.join("; ")));
            }
            let value = serde_json::to_value(&report).expect("report serializes");
            emit(&render(&value, cli.format), cli.out.as_deref())?;
            if report.validation.is_valid() {
                Ok(ExitCode::SUCCESS)
            } else {
                for v in &report.validation.violations {
                    eprintln!("invalid context: {}", v.message);
                }
                Ok(ExitCode::from(2))
            }
        }
        Command::Simulate {
            context,
            n,
            seed,
            stat_z,
        } => {
            let tol = Tolerances::new(cli.tol, stat_z)?;
            let Some(dir) = cli.out else {
                return Err(Failure::Input("simulate needs --out <dir> for the stream files".into()));
            };
            let bytes = read(&context)?;
            let data = parse_input(&bytes)?;
            let validation = ctxprob::model::validate_context(&data, &tol);
            if !validation.is_valid() {
                let msgs: Vec<_> = validation.violations.iter().map(|v| v.message.as_str()).collect();
                return Err(Failure::Input(format!("invalid context: {}", msgs.join("; "))));
            }
            let streams = simulate_context(&data, n, seed)?;
            fs::create_dir_all(&dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
            for s in streams.iter() {
                let path = dir.join(stream_file_name(&s.source));
                let file = fs::File::create(&path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                let mut w = BufWriter::new(file);
                write_sequence_csv(s, &mut w)?;
                w.flush().map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            }
            let recovered = empirical_context_data(&streams, stat_z)?;
            let report = recovery_report(&data, &streams, &recovered, &bytes, seed, &tol)?;
            let value = serde_json::to_value(&report).expect("report serializes");
            emit(&render(&value, Format::Json), Some(&dir.join("recovery.json")))?;
            emit(&render(&value, cli.format), None)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Demo {
            which: Demo::Density { max_n, n_min },
        } => {
            let report = DensityDemoReport::new(counterexample(max_n, n_min, tol.stat_z)?);
            let value = serde_json::to_value(&report).expect("report serializes");
            emit(&render(&value, cli.format), cli.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
