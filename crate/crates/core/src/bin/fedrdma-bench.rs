use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use fedrdma::bench::{load_scenarios, run_preset, run_scenarios, write_rows, BenchError, Preset, Workload};

#[derive(Parser)]
#[command(name = "fedrdma-bench", version, about = "Run transfer scenarios and regenerate the evaluation tables")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Base seed; repetition r runs with seed + r.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every scenario in a TOML file.
    Run { config: PathBuf },
    /// Like `run`, but every scenario must have a sweep workload.
    Sweep { config: PathBuf },
    /// Regenerate one of the canned tables.
    Preset {
        #[arg(value_parser = ["table-bandwidth", "table-syscost", "table-lora", "fl-e2e"])]
        name: String,
    },
}

fn output(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<(), BenchError> {
    let Format::Csv = cli.format;
    match cli.cmd {
        Cmd::Run { config } => {
            let scenarios = load_scenarios(&config)?;
            let rows = run_scenarios(&scenarios, cli.seed)?;
            write_rows(output(&cli.out)?, &rows)
        }
        Cmd::Sweep { config } => {
            let scenarios = load_scenarios(&config)?;
            if let Some(i) = scenarios.iter().position(|s| !matches!(s.workload, Workload::Sweep(_))) {
                return Err(BenchError::ConfigParse(format!("scenario[{i}].workload: `sweep` needs a sweep workload")));
            }
            let rows = run_scenarios(&scenarios, cli.seed)?;
            write_rows(output(&cli.out)?, &rows)
        }
        Cmd::Preset { name } => {
            let preset: Preset = name.parse()?;
            let table = run_preset(preset, cli.seed.unwrap_or(0))?;
            table.write_csv(output(&cli.out)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
