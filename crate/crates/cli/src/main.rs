use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use gausdet_cli::config::read_config_text;
use gausdet_cli::{parse_config, run_command, CliResult, Command, Format, Overrides};

/// Detection of a Gaussian signal vector in white Gaussian noise: bounds,
/// exact values and Monte Carlo estimates of the error probabilities.
#[derive(Parser)]
#[command(name = "gausdet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config file; stdin when absent or "-".
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the config sample count.
    #[arg(long, global = true)]
    samples: Option<u64>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

fn run(cli: &Cli) -> CliResult<String> {
    let text = read_config_text(cli.config.as_deref())?;
    let base = cli.config.as_deref().and_then(|p| p.parent());
    let over = Overrides { seed: cli.seed, samples: cli.samples, format: cli.format };
    let cfg = parse_config(&text, base)?.finalize(cli.command, over)?;
    let report = run_command(&cfg)?;
    for note in &report.notes {
        eprintln!("gausdet: {note}");
    }
    Ok(match cfg.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    })
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors; 2 is reserved for out-of-regime here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gausdet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
