use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qretro::cli::{self, CliError, OutputFormat};

#[derive(Parser)]
#[command(name = "qretro", version, about = "Quantum retrodiction scenario runner")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario file.
    Run {
        scenario: PathBuf,
        /// Write the result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// List bundled scenarios, or print one.
    Examples {
        #[arg(long)]
        show: Option<String>,
    },
    /// Print the scenario JSON schema.
    Schema,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn execute(args: Args) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match args.command {
        Command::Run { scenario, out, format } => {
            let format = match format {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            };
            let rendered = cli::run_file(&scenario, format)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, rendered).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
                }
                None => std::io::stdout().write_all(rendered.as_bytes()).map_err(io),
            }
        }
        Command::Examples { show: Some(name) } => {
            let ex =
                cli::example(&name).ok_or_else(|| CliError::Validation(format!("no bundled scenario `{name}`")))?;
            std::io::stdout().write_all(ex.text.as_bytes()).map_err(io)
        }
        Command::Examples { show: None } => std::io::stdout().write_all(cli::list_examples().as_bytes()).map_err(io),
        Command::Schema => std::io::stdout().write_all(cli::SCENARIO_SCHEMA.as_bytes()).map_err(io),
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.report());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
