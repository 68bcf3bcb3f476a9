use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tauqm_cli::{execute, Command, Invocation};

/// Finite quantum correlation time solver suite.
#[derive(Parser)]
#[command(name = "tauqm", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `output.dir` from the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key.path=value`, applied before validation; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let inv = Invocation { command: args.command, config: args.config, out: args.out, overrides: args.overrides };
    match execute(&inv) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", report.out_dir.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code as u8)
        }
    }
}
