use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use entctl::{build, emit_report, parse_instance, run_command, Command, Format, Options};
use entropy_core::Method;

/// Exact algebraic and topological entropy of banded endomorphisms.
#[derive(Parser, Debug)]
#[command(name = "entctl", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    instance: PathBuf,
    #[arg(long, default_value = "limit", value_parser = parse_method)]
    method: Method,
    /// Overrides the instance's max_n.
    #[arg(long)]
    max_n: Option<usize>,
    /// Overrides the instance's stall window.
    #[arg(long)]
    stall: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

fn main() -> ExitCode {
    let args = Args::parse();
    let outcome = parse_instance(&args.instance).and_then(|mut inst| {
        if let Some(n) = args.max_n {
            inst.policy.max_n = n;
        }
        if let Some(w) = args.stall {
            inst.policy.stall_window = w;
        }
        let model = build(&inst)?;
        let opts = Options {
            method: args.method,
            jobs: args.jobs.max(1),
        };
        run_command(args.command, &model, &opts)
    });
    match outcome {
        Ok(report) => {
            print!("{}", emit_report(&report, args.format));
            ExitCode::from(report.status.exit_class().code() as u8)
        }
        Err(e) => {
            eprintln!("entctl: {e}");
            ExitCode::from(e.class.code() as u8)
        }
    }
}
