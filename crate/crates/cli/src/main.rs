use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use weakly_coupled_cli::{run_scenario, run_self_test, CliResult, Kind, RunSummary};

/// Galerkin truncation bounds and simulations for bilinear quantum systems.
#[derive(Parser)]
#[command(name = "weakly-coupled", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate a Galerkin approximation under a piecewise-constant control.
    Simulate(RunArgs),
    /// Evaluate one bound or coupling constant.
    Bound(RunArgs),
    /// Find the smallest truncation order meeting a tolerance.
    MinDim(RunArgs),
    /// Synthesize a Lyapunov feedback control and certify it.
    Lyapunov(RunArgs),
    /// Check chain connectivity and gap non-degeneracy.
    Chain(RunArgs),
    /// Compare the exponential propagator with a fixed-step RK4 oracle.
    OracleCompare(RunArgs),
    /// Run the golden checks against known values.
    SelfTest(SelfTestArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SelfTestArgs {
    /// Optional file with `params.rotor` and `params.models`.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Override a field, e.g. `--set params.N=30`. Values parse as JSON, else as strings.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    sets: Vec<String>,
    /// Output directory; overrides `out_dir` in the file.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

fn dispatch(command: Command) -> (bool, CliResult<RunSummary>) {
    let scenario = |kind: Kind, a: RunArgs| {
        let r = run_scenario(kind, &a.config, &a.common.sets, a.common.out_dir.as_deref());
        (a.common.quiet, r)
    };
    match command {
        Command::Simulate(a) => scenario(Kind::Simulate, a),
        Command::Bound(a) => scenario(Kind::Bound, a),
        Command::MinDim(a) => scenario(Kind::MinDim, a),
        Command::Lyapunov(a) => scenario(Kind::Lyapunov, a),
        Command::Chain(a) => scenario(Kind::Chain, a),
        Command::OracleCompare(a) => scenario(Kind::OracleCompare, a),
        Command::SelfTest(a) => (
            a.common.quiet,
            run_self_test(a.config.as_deref(), &a.common.sets, a.common.out_dir.as_deref()),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (quiet, result) = dispatch(cli.command);
    match result {
        Ok(summary) => {
            if !quiet {
                for line in &summary.lines {
                    println!("{line}");
                }
                if let Some(dir) = &summary.out_dir {
                    if !summary.written.is_empty() {
                        println!("wrote {} files to {}", summary.written.len(), dir.display());
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
