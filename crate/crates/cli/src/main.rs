use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use robust_merton_cli::commands::{
    cmd_simulate, cmd_solve, cmd_sweep, cmd_verify, parse_vector, Format, MeasureChoice, SimulateArgs, SweepParam,
    EXIT_INPUT,
};
use robust_merton_cli::CliResult;

#[derive(Parser)]
#[command(name = "robust-merton", version, about = "Robust Merton portfolio and consumption under drift and volatility ambiguity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem and print the optimal controls.
    Solve {
        config: PathBuf,
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Re-solve over a range of the drift or Frobenius radius.
    Sweep {
        config: PathBuf,
        #[arg(long, default_value = "epsilon")]
        param: SweepParam,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        points: usize,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the solution against brute-force oracles.
    Verify {
        config: PathBuf,
        /// Comma-separated portfolio to verify instead of the optimum.
        #[arg(long, allow_hyphen_values = true)]
        override_pi: Option<String>,
    },
    /// Simulate wealth under the robust controls and write a summary CSV.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = "worst")]
        measure: MeasureChoice,
        /// JSON file {"mu": [..], "cov": [[..]]} used with --measure file.
        #[arg(long)]
        measure_file: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write every recorded path in the binary RMPE layout.
        #[arg(long)]
        paths: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<i32> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Solve { config, format } => cmd_solve(&config, format, &mut stdout),
        Command::Sweep {
            config,
            param,
            from,
            to,
            points,
            out,
        } => cmd_sweep(&config, param, from, to, points, out.as_deref(), &mut stdout),
        Command::Verify { config, override_pi } => {
            let pi = override_pi.as_deref().map(parse_vector).transpose()?;
            cmd_verify(&config, pi.as_deref(), &mut stdout)
        }
        Command::Simulate {
            config,
            measure,
            measure_file,
            out,
            paths,
        } => cmd_simulate(
            &config,
            &SimulateArgs {
                measure,
                measure_file: measure_file.as_deref(),
                out: &out,
                paths: paths.as_deref(),
            },
            &mut stdout,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    };
    ExitCode::from(code as u8)
}
