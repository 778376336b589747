use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use poincare_cli::commands::{self, ExampleArgs, Overrides};

/// Exterior Poincaré problems for elliptic systems: solve, diagnose, run presets and certificates.
///
/// Exit codes: 0 solvable, 1 numerical failure or failed certificate,
/// 2 unsolvable, 3 not normally solvable, 4 input error.
#[derive(Parser, Debug)]
#[command(name = "poincare", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Quadrature nodes on the boundary curve (even, at least 8).
    #[arg(long)]
    nodes: Option<usize>,
    /// Solvability tolerance, relative to max(1, ‖f‖).
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for the output artifacts.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Polar output grid "r0:r1:nr,t0:t1:nt".
    #[arg(long)]
    grid: Option<String>,
}

impl From<Common> for Overrides {
    fn from(c: Common) -> Self {
        Overrides {
            nodes: c.nodes,
            tol: c.tol,
            grid: c.grid,
            out_dir: c.out_dir,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a problem file and write field.csv, density.csv and diagnostics.json.
    Solve {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Normality, index and kernel dimensions only (no solve).
    Diagnose {
        problem: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a Bitsadze preset: dirichlet, neumann, special_neumann or problem6.
    Example {
        preset: String,
        /// Number of null-family members (dirichlet, neumann).
        #[arg(long)]
        k: Option<u32>,
        /// First boundary datum as terms, e.g. "1,cos1,-0.5*sin2".
        #[arg(long, allow_hyphen_values = true)]
        f1: Option<String>,
        /// Second boundary datum as terms.
        #[arg(long, allow_hyphen_values = true)]
        f2: Option<String>,
        /// Free real constant K of the special Neumann solution.
        #[arg(long = "K", allow_hyphen_values = true)]
        constant: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the full certificate suite.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("POINCARE_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { poincare_cli::exit::INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match cli.command {
        Command::Solve { problem, common } => commands::cmd_solve(&problem, &common.into()),
        Command::Diagnose { problem, common } => commands::cmd_diagnose(&problem, &common.into()),
        Command::Example {
            preset,
            k,
            f1,
            f2,
            constant,
            common,
        } => commands::cmd_example(&preset, &ExampleArgs { k, f1, f2, constant }, &common.into()),
        Command::Verify { common } => commands::cmd_verify(&common.into()),
    };
    ExitCode::from(code as u8)
}
