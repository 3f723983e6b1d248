use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use taskalloc_cli::{run, CliError, Command, RunConfig, DEFAULT_SAMPLES, DEFAULT_SEED};

/// Box-constrained task allocation: solver, replicator simulator and verifiers.
#[derive(Parser, Debug)]
#[command(name = "taskalloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Problem file (JSON).
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Built-in instance: fig2, fig3, tab1, tab3 (reproduce also takes `all`).
    #[arg(long, global = true)]
    example: Option<String>,

    /// Directory for reports and CSV traces.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Euler step for the replicator dynamics.
    #[arg(long, global = true)]
    dt: Option<f64>,

    #[arg(long, global = true)]
    max_steps: Option<u64>,

    /// Multiplier tolerance (solve), residual tolerance (simulate) or
    /// relative cost-gap allowance (verify).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Monte Carlo sample count.
    #[arg(long, global = true, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,

    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Grid oracle spacing (verify, n <= 4).
    #[arg(long, global = true)]
    grid: Option<f64>,

    /// Write this many raw samples to oracle.csv (verify).
    #[arg(long, global = true)]
    dump_samples: Option<u64>,

    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Breakpoint solver with KKT certificate.
    Solve,
    /// Replicator dynamics; writes trajectory.csv and summary.txt.
    Simulate,
    /// Solver against Monte Carlo and grid oracles.
    Verify,
    /// Compare built-in instances with their published values.
    Reproduce,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = RunConfig {
        command: match cli.command {
            Cmd::Solve => Command::Solve,
            Cmd::Simulate => Command::Simulate,
            Cmd::Verify => Command::Verify,
            Cmd::Reproduce => Command::Reproduce,
        },
        input: cli.input,
        example: cli.example,
        output_dir: cli.out,
        dt: cli.dt,
        max_steps: cli.max_steps,
        tol: cli.tol,
        samples: cli.samples,
        seed: cli.seed,
        grid: cli.grid,
        dump_samples: cli.dump_samples,
    };

    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cfg)),
            Err(e) => Err(CliError::Usage(format!("--threads {n}: {e}"))),
        },
        None => run(&cfg),
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.report);
            ExitCode::from(outcome.status as u8)
        }
        Err(e) => {
            eprint!("{}", e.render());
            ExitCode::from(e.exit_status() as u8)
        }
    }
}
