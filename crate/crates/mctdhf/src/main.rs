use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mctdhf::cli::{self, Overrides, EXIT_INVALID};

/// Multi-configuration time-dependent Hartree-Fock on a 1D grid.
///
/// The worker thread count is read from MCTDHF_THREADS.
#[derive(Parser)]
#[command(version)]
struct Args {
    /// Replace every seed in the scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate a scenario and write diagnostics, snapshots and a manifest.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an acceptance suite: algebra, oracle, dynamics, stationary or all.
    Verify { suite: String },
    /// Minimize the energy at the scenario's number of orbitals.
    Minimize {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ground levels for several orbital counts and the existence check.
    Levels {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        k_list: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fail(err: mctdhf::Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(cli::exit_code(&err) as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Err(e) = cli::configure_threads() {
        return fail(e);
    }
    let overrides = |out: Option<PathBuf>| Overrides { seed: args.seed, out_dir: out };
    match args.command {
        Command::Run { ref config, ref out } => match cli::run(config, &overrides(out.clone())) {
            Ok(outcome) => {
                let m = &outcome.manifest;
                match &m.halted {
                    Some(halt) => eprintln!(
                        "halted: {halt:?}; blow-up integral {:.6e}, final |inverse density| {:.6e}; outputs in {}",
                        m.blowup_integral.unwrap_or(f64::NAN),
                        m.final_inv_gamma_frob.unwrap_or(f64::NAN),
                        outcome.out_dir.display()
                    ),
                    None => {
                        println!("completed {} steps in {:.2} s; outputs in {}", m.steps, m.wall_time_seconds, outcome.out_dir.display())
                    }
                }
                ExitCode::from(outcome.exit_code as u8)
            }
            Err(e) => fail(e),
        },
        Command::Verify { ref suite } => match cli::verify(suite) {
            Ok((reports, ok)) => {
                for r in &reports {
                    println!("{r}");
                }
                let passed = reports.iter().filter(|r| r.passed()).count();
                println!("{passed}/{} criteria passed", reports.len());
                if ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_INVALID as u8)
                }
            }
            Err(e) => fail(e),
        },
        Command::Minimize { ref config, ref out } => match cli::minimize(config, &overrides(out.clone())) {
            Ok(m) => {
                let r = &m.result;
                println!(
                    "energy {:.12} (residuals {:.2e}, {:.2e}; {} iterations, converged: {})",
                    r.energy, r.el_residual_coefficients, r.el_residual_orbitals, r.iterations, r.converged
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Levels { ref config, ref k_list, ref out } => match cli::levels(config, k_list, &overrides(out.clone())) {
            Ok(m) => {
                for lv in &m.levels {
                    println!("K = {:>2}: I(K) = {:.12}", lv.orbitals, lv.energy);
                }
                for c in &m.criteria {
                    println!("K = {} against K' = {}: {:?}", c.k, c.k_previous, c.outcome.verdict);
                    if let Some(w) = &c.outcome.warning {
                        println!("  warning: {w}");
                    }
                }
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
