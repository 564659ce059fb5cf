use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gptt::cli::{self, exit, Interaction, Outcome};
use gptt::resource::Theory;
use gptt::Result;

#[derive(Parser)]
#[command(name = "gptt", version, about = "Diagonalisation, convertibility and thermodynamics in general probabilistic theories")]
struct Args {
    /// Seed for randomised checks; `GPTT_SEED` takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Emit the JSON report instead of a table.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalise a state.
    Diag {
        #[arg(long)]
        model: String,
        #[arg(long)]
        state: String,
        /// Use the peel loop instead of the eigensolver.
        #[arg(long)]
        peel: bool,
    },
    /// Decide whether one state converts into another.
    Convert {
        #[arg(long)]
        model: String,
        #[arg(long)]
        rho: String,
        #[arg(long)]
        sigma: String,
        #[arg(long, default_value = "unital")]
        theory: Theory,
    },
    /// Landauer ledger of a reversible system-environment interaction.
    Landauer {
        #[arg(long)]
        model: String,
        #[arg(long)]
        rho: String,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// `swap`, `random:<seed>` or a JSON file with `re`/`im` matrices.
        #[arg(long, default_value = "swap")]
        interaction: Interaction,
        /// Environment Hamiltonian (levels or coordinates).
        #[arg(long = "H")]
        hamiltonian: Option<String>,
    },
    /// Erase a mixed state using a purifying memory.
    Erase {
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "chi")]
        rho: String,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long = "H")]
        hamiltonian: Option<String>,
    },
    /// Structural checks of a model.
    Verify {
        #[arg(long)]
        model: String,
    },
    /// Gibbs state for a given energy or inverse temperature.
    Gibbs {
        #[arg(long)]
        model: Option<String>,
        #[arg(long = "H")]
        hamiltonian: String,
        #[arg(long = "E", allow_negative_numbers = true)]
        energy: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Rényi, relative and bipartite entropies of a state.
    Entropy {
        #[arg(long)]
        model: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long, default_value_t = 0)]
        trials: usize,
    },
}

fn run(cmd: Command, seed: u64) -> Result<Outcome> {
    match cmd {
        Command::Diag { model, state, peel } => cli::cmd_diag(&cli::parse_model(&model)?, &state, peel, seed),
        Command::Convert { model, rho, sigma, theory } => {
            cli::cmd_convert(&cli::parse_model(&model)?, &rho, &sigma, theory, seed)
        }
        Command::Landauer { model, rho, beta, interaction, hamiltonian } => {
            cli::cmd_landauer(&cli::parse_model(&model)?, &rho, beta, &interaction, hamiltonian.as_deref(), seed)
        }
        Command::Erase { model, rho, beta, hamiltonian } => {
            cli::cmd_erase(&cli::parse_model(&model)?, &rho, beta, hamiltonian.as_deref(), seed)
        }
        Command::Verify { model } => cli::cmd_verify(&cli::parse_model(&model)?, seed),
        Command::Gibbs { model, hamiltonian, energy, beta, trials } => {
            let model = model.map(|m| cli::parse_model(&m)).transpose()?;
            cli::cmd_gibbs(model.as_ref(), &hamiltonian, energy, beta, trials, seed)
        }
        Command::Entropy { model, state, alpha, sigma, trials } => {
            cli::cmd_entropy(&cli::parse_model(&model)?, &state, alpha, sigma.as_deref(), trials, seed)
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { exit::PARSE } else { exit::OK };
            return ExitCode::from(code as u8);
        }
    };
    let seed = match std::env::var("GPTT_SEED") {
        Ok(s) => match s.parse() {
            Ok(v) => v,
            Err(_) => {
                eprintln!("error: GPTT_SEED must be an unsigned integer, got `{s}`");
                return ExitCode::from(exit::PARSE as u8);
            }
        },
        Err(_) => args.seed,
    };
    match run(args.command, seed) {
        Ok(outcome) => {
            let text = if args.json { outcome.report.to_json() + "\n" } else { outcome.report.to_table() };
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code_for(&e) as u8)
        }
    }
}
