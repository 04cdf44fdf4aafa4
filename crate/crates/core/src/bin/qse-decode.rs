use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qse_decode::experiments::{
    cmd_estimate, cmd_molecule, cmd_threshold, cmd_transversal_x, EstimateSpec, MoleculeSpec,
    SweepConfig, SweepOutput,
};
use qse_decode::pauli::{PauliString, PauliSum};
use qse_decode::sampling::Scheme;

#[derive(Parser)]
#[command(name = "qse-decode", version, about = "Post-processing decoder sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Logical infidelity of the noisy code state per hierarchy level
    Threshold(SweepArgs),
    /// As threshold, after a noisy transversal X gate
    TransversalX(SweepArgs),
    /// Symmetry QSE on a molecular ground state
    Molecule(MoleculeArgs),
    /// Shot-sampled corrected expectations with exact reference values
    Estimate(EstimateArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 0.01)]
    p_min: f64,
    #[arg(long, default_value_t = 0.9)]
    p_max: f64,
    #[arg(long, default_value_t = 60)]
    steps: usize,
    /// Comma-separated hierarchy levels (default: all)
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Logical state polar angle
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI / 5.0)]
    theta: f64,
    /// Logical state azimuthal angle
    #[arg(long, default_value_t = std::f64::consts::PI / 3.0)]
    phi: f64,
    /// Code definition file (default: bundled [[5,1,3]])
    #[arg(long)]
    code: Option<PathBuf>,
    /// Output CSV path
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    drop_count: usize,
    #[arg(long, default_value_t = 20)]
    drop_trials: usize,
    /// Directory for per-point QSE H and S matrices
    #[arg(long)]
    dump_matrices: Option<PathBuf>,
}

#[derive(Args)]
struct MoleculeArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Hamiltonian file (default: bundled H2 at 1.50 Å)
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// Comma-separated symmetry generators, e.g. Z0Z2,Z1Z3,X0X1X2X3
    #[arg(long, value_delimiter = ',')]
    generators: Option<Vec<String>>,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[arg(long, default_value = "uniform")]
    scheme: Scheme,
    /// Shots per grid point
    #[arg(long, default_value_t = 100_000)]
    shots: usize,
    /// Observable as a Pauli label on the physical qubits (default: logical Z)
    #[arg(long)]
    observable: Option<String>,
}

impl SweepArgs {
    fn config(&self, default_out: &str) -> SweepConfig {
        SweepConfig {
            p_min: self.p_min,
            p_max: self.p_max,
            steps: self.steps,
            levels: self.levels.clone(),
            theta: self.theta,
            phi: self.phi,
            code_path: self.code.clone(),
            out_path: Some(self.out.clone().unwrap_or_else(|| default_out.into())),
            seed: self.seed,
            drop_count: self.drop_count,
            drop_trials: self.drop_trials,
            dump_matrices: self.dump_matrices.clone(),
        }
    }
}

fn report_sweep(out: &SweepOutput) {
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    for (l, p) in &out.crossovers {
        match p {
            Some(p) => println!("l={l}: crossover p* = {p:.4}"),
            None => println!("l={l}: no crossover"),
        }
    }
}

fn run(cli: Cli) -> qse_decode::Result<()> {
    match cli.command {
        Command::Threshold(args) => report_sweep(&cmd_threshold(&args.config("threshold.csv"))?),
        Command::TransversalX(args) => {
            report_sweep(&cmd_transversal_x(&args.config("transversal_x.csv"))?)
        }
        Command::Molecule(args) => {
            let spec = MoleculeSpec::load(args.hamiltonian.as_deref(), args.generators.as_deref())?;
            let out = cmd_molecule(&args.sweep.config("molecule.csv"), &spec)?;
            for w in &out.warnings {
                eprintln!("warning: {w}");
            }
            println!("exact energy {:.10}", out.exact_energy);
            println!("peak improvement {:.4}", out.peak_improvement);
        }
        Command::Estimate(args) => {
            let config = args.sweep.config("estimate.csv");
            let observable = match &args.observable {
                Some(label) => {
                    let n = config.load_code()?.n();
                    Some(PauliSum::from_pauli(&PauliString::parse_on(n, label)?))
                }
                None => None,
            };
            let spec = EstimateSpec {
                scheme: args.scheme,
                shots: args.shots,
                observable,
            };
            let table = cmd_estimate(&config, &spec)?;
            println!("{} rows", table.rows.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
