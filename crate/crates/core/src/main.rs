use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use contact_norms::scenario::{run_scenario, write_outcome, Operation, Overrides, ScenarioConfig};

#[derive(Parser)]
#[command(name = "contact-norms", version, about = "Contact flows, translated points and norm audits on R^2n x S^1")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    config: PathBuf,
    /// Grid resolution per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Integrator step.
    #[arg(long)]
    step: Option<f64>,
    /// Newton / fixed-point tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory for report.json and CSV files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate contact flows from given or seeded random points.
    Flow(Common),
    /// Spectrum and selector of an admissible time-t map.
    Spectrum(Common),
    /// Lengths and certified norm values.
    Norms(Common),
    /// Hessian bound, admissibility and the regular-zero check.
    HessianCheck(Common),
    /// Search for periodic orbits of period at most 1.
    PeriodicScan(Common),
    /// Parseval bound on seeded random loops.
    Parseval(Common),
    /// Displacement and the capacity-energy inequality.
    CapacityAudit(Common),
    /// Selector lower bounds along reparametrized paths.
    GeodesicAudit(Common),
    /// Norms of B0(A) bumps over a list of amplitudes.
    Sweep(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (op, args) = match cli.command {
        Command::Flow(a) => (Operation::Flow, a),
        Command::Spectrum(a) => (Operation::Spectrum, a),
        Command::Norms(a) => (Operation::Norms, a),
        Command::HessianCheck(a) => (Operation::HessianCheck, a),
        Command::PeriodicScan(a) => (Operation::PeriodicScan, a),
        Command::Parseval(a) => (Operation::Parseval, a),
        Command::CapacityAudit(a) => (Operation::CapacityAudit, a),
        Command::GeodesicAudit(a) => (Operation::GeodesicAudit, a),
        Command::Sweep(a) => (Operation::Sweep, a),
    };
    let run = || -> contact_norms::Result<PathBuf> {
        let mut config = ScenarioConfig::load(&args.config)?;
        config.apply(&Overrides { grid: args.grid, step: args.step, tol: args.tol, out: args.out.clone() });
        let outcome = run_scenario(&config, Some(op))?;
        let dir = config.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"));
        write_outcome(&outcome, &dir)
    };
    match run() {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
