use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use caustica::run::{run_file, RunOptions, Subcommand};

#[derive(Parser)]
#[command(
    name = "caustica",
    version,
    about = "Einbein fields, ray fans and caustic diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (`[section]` headers, `key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Trace a ray fan and extract folds, cusps and crossings.
    Rayfan(Common),
    /// Endpoint-spread scan of the Euler–Lagrange boundary problem.
    DirichletScan(Common),
    /// Scan, then refine spread minima into ghost poles.
    GhostPoles(Common),
    /// Contour-integrated field on a grid.
    Field(Common),
    /// Pearcey comparison at the line-source cusp, or a bare |P| grid.
    Pearcey {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        grid: bool,
    },
    /// Predicted cusp positions.
    CuspPredict(Common),
    /// Perturbation response near a ghost pole.
    Perturb(Common),
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("CAUSTICA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("CAUSTICA_THREADS must be a positive integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("caustica: {msg}");
        return ExitCode::from(2);
    }
    let (command, common, grid) = match cli.command {
        Command::Rayfan(c) => (Subcommand::RayFan, c, false),
        Command::DirichletScan(c) => (Subcommand::DirichletScan, c, false),
        Command::GhostPoles(c) => (Subcommand::GhostPoles, c, false),
        Command::Field(c) => (Subcommand::Field, c, false),
        Command::Pearcey { common, grid } => (Subcommand::Pearcey, common, grid),
        Command::CuspPredict(c) => (Subcommand::CuspPredict, c, false),
        Command::Perturb(c) => (Subcommand::Perturb, c, false),
    };
    let options = RunOptions {
        out_dir: common.out,
        grid,
    };
    match run_file(command, &common.config, &options) {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!(
                "caustica {}: {}: {e}",
                command.as_str(),
                common.config.display()
            );
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
