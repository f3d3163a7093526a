use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fearbd::commands::{self, Reproduction};
use fearbd::{CliError, RunConfig, SweepManifest};

#[derive(Parser)]
#[command(name = "fearbd", version, about = "Predator-prey reaction-diffusion model with fear effect")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibria, dispersion window, index parity and nonexistence threshold.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Directory for analysis.json (default: $FEARBD_OUT/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate one configuration and write CSV, JSON and SVG artifacts.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every value of a sweep manifest.
    Sweep {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Rerun one of the committed figure scenarios (1 to 6).
    Reproduce {
        #[arg(long)]
        figure: u32,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn print_run(out: &commands::SimulationOutcome) {
    let s = &out.summary;
    println!("run directory: {}", out.dir.display());
    println!("config hash:   {}", out.config_hash);
    println!("classification: {}", s.classification.as_str());
    println!("final var(u) = {:.3e}, var(v) = {:.3e}, int v dx = {:.6}", s.variance_u, s.variance_v, s.v_mass);
    for b in &out.bounds {
        println!("bound {:<7} {:?} (observed {:.6}, bound {:.6})", b.name, b.status, b.observed, b.bound);
    }
}

fn print_sweep(rows: &[commands::SweepRow]) {
    for r in rows {
        println!(
            "{:<10} {:<16} {:<16} var(u) = {}",
            r.value,
            r.status,
            r.classification.as_deref().unwrap_or("-"),
            r.final_variance_u.map_or("-".into(), |v| format!("{v:.3e}"))
        );
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let root = commands::output_root();
    match cli.command {
        Command::Analyze { config, out } => {
            let cfg = RunConfig::from_file(&config)?;
            let dir = commands::run_dir(&cfg, out.as_deref(), &root);
            let report = commands::analyze(&cfg, &dir)?;
            println!("{report}");
            println!("report: {}", dir.join(commands::ANALYSIS_FILE).display());
            Ok(commands::analysis_exit_code(&report))
        }
        Command::Simulate { config, out } => {
            let cfg = RunConfig::from_file(&config)?;
            let dir = commands::run_dir(&cfg, out.as_deref(), &root);
            print_run(&commands::simulate(&cfg, &dir)?);
            Ok(0)
        }
        Command::Sweep { manifest, jobs } => {
            let manifest = SweepManifest::from_file(&manifest)?;
            print_sweep(&commands::sweep(&manifest, &root, jobs)?);
            Ok(0)
        }
        Command::Reproduce { figure, jobs } => {
            match commands::reproduce(figure, &root, jobs)? {
                Reproduction::Run(out) => print_run(&out),
                Reproduction::Sweep(rows) => print_sweep(&rows),
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors share exit code 1 with config errors; --help exits 0.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
