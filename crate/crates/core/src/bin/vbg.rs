use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vbg::orchestrator::{self, parse_lengths, GridConfig, Overrides, RunConfig};
use vbg::VbgError;

#[derive(Parser)]
#[command(
    name = "vbg",
    version,
    about = "Vacuum beam guide loss budget and capacity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Attenuation spectrum CSV
    Attenuation(Common),
    /// q2 per length and band-integrated Q2
    Capacity(Common),
    /// Wavelength of least total attenuation
    Optimize(Common),
    /// Misalignment Monte Carlo against the analytic bound
    Simulate(Common),
    /// Check the configuration without computing anything
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; built-in defaults when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// min_nm:max_nm:points
    #[arg(long)]
    grid: Option<String>,
    /// Comma-separated lengths in km
    #[arg(long)]
    lengths: Option<String>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, VbgError> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let overrides = Overrides {
            output_dir: self.out.clone(),
            seed: self.seed,
            grid: self.grid.as_deref().map(GridConfig::parse).transpose()?,
            lengths_km: self.lengths.as_deref().map(parse_lengths).transpose()?,
        };
        config.apply(&overrides);
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<u8, VbgError> {
    match cli.command {
        Command::Attenuation(c) => {
            let (_, out) = orchestrator::attenuation_sweep(&c.load()?)?;
            print_files(&out.files);
        }
        Command::Capacity(c) => {
            let (results, out) = orchestrator::capacity_report(&c.load()?)?;
            for r in &results {
                println!(
                    "L = {} km: Q2 = {:e} qubits/s",
                    r.total_length_km, r.q2_integrated
                );
            }
            print_files(&out.files);
        }
        Command::Optimize(c) => {
            let (best, out) = orchestrator::optimize_wavelength(&c.load()?)?;
            println!(
                "lambda* = {:.4} nm, alpha_tot = {:e} dB/km",
                best.wavelength_nm, best.alpha_min_db_per_km
            );
            print_files(&out.files);
        }
        Command::Simulate(c) => {
            let (report, out) = orchestrator::simulate(&c.load()?)?;
            println!(
                "mean loss/section {:e} +- {:e}, analytic bound {:e}",
                report.mean_fundamental_loss_per_section,
                report.std_error,
                report.analytic_bound_per_section
            );
            print_files(&out.files);
            if !report.bound_holds {
                eprintln!("error: Monte Carlo mean exceeds the analytic bound by more than 3 standard errors");
                return Ok(2);
            }
        }
        Command::Validate(c) => {
            let (report, out) = orchestrator::validate(&c.load()?)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for e in &report.errors {
                eprintln!("error: {e}");
            }
            print_files(&out.files);
            if !report.valid {
                return Ok(1);
            }
            println!("config ok ({})", report.config_hash);
        }
    }
    Ok(0)
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
