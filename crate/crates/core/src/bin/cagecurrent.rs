use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cagecurrent::cli::{
    self, cmd_charge_sweep, cmd_check, cmd_heatmap, cmd_planes, cmd_spectrum, scan, RunConfig, EXIT_CHECK,
    EXIT_CONFIG,
};
use cagecurrent::Error;

#[derive(Parser)]
#[command(name = "cagecurrent", version, about = "Vortex-driven currents and centre fields in a cage shell model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Photon-energy scan at fixed charge and offset
    Spectrum(Common),
    /// Photon energy by offset-ratio map
    Heatmap(Common),
    /// Topological-charge sweep
    ChargeSweep(Common),
    /// xy and xz current-density maps
    Planes(Common),
    /// Invariant suite
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// TOML configuration; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding output.dir
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Dotted key=value override, e.g. pulse.charge=2
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn load(&self) -> cagecurrent::Result<RunConfig> {
        let mut overrides = self.overrides.clone();
        if let Some(out) = &self.out {
            overrides.push(format!("output.dir={}", toml::Value::String(out.display().to_string())));
        }
        match &self.config {
            Some(path) => RunConfig::from_path(path, &overrides),
            None => RunConfig::from_toml_with_overrides("", &overrides),
        }
    }
}

fn run(cli: Cli) -> Result<i32, Error> {
    let (Command::Spectrum(common)
    | Command::Heatmap(common)
    | Command::ChargeSweep(common)
    | Command::Planes(common)
    | Command::Check(common)) = &cli.command;
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let config = common.load()?;
    match &cli.command {
        Command::Spectrum(_) | Command::Heatmap(_) => {
            let result = match cli.command {
                Command::Spectrum(_) => cmd_spectrum(&config)?,
                _ => cmd_heatmap(&config)?,
            };
            finish_scan(&result, &config)?;
        }
        Command::ChargeSweep(_) => {
            let sweep = cmd_charge_sweep(&config)?;
            finish_scan(&sweep.scan, &config)?;
            if let Some(c) = sweep.cutoff {
                println!("cutoff charge {c} (literature value {})", scan::REFERENCE_CUTOFF);
            }
            if let Some(a) = sweep.argmax {
                println!("largest |B_center| at charge {a}");
            }
            if let Some(f) = sweep.flatness {
                println!("flatness |B(20)-B(14)|/|B(14)| = {f:.3e}");
            }
        }
        Command::Planes(_) => {
            let report = cmd_planes(&config, true)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            let summary = format!(
                "config_hash {}\nversion {}\nomega_eV {:.9e}\ncharge {}\nrho0_nm {:.9e}\nring_count {}\nlattice_integrated_j {:.9e}\n\
                 integrated_j_32 {:.9e}\nintegrated_j_64 {:.9e}\nrefinement_change {:.3e}\n",
                report.config_hash,
                cli::VERSION,
                report.omega_ev,
                report.charge,
                report.rho0_nm,
                report.ring_count,
                report.lattice_integral,
                report.refinement.0,
                report.refinement.1,
                report.refinement_change
            );
            let path = scan::write_text(&config, "planes", "report.txt", &summary)?;
            print!("{summary}");
            println!("wrote {}", path.display());
        }
        Command::Check(_) => {
            let report = cmd_check(&config)?;
            report.write(std::io::stdout().lock())?;
            if !report.passed() {
                return Ok(EXIT_CHECK);
            }
        }
    }
    Ok(cli::EXIT_OK)
}

fn finish_scan(result: &cli::ScanResult, config: &RunConfig) -> cagecurrent::Result<()> {
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    for f in result.write_files(config)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            cli::exit_code(&e)
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_CONFIG as u8))
}
