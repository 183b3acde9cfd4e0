use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use combbeam_cli::{
    cmd_calibrate, cmd_phase_map, cmd_simulate, cmd_sweep, parse_config, write_tables, CliError, ScenarioConfig,
};

#[derive(Parser)]
#[command(name = "combbeam", version, about = "Frequency-comb k-space beamforming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the k-space beamformer and write envelope, peak and phasor tables.
    Simulate(Common),
    /// Write per-element phase and curvature tables for a planar array.
    PhaseMap(Common),
    /// Re-run the beamformer over the values in the [sweep] table.
    Sweep(Common),
    /// Fit the time-to-u axis and report held-out probe residuals.
    Calibrate(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to output.directory in the scenario.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the noise seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides sim.grid_points.
    #[arg(long)]
    grid_points: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig, CliError> {
        let text = std::fs::read_to_string(&self.config)
            .map_err(|source| CliError::Io { path: self.config.clone(), source })?;
        let mut cfg = parse_config(&text)?;
        if let Some(k) = self.grid_points {
            cfg.sim.grid_points = k;
            cfg.validate()?;
        }
        Ok(cfg)
    }

    fn out_dir(&self, cfg: &ScenarioConfig) -> Result<PathBuf, CliError> {
        self.out
            .clone()
            .or_else(|| cfg.output.directory.as_ref().map(PathBuf::from))
            .ok_or_else(|| CliError::Config("output.directory: no --out given and none configured".into()))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    combbeam_cli::init_threads_from_env()?;
    match cli.command {
        Command::Simulate(c) => {
            let cfg = c.load()?;
            let out = cmd_simulate(&cfg, &c.out_dir(&cfg)?, c.seed)?;
            println!("{} peak(s)", out.peaks.len());
            for p in &out.peaks {
                println!("  az {:+.3} deg  u {:+.5}  t {:.6e} s  |y| {:.4}", p.azimuth_deg, p.u, p.time, p.magnitude);
            }
            if let Some(g) = out.snr_gain_db {
                println!("snr gain {g:.2} dB");
            }
        }
        Command::PhaseMap(c) => {
            let cfg = c.load()?;
            for f in cmd_phase_map(&cfg, &c.out_dir(&cfg)?)? {
                println!("wrote {}", f.display());
            }
        }
        Command::Sweep(c) => {
            let cfg = c.load()?;
            for f in cmd_sweep(&cfg, &c.out_dir(&cfg)?, c.seed)? {
                println!("wrote {}", f.display());
            }
        }
        Command::Calibrate(c) => {
            let cfg = c.load()?;
            let report = cmd_calibrate(&cfg, c.seed)?;
            println!("{report}");
            if let Some(dir) = c.out.clone().or_else(|| cfg.output.directory.as_ref().map(PathBuf::from)) {
                write_tables(&dir, &[report.table()])?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
