use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use afmpc::harness::{compare_report, export_csv, run_scenario, HarnessError, ScenarioConfig};
use afmpc::mpc::ControllerKind;

#[derive(Parser)]
#[command(
    version,
    about = "Classical and adaptive fuzzy MPC of a rotational inverted pendulum"
)]
struct Cli {
    /// Print the complete default configuration and exit.
    #[arg(long)]
    print_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Classical,
    Afmpc,
}

#[derive(Subcommand)]
enum Command {
    /// Run one controller and write its trajectory CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        controller: Kind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Record wall-clock solve times in the CSV.
        #[arg(long)]
        timing: bool,
    },
    /// Run both controllers on the same scenario and write
    /// classical.csv, afmpc.csv and report.txt.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        timing: bool,
    },
}

fn load(path: &Path, seed: Option<u64>, timing: bool) -> Result<ScenarioConfig, HarnessError> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.record_timing |= timing;
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs one controller; on divergence the partial log is still written.
fn run_one(cfg: &ScenarioConfig, kind: ControllerKind, out: &Path) -> Result<afmpc::harness::RunMetrics, HarnessError> {
    let cfg = ScenarioConfig {
        controller: kind,
        ..cfg.clone()
    };
    match run_scenario(&cfg) {
        Ok((log, metrics)) => {
            export_csv(&log, out, cfg.record_timing)?;
            Ok(metrics)
        }
        Err(HarnessError::Divergence { t, reason, log }) => {
            export_csv(&log, out, cfg.record_timing)?;
            Err(HarnessError::Divergence { t, reason, log })
        }
        Err(e) => Err(e),
    }
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run {
            config,
            controller,
            out,
            seed,
            timing,
        } => {
            let cfg = load(&config, seed, timing)?;
            let kind = match controller {
                Kind::Classical => ControllerKind::Classical,
                Kind::Afmpc => ControllerKind::Adaptive,
            };
            let m = run_one(&cfg, kind, &out)?;
            println!(
                "{}: rmse {:.6} rad, steady-state {:.6} rad, mean solve {:.3} ms",
                kind.name(),
                m.rmse,
                m.steady_state_error,
                m.mean_solve_time * 1e3
            );
        }
        Command::Compare {
            config,
            out_dir,
            seed,
            timing,
        } => {
            let cfg = load(&config, seed, timing)?;
            std::fs::create_dir_all(&out_dir).map_err(|source| HarnessError::Io {
                path: out_dir.clone(),
                source,
            })?;
            let classical = run_one(&cfg, ControllerKind::Classical, &out_dir.join("classical.csv"))?;
            let adaptive = run_one(&cfg, ControllerKind::Adaptive, &out_dir.join("afmpc.csv"))?;
            let report = compare_report(&classical, &adaptive);
            write(&out_dir.join("report.txt"), &report)?;
            print!("{report}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if cli.print_defaults {
        print!("{}", ScenarioConfig::default().to_text());
        return ExitCode::SUCCESS;
    }
    let Some(command) = cli.command else {
        eprintln!("nothing to do: give a subcommand or --print-defaults (see --help)");
        return ExitCode::from(1);
    };
    match execute(command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
