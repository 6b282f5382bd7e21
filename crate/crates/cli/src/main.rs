use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anomalylab::raman::Species;
use anomalylab_cli::output::{self, FileRecord, Manifest};
use anomalylab_cli::{commands, CliError, OracleMode, ScenarioConfig};
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "anomalylab", version, about = "Dipolar parity-anomaly currents in a driven two-band lattice")]
struct Args {
    /// Scenario file (JSON). Flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV file, or directory for `calibrate`. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid size used by the selected command.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Oracle for `current`: none, pump or evolve.
    #[arg(long, global = true)]
    oracle: Option<OracleMode>,
    /// Species for `calibrate`: rb87 or na23.
    #[arg(long, global = true)]
    species: Option<Species>,
    /// Worker threads.
    #[arg(long, global = true, env = "ANOMALYLAB_THREADS")]
    threads: Option<usize>,
    /// Write a JSON run manifest with output checksums.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Dirac phase over a (lambda, delta_t) grid.
    PhaseDiagram,
    /// Band energies on a k-grid or k-path.
    Bands,
    /// Topological current trace or delta_t sweep.
    Current,
    /// Centre-of-mass drift per density.
    Drift,
    /// Optical-lattice hopping calibration and feasibility maps.
    Calibrate,
    /// Quick closed-form versus oracle checks.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::PhaseDiagram => "phase-diagram",
            Command::Bands => "bands",
            Command::Current => "current",
            Command::Drift => "drift",
            Command::Calibrate => "calibrate",
            Command::Selftest => "selftest",
        }
    }
}

fn load(args: &Args) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            ScenarioConfig::from_json(&text)?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Some(m) = &args.manifest {
        cfg.manifest = Some(m.clone());
    }
    if let Some(o) = args.oracle {
        cfg.oracle = o;
    }
    if let Some(s) = args.species {
        cfg.species = Some(s);
    }
    if let Some(n) = args.threads {
        cfg.threads = Some(n);
    }
    if let Some(n) = args.grid {
        match args.command {
            Command::PhaseDiagram => cfg.resolution = n,
            Command::Bands => cfg.grid = n,
            Command::Current => cfg.oracle_grid = n,
            Command::Calibrate => cfg.calib_resolution = n,
            Command::Drift | Command::Selftest => {}
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: &Args) -> Result<(), CliError> {
    let cfg = load(args)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let out = cfg.out.as_deref();
    let mut records: Vec<FileRecord> = Vec::new();
    let mut pending: Result<(), CliError> = Ok(());
    match args.command {
        Command::PhaseDiagram => records.extend(output::emit(out, &commands::cmd_phase_diagram(&cfg)?.to_csv())?),
        Command::Bands => records.extend(output::emit(out, &commands::cmd_bands(&cfg)?.to_csv())?),
        Command::Current => {
            let res = commands::cmd_current(&cfg)?;
            records.extend(output::emit(out, &res.table.to_csv())?);
            if let Some(s) = &res.oracle {
                eprintln!(
                    "{:?} oracle: {} compared, {} skipped, max relative error {:.3e} (tolerance {:.1e})",
                    s.mode, s.compared, s.skipped, s.max_rel_error, s.tolerance
                );
            }
            pending = res.check();
        }
        Command::Drift => records.extend(output::emit(out, &commands::cmd_drift(&cfg)?.to_csv())?),
        Command::Calibrate => {
            for t in commands::cmd_calibrate(&cfg)? {
                let target = out.map(|dir| dir.join(format!("{}.csv", t.name)));
                match target {
                    Some(p) => records.extend(output::emit(Some(&p), &t.to_csv())?),
                    None => {
                        output::emit(None, &t.to_csv())?;
                        output::emit(None, "\n")?;
                    }
                }
            }
        }
        Command::Selftest => {
            let checks = commands::cmd_selftest();
            let mut text = String::new();
            for c in &checks {
                text += &format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            records.extend(output::emit(out, &text)?);
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                pending = Err(CliError::Oracle(format!("{failed} self-test check(s) failed")));
            }
        }
    }
    if let Some(path) = &cfg.manifest {
        write_manifest(path, args.command.name(), &cfg, records)?;
    }
    pending
}

fn write_manifest(path: &Path, command: &str, cfg: &ScenarioConfig, outputs: Vec<FileRecord>) -> Result<(), CliError> {
    let m = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        schema_version: output::SCHEMA_VERSION,
        config: cfg,
        outputs,
    };
    output::write_manifest(path, &m)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
