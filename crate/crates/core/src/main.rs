use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qarbench::experiments::{single_point, trajectory, ConfigError, CsvFile, ExperimentConfig, Study};

#[derive(Parser)]
#[command(name = "qarbench", version, about = "Three-qubit absorption refrigerator studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Grid override `AXIS.FIELD=VALUE`, e.g. `g.count=80`; repeatable.
    #[arg(long = "grid", global = true, value_name = "AXIS.FIELD=VALUE")]
    grids: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Heat currents versus inter-spin coupling.
    SweepG,
    /// Cooling windows over (T_h, T_w).
    Window,
    /// Cooling power over (g, κ_eff).
    Map,
    /// Random-temperature optimisation of (g, χ).
    RandomOpt,
    /// Entropy production versus coupling.
    Entropy,
    /// Performance record of the configured parameter point.
    Steady,
    /// Relaxation trajectory from the thermal product state.
    Evolve {
        #[arg(long, default_value_t = 40.0)]
        t_max: f64,
        #[arg(long, default_value_t = 401)]
        points: usize,
    },
}

impl Command {
    fn study(&self) -> Option<Study> {
        Some(match self {
            Command::SweepG => Study::SweepCoupling,
            Command::Window => Study::CoolingWindow,
            Command::Map => Study::PerformanceMap,
            Command::RandomOpt => Study::RandomOptimization,
            Command::Entropy => Study::EntropyScan,
            Command::Steady | Command::Evolve { .. } => return None,
        })
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = cli.command.study().map_or_else(ExperimentConfig::default, Study::preset);
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        cfg.apply(&text)?;
    }
    for o in &cli.grids {
        let (key, value) = o.split_once('=').ok_or_else(|| ConfigError::Syntax { line: 0, text: o.clone() })?;
        cfg.set(&format!("grid.{}", key.trim()), value.trim())?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(cli: &Cli, files: &[CsvFile]) -> ExitCode {
    for f in files {
        if let Err(e) = f.write_into(&cli.out) {
            eprintln!("error: cannot write {}: {e}", cli.out.join(f.name).display());
            return ExitCode::FAILURE;
        }
        log::info!("{}: {}/{} rows completed", f.name, f.completed, f.rows);
    }
    if files.iter().all(|f| f.completed == 0) {
        eprintln!("error: no parameter point completed");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(study) = cli.command.study() {
        return match study.run(&cfg) {
            Ok(files) => write(&cli, &files),
            Err(e) => {
                eprintln!("configuration error: {e}");
                ExitCode::from(2)
            }
        };
    }
    match &cli.command {
        Command::Steady => match single_point(&cfg) {
            Ok(r) => {
                println!("model = {}", r.kind.name());
                println!("hamiltonian = {}", r.coupling.name());
                for (k, v) in [
                    ("g", r.g),
                    ("chi", r.chi),
                    ("P_h", r.p_h),
                    ("P_c", r.p_c),
                    ("P_w", r.p_w),
                    ("sum_P", r.power_sum()),
                    ("eta", r.eta),
                    ("eta_opt", r.eta_opt),
                    ("carnot", r.carnot),
                    ("entropy_rate", r.entropy_rate),
                    ("kappa_eff", r.kappa_eff),
                    ("T_v", r.t_v),
                    ("negativity_h_cw", r.negativity_h_cw),
                    ("negativity_c_hw", r.negativity_c_hw),
                    ("coherence_100_011", r.coherence_100_011),
                    ("residual", r.residual),
                    ("min_eigenvalue", r.min_eigenvalue),
                ] {
                    println!("{k} = {v:.16e}");
                }
                println!("cooling = {}", r.cooling);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
        Command::Evolve { t_max, points } => match trajectory(&cfg, *t_max, *points) {
            Ok(rows) => write(&cli, &[CsvFile::new("trajectory.csv", &rows)]),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(3)
            }
        },
        _ => unreachable!("studies handled above"),
    }
}
