//! `capstab` — batch front end for the stability toolkit.
//!
//! Subcommands: `analyze` runs the full pipeline on one configured surface,
//! `verify` runs an identity suite, `sweep` scans a family parameter.
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numerical failure. Logging is controlled by `CAPSTAB_LOG`
//! (`error` | `info` | `debug`; default `error`).

mod config;
mod figures;
mod pipeline;
mod sweep;
mod verify;

use std::path::PathBuf;

use capstab_core::Error;
use clap::{Args, Parser, Subcommand};

mod exit {
    pub const OK: i32 = 0;
    pub const VERIFICATION: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Parser)]
#[command(
    name = "capstab",
    version,
    about = "Stability and Morse-index analysis of minimal surfaces meeting a ball boundary at constant angle"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Directory artifacts are written to (overrides the config).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Mesh refinement level (overrides the config).
    #[arg(long)]
    mesh_level: Option<usize>,
    /// Worker threads for sweep points and verification jobs.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Full analysis of one surface: stationarity, spectrum, verdict,
    /// identities, topology; writes report.json, spectrum.csv, figures.
    Analyze {
        /// Path to a JSON run configuration.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run an identity verification suite over the shipped surfaces.
    Verify {
        /// Which suite to run.
        #[arg(long, value_enum)]
        suite: verify::Suite,
        #[command(flatten)]
        common: Common,
    },
    /// Analyze a family across a parameter grid; writes sweep.csv and
    /// sweep.svg.
    Sweep {
        /// Path to a JSON run configuration with a `sweep` block.
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn init_logging() -> Result<(), String> {
    let level = match std::env::var("CAPSTAB_LOG") {
        Err(_) => log::LevelFilter::Error,
        Ok(v) => match v.as_str() {
            "error" => log::LevelFilter::Error,
            "info" => log::LevelFilter::Info,
            "debug" => log::LevelFilter::Debug,
            other => {
                return Err(format!(
                    "config error: CAPSTAB_LOG must be `error`, `info`, or `debug` (got `{other}`)"
                ))
            }
        },
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    Ok(())
}

fn setup_threads(threads: Option<usize>) -> Result<(), String> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err("config error: --threads must be at least 1".to_string());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("config error: cannot size the worker pool: {e}"))
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Argument(_) => exit::CONFIG,
        _ => exit::NUMERICAL,
    }
}

fn report_error(e: &Error) -> i32 {
    eprintln!("error: {e}");
    error_code(e)
}

fn cmd_analyze(config_path: &PathBuf, common: &Common) -> i32 {
    let cfg = match config::load_config(
        config_path,
        "analyze",
        common.out_dir.as_deref(),
        common.mesh_level,
    ) {
        Ok(cfg) => cfg,
        Err(e) => return report_error(&e),
    };
    let artifacts = match pipeline::run_analyze(&cfg) {
        Ok(a) => a,
        Err(e) => return report_error(&e),
    };
    let spec = artifacts.report.spectrum.as_ref().expect("analysis always carries a spectrum");
    println!(
        "analyze {} [level {}, {} vertices]",
        artifacts.label,
        cfg.mesh_level,
        artifacts.imm.mesh.vertex_count()
    );
    println!(
        "verdict: {:?} (constrained index {}, bracket [{}, {}], zero band {})",
        spec.verdict, spec.morse_index, spec.index_bracket[0], spec.index_bracket[1],
        spec.constrained.zero_band
    );
    match pipeline::write_outputs(&cfg, &artifacts) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            exit::OK
        }
        Err(e) => report_error(&e),
    }
}

fn cmd_verify(suite: verify::Suite, common: &Common) -> i32 {
    // Identities are checked on the analytic chart, so the coarsest mesh is
    // the default; the flag still allows denser sampling.
    let level = common.mesh_level.unwrap_or(0);
    let tol = config::Tolerances::default().identity;
    let outcome = match verify::run_verify(suite, level, tol) {
        Ok(o) => o,
        Err(e) => return report_error(&e),
    };
    for line in &outcome.lines {
        println!("{line}");
    }
    let total = outcome.lines.len();
    let failed = outcome.lines.iter().filter(|l| l.contains(": FAIL")).count();
    if let Some(dir) = &common.out_dir {
        if let Err(e) = std::fs::create_dir_all(dir)
            .map_err(Error::from)
            .and_then(|()| outcome.report.to_json())
            .and_then(|json| std::fs::write(dir.join("report.json"), json).map_err(Error::from))
        {
            return report_error(&e);
        }
        println!("wrote {}", dir.join("report.json").display());
    }
    if outcome.all_pass {
        println!("verify {}: {total} checks passed", suite.name());
        exit::OK
    } else {
        println!("verify {}: {failed} of {total} checks failed", suite.name());
        exit::VERIFICATION
    }
}

fn cmd_sweep(config_path: &PathBuf, common: &Common) -> i32 {
    let cfg = match config::load_config(
        config_path,
        "sweep",
        common.out_dir.as_deref(),
        common.mesh_level,
    ) {
        Ok(cfg) => cfg,
        Err(e) => return report_error(&e),
    };
    let rows = match sweep::run_sweep(&cfg) {
        Ok(rows) => rows,
        Err(e) => return report_error(&e),
    };
    let spec = cfg.sweep.as_ref().expect("sweep config was validated");

    let out_dir = cfg.output.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let write = || -> capstab_core::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(&out_dir)?;
        let csv_path = out_dir.join("sweep.csv");
        std::fs::write(&csv_path, sweep::sweep_csv(&rows))?;
        let mut written = vec![csv_path];
        if cfg.output.figures {
            let svg_path = out_dir.join("sweep.svg");
            let title = format!("{} sweep: {}", cfg.surface.label(), spec.parameter);
            std::fs::write(&svg_path, figures::sweep_svg(&rows, &spec.parameter, &title))?;
            written.push(svg_path);
        }
        Ok(written)
    };
    let written = match write() {
        Ok(w) => w,
        Err(e) => return report_error(&e),
    };

    for row in &rows {
        if row.is_ok() {
            println!(
                "sweep {}={}: lambda1 = {:.6}, constrained index = {}",
                spec.parameter,
                row.parameter,
                row.lambda1.unwrap_or(f64::NAN),
                row.constrained_index.unwrap_or(0),
            );
        } else {
            println!("sweep {}={}: {}", spec.parameter, row.parameter, row.status);
        }
    }
    for p in written {
        println!("wrote {}", p.display());
    }
    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    if failed == 0 {
        println!("sweep: {} points analyzed", rows.len());
        exit::OK
    } else {
        println!("sweep: {failed} of {} points failed", rows.len());
        exit::NUMERICAL
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(msg) = init_logging() {
        eprintln!("{msg}");
        std::process::exit(exit::CONFIG);
    }
    let common = match &cli.command {
        Cmd::Analyze { common, .. } | Cmd::Verify { common, .. } | Cmd::Sweep { common, .. } => {
            common
        }
    };
    if let Err(msg) = setup_threads(common.threads) {
        eprintln!("{msg}");
        std::process::exit(exit::CONFIG);
    }
    let code = match &cli.command {
        Cmd::Analyze { config, common } => cmd_analyze(config, common),
        Cmd::Verify { suite, common } => cmd_verify(*suite, common),
        Cmd::Sweep { config, common } => cmd_sweep(config, common),
    };
    std::process::exit(code);
}
