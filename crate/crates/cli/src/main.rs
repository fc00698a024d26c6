use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nsac_core::geometry::verify::run_suite;
use nsac_core::harness::{self, RunConfig, SweepSpec};
use nsac_core::Error;

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

const EXIT_FAILED_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ABORT: u8 = 3;

#[derive(Parser)]
#[command(name = "nsac", version, about = "Diffuse-interface Navier-Stokes/Allen-Cahn simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run an eps/theta sweep and fit convergence rates.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        /// Accept mobility exponents outside the admissible window.
        #[arg(long)]
        allow_exploratory: bool,
    },
    /// Check the interface geometry and weight properties on the config's grid.
    VerifyGeometry {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print a digest of a finished run directory.
    Report {
        #[arg(long)]
        run_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config } => simulate(&config),
        Command::Sweep { spec, allow_exploratory } => sweep(&spec, allow_exploratory),
        Command::VerifyGeometry { config } => verify_geometry(&config),
        Command::Report { run_dir } => report(&run_dir),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("error: {error}");
            ExitCode::from(code)
        }
    }
}

struct Failure {
    code: u8,
    error: Error,
}

/// Problems reading the inputs are configuration errors whatever their kind.
fn input(error: Error) -> Failure {
    Failure { code: EXIT_CONFIG, error }
}

fn classify(error: Error) -> Failure {
    let code = if error.is_config_error() { EXIT_CONFIG } else { EXIT_ABORT };
    Failure { code, error }
}

fn simulate(path: &Path) -> Result<u8, Failure> {
    let cfg = RunConfig::load(path).map_err(input)?;
    cfg.validate().map_err(input)?;
    let out = harness::run(&cfg).map_err(classify)?;
    if let Some(dir) = &out.dir {
        match harness::describe_run(dir) {
            Ok(text) => print!("{text}"),
            Err(e) => log::warn!("cannot summarise {}: {e}", dir.display()),
        }
    } else {
        let s = &out.summary;
        println!("{} steps, E_total(T) = {:.6e}, clean: {}", s.steps, s.e_total_final, s.clean);
    }
    Ok(0)
}

fn sweep(path: &Path, allow_exploratory: bool) -> Result<u8, Failure> {
    let mut spec = SweepSpec::load(path).map_err(input)?;
    if allow_exploratory {
        spec.base.solver.allow_exploratory = true;
    }
    spec.validate().map_err(input)?;
    let outcome = harness::sweep(&spec, harness::worker_count()).map_err(classify)?;
    for g in &outcome.groups {
        println!("theta = {}", g.theta);
        for (name, fit) in [("E + E_vol", &g.e_total), ("sup l1_psi", &g.l1_psi_sup)] {
            match fit {
                Some(f) => println!("  {name:<12} slope {:.4}  residual {:.4}", f.slope, f.residual),
                None => println!("  {name:<12} no fit"),
            }
        }
        for e in &g.fit_errors {
            println!("  fit error: {e}");
        }
        let c: Vec<String> = g.gronwall.constants.iter().map(|c| format!("{c:.3}")).collect();
        println!("  gronwall C [{}] stable: {}", c.join(", "), g.gronwall.stable);
    }
    println!("rates written to {}", spec.output_dir.join("rates.json").display());
    if outcome.failed > 0 {
        eprintln!("error: {} sweep member(s) failed", outcome.failed);
        return Ok(EXIT_ABORT);
    }
    if outcome.excluded > 0 {
        log::warn!("{} member(s) excluded from the fits after invariant violations", outcome.excluded);
    }
    Ok(0)
}

fn verify_geometry(path: &Path) -> Result<u8, Failure> {
    let cfg = RunConfig::load(path).map_err(input)?;
    let grid = cfg.grid.build().map_err(input)?;
    let geo = cfg.geometry_or_default();
    let params = geo.params(&grid);
    let iface = geo.interface(&grid).map_err(input)?;
    iface.validate(&params, &grid, cfg.solver.t_end).map_err(input)?;
    let checks = run_suite(&iface, &params, &grid);
    for c in &checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        println!("{mark} {:<40} {:>12.4e}  {}", c.name, c.value, c.detail);
    }
    if let Some(dir) = &cfg.output.dir {
        let path = dir.join("geometry_checks.json");
        let written = std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(&path, serde_json::to_string_pretty(&checks).unwrap_or_default()));
        if let Err(e) = written {
            log::warn!("cannot write {}: {e}", path.display());
        }
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(if failed == 0 { 0 } else { EXIT_FAILED_CHECK })
}

fn report(dir: &Path) -> Result<u8, Failure> {
    let text = harness::describe_run(dir).map_err(input)?;
    print!("{text}");
    Ok(0)
}
