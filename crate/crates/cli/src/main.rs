mod report;
mod scenario;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use nonlocality_core::lp::SimplexOptions;
use nonlocality_core::{
    build_threshold_lp, correlation_tensor, lp::feasible_at_with, optimize_phases, optimize_state_and_phases,
    threshold_with, Error as CoreError, OptimizationConfig, Scenario, SearchMode, SimplexSolver,
};

use report::{CommandEcho, OptimizerSection, RunReport, ScenarioEcho, ThresholdSection, Tolerances, Tool};
use scenario::ScenarioFile;

#[derive(Parser, Debug)]
#[command(
    name = "nonlocality",
    version,
    about = "Noise thresholds for local-realistic descriptions of multiport Bell experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Threshold noise fraction for the state and settings in a scenario file.
    Threshold(RunArgs),
    /// Maximize the threshold over phases, or phases and state.
    Optimize(OptimizeArgs),
    /// Re-check a report written by `threshold` or `optimize`.
    Verify {
        /// Report file to check.
        report: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print the threshold program in plain-text LP format.
    DumpLp {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Write the full JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// LP feasibility and optimality tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Phases,
    All,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value_t = Mode::Phases)]
    mode: Mode,
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long)]
    workers: Option<usize>,
}

/// Exit codes.
const VERIFY_FAILED: u8 = 1;
const INPUT_ERROR: u8 = 2;
const SOLVER_ERROR: u8 = 3;

struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait Classify<T> {
    fn input(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn input(self) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code: INPUT_ERROR,
            error: e.into(),
        })
    }
}

/// Solver trouble maps to exit 3; bad arguments surfacing from the core are input errors.
fn core(e: CoreError) -> Failure {
    let code = match e {
        CoreError::InvalidArgument(_) | CoreError::UnsupportedScenario(_) => INPUT_ERROR,
        CoreError::Solver(_) | CoreError::InternalConsistency(_) => SOLVER_ERROR,
    };
    Failure { code, error: e.into() }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INPUT_ERROR } else { 0 });
        }
    };
    let argv: Vec<String> = std::env::args().collect();
    match run(cli.command, argv) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command, argv: Vec<String>) -> Result<u8, Failure> {
    match command {
        Command::Threshold(args) => cmd_threshold(&args, argv),
        Command::Optimize(args) => cmd_optimize(&args, argv),
        Command::Verify { report, tol } => cmd_verify(&report, tol),
        Command::DumpLp { scenario, out } => cmd_dump_lp(&scenario, out.as_deref()),
    }
}

fn load_scenario(path: &Path) -> Result<(ScenarioFile, String), Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .input()?;
    let file = ScenarioFile::parse(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .input()?;
    Ok((file, report::sha256_hex(text.as_bytes())))
}

fn solver_for(tol: f64) -> Result<SimplexSolver, Failure> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(anyhow!("--tol {tol} must lie in (0, 1)")).input();
    }
    Ok(SimplexSolver::new(SimplexOptions {
        feasibility_tol: tol,
        optimality_tol: tol,
        ..SimplexOptions::default()
    }))
}

fn echo(file: &ScenarioFile, sc: Scenario, digest: String) -> ScenarioEcho {
    ScenarioEcho {
        parties: sc.parties(),
        dim: sc.dim(),
        settings_per_party: sc.settings_per_party(),
        file: file.clone(),
        file_sha256: digest,
    }
}

fn write_report(path: Option<&Path>, report: &RunReport) -> Result<(), Failure> {
    if let Some(path) = path {
        let json = serde_json::to_string_pretty(report).input()?;
        fs::write(path, json + "\n")
            .with_context(|| format!("writing {}", path.display()))
            .input()?;
    }
    Ok(())
}

fn print_value(v: f64) {
    println!("{v:.6}");
}

fn cmd_threshold(args: &RunArgs, argv: Vec<String>) -> Result<u8, Failure> {
    let clock = Instant::now();
    let (file, digest) = load_scenario(&args.scenario)?;
    let resolved = file.resolve().input()?;
    let solver = solver_for(args.tol)?;
    let tensor = correlation_tensor(&resolved.state, &resolved.settings).map_err(core)?;
    let result = threshold_with(&solver, &resolved.state, &resolved.settings).map_err(core)?;
    info!("threshold {} after {} pivots", result.f_thr.value(), result.iterations);
    let section = ThresholdSection::new(&resolved.state, &resolved.settings, &tensor, &result).map_err(core)?;
    let noise_query = resolved.noise.map(|f| report::NoiseQuery {
        noise: f.value(),
        feasible: feasible_at_with(&solver, &tensor, f).0,
    });
    let report = RunReport {
        tool: Tool::current(),
        command: CommandEcho {
            argv,
            subcommand: "threshold".into(),
            rng_seed: None,
        },
        scenario: echo(&file, resolved.scenario, digest),
        tolerances: Tolerances {
            feasibility: args.tol,
            optimality: args.tol,
        },
        result: section,
        noise_query,
        optimizer: None,
        wall_clock_secs: clock.elapsed().as_secs_f64(),
    };
    write_report(args.out.as_deref(), &report)?;
    print_value(report.result.f_thr);
    Ok(0)
}

fn cmd_optimize(args: &OptimizeArgs, argv: Vec<String>) -> Result<u8, Failure> {
    let clock = Instant::now();
    let (file, digest) = load_scenario(&args.run.scenario)?;
    let sc = file.scenario().input()?;
    let solver = solver_for(args.run.tol)?;
    let config = OptimizationConfig {
        restarts: args.restarts,
        rng_seed: args.seed,
        mode: match args.mode {
            Mode::Phases => SearchMode::PhasesOnly,
            Mode::All => SearchMode::PhasesAndState,
        },
        workers: args.workers,
        lp_options: solver.options.clone(),
        ..OptimizationConfig::default()
    };
    let result = match config.mode {
        SearchMode::PhasesOnly => {
            let state = file.resolve_state().input()?;
            optimize_phases(&state, &config)
        }
        SearchMode::PhasesAndState => optimize_state_and_phases(sc, &config),
    }
    .map_err(core)?;
    info!("best {} over {} evaluations", result.best_f_thr.value(), result.evals);

    let tensor = correlation_tensor(&result.best_state, &result.best_settings).map_err(core)?;
    let best = threshold_with(&solver, &result.best_state, &result.best_settings).map_err(core)?;
    let section = ThresholdSection::new(&result.best_state, &result.best_settings, &tensor, &best).map_err(core)?;
    let report = RunReport {
        tool: Tool::current(),
        command: CommandEcho {
            argv,
            subcommand: "optimize".into(),
            rng_seed: Some(args.seed),
        },
        scenario: echo(&file, sc, digest),
        tolerances: Tolerances {
            feasibility: args.run.tol,
            optimality: args.run.tol,
        },
        result: section,
        noise_query: None,
        optimizer: Some(OptimizerSection::new(&config, &result)),
        wall_clock_secs: clock.elapsed().as_secs_f64(),
    };
    write_report(args.run.out.as_deref(), &report)?;
    print_value(result.best_f_thr.value());
    Ok(0)
}

fn cmd_verify(path: &Path, tol: Option<f64>) -> Result<u8, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .input()?;
    let mut report: RunReport = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .input()?;
    if let Some(t) = tol {
        solver_for(t)?;
        report.tolerances = Tolerances {
            feasibility: t,
            optimality: t,
        };
    }
    let failures = verify::verify(&report).map_err(|error| Failure {
        code: INPUT_ERROR,
        error,
    })?;
    if failures.is_empty() {
        println!("ok");
        return Ok(0);
    }
    let mut err = std::io::stderr().lock();
    for f in &failures {
        let _ = writeln!(err, "FAIL {f}");
    }
    Ok(VERIFY_FAILED)
}

fn cmd_dump_lp(path: &Path, out: Option<&Path>) -> Result<u8, Failure> {
    let (file, _) = load_scenario(path)?;
    let resolved = file.resolve().input()?;
    let tensor = correlation_tensor(&resolved.state, &resolved.settings).map_err(core)?;
    let text = build_threshold_lp(&tensor).to_text();
    match out {
        Some(p) => fs::write(p, text)
            .with_context(|| format!("writing {}", p.display()))
            .input()?,
        None => print!("{text}"),
    }
    Ok(0)
}
