//! `oscq`: batch runner for the quantization and dynamics workbench.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use commands::{Ctx, Outcome, Primary};
use config::RunConfig;
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "oscq",
    version,
    about = "Exact quantization algebra and isochronous oscillator dynamics"
)]
struct Cli {
    /// JSON run configuration; inline flags override its parameters
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Primary output file (stdout if omitted); metadata goes to <out>.meta.json
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Integration tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (falls back to OSCQ_THREADS)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Poisson bracket {f, g}
    #[command(allow_negative_numbers = true)]
    Bracket(commands::PairParams),
    /// Moyal bracket of f and g
    #[command(allow_negative_numbers = true)]
    Moyal(commands::PairParams),
    /// Smallest quantizable subalgebra containing f
    #[command(allow_negative_numbers = true)]
    Classify(commands::SingleParams),
    /// Weyl quantization of f
    #[command(allow_negative_numbers = true)]
    Quantize(commands::SingleParams),
    /// (1/(i hbar)) [W(f), W(g)] - W({f, g})
    #[command(allow_negative_numbers = true)]
    DiracDefect(commands::PairParams),
    /// The Groenewold-van Hove contradiction on q^2 p^2
    #[command(allow_negative_numbers = true)]
    Gvh(commands::NoParams),
    /// Check the quantization conditions on a basis
    #[command(allow_negative_numbers = true)]
    VerifyConditions(commands::ConditionsParams),
    /// Integrate an oscillator and write the trajectory
    #[command(allow_negative_numbers = true)]
    Simulate(commands::SimulateParams),
    /// Detect the period of an oscillator orbit
    #[command(allow_negative_numbers = true)]
    Period(commands::PeriodParams),
    /// Residual of the Newtonian H2 equation along a trajectory
    #[command(allow_negative_numbers = true)]
    NewtonCheck(commands::NewtonParams),
    /// Compare H2 trajectories for two values of c
    #[command(allow_negative_numbers = true)]
    CScaling(commands::CScalingParams),
    /// Integrate the matrix oscillator
    #[command(allow_negative_numbers = true)]
    Matrix(commands::MatrixParams),
    /// Integrate the quartic many-body system
    #[command(allow_negative_numbers = true)]
    Manybody(commands::ManyBodyParams),
    /// Rotation invariance of the many-body Hamiltonian
    #[command(allow_negative_numbers = true)]
    RotationCheck(commands::ManyBodyParams),
    /// Lowest eigenvalues of a quantized oscillator
    #[command(allow_negative_numbers = true)]
    Spectrum(commands::SpectrumParams),
    /// Ground-state energy across values of c
    #[command(allow_negative_numbers = true)]
    #[command(name = "e0-scan")]
    E0Scan(commands::ScanParams),
    /// Run the invariant suite
    #[command(allow_negative_numbers = true)]
    Selftest(commands::NoParams),
}

impl Command {
    fn split(&self) -> (&'static str, Value) {
        fn v<T: serde::Serialize>(p: &T) -> Value {
            serde_json::to_value(p).expect("parameters serialize")
        }
        match self {
            Command::Bracket(p) => ("bracket", v(p)),
            Command::Moyal(p) => ("moyal", v(p)),
            Command::Classify(p) => ("classify", v(p)),
            Command::Quantize(p) => ("quantize", v(p)),
            Command::DiracDefect(p) => ("dirac-defect", v(p)),
            Command::Gvh(p) => ("gvh", v(p)),
            Command::VerifyConditions(p) => ("verify-conditions", v(p)),
            Command::Simulate(p) => ("simulate", v(p)),
            Command::Period(p) => ("period", v(p)),
            Command::NewtonCheck(p) => ("newton-check", v(p)),
            Command::CScaling(p) => ("c-scaling", v(p)),
            Command::Matrix(p) => ("matrix", v(p)),
            Command::Manybody(p) => ("manybody", v(p)),
            Command::RotationCheck(p) => ("rotation-check", v(p)),
            Command::Spectrum(p) => ("spectrum", v(p)),
            Command::E0Scan(p) => ("e0-scan", v(p)),
            Command::Selftest(p) => ("selftest", v(p)),
        }
    }
}

fn dispatch(name: &str, params: &Map<String, Value>, ctx: &Ctx) -> CliResult<Outcome> {
    fn p<T: serde::de::DeserializeOwned>(params: &Map<String, Value>) -> CliResult<T> {
        Ok(serde_json::from_value(Value::Object(params.clone()))?)
    }
    match name {
        "bracket" => commands::bracket(p(params)?),
        "moyal" => commands::moyal(p(params)?),
        "classify" => commands::classify(p(params)?),
        "quantize" => commands::quantize(p(params)?),
        "dirac-defect" => commands::dirac(p(params)?),
        "gvh" => commands::gvh(p(params)?),
        "verify-conditions" => commands::verify_conditions(p(params)?, ctx),
        "simulate" => commands::simulate(p(params)?, ctx),
        "period" => commands::period(p(params)?, ctx),
        "newton-check" => commands::newton_check(p(params)?, ctx),
        "c-scaling" => commands::c_scaling(p(params)?, ctx),
        "matrix" => commands::matrix(p(params)?, ctx),
        "manybody" => commands::manybody(p(params)?, ctx),
        "rotation-check" => commands::rotation_check(p(params)?, ctx),
        "spectrum" => commands::spectrum(p(params)?),
        "e0-scan" => commands::scan(p(params)?, ctx),
        "selftest" => commands::selftest(p(params)?, ctx),
        other => Err(CliError::usage(format!("unknown subcommand {other:?}"))),
    }
}

/// Merges the config file with the command line into the echoed config.
fn resolve(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => Some(config::load(path)?),
        None => None,
    };
    let (name, flags) = match (&cli.command, &cfg) {
        (Some(cmd), _) => cmd.split(),
        (None, Some(c)) => {
            let name = c.subcommand.clone();
            return finish(cli, cfg.take().expect("config present"), &name, Value::Null);
        }
        (None, None) => return Err(CliError::usage("no subcommand given (see --help)")),
    };
    let base = match cfg {
        Some(c) if c.subcommand != name => {
            return Err(CliError::usage(format!(
                "config is for subcommand {:?}, not {name:?}",
                c.subcommand
            )))
        }
        Some(c) => c,
        None => RunConfig {
            subcommand: name.into(),
            params: Map::new(),
            out: None,
            seed: None,
            tol: None,
        },
    };
    finish(cli, base, name, flags)
}

fn finish(cli: &Cli, mut cfg: RunConfig, name: &str, flags: Value) -> CliResult<RunConfig> {
    cfg.subcommand = name.to_string();
    config::overlay(&mut cfg.params, flags);
    cfg.out = cli.out.clone().or(cfg.out);
    cfg.seed = Some(cli.seed.or(cfg.seed).unwrap_or(0));
    cfg.tol = cli.tol.or(cfg.tol);
    Ok(cfg)
}

fn thread_count(cli: &Cli) -> CliResult<Option<usize>> {
    if let Some(n) = cli.threads {
        return Ok(Some(n));
    }
    match std::env::var("OSCQ_THREADS") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::usage(format!("OSCQ_THREADS={s:?} is not a count"))),
        Err(_) => Ok(None),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("json");
    bytes.push(b'\n');
    bytes
}

/// A closed stdout (e.g. piped into `head`) is not an error.
fn quiet_pipe(r: std::io::Result<()>) -> CliResult<()> {
    match r {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r.map_err(|e| CliError::io("stdout", e)),
    }
}

fn run(cli: &Cli) -> CliResult<bool> {
    let start = Instant::now();
    if let Some(n) = thread_count(cli)? {
        if n == 0 {
            return Err(CliError::usage("thread count must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("thread pool: {e}")))?;
    }
    let cfg = resolve(cli)?;
    let ctx = Ctx {
        seed: cfg.seed.unwrap_or(0),
        tol: cfg.tol,
    };
    let outcome = dispatch(&cfg.subcommand, &cfg.params, &ctx)?;
    let bytes = match &outcome.primary {
        Primary::Json(v) => pretty(v),
        Primary::Csv(b) => b.clone(),
    };
    let mut stdout = std::io::stdout().lock();
    quiet_pipe(writeln!(stdout, "{}", outcome.summary))?;
    match &cfg.out {
        Some(path) => {
            write_file(path, &bytes)?;
            let sidecar = json!({
                "version": env!("CARGO_PKG_VERSION"),
                "config": serde_json::to_value(&cfg)?,
                "timings": {"total_seconds": start.elapsed().as_secs_f64()},
                "run": outcome.meta,
            });
            write_file(&sidecar_path(path), &pretty(&sidecar))?;
        }
        None => quiet_pipe(stdout.write_all(&bytes))?,
    }
    Ok(!outcome.failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("oscq: invariant check failed");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("oscq: {e}");
            e.exit_code()
        }
    }
}
