//! `jcberry`: geometric-phase experiments from the command line.
//!
//! One subcommand per experiment kind plus `sweep` for Cartesian parameter
//! grids. Configuration comes from an optional TOML file with flags
//! overriding it field by field; records go to stdout or `--out` as CSV or
//! JSON lines. Exit codes: 0 success, 2 configuration error, 3 physics
//! error, 4 I/O error.

mod config;
mod records;
mod runner;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use config::{resolve, FileConfig, Format, Kind, Overrides};

#[derive(Parser)]
#[command(name = "jcberry", version, about = "Geometric phases of a driven spin-1/2 coupled to quantized field modes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Loop phase of the classically driven spin against its closed form
    Semiclassical(CommonArgs),
    /// Dressed-level loop phase of the quantized single-mode model
    #[command(name = "single-mode")]
    SingleMode(CommonArgs),
    /// Polarization-loop phase of the two-mode model on the Poincare sphere
    #[command(name = "two-mode")]
    TwoMode(CommonArgs),
    /// Weighted-average phase of the vacuum mixture at a loop angle
    Mixed(CommonArgs),
    /// Real-time propagation around the single-mode loop
    Adiabatic(CommonArgs),
    /// Coherent-state experiment approaching the classical-drive limit
    #[command(name = "semiclassical-limit")]
    SemiclassicalLimit(CommonArgs),
    /// Cartesian grid over an inner experiment kind
    Sweep(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML configuration file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_parser = ["csv", "jsonl"])]
    format: Option<String>,
    /// Worker thread count (default: JCBERRY_WORKERS or 1)
    #[arg(long)]
    workers: Option<u64>,
    /// Abort the grid at the first failing point
    #[arg(long)]
    fail_fast: bool,
    /// Run the seeded gauge-randomization self-check before executing
    #[arg(long)]
    seed: Option<u64>,
    /// Serialize per-point wall times (off by default: they vary run to run)
    #[arg(long)]
    timing: bool,
    /// Inner experiment kind of a sweep
    #[arg(long)]
    experiment: Option<String>,
    /// Qubit-field detuning
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Coupling strength
    #[arg(long)]
    lambda: Option<f64>,
    /// Mode frequency
    #[arg(long)]
    nu: Option<f64>,
    /// Drive or coherent amplitude
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Second-mode coherent amplitude
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Loop polar angle in radians
    #[arg(long)]
    theta: Option<f64>,
    /// Photon number of the dressed rung
    #[arg(long)]
    n: Option<u64>,
    /// Spectator-mode photon number
    #[arg(long)]
    nprime: Option<u64>,
    /// Dressed branch: + or -
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<String>,
    /// Evolution duration in units of inverse coupling
    #[arg(long)]
    duration: Option<f64>,
    /// Loop discretization nodes
    #[arg(long)]
    nodes: Option<u64>,
    /// Fock cutoff of the first mode
    #[arg(long)]
    cutoff_a: Option<u64>,
    /// Fock cutoff of the second mode
    #[arg(long)]
    cutoff_b: Option<u64>,
    /// Time steps (0 selects the default density)
    #[arg(long)]
    steps: Option<u64>,
}

enum Failure {
    Config(String),
    Physics(String),
    Io(String),
}

impl Failure {
    fn report(&self) -> ExitCode {
        let (label, message, code) = match self {
            Failure::Config(m) => ("configuration", m, 2),
            Failure::Physics(m) => ("physics", m, 3),
            Failure::Io(m) => ("i/o", m, 4),
        };
        eprintln!("jcberry: {label} error: {message}");
        ExitCode::from(code)
    }
}

fn main() -> ExitCode {
    // eigensolves must not depend on ambient thread availability: output
    // bytes are compared across worker counts
    faer::set_global_parallelism(faer::Par::Seq);
    let cli = Cli::parse();
    let (kind, sweep, args) = match cli.command {
        Command::Semiclassical(a) => (Some(Kind::Semiclassical), false, a),
        Command::SingleMode(a) => (Some(Kind::SingleMode), false, a),
        Command::TwoMode(a) => (Some(Kind::TwoMode), false, a),
        Command::Mixed(a) => (Some(Kind::Mixed), false, a),
        Command::Adiabatic(a) => (Some(Kind::Adiabatic), false, a),
        Command::SemiclassicalLimit(a) => (Some(Kind::SemiclassicalLimit), false, a),
        Command::Sweep(a) => (None, true, a),
    };
    match drive(kind, sweep, args) {
        Ok(true) => ExitCode::from(3),
        Ok(false) => ExitCode::SUCCESS,
        Err(failure) => failure.report(),
    }
}

fn drive(kind: Option<Kind>, sweep: bool, args: CommonArgs) -> Result<bool, Failure> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::Config(format!("cannot read {}: {e}", path.display()))
            })?;
            toml::from_str::<FileConfig>(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let flags = Overrides {
        experiment: args.experiment,
        delta: args.delta,
        lambda: args.lambda,
        nu: args.nu,
        alpha: args.alpha,
        beta: args.beta,
        theta: args.theta,
        n: args.n,
        nprime: args.nprime,
        sign: args.sign,
        duration: args.duration,
        nodes: args.nodes,
        cutoff_a: args.cutoff_a,
        cutoff_b: args.cutoff_b,
        steps: args.steps,
        out: args.out,
        format: args.format,
        workers: args.workers,
        fail_fast: args.fail_fast,
        seed: args.seed,
        timing: args.timing,
    };
    let experiment = resolve(file, flags, kind, sweep).map_err(Failure::Config)?;
    if experiment.points.is_empty() {
        return Err(Failure::Config("the grid is empty".into()));
    }

    if let Some(seed) = experiment.seed {
        runner::gauge_self_check(seed).map_err(Failure::Physics)?;
        eprintln!("gauge self-check passed (seed {seed})");
    }

    let (records, had_error) = runner::run_experiment(&experiment);

    let stamp = format!(
        "unix:{}",
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
    );
    let emit = |w: &mut dyn Write| -> std::io::Result<()> {
        match experiment.format {
            Format::Csv => records::write_csv(
                w,
                experiment.kind.name(),
                &stamp,
                &records,
                experiment.timing,
            ),
            Format::Jsonl => records::write_jsonl(w, &records, experiment.timing),
        }
    };
    match &experiment.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| {
                Failure::Io(format!("cannot create {}: {e}", path.display()))
            })?;
            let mut writer = BufWriter::new(file);
            emit(&mut writer)
                .and_then(|()| writer.flush())
                .map_err(|e| Failure::Io(format!("writing {}: {e}", path.display())))?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            emit(&mut lock).map_err(|e| Failure::Io(format!("writing stdout: {e}")))?;
        }
    }
    Ok(had_error)
}
