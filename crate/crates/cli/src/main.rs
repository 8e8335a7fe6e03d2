//! Command-line front end: simulation runs, verification suites,
//! convergence-bound tables, and benchmark reproduction.
//!
//! All tabular output goes to stdout as CSV; progress and summaries go to
//! stderr. Exit codes: 0 on success, 1 when a verification suite fails, 2 on
//! usage or input errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use so3_attitude::filters::FilterKind;
use so3_attitude::numfmt::g12;
use so3_attitude::oracle;
use so3_attitude::sim::{read_config, run_experiment, ExperimentConfig};
use so3_attitude::verify::{self, Suite};

#[derive(Parser)]
#[command(
    name = "so3-attitude",
    version,
    about = "Complementary attitude filters on SO(3): simulation, verification and convergence bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation experiment from a config file and write its CSV.
    Simulate {
        /// Path to a `key = value` experiment config.
        config: PathBuf,
        /// Override the config's output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named verification suite; per-check results go to stdout as CSV.
    Verify {
        /// One of: lemma1, oracle, prop1, iss, attenuation, vecmeas,
        /// integrator.
        suite: String,
        /// RNG seed (falls back to the SO3_SEED environment variable,
        /// then 42).
        #[arg(long)]
        seed: Option<u64>,
        /// Override the suite's headline tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print a convergence envelope table, or the time-to-ball lower bound
    /// when --B is given.
    Bounds {
        /// Filter kind: I, II or III.
        #[arg(long)]
        kind: FilterKind,
        /// Initial error distance in [0, 1).
        #[arg(long)]
        d0: f64,
        /// Smallest eigenvalue of the induced gain matrix.
        #[arg(long)]
        lmin: Option<f64>,
        /// Largest eigenvalue of the induced gain matrix.
        #[arg(long)]
        lmax: f64,
        /// Envelope rate parameter (kinds II and III).
        #[arg(long)]
        gamma: Option<f64>,
        /// Gain regularization (kinds II and III).
        #[arg(long)]
        epsilon: Option<f64>,
        /// Ball radius: print the lower bound on the time to reach it
        /// (kind I only).
        #[arg(long = "B")]
        ball: Option<f64>,
        /// Table horizon in seconds.
        #[arg(long, default_value_t = 5.0)]
        horizon: f64,
        /// Table step in seconds.
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Regenerate a bundled benchmark output. Figure ids: fig-normR.
    Reproduce {
        figure: String,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Simulate { config, out } => simulate(&config, out),
        Command::Verify { suite, seed, tol } => verify_suite(&suite, seed, tol),
        Command::Bounds {
            kind,
            d0,
            lmin,
            lmax,
            gamma,
            epsilon,
            ball,
            horizon,
            step,
        } => bounds(kind, d0, lmin, lmax, gamma, epsilon, ball, horizon, step),
        Command::Reproduce { figure, out } => reproduce(&figure, &out),
    }
}

fn simulate(config: &Path, out: Option<PathBuf>) -> Result<ExitCode, String> {
    let mut cfg = read_config(config).map_err(|e| e.to_string())?;
    if let Some(out) = out {
        cfg.output = out;
    }
    let record = run_experiment(&cfg).map_err(|e| e.to_string())?;
    eprintln!(
        "wrote {} ({} rows, filters {})",
        cfg.output.display(),
        record.t.len(),
        cfg.filters
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    Ok(ExitCode::SUCCESS)
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("SO3_SEED") {
        Ok(value) => value
            .parse::<u64>()
            .map_err(|_| format!("SO3_SEED must be an unsigned integer, got {value:?}")),
        Err(_) => Ok(42),
    }
}

fn verify_suite(name: &str, seed: Option<u64>, tol: Option<f64>) -> Result<ExitCode, String> {
    let suite: Suite = name.parse()?;
    let seed = resolve_seed(seed)?;
    let report = verify::run(suite, seed, tol);
    print!("{}", report.to_csv());
    eprintln!("{} (seed {seed})", report.summary());
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        let failed = report.first_failure().expect("some check failed");
        eprintln!(
            "FAILED: {}/{} (residual {} > threshold {})",
            suite,
            failed.name,
            g12(failed.residual),
            g12(failed.threshold)
        );
        Ok(ExitCode::from(1))
    }
}

#[allow(clippy::too_many_arguments)]
fn bounds(
    kind: FilterKind,
    d0: f64,
    lmin: Option<f64>,
    lmax: f64,
    gamma: Option<f64>,
    epsilon: Option<f64>,
    ball: Option<f64>,
    horizon: f64,
    step: f64,
) -> Result<ExitCode, String> {
    if let Some(ball) = ball {
        if kind != FilterKind::I {
            return Err("--B (time-to-ball bound) is only defined for --kind I".into());
        }
        let t = oracle::convergence_time_lower(d0, ball, lmax).map_err(|e| e.to_string())?;
        println!("d0,ball,lambda_max,t_lower_s");
        println!("{},{},{},{}", g12(d0), g12(ball), g12(lmax), g12(t));
        return Ok(ExitCode::SUCCESS);
    }

    let lmin = lmin.ok_or("--lmin is required for envelope tables")?;
    if !(step > 0.0 && horizon >= 0.0) {
        return Err("--step must be positive and --horizon nonnegative".into());
    }
    let need = |value: Option<f64>, name: &str| {
        value.ok_or_else(|| format!("--{name} is required for kind {kind}"))
    };
    let envelope_at = |t: f64| match kind {
        FilterKind::I => oracle::filter1_envelope(d0, lmin, lmax, t),
        FilterKind::II => oracle::filter2_envelope(
            d0,
            lmin,
            lmax,
            need(gamma, "gamma").unwrap(),
            need(epsilon, "epsilon").unwrap(),
            t,
        ),
        FilterKind::III => oracle::filter3_envelope(
            d0,
            lmin,
            lmax,
            need(gamma, "gamma").unwrap(),
            need(epsilon, "epsilon").unwrap(),
            t,
        ),
    };
    if kind != FilterKind::I {
        need(gamma, "gamma")?;
        need(epsilon, "epsilon")?;
        // Surface admissibility violations before printing anything.
        envelope_at(0.0).map_err(|e| e.to_string())?;
    }

    println!("t,lower,upper");
    let steps = (horizon / step).round() as usize;
    for k in 0..=steps {
        let t = k as f64 * step;
        let env = envelope_at(t).map_err(|e| e.to_string())?;
        println!("{},{},{}", g12(t), g12(env.lower), g12(env.upper));
    }
    Ok(ExitCode::SUCCESS)
}

fn reproduce(figure: &str, out: &Path) -> Result<ExitCode, String> {
    match figure {
        "fig-normR" => {
            let mut cfg = ExperimentConfig::reference();
            cfg.output = out.join("fig-normR.csv");
            let record = run_experiment(&cfg).map_err(|e| e.to_string())?;
            let crossings: Vec<String> = cfg
                .filters
                .iter()
                .map(|kind| {
                    let t = record
                        .crossing_time(*kind, 0.1)
                        .map(|t| format!("{t:.3} s"))
                        .unwrap_or_else(|| "never".into());
                    format!("{kind} reaches 0.1 at {t}")
                })
                .collect();
            eprintln!("wrote {} ({})", cfg.output.display(), crossings.join(", "));
            Ok(ExitCode::SUCCESS)
        }
        other => Err(format!("unknown figure id {other:?} (available: fig-normR)")),
    }
}
