use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gm_spheres::verify::{
    degree_json, emit_report, normal_form_json, orbit_eq_json, run_suite, trace_geodesic, write_text, Suite,
    SuiteConfig, VerifyError, TOL_ENV,
};
use gm_spheres::{BundlePoint, ClutchValue, ImaginaryQuaternion, QuatPair, Quaternion, Sampler};

/// Numerical checks for the generalized Gromoll-Meyer spheres.
#[derive(Parser, Debug)]
#[command(name = "gm-spheres", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Write the explicit geodesic lift leaving the identity as CSV.
    Trace(TraceArgs),
    /// Decide whether two points of E^10_n lie on the same star-orbit.
    OrbitEq(OrbitEqArgs),
    /// Move a point of E^10_n into the cohomogeneity-two normal form.
    NormalForm(NormalFormArgs),
    /// Count signed preimages of a regular value of rho_n.
    Degree(DegreeArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite name; run with an unknown name to list the registry.
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
    n: i64,
    /// Fiber scale of the connection metric.
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replaces every default tolerance of the suite.
    #[arg(long, env = TOL_ENV)]
    tol: Option<f64>,
    /// Integrator step.
    #[arg(long, default_value_t = 1e-2)]
    step: f64,
    /// Output path; standard output when omitted or `-`.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    n: i64,
    /// Imaginary direction `i,j,k`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    p: Vec<f64>,
    /// Quaternion direction `re,i,j,k`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    w: Vec<f64>,
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    t_max: f64,
    #[arg(long, default_value_t = 1e-2)]
    step: f64,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct OrbitEqArgs {
    #[arg(long, allow_hyphen_values = true)]
    n: i64,
    /// First point as 16 comma-separated numbers `u1,u2,v1,v2`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    y: Vec<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct NormalFormArgs {
    #[arg(long, allow_hyphen_values = true)]
    n: i64,
    /// Point as 16 comma-separated numbers `u1,u2,v1,v2`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    point: Vec<f64>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug)]
struct DegreeArgs {
    #[arg(long, allow_hyphen_values = true)]
    n: i64,
    /// Regular value as 8 comma-separated numbers; drawn from `--seed` if omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    y: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Finite-difference step of the Jacobian.
    #[arg(long, default_value_t = 1e-6)]
    step: f64,
    #[arg(long)]
    out: Option<String>,
}

fn exact<const N: usize>(flag: &str, values: &[f64]) -> Result<[f64; N], VerifyError> {
    values
        .try_into()
        .map_err(|_| VerifyError::Usage(format!("--{flag} expects {N} comma-separated numbers, got {}", values.len())))
}

fn point(n: i64, flag: &str, values: &[f64]) -> Result<BundlePoint, VerifyError> {
    let a: [f64; 16] = exact(flag, values)?;
    BundlePoint::from_array(n, &a).map_err(|e| VerifyError::Usage(format!("invalid point: {e}")))
}

fn run(cli: Cli) -> Result<bool, VerifyError> {
    match cli.command {
        Command::Verify(a) => {
            let cfg = SuiteConfig {
                suite: a.suite.parse::<Suite>()?,
                n: a.n,
                nu: a.nu,
                samples: a.samples,
                seed: a.seed,
                tol: a.tol,
                step: a.step,
            };
            let report = run_suite(&cfg)?;
            emit_report(&report, a.out.as_deref())?;
            Ok(report.passed)
        }
        Command::Trace(a) => {
            let [pi, pj, pk] = exact::<3>("p", &a.p)?;
            let w = Quaternion::from_array(exact::<4>("w", &a.w)?);
            let p = ImaginaryQuaternion::new(pi, pj, pk);
            let dir = ClutchValue::new(p, w).map_err(|e| VerifyError::Usage(format!("direction must satisfy |p|² + |w|² = 1: {e}")))?;
            trace_geodesic(a.n, &dir, a.t_max, a.step, a.out.as_deref())?;
            Ok(true)
        }
        Command::OrbitEq(a) => {
            let (equal, text) = orbit_eq_json(&point(a.n, "x", &a.x)?, &point(a.n, "y", &a.y)?, a.tol)?;
            write_text(&text, a.out.as_deref())?;
            Ok(equal)
        }
        Command::NormalForm(a) => {
            write_text(&normal_form_json(&point(a.n, "point", &a.point)?), a.out.as_deref())?;
            Ok(true)
        }
        Command::Degree(a) => {
            let y = match a.y {
                Some(v) => QuatPair::from_array(exact("y", &v)?),
                None => Sampler::new(a.seed).s7(),
            };
            let (passed, text) = degree_json(a.n, y, a.step)?;
            write_text(&text, a.out.as_deref())?;
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                VerifyError::Usage(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
