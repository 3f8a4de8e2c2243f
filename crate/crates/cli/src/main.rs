use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use sticky::checks::kernel_battery;
use sticky::config::Config;
use sticky::estimators::stickiness_estimator;
use sticky::harness::{export_histogram, export_report, histogram, run_mc, trial_events, trial_path, ReportFormat};
use sticky::kernel::{atom_mass, density, transition_cdf, transition_cdf_left};
use sticky::path::{export_path, import_path};
use sticky::simulate::{build_grid, export_events, resample_path, Grid};
use sticky::speed_scale::{
    exit_up_probability, expected_exit_time, scale_derivative, scale_function, speed_density, ExitProblem,
};
use sticky::Error;

const EXIT_HELP: &str = "\
Exit codes:
  0  success
  2  usage error (unknown verb, bad flag)
  3  configuration error (unknown key, missing model.rho, bad value)
  4  computation error (invalid parameters, numerical failure, failed check)
  5  file error (unreadable input, malformed input file, unwritable output)

Environment:
  STICKY_WORKERS  number of Monte Carlo worker threads (default: all cores)";

#[derive(Parser)]
#[command(name = "sticky", version, about = "Simulation and stickiness estimation for sticky diffusions", after_help = EXIT_HELP)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct ConfigArgs {
    /// Configuration file (`key = value` lines).
    #[arg(long, visible_alias = "model")]
    config: PathBuf,
    /// Override a configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Verb {
    /// Simulate one path (trial 0 of the configured seed) and write `i,t,x` rows.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        /// Also write the underlying `time,state` events (grid simulator only).
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Estimate the stickiness of an observed path; prints one JSON record.
    Estimate {
        /// Path CSV with header `i,t,x`.
        #[arg(long)]
        path: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Time up to which observations are used.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Run a Monte Carlo experiment and export the report.
    Mc {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Report CSV (`trial,rho_hat,t1,occupation,rejected` plus `# key=value` summary).
        #[arg(long)]
        out: PathBuf,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Histogram of the estimates (`bin_center,count`).
        #[arg(long)]
        hist: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 3.0)]
        hi: f64,
    },
    /// Sticky Brownian motion transition kernel.
    Kernel {
        #[command(subcommand)]
        op: KernelOp,
    },
    /// Scale function, speed density and exit problems of the configured model.
    Speed {
        #[command(subcommand)]
        op: SpeedOp,
    },
    /// Print the points of a simulation grid.
    Grid {
        #[arg(long)]
        h: f64,
        #[arg(long)]
        xmax: f64,
        /// Equally spaced points instead of the refined recursive grid.
        #[arg(long)]
        uniform: bool,
    },
}

#[derive(Subcommand)]
enum KernelOp {
    /// Density, distribution function and atom at one point.
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        rho: f64,
    },
    /// Run the kernel invariant battery.
    Check,
}

#[derive(Subcommand)]
enum SpeedOp {
    /// Scale function, its derivative and the speed density at `x`.
    Eval {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Exit probability through `b` and expected exit time from `(a, b)`.
    Exit {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
    },
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => 3,
            Error::Io { .. } | Error::Parse { .. } => 5,
            _ => 4,
        };
        Failure { code, msg: e.to_string() }
    }
}

type Outcome = Result<(), Failure>;

fn load(args: &ConfigArgs) -> Result<Config, Failure> {
    let mut cfg = Config::load(&args.config)?;
    for o in &args.overrides {
        cfg.apply_override(o).map_err(Error::from)?;
    }
    Ok(cfg)
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string(v).expect("json value"));
}

fn simulate(args: &ConfigArgs, out: &Path, events: Option<&Path>) -> Outcome {
    let mc = load(args)?.mc_config()?;
    let path = match events {
        Some(ev) => {
            let ep = trial_events(&mc, 0)?;
            export_events(&ep, ev)?;
            resample_path(&ep, mc.n, mc.horizon)?
        }
        None => trial_path(&mc, 0)?,
    };
    export_path(&path, out)?;
    Ok(())
}

fn estimate(path: &Path, args: &ConfigArgs, t: f64) -> Outcome {
    let cfg = load(args)?;
    // The model is only needed when sigma(0) is taken from it.
    let model = if cfg.get("estimate.sigma0").map_err(Error::from)? == "model" {
        Some(cfg.model()?)
    } else {
        None
    };
    let est = cfg.estimator(model.as_ref())?;
    let tol: f64 = cfg.parse_key("estimate.snap_tol").map_err(Error::from)?;
    let mut p = import_path(path)?;
    if tol > 0.0 {
        p = p.snap_to_zero(tol);
    }
    let rec = stickiness_estimator(&p, &est, t)?;
    print_json(&serde_json::to_value(rec).expect("record serializes"));
    Ok(())
}

fn mc(args: &ConfigArgs, out: &Path, json_out: Option<&Path>, hist: Option<&Path>, bins: usize, lo: f64, hi: f64) -> Outcome {
    let cfg = load(args)?.mc_config()?;
    let report = run_mc(&cfg)?;
    export_report(&report, out, ReportFormat::Csv)?;
    if let Some(j) = json_out {
        export_report(&report, j, ReportFormat::Json)?;
    }
    if let Some(h) = hist {
        let v: Vec<f64> = report.per_trial.iter().filter_map(|r| r.rho_hat).collect();
        export_histogram(&histogram(&v, bins, lo, hi)?, h)?;
    }
    print_json(&json!({
        "alpha": report.alpha,
        "n": report.n,
        "n_mc": report.n_mc,
        "rho_mc": report.rho_mc,
        "s2_mc": report.s2_mc,
        "sigma_mc": report.sigma_mc,
        "acc": report.acc,
        "rej": report.rej,
        "starred": report.starred,
    }));
    Ok(())
}

fn kernel_eval(t: f64, x: f64, y: f64, rho: f64) -> Outcome {
    let p = density(t, x, y, rho)?;
    print_json(&json!({
        "density": p,
        "cdf": transition_cdf(t, x, y, rho)?,
        "cdf_left": transition_cdf_left(t, x, y, rho)?,
        "atom": atom_mass(rho) * density(t, x, 0.0, rho)?,
    }));
    Ok(())
}

fn kernel_check() -> Outcome {
    let mut failed = 0;
    for c in kernel_battery()? {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {:<20} worst={:.3e} tol={:.0e}", c.name, c.worst, c.tolerance);
        failed += usize::from(!c.passed);
    }
    if failed > 0 {
        return Err(Failure {
            code: 4,
            msg: format!("{failed} kernel check(s) failed"),
        });
    }
    Ok(())
}

fn speed(op: &SpeedOp) -> Outcome {
    match op {
        SpeedOp::Eval { cfg, x } => {
            let m = load(cfg)?.model()?;
            print_json(&json!({
                "s": scale_function(&m, *x)?,
                "s_prime": scale_derivative(&m, *x)?,
                "m_density": speed_density(&m, *x)?,
            }));
        }
        SpeedOp::Exit { cfg, a, x, b } => {
            let m = load(cfg)?.model()?;
            let p = ExitProblem::new(&m, *a, *x, *b)?;
            print_json(&json!({
                "p_up": exit_up_probability(&p)?,
                "expected_exit_time": expected_exit_time(&p)?,
            }));
        }
    }
    Ok(())
}

fn grid(h: f64, xmax: f64, uniform: bool) -> Outcome {
    let g = if uniform { Grid::uniform(h, xmax)? } else { build_grid(h, xmax)? };
    let mut s = String::with_capacity(24 * g.len());
    for x in g.points() {
        s.push_str(&x.to_string());
        s.push('\n');
    }
    print!("{s}");
    Ok(())
}

fn set_workers() -> Result<(), Failure> {
    let Ok(v) = std::env::var("STICKY_WORKERS") else {
        return Ok(());
    };
    let k: usize = v.trim().parse().ok().filter(|&k| k > 0).ok_or_else(|| Failure {
        code: 2,
        msg: format!("STICKY_WORKERS must be a positive integer, got '{v}'"),
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| Failure {
        code: 4,
        msg: e.to_string(),
    })
}

fn run(cli: Cli) -> Outcome {
    set_workers()?;
    match &cli.verb {
        Verb::Simulate { cfg, out, events } => simulate(cfg, out, events.as_deref()),
        Verb::Estimate { path, cfg, t } => estimate(path, cfg, *t),
        Verb::Mc { cfg, out, json, hist, bins, lo, hi } => mc(cfg, out, json.as_deref(), hist.as_deref(), *bins, *lo, *hi),
        Verb::Kernel { op: KernelOp::Eval { t, x, y, rho } } => kernel_eval(*t, *x, *y, *rho),
        Verb::Kernel { op: KernelOp::Check } => kernel_check(),
        Verb::Speed { op } => speed(op),
        Verb::Grid { h, xmax, uniform } => grid(*h, *xmax, *uniform),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("sticky: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
