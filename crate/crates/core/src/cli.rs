//! Batch front end. `run` parses an argument vector, executes one
//! subcommand and returns the process exit code: 0 on success, 1 for invalid
//! requests, 2 for numerical failures.
//!
//! The main payload goes to stdout. With `--output-dir` (or `output_dir` in
//! the config file) every artifact is also written to that directory.
//! `CURVLAB_THREADS` sets the worker thread count.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::check::run_checks;
use crate::config::RunConfig;
use crate::curvature::full_report;
use crate::delta::{epsilon_from_delta, estimate_delta, example1_sweep, OptimizerKind, QuotientSpec};
use crate::error::{Error, Result};
use crate::form::BilinearForm;
use crate::immersion::{
    builtin, conformal_invariance_check, deficit_integral_with_points, read_grid_csv, write_points_csv, ConformalMap,
};
use crate::sphere::{build_sphere_rule, RuleMethod};
use crate::strata::psi_p;

pub const THREADS_ENV: &str = "CURVLAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "curvlab", version, about = "Curvature invariants, stratified integrals and constant estimates for bilinear forms")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving JSON/CSV artifacts.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pointwise invariants of a form read from JSON.
    Invariants {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c: f64,
    },
    /// Index-stratified determinant integral psi_p.
    Psi {
        #[arg(long)]
        form: PathBuf,
        #[arg(long, default_value_t = 0)]
        p: usize,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        method: Option<RuleMethod>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Multi-start upper-bound estimate of delta and epsilon.
    EstimateDelta {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        lam: f64,
        #[arg(long, default_value_t = 0)]
        p: usize,
        #[arg(long)]
        starts: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Quadrature nodes used inside the optimizer.
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        optimizer: Option<OptimizerKind>,
        /// Report epsilon for submanifolds of a sphere.
        #[arg(long)]
        c_positive: bool,
    },
    /// Deficit, psi_0, psi_1 and quotient along the degenerating example family.
    Example1Sweep {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3,1e-4")]
        sigmas: Vec<f64>,
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Deficit integral over a built-in or sampled submanifold.
    #[command(group(ArgGroup::new("source").required(true).args(["builtin", "grid"])))]
    Immersion {
        /// sphere, sphere3, clifford, t3 or ellipsoid.
        #[arg(long)]
        builtin: Option<String>,
        /// CSV with columns u_1..u_n, x_1..x_N on a periodic grid.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Manifold dimension of the grid file.
        #[arg(long, default_value_t = 2)]
        grid_n: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        lam: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        c: f64,
        #[arg(long, value_delimiter = ',')]
        resolution: Option<Vec<usize>>,
        #[arg(long)]
        step: Option<f64>,
        /// Also compare against the image under x -> t x.
        #[arg(long, allow_hyphen_values = true)]
        dilate: Option<f64>,
        /// Also compare against the image under inversion in this center.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        invert_center: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        invert_radius: f64,
    },
    /// Runs the property suites.
    Check {
        /// Random forms per configuration.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    fn path(&self, name: &str) -> Result<Option<PathBuf>> {
        match &self.dir {
            None => Ok(None),
            Some(d) => {
                fs::create_dir_all(d)?;
                Ok(Some(d.join(name)))
            }
        }
    }

    fn json<T: Serialize>(&self, name: &str, payload: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(payload)?;
        println!("{text}");
        if let Some(p) = self.path(name)? {
            fs::write(p, format!("{text}\n"))?;
        }
        Ok(())
    }

    fn csv(&self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> Result<()>, echo: bool) -> Result<()> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        if echo {
            print!("{}", String::from_utf8_lossy(&buf));
        }
        if let Some(p) = self.path(name)? {
            fs::write(p, buf)?;
        }
        Ok(())
    }
}

fn read_form(path: &Path) -> Result<BilinearForm> {
    let text = fs::read_to_string(path)?;
    BilinearForm::from_json_str(&text).map_err(|e| match e {
        Error::Malformed { path: field, message } => Error::Malformed { path: format!("{}: {field}", path.display()), message },
        other => other,
    })
}

fn execute(cli: Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let sink = Sink { dir: cli.output_dir.clone().or_else(|| cfg.output_dir.clone()) };
    let q = &cfg.quadrature;
    match cli.command {
        Command::Invariants { form, c } => {
            let beta = read_form(&form)?;
            let report = full_report(&beta, c)?;
            sink.json("invariants.json", &json!({ "form": beta, "report": report }))?;
        }
        Command::Psi { form, p, nodes, method, seed } => {
            let beta = read_form(&form)?;
            let rule = build_sphere_rule(beta.m(), nodes.unwrap_or(q.nodes), method.or(q.method), seed.unwrap_or(q.seed))?;
            let s = psi_p(&beta, p, &rule, cfg.tolerances.index_tol)?;
            sink.json("psi.json", &json!({ "form": beta, "quadrature": crate::delta::QuadratureSettings::from(&rule), "psi": s }))?;
        }
        Command::EstimateDelta { n, m, k, lam, p, starts, budget, seed, nodes, optimizer, c_positive } => {
            let rule = build_sphere_rule(m, nodes.unwrap_or(q.optimizer_nodes), q.method, q.seed)?;
            let mut settings = cfg.estimate_settings();
            settings.starts = starts.unwrap_or(settings.starts);
            settings.budget = budget.unwrap_or(settings.budget);
            settings.seed = seed.unwrap_or(settings.seed);
            settings.optimizer = optimizer.unwrap_or(settings.optimizer);
            let mut spec = QuotientSpec::new(k, lam, p);
            spec.index_tol = cfg.tolerances.index_tol;
            spec.threshold_rel = cfg.tolerances.threshold_rel;
            let mut est = estimate_delta(n, m, &spec, &settings, &rule)?;
            est.epsilon_upper = epsilon_from_delta(est.delta_upper, n, m, c_positive);
            sink.csv("estimate_trace.csv", |b| est.write_trace_csv(b), false)?;
            sink.json("estimate.json", &est)?;
        }
        Command::Example1Sweep { n, m, mu, sigmas, nodes } => {
            let rule = build_sphere_rule(m, nodes.unwrap_or(q.nodes), q.method, q.seed)?;
            let table = example1_sweep(n, m, mu, &sigmas, &rule)?;
            sink.csv("example1_sweep.csv", |b| table.write_csv(b), true)?;
        }
        Command::Immersion { builtin: name, grid, grid_n, k, lam, c, resolution, step, dilate, invert_center, invert_radius } => {
            let mut f = match (&name, &grid) {
                (Some(b), _) => builtin(b)?,
                (None, Some(path)) => read_grid_csv(path, grid_n)?,
                (None, None) => unreachable!("clap enforces the source group"),
            };
            if let Some(h) = step {
                if !(h > 0.0) {
                    return Err(Error::Domain(format!("step {h} must be positive")));
                }
                f = f.with_step(h);
            }
            let k = k.unwrap_or(f.n());
            let res = resolution.as_deref();
            let (integral, points) = deficit_integral_with_points(&f, c, k, lam, res, true)?;
            sink.csv("immersion_points.csv", |b| write_points_csv(&points, f.n(), b), false)?;
            let mut maps = Vec::new();
            if let Some(t) = dilate {
                maps.push(ConformalMap::Dilation { t });
            }
            if let Some(center) = invert_center {
                maps.push(ConformalMap::Inversion { center, radius: invert_radius });
            }
            let checks = maps
                .iter()
                .map(|map| conformal_invariance_check(&f, lam, map, res))
                .collect::<Result<Vec<_>>>()?;
            let summary = json!({
                "immersion": f.name,
                "n": f.n(),
                "m": f.m(),
                "k": k,
                "lam": lam,
                "c": c,
                "betti_sum": f.betti_sum,
                "integral": integral,
                "conformal": checks,
            });
            sink.json("immersion.json", &summary)?;
        }
        Command::Check { samples } => {
            let out = run_checks(&cfg, samples)?;
            let ok = out.iter().all(|c| c.passed);
            sink.json("check.json", &out)?;
            if !ok {
                return Ok(2);
            }
        }
    }
    Ok(0)
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}
