//! Property suites behind the `check` subcommand: seeded random forms,
//! equality families, homogeneity, cross-module identities and the
//! immersion oracles.

use std::f64::consts::PI;

use serde::Serialize;

use crate::config::RunConfig;
use crate::curvature::{deficit, full_report, ricci_tensor};
use crate::error::Result;
use crate::form::{formal_curvature_tensor, random_form, wintgen_canonical_form, BilinearForm};
use crate::immersion::{clifford_torus, deficit_integral, product_torus};
use crate::sphere::build_sphere_rule;
use crate::strata::psi_value;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    /// Largest violation (or error) observed, in the units of the check.
    pub worst: f64,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, cases: usize, worst: f64, limit: f64, detail: String) -> Self {
        CheckOutcome { name: name.into(), passed: worst <= limit, cases, worst, detail }
    }
}

const SHAPES: [(usize, usize); 4] = [(3, 2), (3, 3), (4, 2), (5, 3)];

fn ddvv(cfg: &RunConfig, samples: usize) -> Result<CheckOutcome> {
    let slack = cfg.tolerances.inequality_slack;
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    for (i, &(n, m)) in SHAPES.iter().enumerate() {
        for s in 0..samples {
            let seed = cfg.quadrature.seed ^ ((i as u64) << 32 | s as u64);
            let f = random_form(n, m, 1.0, seed)?;
            let r = full_report(&f, 0.0)?;
            let scale = 1.0 + f.norm_sq();
            worst = worst.max((r.rho() - (r.h_sq - r.rho_perp)) / scale);
            for k in 1..n {
                worst = worst.max(-deficit(&f, 0.0, k, 1.0)? / scale);
            }
            cases += 1;
        }
    }
    Ok(CheckOutcome::new("ddvv-random", cases, worst, slack, "max scaled violation of rho <= H^2 - rho_perp and deficit(k, 1) >= 0".into()))
}

fn equality(cfg: &RunConfig) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for &(n, m) in &[(3usize, 2usize), (4, 3), (5, 2)] {
        for mu in [0.1, 1.0, 10.0] {
            let lambdas: Vec<f64> = (0..m).map(|a| 0.2 * a as f64).collect();
            let f = wintgen_canonical_form(n, m, mu, &lambdas)?;
            worst = worst.max(deficit(&f, 0.0, n, 1.0)?.abs() / (1.0 + mu * mu));
            cases += 1;
        }
    }
    let f = BilinearForm::umbilical(4, &[1.0, -0.5])?;
    for k in 1..=4 {
        for lam in [0.0, 0.5, 1.0] {
            worst = worst.max(deficit(&f, 0.0, k, lam)?);
            cases += 1;
        }
    }
    Ok(CheckOutcome::new("equality-cases", cases, worst, 1e-12f64.max(cfg.tolerances.symmetry_tol), "|deficit| on Wintgen and umbilical forms".into()))
}

fn homogeneity(cfg: &RunConfig, samples: usize) -> Result<CheckOutcome> {
    let rule = build_sphere_rule(2, 512, None, cfg.quadrature.seed)?;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for s in 0..samples {
        let f = random_form(4, 2, 1.0, cfg.quadrature.seed + s as u64)?;
        let d = deficit(&f, 0.0, 2, 1.0)?;
        let p = psi_value(&f, 0, &rule, cfg.tolerances.index_tol)?;
        for t in [0.5, 2.0, 10.0] {
            let g = f.scaled(t);
            let dt = deficit(&g, 0.0, 2, 1.0)?;
            let pt = psi_value(&g, 0, &rule, cfg.tolerances.index_tol)?;
            worst = worst.max((dt - t * t * d).abs() / (t * t * d.abs()).max(1e-300));
            if p > 0.0 {
                worst = worst.max((pt - t.powi(4) * p).abs() / (t.powi(4) * p));
            }
            cases += 1;
        }
    }
    Ok(CheckOutcome::new("homogeneity", cases, worst, 1e-6, "relative error of deficit(t b) = t^2 deficit(b), psi(t b) = t^n psi(b)".into()))
}

fn identities(cfg: &RunConfig, samples: usize) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for s in 0..samples {
        let n = 2 + s % 4;
        let m = 1 + s % 3;
        let f = random_form(n, m, 1.0, cfg.quadrature.seed + 7 * s as u64)?;
        let c = 0.3 * (s % 5) as f64 - 0.6;
        let ric = ricci_tensor(&f, c);
        let r = full_report(&f, c)?;
        let nn = (n * (n - 1)) as f64;
        worst = worst.max((ric.trace() - nn * r.rho()).abs());
        worst = worst.max((formal_curvature_tensor(&f, c).contract_13() - &ric).amax());
        worst = worst.max((c + r.h_sq - r.rho() - r.traceless_norm_sq / nn).abs());
    }
    Ok(CheckOutcome::new("cross-module-identities", samples, worst, 1e-10, "trace, contraction and Bsc identities".into()))
}

fn immersions() -> Result<CheckOutcome> {
    let c = deficit_integral(&clifford_torus(), 0.0, 2, 0.5, None)?;
    let t = deficit_integral(&product_torus(3)?, 0.0, 1, 1.0, Some(&[16, 16, 16]))?;
    let tc = 2.0 * PI * PI;
    let tt = (2.0 * PI).powi(3) / 27f64.sqrt();
    let worst = ((c.value - tc) / tc).abs().max(((t.value - tt) / tt).abs());
    Ok(CheckOutcome::new("immersion-oracles", 2, worst, 1e-3, format!("Clifford torus {:.8}, T^3 {:.8}", c.value, t.value)))
}

/// Runs every suite; `samples` scales the random-form counts.
pub fn run_checks(cfg: &RunConfig, samples: usize) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        ddvv(cfg, samples)?,
        equality(cfg)?,
        homogeneity(cfg, samples.div_ceil(10))?,
        identities(cfg, samples)?,
        immersions()?,
    ])
}
