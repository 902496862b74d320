//! Index strata `Lambda_p(beta) = { u in S^{m-1} : p < Index A_u < n - p }`
//! and the determinant integrals `psi_p(beta) = ∫_{Lambda_p} |det A_u| dS_u`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::form::BilinearForm;
use crate::sphere::{RuleMethod, SphereRule};

/// Default relative tolerance for counting negative eigenvalues.
pub const INDEX_TOL: f64 = 1e-9;

/// Eigen-based classification of one symmetric operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    pub index: usize,
    pub det: f64,
    /// Some eigenvalue lies within `tol * scale` of zero.
    pub near_degenerate: bool,
}

fn classify(eigs: &[f64], tol: f64) -> Spectrum {
    let scale = eigs.iter().fold(1.0f64, |s, e| s.max(e.abs()));
    let cut = tol * scale;
    let mut index = 0;
    let mut det = 1.0;
    let mut near = false;
    for &e in eigs {
        if e < -cut {
            index += 1;
        } else if e.abs() < cut {
            near = true;
        }
        det *= e;
    }
    Spectrum { index, det, near_degenerate: near }
}

pub fn spectrum_of(a: &DMatrix<f64>, tol: f64) -> Result<Spectrum> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol = {tol} must be > 0")));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("operator entries".into()));
    }
    let eigs = a.symmetric_eigenvalues();
    Ok(classify(eigs.as_slice(), tol))
}

/// Number of eigenvalues below `-tol * max(1, spectral radius)`.
pub fn index_of(a: &DMatrix<f64>, tol: f64) -> Result<usize> {
    spectrum_of(a, tol).map(|s| s.index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratifiedIntegral {
    pub p: usize,
    pub value: f64,
    pub error_estimate: f64,
    /// `contributions[i]` integrates `|det A_u|` over directions of index `i`.
    pub contributions: Vec<f64>,
    /// Nodes with an eigenvalue inside the degenerate band.
    pub near_degenerate: usize,
    pub nodes: usize,
}

impl StratifiedIntegral {
    /// `∫_{S^{m-1}} |det A_u| dS_u` over all strata.
    pub fn unrestricted(&self) -> f64 {
        self.contributions.iter().sum()
    }

    /// Value for another `p` from the same breakdown.
    pub fn restricted_to(&self, p: usize) -> f64 {
        let n = self.contributions.len() - 1;
        stratum_sum(&self.contributions, p, n)
    }
}

fn stratum_sum(contributions: &[f64], p: usize, n: usize) -> f64 {
    contributions
        .iter()
        .enumerate()
        .filter(|(i, _)| *i > p && *i + p < n)
        .fold(0.0, |acc, (_, c)| acc + c)
}

fn check_psi_args(beta: &BilinearForm, p: usize, rule: &SphereRule) -> Result<()> {
    if 2 * p >= beta.n() {
        return Err(Error::Domain(format!("p = {p} must satisfy p < n/2 = {}", beta.n() as f64 / 2.0)));
    }
    if rule.m != beta.m() {
        return Err(Error::Dimension(format!("rule is on S^{}, form has m = {}", rule.m - 1, beta.m())));
    }
    Ok(())
}

struct Accumulated {
    contributions: Vec<f64>,
    near: usize,
    /// Per-node stratum values (only collected for Monte Carlo error bars).
    samples: Vec<f64>,
}

fn accumulate(beta: &BilinearForm, p: usize, rule: &SphereRule, tol: f64, keep_samples: bool) -> Result<Accumulated> {
    let n = beta.n();
    let mut contributions = vec![0.0; n + 1];
    let mut near = 0;
    let mut samples = Vec::new();
    let mut buf = DMatrix::zeros(n, n);
    for (u, w) in rule.iter() {
        beta.shape_operator_into(u, &mut buf);
        let s = spectrum_of(&buf, tol)?;
        let v = w * s.det.abs();
        contributions[s.index] += v;
        if s.near_degenerate {
            near += 1;
        }
        if keep_samples {
            let inside = s.index > p && s.index + p < n;
            samples.push(if inside { v } else { 0.0 });
        }
    }
    Ok(Accumulated { contributions, near, samples })
}

/// `psi_p(beta)` with per-index breakdown and an error estimate (coarse-rule
/// difference for deterministic rules, standard error for Monte Carlo).
pub fn psi_p(beta: &BilinearForm, p: usize, rule: &SphereRule, tol: f64) -> Result<StratifiedIntegral> {
    check_psi_args(beta, p, rule)?;
    let n = beta.n();
    let mc = rule.method == RuleMethod::MonteCarlo;
    let acc = accumulate(beta, p, rule, tol, mc)?;
    let value = stratum_sum(&acc.contributions, p, n);
    let error_estimate = if mc {
        let count = acc.samples.len() as f64;
        // samples are w * f with equal weights; rescale to f * Vol
        let scaled: Vec<f64> = acc.samples.iter().map(|s| s * count).collect();
        let mean = scaled.iter().sum::<f64>() / count;
        let var = scaled.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
        (var / count).sqrt()
    } else if let Some(coarse) = rule.coarsened() {
        let c = accumulate(beta, p, &coarse, tol, false)?;
        (value - stratum_sum(&c.contributions, p, n)).abs()
    } else {
        0.0
    };
    Ok(StratifiedIntegral {
        p,
        value,
        error_estimate,
        contributions: acc.contributions,
        near_degenerate: acc.near,
        nodes: rule.len(),
    })
}

/// `psi_p` without the error estimate; the inner loop of the optimizer.
pub fn psi_value(beta: &BilinearForm, p: usize, rule: &SphereRule, tol: f64) -> Result<f64> {
    check_psi_args(beta, p, rule)?;
    let n = beta.n();
    let mut value = 0.0;
    let mut buf = DMatrix::zeros(n, n);
    for (u, w) in rule.iter() {
        beta.shape_operator_into(u, &mut buf);
        let s = spectrum_of(&buf, tol)?;
        if s.index > p && s.index + p < n {
            value += w * s.det.abs();
        }
    }
    Ok(value)
}

/// `I = mu^2 ∫_U (u_1^2 + u_2^2) |u_1 + u_2|^{n-2} dS_u` over
/// `U = { u_1 + u_2 != 0 }`, evaluated directly on `rule`.
pub fn example1_i_constant(n: usize, m: usize, mu: f64, rule: &SphereRule) -> Result<f64> {
    if n < 3 || m < 2 {
        return Err(Error::Domain(format!("need n >= 3 and m >= 2, got n = {n}, m = {m}")));
    }
    if rule.m != m {
        return Err(Error::Dimension(format!("rule is on S^{}, expected m = {m}", rule.m - 1)));
    }
    let value = rule.integrate(|u| {
        let s = u[0] + u[1];
        if s == 0.0 {
            0.0
        } else {
            (u[0] * u[0] + u[1] * u[1]) * s.abs().powi(n as i32 - 2)
        }
    });
    Ok(mu * mu * value)
}
