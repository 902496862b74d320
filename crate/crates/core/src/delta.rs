//! Upper-bound estimation of the universal constants
//! `delta = inf phi(beta) / psi_p(beta)^{2/n}` and the derived `epsilon`.
//!
//! The true constants are infima over all forms. Everything reported here is
//! the quotient at a concrete form that was actually evaluated, hence an
//! upper bound; the minimizing form is kept so the number can be reproduced.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::deficit;
use crate::error::{Error, Result};
use crate::form::{example1_form, random_form_with, BilinearForm};
use crate::optimize::{GradientDescent, LocalResult, NelderMead};
use crate::sphere::{sphere_volume, RuleMethod, SphereRule};
use crate::strata::{psi_value, INDEX_TOL};

/// Which deficit is divided by which stratified integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientSpec {
    pub k: usize,
    pub lam: f64,
    pub p: usize,
    pub index_tol: f64,
    /// Points with `psi_p <= threshold_rel * ||beta||^n` are infeasible.
    pub threshold_rel: f64,
}

impl QuotientSpec {
    pub fn new(k: usize, lam: f64, p: usize) -> Self {
        QuotientSpec { k, lam, p, index_tol: INDEX_TOL, threshold_rel: 1e-12 }
    }

    /// Whether the positivity theorem covers this `(k, lam)`: either
    /// `k <= n - 1` with `lam = 1`, or `k = n` with `lam < 1`.
    pub fn positivity_guaranteed(&self, n: usize) -> bool {
        (self.k < n && n >= 3 && self.lam == 1.0) || (self.k == n && self.lam < 1.0)
    }
}

/// `deficit(beta, 0, k, lam) / psi_p(beta)^{2/n}`; scale invariant.
pub fn quotient(beta: &BilinearForm, spec: &QuotientSpec, rule: &SphereRule) -> Result<f64> {
    let n = beta.n();
    let psi = psi_value(beta, spec.p, rule, spec.index_tol)?;
    let threshold = spec.threshold_rel * beta.norm().powi(n as i32);
    if !(psi > threshold) {
        return Err(Error::Infeasible { psi, threshold });
    }
    let phi = deficit(beta, 0.0, spec.k, spec.lam)?;
    Ok(phi / psi.powf(2.0 / n as f64))
}

/// `delta^{n/2} Vol(S^{d-1})` with `d = n + m`, or `n + m + 1` when the
/// ambient space is a sphere (`c > 0`) viewed inside one more Euclidean
/// dimension.
pub fn epsilon_from_delta(delta: f64, n: usize, m: usize, c_positive: bool) -> f64 {
    let d = n + m + usize::from(c_positive);
    delta.max(0.0).powf(n as f64 / 2.0) * sphere_volume(d - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    NelderMead,
    GradientDescent,
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nelder-mead" => Ok(OptimizerKind::NelderMead),
            "gradient-descent" => Ok(OptimizerKind::GradientDescent),
            other => Err(Error::Domain(format!("unknown optimizer `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSettings {
    pub starts: usize,
    /// Objective evaluations per start.
    pub budget: usize,
    pub seed: u64,
    pub optimizer: OptimizerKind,
}

impl Default for EstimateSettings {
    fn default() -> Self {
        EstimateSettings { starts: 32, budget: 2000, seed: 0, optimizer: OptimizerKind::NelderMead }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartTrace {
    pub start: usize,
    pub start_seed: u64,
    pub initial_quotient: f64,
    pub best_quotient: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub m: usize,
    pub method: RuleMethod,
    pub resolution: Vec<usize>,
    pub seed: u64,
    pub nodes: usize,
}

impl From<&SphereRule> for QuadratureSettings {
    fn from(r: &SphereRule) -> Self {
        QuadratureSettings { m: r.m, method: r.method, resolution: r.resolution.clone(), seed: r.seed, nodes: r.len() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub lam: f64,
    pub p: usize,
    /// Smallest quotient evaluated over all starts.
    pub delta_upper: f64,
    /// `max(delta_upper, 0)^{n/2} Vol(S^{n+m-1})`.
    pub epsilon_upper: f64,
    /// The search drove the quotient to (numerically) zero.
    pub zero_flagged: bool,
    pub positivity_guaranteed: bool,
    pub settings: EstimateSettings,
    pub quadrature: QuadratureSettings,
    pub index_tol: f64,
    pub threshold_rel: f64,
    /// Starts that were drawn and rejected as infeasible.
    pub rejected_starts: usize,
    pub best_start: usize,
    pub trace: Vec<StartTrace>,
    pub minimizer: BilinearForm,
}

impl ConstantEstimate {
    pub fn write_trace_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for t in &self.trace {
            out.serialize(t)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Quotients below this are reported as a collapse to zero.
pub const ZERO_FLAG: f64 = 1e-10;

fn packed_len(n: usize, m: usize) -> usize {
    m * n * (n + 1) / 2
}

fn pack(beta: &BilinearForm) -> Vec<f64> {
    let n = beta.n();
    let mut x = Vec::with_capacity(packed_len(n, beta.m()));
    for a in beta.shape_ops() {
        for i in 0..n {
            for j in i..n {
                x.push(a[(i, j)]);
            }
        }
    }
    x
}

fn unpack(x: &[f64], n: usize, m: usize) -> BilinearForm {
    let mut ops = Vec::with_capacity(m);
    let mut it = x.iter();
    for _ in 0..m {
        let mut a = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = *it.next().expect("packed length");
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        ops.push(a);
    }
    BilinearForm::new(n, ops).expect("finite packed form")
}

fn objective(x: &[f64], n: usize, m: usize, spec: &QuotientSpec, rule: &SphereRule) -> f64 {
    if x.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    quotient(&unpack(x, n, m), spec, rule).unwrap_or(f64::INFINITY)
}

/// Multi-start local minimization of the quotient over forms of shape
/// `(n, m)`. Starts are Gaussian forms normalized to unit norm; infeasible
/// draws are rejected, up to ten draws per start.
pub fn estimate_delta(
    n: usize,
    m: usize,
    spec: &QuotientSpec,
    settings: &EstimateSettings,
    rule: &SphereRule,
) -> Result<ConstantEstimate> {
    if n < 2 || m < 1 {
        return Err(Error::Domain(format!("need n >= 2, m >= 1; got n = {n}, m = {m}")));
    }
    if spec.k < 1 || spec.k > n {
        return Err(Error::Domain(format!("k = {} must lie in 1..={n}", spec.k)));
    }
    if !(0.0..=1.0).contains(&spec.lam) {
        return Err(Error::Domain(format!("lam = {} must lie in [0, 1]", spec.lam)));
    }
    if 2 * spec.p >= n {
        return Err(Error::Domain(format!("p = {} must satisfy p < n/2", spec.p)));
    }
    if rule.m != m {
        return Err(Error::Dimension(format!("rule is on S^{}, expected m = {m}", rule.m - 1)));
    }
    if settings.starts == 0 || settings.budget == 0 {
        return Err(Error::Domain("starts and budget must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let max_attempts = 10 * settings.starts;
    let mut attempts = 0;
    let mut starts: Vec<(u64, Vec<f64>, f64)> = Vec::with_capacity(settings.starts);
    while starts.len() < settings.starts && attempts < max_attempts {
        attempts += 1;
        let start_seed: u64 = rng.random();
        let mut local = ChaCha8Rng::seed_from_u64(start_seed);
        let form = random_form_with(n, m, 1.0, &mut local)?;
        let form = form.scaled(1.0 / form.norm());
        let x0 = pack(&form);
        let q0 = objective(&x0, n, m, spec, rule);
        if q0.is_finite() {
            starts.push((start_seed, x0, q0));
        }
    }
    if starts.is_empty() {
        return Err(Error::AllStartsInfeasible { attempts });
    }
    let rejected_starts = attempts - starts.len();

    let results: Vec<LocalResult> = starts
        .par_iter()
        .map(|(_, x0, _)| {
            let f = |x: &[f64]| objective(x, n, m, spec, rule);
            match settings.optimizer {
                OptimizerKind::NelderMead => NelderMead::default().minimize(f, x0, settings.budget),
                OptimizerKind::GradientDescent => GradientDescent::default().minimize(f, x0, settings.budget),
            }
        })
        .collect();

    let mut best_start = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value < results[best_start].value {
            best_start = i;
        }
    }
    let trace = starts
        .iter()
        .zip(&results)
        .enumerate()
        .map(|(i, ((seed, _, q0), r))| StartTrace {
            start: i,
            start_seed: *seed,
            initial_quotient: *q0,
            best_quotient: r.value,
            evaluations: r.evaluations,
            iterations: r.iterations,
            restarts: r.restarts,
        })
        .collect();
    let best = &results[best_start];
    let delta_upper = best.value;
    Ok(ConstantEstimate {
        n,
        m,
        k: spec.k,
        lam: spec.lam,
        p: spec.p,
        delta_upper,
        epsilon_upper: epsilon_from_delta(delta_upper, n, m, false),
        zero_flagged: delta_upper <= ZERO_FLAG,
        positivity_guaranteed: spec.positivity_guaranteed(n),
        settings: settings.clone(),
        quadrature: rule.into(),
        index_tol: spec.index_tol,
        threshold_rel: spec.threshold_rel,
        rejected_starts,
        best_start,
        trace,
        minimizer: unpack(&best.x, n, m),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub deficit: f64,
    pub psi0: f64,
    pub psi1: Option<f64>,
    pub quotient: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub n: usize,
    pub m: usize,
    pub mu: f64,
    /// Which `psi_p` divides the deficit in the quotient column.
    pub quotient_p: usize,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Least-squares slope of `log(quotient)` against `log(sigma)`.
    pub fn loglog_slope(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self.rows.iter().map(|r| (r.sigma.ln(), r.quotient.ln())).collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["sigma", "deficit", "psi0", "psi1", "quotient"])?;
        for r in &self.rows {
            out.write_record([
                format!("{:e}", r.sigma),
                format!("{:e}", r.deficit),
                format!("{:e}", r.psi0),
                r.psi1.map(|v| format!("{v:e}")).unwrap_or_default(),
                format!("{:e}", r.quotient),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Evaluates the degenerating family along `sigmas`. The quotient uses
/// `psi_1` for `n >= 4`; for `n = 3` the stratum `Lambda_1` is empty (the
/// attained indices are 1 and 2) so `psi_0` is used instead.
pub fn example1_sweep(n: usize, m: usize, mu: f64, sigmas: &[f64], rule: &SphereRule) -> Result<SweepTable> {
    if sigmas.is_empty() {
        return Err(Error::Domain("no sigma values".into()));
    }
    let quotient_p = if n >= 4 { 1 } else { 0 };
    let rows = sigmas
        .iter()
        .map(|&sigma| {
            let beta = example1_form(n, m, mu, sigma)?;
            let phi = deficit(&beta, 0.0, n, 1.0)?;
            let psi0 = psi_value(&beta, 0, rule, INDEX_TOL)?;
            let psi1 = if 2 < n { Some(psi_value(&beta, 1, rule, INDEX_TOL)?) } else { None };
            let denom = if quotient_p == 1 { psi1.unwrap_or(0.0) } else { psi0 };
            Ok(SweepRow { sigma, deficit: phi, psi0, psi1, quotient: phi / denom.powf(2.0 / n as f64) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { n, m, mu, quotient_p, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{random_form, wintgen_canonical_form};
    use crate::sphere::build_sphere_rule;
    use std::f64::consts::PI;

    #[test]
    fn pack_round_trip() {
        let f = random_form(4, 3, 1.0, 2).unwrap();
        assert_eq!(unpack(&pack(&f), 4, 3), f);
        assert_eq!(pack(&f).len(), packed_len(4, 3));
    }

    #[test]
    fn quotient_scale_invariant() {
        let rule = build_sphere_rule(2, 512, None, 0).unwrap();
        let spec = QuotientSpec::new(1, 1.0, 0);
        let f = random_form(3, 2, 1.0, 21).unwrap();
        let q1 = quotient(&f, &spec, &rule).unwrap();
        let q2 = quotient(&f.scaled(2.0), &spec, &rule).unwrap();
        assert!(((q1 - q2) / q1).abs() < 1e-8);
    }

    #[test]
    fn umbilical_is_infeasible() {
        let rule = build_sphere_rule(2, 128, None, 0).unwrap();
        let f = BilinearForm::umbilical(3, &[1.0, 0.5]).unwrap();
        assert!(matches!(quotient(&f, &QuotientSpec::new(1, 1.0, 0), &rule), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn wintgen_with_mean_curvature_has_zero_quotient() {
        // Equality family with H != 0 keeps psi_0 > 0 while the DDVV deficit vanishes.
        let rule = build_sphere_rule(2, 1024, None, 0).unwrap();
        let f = wintgen_canonical_form(4, 2, 1.0, &[0.3, 0.2]).unwrap();
        let q = quotient(&f, &QuotientSpec::new(4, 1.0, 0), &rule).unwrap();
        assert!(q.abs() < 1e-12);
    }

    #[test]
    fn epsilon_values() {
        assert_eq!(epsilon_from_delta(0.0, 3, 2, false), 0.0);
        let e = epsilon_from_delta(0.25, 2, 1, false);
        assert!((e - 0.25 * 4.0 * PI).abs() < 1e-13);
        let e4 = epsilon_from_delta(0.25, 2, 1, true);
        assert!((e4 - 0.25 * 2.0 * PI * PI).abs() < 1e-13);
        assert!(epsilon_from_delta(0.5, 3, 2, false) > epsilon_from_delta(0.4, 3, 2, false));
    }

    #[test]
    fn small_estimate_is_reproducible() {
        let rule = build_sphere_rule(2, 128, None, 0).unwrap();
        let spec = QuotientSpec::new(1, 1.0, 0);
        let settings = EstimateSettings { starts: 3, budget: 150, seed: 17, optimizer: OptimizerKind::NelderMead };
        let a = estimate_delta(3, 2, &spec, &settings, &rule).unwrap();
        let b = estimate_delta(3, 2, &spec, &settings, &rule).unwrap();
        assert_eq!(a, b);
        assert!(a.delta_upper > 0.0);
        let re = quotient(&a.minimizer, &spec, &rule).unwrap();
        assert!(((re - a.delta_upper) / a.delta_upper).abs() < 1e-9);
        let min_trace = a.trace.iter().map(|t| t.best_quotient).fold(f64::INFINITY, f64::min);
        assert_eq!(min_trace, a.delta_upper);
        assert!(a.trace.iter().all(|t| t.best_quotient <= t.initial_quotient));
    }

    #[test]
    fn gradient_descent_option_runs() {
        let rule = build_sphere_rule(2, 64, None, 0).unwrap();
        let spec = QuotientSpec::new(2, 1.0, 0);
        let settings = EstimateSettings { starts: 2, budget: 120, seed: 5, optimizer: OptimizerKind::GradientDescent };
        let e = estimate_delta(3, 2, &spec, &settings, &rule).unwrap();
        assert!(e.delta_upper.is_finite());
        assert!(e.trace.iter().all(|t| t.evaluations <= 120));
    }

    #[test]
    fn all_infeasible_fails() {
        // m = 1 and p = 1 with n = 3: no index strictly between 1 and 2.
        let rule = build_sphere_rule(1, 2, None, 0).unwrap();
        let spec = QuotientSpec::new(1, 1.0, 1);
        let settings = EstimateSettings { starts: 2, budget: 10, seed: 1, optimizer: OptimizerKind::NelderMead };
        assert!(matches!(
            estimate_delta(3, 1, &spec, &settings, &rule),
            Err(Error::AllStartsInfeasible { attempts: 20 })
        ));
    }

    #[test]
    fn sweep_deficit_column() {
        let rule = build_sphere_rule(2, 1024, None, 0).unwrap();
        let t = example1_sweep(4, 2, 1.0, &[0.1, 0.01], &rule).unwrap();
        for r in &t.rows {
            assert!(((r.deficit - r.sigma * r.sigma / 3.0) / r.deficit).abs() < 1e-8);
        }
        assert_eq!(t.quotient_p, 1);
    }
}
