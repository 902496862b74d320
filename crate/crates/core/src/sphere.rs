//! Quadrature rules on the unit sphere `S^{m-1} ⊂ R^m`.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `Vol(S^k)`, the k-dimensional volume of the unit sphere in `R^{k+1}`.
pub fn sphere_volume(k: usize) -> f64 {
    // Vol(S^k) = 2 pi / (k - 1) * Vol(S^{k-2})
    let mut v = if k % 2 == 0 { 2.0 } else { 2.0 * PI };
    let mut d = if k % 2 == 0 { 0 } else { 1 };
    while d < k {
        d += 2;
        v *= 2.0 * PI / (d - 1) as f64;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleMethod {
    /// `m = 1`: the two points `+1, -1` with unit weights.
    ExactPair,
    /// Uniform azimuth (times Gauss-Legendre in polar coordinates for `m = 3, 4`).
    ProductAngular,
    MonteCarlo,
}

impl RuleMethod {
    pub fn default_for(m: usize) -> RuleMethod {
        match m {
            1 => RuleMethod::ExactPair,
            2..=4 => RuleMethod::ProductAngular,
            _ => RuleMethod::MonteCarlo,
        }
    }
}

impl std::str::FromStr for RuleMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact-pair" => Ok(RuleMethod::ExactPair),
            "product-angular" => Ok(RuleMethod::ProductAngular),
            "monte-carlo" => Ok(RuleMethod::MonteCarlo),
            other => Err(Error::Domain(format!("unknown quadrature method `{other}`"))),
        }
    }
}

/// Node/weight rule on `S^{m-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereRule {
    pub m: usize,
    pub method: RuleMethod,
    /// Per-axis counts: `[azimuth]` for the circle, `[polar, azimuth]` on
    /// `S^2`, `[polar, azimuth, azimuth]` on `S^3`, `[samples]` for Monte Carlo.
    pub resolution: Vec<usize>,
    pub seed: u64,
    /// Row-major `nodes.len() / m` unit vectors.
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.m..(i + 1) * self.m]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks_exact(self.m).zip(self.weights.iter().copied())
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(u, w)| w * f(u)).sum()
    }

    /// The same family at half the resolution per axis, used for error
    /// estimates. `None` for rules with nothing coarser.
    pub fn coarsened(&self) -> Option<SphereRule> {
        match self.method {
            RuleMethod::ExactPair | RuleMethod::MonteCarlo => None,
            RuleMethod::ProductAngular => {
                let res: Vec<usize> = self.resolution.iter().map(|r| r / 2).collect();
                product_rule(self.m, &res).ok()
            }
        }
    }
}

fn min_nodes(m: usize, method: RuleMethod) -> usize {
    match (method, m) {
        (RuleMethod::ExactPair, _) => 2,
        (RuleMethod::ProductAngular, 2) => 4,
        (RuleMethod::ProductAngular, 3) => 8,
        (RuleMethod::ProductAngular, _) => 16,
        (RuleMethod::MonteCarlo, _) => 2,
    }
}

/// Builds a rule with roughly `target_nodes` nodes. `method = None` picks
/// the default for `m`.
pub fn build_sphere_rule(
    m: usize,
    target_nodes: usize,
    method: Option<RuleMethod>,
    seed: u64,
) -> Result<SphereRule> {
    if m < 1 {
        return Err(Error::Domain("m must be >= 1".into()));
    }
    let method = method.unwrap_or_else(|| RuleMethod::default_for(m));
    match (method, m) {
        (RuleMethod::ExactPair, 1) => {
            return Ok(SphereRule {
                m: 1,
                method,
                resolution: vec![2],
                seed,
                nodes: vec![1.0, -1.0],
                weights: vec![1.0, 1.0],
            })
        }
        (RuleMethod::ExactPair, _) => {
            return Err(Error::Domain(format!("exact-pair rule requires m = 1, got m = {m}")))
        }
        (_, 1) => return build_sphere_rule(1, 2, Some(RuleMethod::ExactPair), seed),
        (RuleMethod::ProductAngular, m) if m > 4 => {
            return Err(Error::Domain(format!("product-angular rule supports m <= 4, got m = {m}")))
        }
        _ => {}
    }
    let min = min_nodes(m, method);
    if target_nodes < min {
        return Err(Error::Domain(format!(
            "{target_nodes} nodes requested, {method:?} on S^{} needs at least {min}",
            m - 1
        )));
    }
    match method {
        RuleMethod::ProductAngular => {
            let res = match m {
                2 => vec![target_nodes],
                3 => {
                    let p = ((target_nodes as f64 / 2.0).sqrt().round() as usize).max(2);
                    vec![p, 2 * p]
                }
                _ => {
                    let p = ((target_nodes as f64 / 4.0).cbrt().round() as usize).max(2);
                    vec![p, 2 * p, 2 * p]
                }
            };
            let mut rule = product_rule(m, &res)?;
            rule.seed = seed;
            Ok(rule)
        }
        RuleMethod::MonteCarlo => Ok(monte_carlo_rule(m, target_nodes, seed)),
        RuleMethod::ExactPair => unreachable!(),
    }
}

fn product_rule(m: usize, res: &[usize]) -> Result<SphereRule> {
    if res.iter().any(|&r| r < 2) {
        return Err(Error::Domain(format!("resolution {res:?} too coarse")));
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match m {
        2 => {
            let k = res[0];
            let w = 2.0 * PI / k as f64;
            for j in 0..k {
                let t = w * j as f64;
                nodes.extend_from_slice(&[t.cos(), t.sin()]);
                weights.push(w);
            }
        }
        3 => {
            // z = cos(theta) on Gauss-Legendre nodes, uniform azimuth.
            let (zs, wz) = gauss_legendre(res[0]);
            let k = res[1];
            let wa = 2.0 * PI / k as f64;
            for (z, w) in zs.iter().zip(&wz) {
                let r = (1.0 - z * z).max(0.0).sqrt();
                for j in 0..k {
                    let t = wa * j as f64;
                    nodes.extend_from_slice(&[r * t.cos(), r * t.sin(), *z]);
                    weights.push(w * wa);
                }
            }
        }
        4 => {
            // Hopf coordinates u = (sqrt(1-s) e^{i a}, sqrt(s) e^{i b}),
            // dS = ds da db / 2 with s in [0, 1] on Gauss-Legendre nodes.
            let (xs, wx) = gauss_legendre(res[0]);
            let (ka, kb) = (res[1], res[2]);
            let (wa, wb) = (2.0 * PI / ka as f64, 2.0 * PI / kb as f64);
            for (x, w) in xs.iter().zip(&wx) {
                let s = 0.5 * (x + 1.0);
                let ws = 0.5 * w;
                let (r1, r2) = ((1.0 - s).sqrt(), s.sqrt());
                for ia in 0..ka {
                    let a = wa * ia as f64;
                    for ib in 0..kb {
                        let b = wb * ib as f64;
                        nodes.extend_from_slice(&[r1 * a.cos(), r1 * a.sin(), r2 * b.cos(), r2 * b.sin()]);
                        weights.push(0.5 * ws * wa * wb);
                    }
                }
            }
        }
        _ => return Err(Error::Domain(format!("no product rule for m = {m}"))),
    }
    Ok(SphereRule {
        m,
        method: RuleMethod::ProductAngular,
        resolution: res.to_vec(),
        seed: 0,
        nodes,
        weights,
    })
}

fn monte_carlo_rule(m: usize, count: usize, seed: u64) -> SphereRule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = sphere_volume(m - 1) / count as f64;
    let mut nodes = Vec::with_capacity(count * m);
    let mut buf = vec![0.0; m];
    for _ in 0..count {
        loop {
            for x in buf.iter_mut() {
                *x = StandardNormal.sample(&mut rng);
            }
            let r = buf.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r > 1e-12 {
                nodes.extend(buf.iter().map(|x| x / r));
                break;
            }
        }
    }
    SphereRule {
        m,
        method: RuleMethod::MonteCarlo,
        resolution: vec![count],
        seed,
        nodes,
        weights: vec![w; count],
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_k`.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; k];
    let mut ws = vec![0.0; k];
    let kf = k as f64;
    for i in 0..k.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = kf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        xs[i] = -x;
        xs[k - 1 - i] = x;
        ws[i] = w;
        ws[k - 1 - i] = w;
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_volumes() {
        assert_eq!(sphere_volume(0), 2.0);
        assert!((sphere_volume(1) - 2.0 * PI).abs() < 1e-15);
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-14);
        assert!((sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // exact through degree 11
        let i10: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((i10 - 2.0 / 11.0).abs() < 1e-14);
        let (x5, _) = gauss_legendre(5);
        assert!(x5[2].abs() < 1e-15);
    }

    #[test]
    fn exact_pair() {
        let r = build_sphere_rule(1, 100, None, 0).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.node(0), &[1.0]);
        assert_eq!(r.node(1), &[-1.0]);
        assert_eq!(r.total_weight(), 2.0);
    }

    #[test]
    fn circle_weight_sum() {
        let r = build_sphere_rule(2, 4096, None, 0).unwrap();
        assert!((r.total_weight() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn second_moment_on_s2() {
        let r = build_sphere_rule(3, 10_000, None, 0).unwrap();
        let v = r.integrate(|u| u[0] * u[0]);
        assert!(((v - 4.0 * PI / 3.0) / (4.0 * PI / 3.0)).abs() < 1e-6);
    }

    #[test]
    fn weights_and_unit_nodes() {
        for m in 2..=6 {
            let r = build_sphere_rule(m, 5000, None, 7).unwrap();
            let vol = sphere_volume(m - 1);
            assert!(((r.total_weight() - vol) / vol).abs() < 1e-6, "m = {m}");
            for (u, w) in r.iter() {
                let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-12);
                assert!(w > 0.0);
            }
        }
    }

    #[test]
    fn s3_moments() {
        let r = build_sphere_rule(4, 10_000, None, 0).unwrap();
        let vol = 2.0 * PI * PI;
        for a in 0..4 {
            let v = r.integrate(|u| u[a] * u[a]);
            assert!(((v - vol / 4.0) / vol).abs() < 1e-10);
        }
        let quartic = r.integrate(|u| u[0].powi(2) * u[3].powi(2));
        // E[u_i^2 u_j^2] = 1 / (m (m + 2)) on S^{m-1}
        assert!((quartic - vol / 24.0).abs() < 1e-10);
    }

    #[test]
    fn too_few_nodes() {
        assert!(build_sphere_rule(2, 3, None, 0).is_err());
        assert!(build_sphere_rule(3, 4, None, 0).is_err());
        assert!(build_sphere_rule(6, 1, None, 0).is_err());
        assert!(build_sphere_rule(5, 100, Some(RuleMethod::ProductAngular), 0).is_err());
    }

    #[test]
    fn monte_carlo_reproducible() {
        let a = build_sphere_rule(3, 100, Some(RuleMethod::MonteCarlo), 4).unwrap();
        let b = build_sphere_rule(3, 100, Some(RuleMethod::MonteCarlo), 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coarsening_halves() {
        let r = build_sphere_rule(2, 64, None, 0).unwrap();
        assert_eq!(r.coarsened().unwrap().len(), 32);
        let r3 = build_sphere_rule(3, 200, None, 0).unwrap();
        assert_eq!(r3.coarsened().unwrap().resolution, vec![5, 10]);
    }
}
