//! Compact submanifolds given by parametric immersions `f: box -> R^{n+m}`.
//!
//! Second fundamental forms are extracted with central differences, the
//! pointwise deficits are integrated with the trapezoid rule on periodic axes
//! and the midpoint rule elsewhere, and the integrals can be compared across
//! conformal maps of the ambient space.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::{deficit, full_report, CurvatureReport};
use crate::delta::ConstantEstimate;
use crate::error::{Error, Result};
use crate::form::BilinearForm;
use crate::sphere::sphere_volume;

/// Smallest admissible Gram determinant of the tangent vectors.
pub const GRAM_TOL: f64 = 1e-10;
/// Pointwise deficits below `-NEGATIVE_TOL * (1 + ||beta||^2)` abort an integral.
pub const NEGATIVE_TOL: f64 = 1e-9;
pub const DEFAULT_STEP: f64 = 1e-3;

pub type Evaluator = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub struct ParametricImmersion {
    pub name: String,
    n: usize,
    ambient: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub periodic: Vec<bool>,
    eval: Evaluator,
    /// Finite-difference step per axis.
    pub step: Vec<f64>,
    /// Default number of grid points per axis.
    pub resolution: Vec<usize>,
    /// `b_1 + ... + b_{n-1}`, when known.
    pub betti_sum: Option<u64>,
}

impl fmt::Debug for ParametricImmersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricImmersion")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("ambient", &self.ambient)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("periodic", &self.periodic)
            .field("step", &self.step)
            .field("resolution", &self.resolution)
            .field("betti_sum", &self.betti_sum)
            .finish()
    }
}

impl ParametricImmersion {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        n: usize,
        ambient: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
        periodic: Vec<bool>,
        eval: Evaluator,
        resolution: Vec<usize>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("manifold dimension n = {n} must be >= 2")));
        }
        if ambient <= n {
            return Err(Error::Domain(format!("ambient dimension {ambient} must exceed n = {n}")));
        }
        for (what, len) in [("lower", lower.len()), ("upper", upper.len()), ("periodic", periodic.len()), ("resolution", resolution.len())] {
            if len != n {
                return Err(Error::Dimension(format!("{what} has length {len}, expected n = {n}")));
            }
        }
        for i in 0..n {
            if !(lower[i].is_finite() && upper[i].is_finite() && lower[i] < upper[i]) {
                return Err(Error::Domain(format!("parameter axis {i}: [{}, {}] is not a bounded interval", lower[i], upper[i])));
            }
            if resolution[i] < 2 {
                return Err(Error::Domain(format!("resolution on axis {i} must be >= 2")));
            }
        }
        Ok(ParametricImmersion {
            name: name.into(),
            n,
            ambient,
            lower,
            upper,
            periodic,
            eval,
            step: vec![DEFAULT_STEP; n],
            resolution,
            betti_sum: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.ambient - self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        (self.eval)(u)
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.step = vec![h; self.n];
        self
    }

    pub fn with_resolution(mut self, resolution: Vec<usize>) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn with_betti_sum(mut self, b: u64) -> Self {
        self.betti_sum = Some(b);
        self
    }

    /// `g o f` for a map `g` of the ambient space.
    pub fn composed(&self, name: impl Into<String>, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        let inner = self.eval.clone();
        let mut out = self.clone();
        out.name = name.into();
        out.eval = Arc::new(move |u| g(&inner(u)));
        out
    }

    /// Grid nodes and cell weights on one axis.
    fn axis_nodes(&self, axis: usize, count: usize) -> (Vec<f64>, f64) {
        let (lo, hi) = (self.lower[axis], self.upper[axis]);
        let w = (hi - lo) / count as f64;
        let offset = if self.periodic[axis] { 0.0 } else { 0.5 };
        ((0..count).map(|j| lo + (j as f64 + offset) * w).collect(), w)
    }

    /// All grid points in row-major order with their cell volumes.
    pub fn grid(&self, resolution: &[usize]) -> Result<Vec<(Vec<f64>, f64)>> {
        if resolution.len() != self.n || resolution.iter().any(|&r| r < 1) {
            return Err(Error::Dimension(format!("grid resolution {resolution:?} does not fit n = {}", self.n)));
        }
        let axes: Vec<_> = (0..self.n).map(|i| self.axis_nodes(i, resolution[i])).collect();
        let total: usize = resolution.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; self.n];
        for _ in 0..total {
            let u = idx.iter().enumerate().map(|(i, &j)| axes[i].0[j]).collect();
            let w = axes.iter().map(|a| a.1).product();
            out.push((u, w));
            for i in (0..self.n).rev() {
                idx[i] += 1;
                if idx[i] < resolution[i] {
                    break;
                }
                idx[i] = 0;
            }
        }
        Ok(out)
    }
}

/// `S^n(r)` in `R^{n+1}` in hyperspherical coordinates.
pub fn round_sphere(n: usize, r: f64) -> Result<ParametricImmersion> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("radius {r} must be positive")));
    }
    let eval: Evaluator = Arc::new(move |u: &[f64]| {
        let mut x = vec![0.0; n + 1];
        let mut s = r;
        for i in 0..n {
            x[i] = s * u[i].cos();
            s *= u[i].sin();
        }
        x[n] = s;
        x
    });
    let mut upper = vec![PI; n];
    upper[n - 1] = 2.0 * PI;
    let mut periodic = vec![false; n];
    periodic[n - 1] = true;
    let mut res = vec![48; n];
    res[n - 1] = 96;
    if n >= 3 {
        res = vec![24; n];
        res[n - 1] = 48;
    }
    Ok(ParametricImmersion::new(format!("sphere-{n}"), n, n + 1, vec![0.0; n], upper, periodic, eval, res)?.with_betti_sum(0))
}

/// `T^n = n^{-1/2} (S^1)^n` in `R^{2n}`, a minimal submanifold of `S^{2n-1}`.
pub fn product_torus(n: usize) -> Result<ParametricImmersion> {
    let s = 1.0 / (n as f64).sqrt();
    let eval: Evaluator = Arc::new(move |u: &[f64]| u.iter().flat_map(|t| [s * t.cos(), s * t.sin()]).collect());
    let res = if n == 2 { 64 } else { 24 };
    let betti = (1u64 << n) - 2;
    Ok(ParametricImmersion::new(format!("torus-{n}"), n, 2 * n, vec![0.0; n], vec![2.0 * PI; n], vec![true; n], eval, vec![res; n])?
        .with_betti_sum(betti))
}

pub fn clifford_torus() -> ParametricImmersion {
    let mut t = product_torus(2).expect("valid torus");
    t.name = "clifford".into();
    t
}

/// Ellipsoid with semi-axes `(a, b, c)` in `R^3 x {0} ⊂ R^4`.
pub fn ellipsoid(a: f64, b: f64, c: f64) -> Result<ParametricImmersion> {
    if [a, b, c].iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(Error::Domain("semi-axes must be positive".into()));
    }
    let eval: Evaluator = Arc::new(move |u: &[f64]| {
        let (st, ct) = u[0].sin_cos();
        let (sp, cp) = u[1].sin_cos();
        vec![a * st * cp, b * st * sp, c * ct, 0.0]
    });
    Ok(ParametricImmersion::new("ellipsoid", 2, 4, vec![0.0, 0.0], vec![PI, 2.0 * PI], vec![false, true], eval, vec![64, 128])?
        .with_betti_sum(0))
}

/// Built-in catalog: `sphere`, `sphere3`, `clifford`, `t3`, `ellipsoid`.
pub fn builtin(name: &str) -> Result<ParametricImmersion> {
    match name {
        "sphere" | "sphere2" => round_sphere(2, 1.0),
        "sphere3" => round_sphere(3, 1.0),
        "clifford" => Ok(clifford_torus()),
        "t3" => product_torus(3),
        "ellipsoid" => ellipsoid(1.0, 1.5, 2.0),
        other => Err(Error::Domain(format!(
            "unknown built-in immersion '{other}' (expected sphere, sphere3, clifford, t3, ellipsoid)"
        ))),
    }
}

/// Immersion sampled on a full periodic grid.
///
/// Columns are `u_1..u_n` followed by the ambient coordinates. The rows must
/// cover a regular tensor grid on `[lo_i, lo_i + N_i du_i)` with every axis
/// periodic; derivatives use neighbouring nodes, so the step on each axis is
/// the grid spacing.
pub fn sampled_grid(n: usize, rows: &[Vec<f64>]) -> Result<ParametricImmersion> {
    if rows.is_empty() {
        return Err(Error::Malformed { path: "grid".into(), message: "no data rows".into() });
    }
    let width = rows[0].len();
    if width <= 2 * n {
        return Err(Error::Malformed {
            path: "grid".into(),
            message: format!("{width} columns cannot hold {n} parameters and more than {n} ambient coordinates"),
        });
    }
    let ambient = width - n;
    let mut axes: Vec<Vec<f64>> = vec![Vec::new(); n];
    for (r, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Malformed { path: format!("grid row {}", r + 1), message: format!("has {} columns, expected {width}", row.len()) });
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("grid row {}", r + 1)));
        }
        for i in 0..n {
            axes[i].push(row[i]);
        }
    }
    let mut lower = Vec::with_capacity(n);
    let mut spacing = Vec::with_capacity(n);
    let mut counts = Vec::with_capacity(n);
    for (i, vals) in axes.iter_mut().enumerate() {
        vals.sort_by(f64::total_cmp);
        vals.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        if vals.len() < 4 {
            return Err(Error::Malformed { path: format!("grid column u{}", i + 1), message: "needs at least 4 distinct values".into() });
        }
        let d = (vals[vals.len() - 1] - vals[0]) / (vals.len() - 1) as f64;
        for w in vals.windows(2) {
            if ((w[1] - w[0]) - d).abs() > 1e-6 * d {
                return Err(Error::Malformed { path: format!("grid column u{}", i + 1), message: "values are not equally spaced".into() });
            }
        }
        lower.push(vals[0]);
        spacing.push(d);
        counts.push(vals.len());
    }
    let total: usize = counts.iter().product();
    if total != rows.len() {
        return Err(Error::Malformed { path: "grid".into(), message: format!("{} rows do not fill a {counts:?} grid", rows.len()) });
    }
    let mut data = vec![f64::NAN; total * ambient];
    let mut seen = vec![false; total];
    for (r, row) in rows.iter().enumerate() {
        let mut flat = 0;
        for i in 0..n {
            let j = ((row[i] - lower[i]) / spacing[i]).round() as usize;
            flat = flat * counts[i] + j;
        }
        if seen[flat] {
            return Err(Error::Malformed { path: format!("grid row {}", r + 1), message: "duplicate grid node".into() });
        }
        seen[flat] = true;
        data[flat * ambient..(flat + 1) * ambient].copy_from_slice(&row[n..]);
    }
    let (lo, du, cnt) = (lower.clone(), spacing.clone(), counts.clone());
    let eval: Evaluator = Arc::new(move |u: &[f64]| {
        let mut flat = 0;
        for i in 0..u.len() {
            let j = ((u[i] - lo[i]) / du[i]).round() as i64;
            flat = flat * cnt[i] + j.rem_euclid(cnt[i] as i64) as usize;
        }
        data[flat * ambient..(flat + 1) * ambient].to_vec()
    });
    let upper = lower.iter().zip(&spacing).zip(&counts).map(|((l, d), c)| l + d * *c as f64).collect();
    let mut out = ParametricImmersion::new("grid", n, ambient, lower, upper, vec![true; n], eval, counts)?;
    out.step = spacing;
    Ok(out)
}

pub fn read_grid_csv(path: &Path, n: usize) -> Result<ParametricImmersion> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let mut rows = Vec::new();
    for (r, rec) in reader.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(col, s)| {
                s.parse::<f64>().map_err(|_| Error::Malformed {
                    path: format!("{} row {} column {}", path.display(), r + 1, col + 1),
                    message: format!("'{s}' is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    sampled_grid(n, &rows)
}

#[derive(Debug, Clone)]
pub struct PointwiseGeometry {
    pub u: Vec<f64>,
    pub metric: DMatrix<f64>,
    /// `sqrt(det G)`.
    pub weight: f64,
    /// Second fundamental form in orthonormal tangent and normal frames.
    pub form: BilinearForm,
    pub report: CurvatureReport,
}

fn random_basis(dim: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(dim);
    while out.len() < dim {
        let mut v = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
        for _ in 0..2 {
            for b in &out {
                let d = b.dot(&v);
                v.axpy(-d, b, 1.0);
            }
        }
        let nv = v.norm();
        if nv > 1e-8 {
            out.push(v / nv);
        }
    }
    out
}

/// Orthonormal basis of the complement of the column space of `j`, by
/// pivoted Gram-Schmidt over the candidate vectors.
fn normal_frame(j: &DMatrix<f64>, candidates: Vec<DVector<f64>>, at: &[f64]) -> Result<Vec<DVector<f64>>> {
    let (dim, n) = j.shape();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(dim);
    let q = j.clone().qr().q();
    for i in 0..n {
        basis.push(q.column(i).into_owned());
    }
    let mut normals = Vec::with_capacity(dim - n);
    let mut pool = candidates;
    while normals.len() < dim - n {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for (idx, c) in pool.iter().enumerate() {
            let mut v = c.clone();
            for _ in 0..2 {
                for b in &basis {
                    let d = b.dot(&v);
                    v.axpy(-d, b, 1.0);
                }
            }
            let nv = v.norm();
            if best.as_ref().is_none_or(|b| nv > b.2) {
                best = Some((idx, v, nv));
            }
        }
        match best {
            Some((idx, v, nv)) if nv > 1e-8 => {
                pool.swap_remove(idx);
                let v = v / nv;
                basis.push(v.clone());
                normals.push(v);
            }
            _ => {
                return Err(Error::DegenerateGeometry { at: at.to_vec(), message: "normal frame is rank deficient".into() });
            }
        }
    }
    Ok(normals)
}

fn inverse_sqrt(g: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = g.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Second fundamental form at `u` from central differences. `frame_seed`
/// replaces the standard basis by a random orthonormal one when building the
/// normal frame.
pub fn second_fundamental_form_at(f: &ParametricImmersion, u: &[f64], c: f64, frame_seed: Option<u64>) -> Result<PointwiseGeometry> {
    let n = f.n;
    let dim = f.ambient;
    if u.len() != n {
        return Err(Error::Dimension(format!("parameter point has length {}, expected {n}", u.len())));
    }
    let at = |du: &[(usize, f64)]| -> Result<DVector<f64>> {
        let mut p = u.to_vec();
        for &(i, s) in du {
            p[i] += s * f.step[i];
        }
        let x = f.eval(&p);
        if x.len() != dim {
            return Err(Error::Dimension(format!("evaluator returned {} coordinates, expected {dim}", x.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("immersion value at {p:?}")));
        }
        Ok(DVector::from_vec(x))
    };
    let f0 = at(&[])?;
    let mut j = DMatrix::zeros(dim, n);
    let mut hess = vec![vec![DVector::zeros(dim); n]; n];
    for i in 0..n {
        let hi = f.step[i];
        let fp = at(&[(i, 1.0)])?;
        let fm = at(&[(i, -1.0)])?;
        j.set_column(i, &((&fp - &fm) / (2.0 * hi)));
        hess[i][i] = (&fp - &f0 * 2.0 + &fm) / (hi * hi);
        for k in 0..i {
            let hk = f.step[k];
            let d = (at(&[(i, 1.0), (k, 1.0)])? - at(&[(i, 1.0), (k, -1.0)])? - at(&[(i, -1.0), (k, 1.0)])? + at(&[(i, -1.0), (k, -1.0)])?)
                / (4.0 * hi * hk);
            hess[k][i] = d.clone();
            hess[i][k] = d;
        }
    }
    let metric = j.transpose() * &j;
    let det = metric.determinant();
    if !(det > GRAM_TOL) {
        return Err(Error::DegenerateGeometry { at: u.to_vec(), message: format!("Gram determinant {det:e} <= {GRAM_TOL:e}") });
    }
    let candidates = match frame_seed {
        None => (0..dim).map(|i| DVector::from_fn(dim, |r, _| if r == i { 1.0 } else { 0.0 })).collect(),
        Some(seed) => random_basis(dim, seed),
    };
    let normals = normal_frame(&j, candidates, u)?;
    let g_is = inverse_sqrt(&metric);
    let ops = normals
        .iter()
        .map(|xi| {
            let h = DMatrix::from_fn(n, n, |r, s| hess[r][s].dot(xi));
            &g_is * h * &g_is
        })
        .collect();
    let form = BilinearForm::new(n, ops)?;
    let report = full_report(&form, c)?;
    Ok(PointwiseGeometry { u: u.to_vec(), metric, weight: det.sqrt(), form, report })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitIntegral {
    pub value: f64,
    pub error_estimate: f64,
    /// Smallest pointwise deficit on the grid, and where it occurs.
    pub min_deficit: f64,
    pub min_at: Vec<f64>,
    /// `∫ dM` on the same grid.
    pub volume: f64,
    pub resolution: Vec<usize>,
    pub points: usize,
}

/// Per-point record for CSV output.
#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    pub u: Vec<f64>,
    pub weight: f64,
    pub h_sq: f64,
    pub rho: f64,
    pub rho_k: f64,
    pub rho_perp: f64,
    pub deficit: f64,
}

struct GridPass {
    value: f64,
    volume: f64,
    min: f64,
    min_at: Vec<f64>,
    records: Vec<PointRecord>,
}

fn check_k_lam(n: usize, k: usize, lam: f64) -> Result<()> {
    if k < 1 || k > n {
        return Err(Error::Domain(format!("k = {k} must lie in 1..={n}")));
    }
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::Domain(format!("lam = {lam} must lie in [0, 1]")));
    }
    Ok(())
}

fn grid_pass(f: &ParametricImmersion, c: f64, k: usize, lam: f64, resolution: &[usize], keep: bool) -> Result<GridPass> {
    let n = f.n;
    let grid = f.grid(resolution)?;
    let per_point: Vec<Result<(f64, f64, f64, PointRecord)>> = grid
        .par_iter()
        .map(|(u, cell)| {
            let g = second_fundamental_form_at(f, u, c, None)?;
            let d = deficit(&g.form, c, k, lam)?;
            let scale = 1.0 + g.form.norm_sq();
            if d < -NEGATIVE_TOL * scale {
                return Err(Error::NegativeDeficit { at: u.clone(), value: d });
            }
            let dm = cell * g.weight;
            let integrand = d.max(0.0).powf(n as f64 / 2.0) * dm;
            let rec = PointRecord {
                u: u.clone(),
                weight: g.weight,
                h_sq: g.report.h_sq,
                rho: g.report.rho(),
                rho_k: g.report.rho_k[k - 1],
                rho_perp: g.report.rho_perp,
                deficit: d,
            };
            Ok((integrand, dm, d, rec))
        })
        .collect();
    let mut pass = GridPass { value: 0.0, volume: 0.0, min: f64::INFINITY, min_at: Vec::new(), records: Vec::new() };
    for r in per_point {
        let (v, dm, d, rec) = r?;
        pass.value += v;
        pass.volume += dm;
        if d < pass.min {
            pass.min = d;
            pass.min_at = rec.u.clone();
        }
        if keep {
            pass.records.push(rec);
        }
    }
    Ok(pass)
}

fn halved(resolution: &[usize]) -> Vec<usize> {
    resolution.iter().map(|&r| r.div_ceil(2).max(2)).collect()
}

/// `∫_M max(deficit, 0)^{n/2} dM` with the `(k, lam)` deficit.
///
/// The error estimate adds the change under halving the grid resolution to
/// the Richardson estimate `|I_h - I_{2h}| / 3` of the finite-difference
/// error.
pub fn deficit_integral(f: &ParametricImmersion, c: f64, k: usize, lam: f64, resolution: Option<&[usize]>) -> Result<DeficitIntegral> {
    deficit_integral_with_points(f, c, k, lam, resolution, false).map(|(d, _)| d)
}

pub fn deficit_integral_with_points(
    f: &ParametricImmersion,
    c: f64,
    k: usize,
    lam: f64,
    resolution: Option<&[usize]>,
    keep_points: bool,
) -> Result<(DeficitIntegral, Vec<PointRecord>)> {
    check_k_lam(f.n, k, lam)?;
    if !c.is_finite() {
        return Err(Error::NonFinite(format!("c = {c}")));
    }
    let res = resolution.map_or_else(|| f.resolution.clone(), |r| r.to_vec());
    let fine = grid_pass(f, c, k, lam, &res, keep_points)?;
    let coarse = grid_pass(f, c, k, lam, &halved(&res), false)?;
    let mut wide = f.clone();
    wide.step = f.step.iter().map(|h| 2.0 * h).collect();
    let wide_pass = grid_pass(&wide, c, k, lam, &res, false)?;
    let error_estimate = (fine.value - coarse.value).abs() + (fine.value - wide_pass.value).abs() / 3.0;
    let points = res.iter().product();
    Ok((
        DeficitIntegral {
            value: fine.value,
            error_estimate,
            min_deficit: fine.min,
            min_at: fine.min_at,
            volume: fine.volume,
            resolution: res,
            points,
        },
        fine.records,
    ))
}

pub fn write_points_csv<W: std::io::Write>(records: &[PointRecord], n: usize, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (1..=n).map(|i| format!("u{i}")).collect();
    header.extend(["weight", "h_sq", "rho", "rho_k", "rho_perp", "deficit"].map(String::from));
    out.write_record(&header)?;
    for r in records {
        let mut row: Vec<String> = r.u.iter().map(|x| x.to_string()).collect();
        row.extend([r.weight, r.h_sq, r.rho, r.rho_k, r.rho_perp, r.deficit].map(|x| x.to_string()));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Conformal maps of the ambient Euclidean space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ConformalMap {
    /// `x -> t x`.
    Dilation { t: f64 },
    /// `x -> center + radius^2 (x - center) / |x - center|^2`.
    Inversion { center: Vec<f64>, radius: f64 },
}

impl ConformalMap {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ConformalMap::Dilation { t } => x.iter().map(|v| t * v).collect(),
            ConformalMap::Inversion { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                let s = radius * radius / d2;
                x.iter().zip(center).map(|(a, b)| b + s * (a - b)).collect()
            }
        }
    }

    fn validate(&self, ambient: usize) -> Result<()> {
        match self {
            ConformalMap::Dilation { t } if !(t.is_finite() && *t != 0.0) => Err(Error::Domain(format!("dilation factor {t} must be finite and nonzero"))),
            ConformalMap::Inversion { center, .. } if center.len() != ambient => {
                Err(Error::Dimension(format!("inversion center has length {}, expected {ambient}", center.len())))
            }
            ConformalMap::Inversion { center, radius } if !(*radius > 0.0) || center.iter().any(|x| !x.is_finite()) => {
                Err(Error::Domain("inversion needs a finite center and a positive radius".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalCheck {
    pub map: ConformalMap,
    pub lam: f64,
    pub before: DeficitIntegral,
    pub after: DeficitIntegral,
    pub rel_diff: f64,
}

/// Compares the `k = n` integral before and after a conformal map.
pub fn conformal_invariance_check(f: &ParametricImmersion, lam: f64, map: &ConformalMap, resolution: Option<&[usize]>) -> Result<ConformalCheck> {
    map.validate(f.ambient)?;
    let g = map.clone();
    let image = f.composed(format!("{}-mapped", f.name), move |x| g.apply(x));
    let before = deficit_integral(f, 0.0, f.n, lam, resolution)?;
    let after = deficit_integral(&image, 0.0, f.n, lam, resolution)?;
    let scale = before.value.abs().max(after.value.abs());
    let rel_diff = if scale == 0.0 { 0.0 } else { (after.value - before.value).abs() / scale };
    Ok(ConformalCheck { map: map.clone(), lam, before, after, rel_diff })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub immersion: String,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub lam: f64,
    pub integral: DeficitIntegral,
    pub betti_sum: Option<u64>,
    pub epsilon_upper: f64,
    /// `epsilon_upper * betti_sum`.
    pub rhs: Option<f64>,
    /// Integral fell below `epsilon_upper * betti_sum`. Only a flag: the
    /// estimate is itself an upper bound.
    pub below_estimate: bool,
    /// `integral / betti_sum`, an upper bound on the true constant.
    pub geometry_bound: Option<f64>,
}

/// Sets `∫ deficit^{n/2} dM` against `epsilon * sum b_i` for the estimate's
/// `(k, lam)`.
pub fn theorem_consistency_report(f: &ParametricImmersion, c: f64, estimate: &ConstantEstimate, resolution: Option<&[usize]>) -> Result<ConsistencyReport> {
    if estimate.n != f.n || estimate.m != f.m() {
        return Err(Error::Dimension(format!(
            "estimate is for (n, m) = ({}, {}), immersion has ({}, {})",
            estimate.n,
            estimate.m,
            f.n,
            f.m()
        )));
    }
    let integral = deficit_integral(f, c, estimate.k, estimate.lam, resolution)?;
    let rhs = f.betti_sum.map(|b| estimate.epsilon_upper * b as f64);
    let below_estimate = rhs.is_some_and(|r| integral.value < r);
    let geometry_bound = f.betti_sum.filter(|&b| b > 0).map(|b| integral.value / b as f64);
    Ok(ConsistencyReport {
        immersion: f.name.clone(),
        n: f.n,
        m: f.m(),
        k: estimate.k,
        lam: estimate.lam,
        integral,
        betti_sum: f.betti_sum,
        epsilon_upper: estimate.epsilon_upper,
        rhs,
        below_estimate,
        geometry_bound,
    })
}

/// `Vol(S^n(r))`.
pub fn sphere_area(n: usize, r: f64) -> f64 {
    sphere_volume(n) * r.powi(n as i32)
}
