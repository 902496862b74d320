//! Symmetric bilinear forms `V x V -> W` in fixed orthonormal frames.
//!
//! A form is stored as its `m` shape operators `A_1, ..., A_m`, one symmetric
//! `n x n` matrix per normal basis vector, so that
//! `<beta(x, y), xi_a> = <A_a x, y>`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};

/// Largest entrywise asymmetry tolerated after construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BilinearForm {
    n: usize,
    shape_ops: Vec<DMatrix<f64>>,
}

impl BilinearForm {
    /// Builds a form from shape operators. Each matrix is replaced by its
    /// symmetric part `(A + A^T) / 2`.
    pub fn new(n: usize, shape_ops: Vec<DMatrix<f64>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("tangent dimension n = {n} must be >= 2")));
        }
        if shape_ops.is_empty() {
            return Err(Error::Domain("normal dimension m must be >= 1".into()));
        }
        let mut ops = Vec::with_capacity(shape_ops.len());
        for (a, op) in shape_ops.into_iter().enumerate() {
            if op.nrows() != n || op.ncols() != n {
                return Err(Error::Dimension(format!(
                    "shape operator {a} is {}x{}, expected {n}x{n}",
                    op.nrows(),
                    op.ncols()
                )));
            }
            if op.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("shape operator {a}")));
            }
            let sym = (&op + op.transpose()) * 0.5;
            ops.push(sym);
        }
        let form = BilinearForm { n, shape_ops: ops };
        debug_assert!(form.max_asymmetry() <= SYMMETRY_TOL);
        Ok(form)
    }

    pub fn zero(n: usize, m: usize) -> Result<Self> {
        Self::new(n, vec![DMatrix::zeros(n, n); m])
    }

    /// The umbilical form with `A_a = lambda_a * I`.
    pub fn umbilical(n: usize, lambdas: &[f64]) -> Result<Self> {
        let ops = lambdas
            .iter()
            .map(|&l| DMatrix::identity(n, n) * l)
            .collect();
        Self::new(n, ops)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.shape_ops.len()
    }

    pub fn shape_ops(&self) -> &[DMatrix<f64>] {
        &self.shape_ops
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.shape_ops
            .iter()
            .map(|a| (a - a.transpose()).amax())
            .fold(0.0, f64::max)
    }

    /// `A_xi = sum_a xi_a A_a`. `xi` need not be a unit vector.
    pub fn shape_operator(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        if xi.len() != self.m() {
            return Err(Error::Dimension(format!(
                "normal vector has length {}, expected m = {}",
                xi.len(),
                self.m()
            )));
        }
        let mut out = DMatrix::zeros(self.n, self.n);
        self.shape_operator_into(xi, &mut out);
        Ok(out)
    }

    /// Allocation-free variant used in quadrature loops; `xi.len()` must be `m`.
    pub(crate) fn shape_operator_into(&self, xi: &[f64], out: &mut DMatrix<f64>) {
        out.fill(0.0);
        for (w, a) in xi.iter().zip(&self.shape_ops) {
            if *w != 0.0 {
                for (o, x) in out.as_mut_slice().iter_mut().zip(a.as_slice()) {
                    *o += w * x;
                }
            }
        }
    }

    /// `||beta||^2 = sum_a ||A_a||_F^2`.
    pub fn norm_sq(&self) -> f64 {
        self.shape_ops.iter().map(|a| a.norm_squared()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, t: f64) -> BilinearForm {
        BilinearForm {
            n: self.n,
            shape_ops: self.shape_ops.iter().map(|a| a * t).collect(),
        }
    }

    pub fn first_order_invariants(&self) -> FirstOrderInvariants {
        let n = self.n as f64;
        let mean_vector: Vec<f64> = self.shape_ops.iter().map(|a| a.trace() / n).collect();
        let h_sq = mean_vector.iter().map(|h| h * h).sum();
        let traceless_ops = self
            .shape_ops
            .iter()
            .zip(&mean_vector)
            .map(|(a, h)| a - DMatrix::identity(self.n, self.n) * *h)
            .collect();
        FirstOrderInvariants {
            mean_vector,
            h_sq,
            norm_sq: self.norm_sq(),
            traceless: BilinearForm { n: self.n, shape_ops: traceless_ops },
        }
    }

    /// True iff `||traceless(beta)|| <= tol * max(1, ||beta||)`.
    pub fn is_umbilical(&self, tol: f64) -> bool {
        let inv = self.first_order_invariants();
        inv.traceless.norm() <= tol * self.norm().max(1.0)
    }

    /// Parses the `{"n", "m", "shape_ops"}` JSON schema, reporting the
    /// offending path on failure.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Malformed {
            path: "$".into(),
            message: e.to_string(),
        })?;
        Self::from_json_value(&value)
    }

    pub fn from_json_value(value: &Value) -> Result<Self> {
        let malformed = |path: &str, message: &str| Error::Malformed {
            path: path.to_string(),
            message: message.to_string(),
        };
        let obj = value
            .as_object()
            .ok_or_else(|| malformed("$", "expected an object"))?;
        let read_dim = |key: &str| -> Result<usize> {
            let v = obj
                .get(key)
                .ok_or_else(|| malformed(&format!("$.{key}"), "missing field"))?;
            v.as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| malformed(&format!("$.{key}"), "expected a non-negative integer"))
        };
        let n = read_dim("n")?;
        let m = read_dim("m")?;
        if n < 2 {
            return Err(malformed("$.n", "must be >= 2"));
        }
        if m < 1 {
            return Err(malformed("$.m", "must be >= 1"));
        }
        let ops = obj
            .get("shape_ops")
            .ok_or_else(|| malformed("$.shape_ops", "missing field"))?
            .as_array()
            .ok_or_else(|| malformed("$.shape_ops", "expected an array of matrices"))?;
        if ops.len() != m {
            return Err(malformed(
                "$.shape_ops",
                &format!("has {} matrices, expected m = {m}", ops.len()),
            ));
        }
        let mut mats = Vec::with_capacity(m);
        for (a, op) in ops.iter().enumerate() {
            let rows = op
                .as_array()
                .ok_or_else(|| malformed(&format!("$.shape_ops[{a}]"), "expected an array of rows"))?;
            if rows.len() != n {
                return Err(malformed(
                    &format!("$.shape_ops[{a}]"),
                    &format!("has {} rows, expected n = {n}", rows.len()),
                ));
            }
            let mut mat = DMatrix::zeros(n, n);
            for (i, row) in rows.iter().enumerate() {
                let path = format!("$.shape_ops[{a}][{i}]");
                let row = row
                    .as_array()
                    .ok_or_else(|| malformed(&path, "expected an array of numbers"))?;
                if row.len() != n {
                    return Err(malformed(
                        &path,
                        &format!("has {} entries, expected n = {n}", row.len()),
                    ));
                }
                for (j, x) in row.iter().enumerate() {
                    mat[(i, j)] = x
                        .as_f64()
                        .ok_or_else(|| malformed(&format!("{path}[{j}]"), "expected a number"))?;
                }
            }
            let asym = (&mat - mat.transpose()).amax();
            let scale = mat.amax().max(1.0);
            if asym > 1e-6 * scale {
                return Err(malformed(
                    &format!("$.shape_ops[{a}]"),
                    &format!("matrix is not symmetric (max asymmetry {asym:e})"),
                ));
            }
            mats.push(mat);
        }
        BilinearForm::new(n, mats)
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::to_value(self).expect("form serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("form serializes")
    }
}

#[derive(Serialize)]
struct FormWire<'a> {
    n: usize,
    m: usize,
    shape_ops: Vec<Vec<&'a [f64]>>,
}

impl Serialize for BilinearForm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        // Rows of a symmetric matrix equal its columns, and nalgebra stores
        // column-major, so column slices are the row-major rows.
        let shape_ops = self
            .shape_ops
            .iter()
            .map(|a| (0..self.n).map(|j| &a.as_slice()[j * self.n..(j + 1) * self.n]).collect())
            .collect();
        FormWire { n: self.n, m: self.m(), shape_ops }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BilinearForm {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        BilinearForm::from_json_value(&value).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone)]
pub struct FirstOrderInvariants {
    /// Components of the mean curvature vector, `tr(A_a) / n`.
    pub mean_vector: Vec<f64>,
    pub h_sq: f64,
    pub norm_sq: f64,
    /// Shape operators `B_a = A_a - H_a I`.
    pub traceless: BilinearForm,
}

/// Canonical form of the DDVV equality case:
/// `A_1 = diag(l1 + mu, l1 - mu, l1, ...)`, `A_2 = l2 I + mu (E_12 + E_21)`,
/// `A_a = l_a I` for `a >= 3`.
pub fn wintgen_canonical_form(n: usize, m: usize, mu: f64, lambdas: &[f64]) -> Result<BilinearForm> {
    if n < 2 {
        return Err(Error::Domain(format!("n = {n} must be >= 2")));
    }
    if m < 2 {
        return Err(Error::Domain(format!("m = {m} must be >= 2")));
    }
    if lambdas.len() != m {
        return Err(Error::Dimension(format!(
            "{} lambdas given, expected m = {m}",
            lambdas.len()
        )));
    }
    let mut ops: Vec<DMatrix<f64>> = lambdas.iter().map(|&l| DMatrix::identity(n, n) * l).collect();
    ops[0][(0, 0)] += mu;
    ops[0][(1, 1)] -= mu;
    ops[1][(0, 1)] = mu;
    ops[1][(1, 0)] = mu;
    BilinearForm::new(n, ops)
}

/// The degenerating family used to show that the `k = n` constant vanishes:
/// `A_1 = diag(mu, -mu, -sigma, sigma, ..., sigma)`,
/// `A_2 = [[0, mu], [mu, 0]] (+) diag(-sigma, sigma, ..., sigma)`, `A_a = 0` otherwise.
pub fn example1_form(n: usize, m: usize, mu: f64, sigma: f64) -> Result<BilinearForm> {
    if n < 3 {
        return Err(Error::Domain(format!("n = {n} must be >= 3")));
    }
    if m < 2 {
        return Err(Error::Domain(format!("m = {m} must be >= 2")));
    }
    if !(mu > 0.0) || !(sigma > 0.0) {
        return Err(Error::Domain(format!("mu = {mu} and sigma = {sigma} must be > 0")));
    }
    let mut tail = vec![sigma; n - 2];
    tail[0] = -sigma;
    let mut a1 = DMatrix::zeros(n, n);
    a1[(0, 0)] = mu;
    a1[(1, 1)] = -mu;
    let mut a2 = DMatrix::zeros(n, n);
    a2[(0, 1)] = mu;
    a2[(1, 0)] = mu;
    for (i, s) in tail.iter().enumerate() {
        a1[(i + 2, i + 2)] = *s;
        a2[(i + 2, i + 2)] = *s;
    }
    let mut ops = vec![a1, a2];
    ops.resize(m, DMatrix::zeros(n, n));
    BilinearForm::new(n, ops)
}

/// Gaussian random form: each `A_a` is the symmetric part of an i.i.d.
/// standard normal matrix, times `scale`. Deterministic per seed.
pub fn random_form(n: usize, m: usize, scale: f64, seed: u64) -> Result<BilinearForm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_form_with(n, m, scale, &mut rng)
}

pub(crate) fn random_form_with<R: rand::Rng>(
    n: usize,
    m: usize,
    scale: f64,
    rng: &mut R,
) -> Result<BilinearForm> {
    if !(scale > 0.0) {
        return Err(Error::Domain(format!("scale = {scale} must be > 0")));
    }
    let ops = (0..m)
        .map(|_| {
            let g = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(rng));
            ((&g + g.transpose()) * 0.5) * scale
        })
        .collect();
    BilinearForm::new(n, ops)
}

/// Rank-4 covariant tensor on `R^n`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor4 {
    n: usize,
    entries: Vec<f64>,
}

impl CurvatureTensor4 {
    pub fn zeros(n: usize) -> Self {
        CurvatureTensor4 { n, entries: vec![0.0; n * n * n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.entries[self.idx(i, j, k, l)]
    }

    fn add_assign(&mut self, other: &CurvatureTensor4, t: f64) {
        for (x, y) in self.entries.iter_mut().zip(&other.entries) {
            *x += t * y;
        }
    }

    /// `Ric(x, y) = sum_i R(e_i, x, e_i, y)`.
    pub fn contract_13(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |x, y| (0..n).map(|i| self.get(i, x, i, y)).sum())
    }

    /// Largest violation of the algebraic curvature-tensor identities:
    /// antisymmetry in each pair, pair exchange, and the first Bianchi identity.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        worst = worst
                            .max((r + self.get(j, i, k, l)).abs())
                            .max((r + self.get(i, j, l, k)).abs())
                            .max((r - self.get(k, l, i, j)).abs())
                            .max((r + self.get(i, k, l, j) + self.get(i, l, j, k)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Kulkarni-Nomizu product of two real bilinear forms given as matrices.
pub fn kulkarni_nomizu(phi: &DMatrix<f64>, psi: &DMatrix<f64>) -> CurvatureTensor4 {
    let n = phi.nrows();
    let mut t = CurvatureTensor4::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let idx = t.idx(i, j, k, l);
                    t.entries[idx] = phi[(i, k)] * psi[(j, l)] + phi[(j, l)] * psi[(i, k)]
                        - phi[(i, l)] * psi[(j, k)]
                        - phi[(j, k)] * psi[(i, l)];
                }
            }
        }
    }
    t
}

/// `R_c(beta) = (c g.g + beta.beta) / 2`, with `.` the Kulkarni-Nomizu
/// product and `beta.beta` paired through the inner product of `W`.
pub fn formal_curvature_tensor(beta: &BilinearForm, c: f64) -> CurvatureTensor4 {
    let n = beta.n();
    let g = DMatrix::identity(n, n);
    let mut r = CurvatureTensor4::zeros(n);
    r.add_assign(&kulkarni_nomizu(&g, &g), 0.5 * c);
    for a in beta.shape_ops() {
        r.add_assign(&kulkarni_nomizu(a, a), 0.5);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_shape_operator() {
        let f = BilinearForm::umbilical(4, &[1.0]).unwrap();
        assert_eq!(f.shape_operator(&[1.0]).unwrap(), DMatrix::identity(4, 4));
    }

    #[test]
    fn zero_normal_gives_zero_operator() {
        let f = random_form(3, 2, 1.0, 9).unwrap();
        assert_eq!(f.shape_operator(&[0.0, 0.0]).unwrap(), DMatrix::zeros(3, 3));
    }

    #[test]
    fn shape_operator_rejects_wrong_length() {
        let f = random_form(3, 2, 1.0, 9).unwrap();
        assert!(matches!(f.shape_operator(&[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn construction_symmetrizes() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 3.0]);
        let f = BilinearForm::new(2, vec![a]).unwrap();
        assert_eq!(f.shape_ops()[0][(0, 1)], 1.0);
        assert_eq!(f.max_asymmetry(), 0.0);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(BilinearForm::new(1, vec![DMatrix::zeros(1, 1)]).is_err());
        assert!(BilinearForm::new(3, vec![]).is_err());
        assert!(BilinearForm::new(3, vec![DMatrix::zeros(2, 2)]).is_err());
        let mut a = DMatrix::zeros(2, 2);
        a[(0, 0)] = f64::NAN;
        assert!(matches!(BilinearForm::new(2, vec![a]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn umbilical_first_order() {
        let f = BilinearForm::umbilical(3, &[2.0, -1.0]).unwrap();
        let inv = f.first_order_invariants();
        assert_eq!(inv.mean_vector, vec![2.0, -1.0]);
        assert_eq!(inv.h_sq, 5.0);
        assert_eq!(inv.traceless.norm_sq(), 0.0);
        assert!(f.is_umbilical(1e-12));
        assert!(BilinearForm::zero(3, 2).unwrap().is_umbilical(1e-12));
    }

    #[test]
    fn wintgen_traceless_norm() {
        for &mu in &[0.1, 1.0, 10.0] {
            let f = wintgen_canonical_form(4, 3, mu, &[0.5, -1.0, 2.0]).unwrap();
            let inv = f.first_order_invariants();
            let expect = 4.0 * mu * mu;
            assert!((inv.traceless.norm_sq() - expect).abs() <= 1e-12 * expect);
            assert!(!f.is_umbilical(1e-9));
        }
        assert!(wintgen_canonical_form(3, 2, 0.0, &[1.0, 2.0]).unwrap().is_umbilical(1e-12));
        assert!(wintgen_canonical_form(3, 1, 1.0, &[1.0]).is_err());
    }

    #[test]
    fn wintgen_printed_matrices() {
        let f = wintgen_canonical_form(3, 3, 0.5, &[1.0, 2.0, 3.0]).unwrap();
        let a1 = DMatrix::from_row_slice(3, 3, &[1.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 1.0]);
        let a2 = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 2.0, 0.0, 0.0, 0.0, 2.0]);
        assert_eq!(f.shape_ops()[0], a1);
        assert_eq!(f.shape_ops()[1], a2);
        assert_eq!(f.shape_ops()[2], DMatrix::identity(3, 3) * 3.0);
    }

    #[test]
    fn example1_printed_matrices() {
        let (mu, s) = (1.5, 0.25);
        let f = example1_form(5, 3, mu, s).unwrap();
        let a1 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![mu, -mu, -s, s, s]));
        let mut a2 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 0.0, -s, s, s]));
        a2[(0, 1)] = mu;
        a2[(1, 0)] = mu;
        assert_eq!(f.shape_ops()[0], a1);
        assert_eq!(f.shape_ops()[1], a2);
        assert_eq!(f.shape_ops()[2], DMatrix::zeros(5, 5));
    }

    #[test]
    fn example1_shape_operator_block_structure() {
        let (mu, s) = (2.0, 0.3);
        let (u1, u2) = (0.6, -0.8);
        let f = example1_form(4, 2, mu, s).unwrap();
        let a = f.shape_operator(&[u1, u2]).unwrap();
        assert_eq!(a[(0, 0)], mu * u1);
        assert_eq!(a[(0, 1)], mu * u2);
        assert_eq!(a[(1, 1)], -mu * u1);
        assert!((a[(2, 2)] + s * (u1 + u2)).abs() < 1e-15);
        assert!((a[(3, 3)] - s * (u1 + u2)).abs() < 1e-15);
    }

    #[test]
    fn example1_eigenvalues_and_mean() {
        let (n, mu, s) = (6, 1.3, 0.2);
        let f = example1_form(n, 2, mu, s).unwrap();
        let (u1, u2) = (0.28f64, 0.96f64);
        let mut eig: Vec<f64> = f
            .shape_operator(&[u1, u2])
            .unwrap()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        eig.sort_by(f64::total_cmp);
        let r = (u1 * u1 + u2 * u2).sqrt();
        let mut expect = vec![mu * r, -mu * r, -s * (u1 + u2)];
        expect.extend(std::iter::repeat(s * (u1 + u2)).take(n - 3));
        expect.sort_by(f64::total_cmp);
        for (a, b) in eig.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let inv = f.first_order_invariants();
        let h = (n as f64 - 4.0) * s / n as f64;
        assert!((inv.mean_vector[0] - h).abs() < 1e-15);
        assert!((inv.mean_vector[1] - h).abs() < 1e-15);
    }

    #[test]
    fn example1_small_sigma_approaches_wintgen() {
        let f = example1_form(4, 2, 1.0, 1e-9).unwrap();
        let w = wintgen_canonical_form(4, 2, 1.0, &[0.0, 0.0]).unwrap();
        let diff: f64 = f
            .shape_ops()
            .iter()
            .zip(w.shape_ops())
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-9);
    }

    #[test]
    fn example1_domain() {
        assert!(example1_form(2, 2, 1.0, 0.1).is_err());
        assert!(example1_form(3, 1, 1.0, 0.1).is_err());
        assert!(example1_form(3, 2, 0.0, 0.1).is_err());
        assert!(example1_form(3, 2, 1.0, -0.1).is_err());
    }

    #[test]
    fn random_form_reproducible_and_scales_exactly() {
        let a = random_form(4, 3, 1.0, 42).unwrap();
        let b = random_form(4, 3, 1.0, 42).unwrap();
        assert_eq!(a, b);
        let t = random_form(4, 3, 3.7, 42).unwrap();
        for (x, y) in a.shape_ops().iter().zip(t.shape_ops()) {
            assert_eq!(x * 3.7, *y);
        }
        assert_ne!(a, random_form(4, 3, 1.0, 43).unwrap());
        assert!(random_form(3, 2, 0.0, 1).is_err());
    }

    #[test]
    fn curvature_tensor_constant_curvature() {
        let zero = BilinearForm::zero(3, 2).unwrap();
        let r = formal_curvature_tensor(&zero, 1.0);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(r.get(i, j, i, j), 1.0);
                }
            }
        }
        let flat = formal_curvature_tensor(&zero, 0.0);
        assert!(flat.entries.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn curvature_tensor_symmetries() {
        for seed in 0..20 {
            let f = random_form(4, 3, 1.0, seed).unwrap();
            let r = formal_curvature_tensor(&f, 0.7);
            assert!(r.symmetry_defect() < 1e-10);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let f = random_form(3, 2, 1.0, 5).unwrap();
        let text = f.to_json_string();
        let g = BilinearForm::from_json_str(&text).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn json_reports_field_path() {
        let bad = r#"{"n": 2, "m": 1, "shape_ops": [[[1.0, 0.0], [0.0, "x"]]]}"#;
        match BilinearForm::from_json_str(bad) {
            Err(Error::Malformed { path, .. }) => assert_eq!(path, "$.shape_ops[0][1][1]"),
            other => panic!("unexpected {other:?}"),
        }
        let missing = r#"{"n": 2, "shape_ops": []}"#;
        match BilinearForm::from_json_str(missing) {
            Err(Error::Malformed { path, .. }) => assert_eq!(path, "$.m"),
            other => panic!("unexpected {other:?}"),
        }
        let wrong_count = r#"{"n": 2, "m": 2, "shape_ops": [[[1, 0], [0, 1]]]}"#;
        assert!(matches!(
            BilinearForm::from_json_str(wrong_count),
            Err(Error::Malformed { .. })
        ));
    }
}
