//! Pointwise curvature invariants of a form: formal Ricci tensor, ordered
//! Ricci eigenvalues, partial scalar curvatures, normal scalar curvature and
//! the deficits `c + H^2 - lam * rho_perp - rho_{c,k}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::form::BilinearForm;

/// `Ric_c(beta) = c (n-1) I + sum_a tr(A_a) A_a - sum_a A_a^2`.
pub fn ricci_tensor(beta: &BilinearForm, c: f64) -> DMatrix<f64> {
    let n = beta.n();
    let mut ric = DMatrix::identity(n, n) * (c * (n as f64 - 1.0));
    for a in beta.shape_ops() {
        ric += a * a.trace() - a * a;
    }
    (&ric + ric.transpose()) * 0.5
}

/// Ascending eigenvalues of `T_c = Ric_c / (n - 1)`.
pub fn ricci_eigenvalues(beta: &BilinearForm, c: f64) -> Result<Vec<f64>> {
    if !c.is_finite() {
        return Err(Error::NonFinite(format!("c = {c}")));
    }
    let n = beta.n();
    let t = ricci_tensor(beta, c) / (n as f64 - 1.0);
    if t.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("Ricci tensor".into()));
    }
    let mut eig: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
    if eig.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("Ricci eigenvalues".into()));
    }
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 1 || k > n {
        return Err(Error::Domain(format!("k = {k} must lie in 1..={n}")));
    }
    Ok(())
}

fn check_lam(lam: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::Domain(format!("lam = {lam} must lie in [0, 1]")));
    }
    Ok(())
}

/// `rho_{c,k}`: mean of the `k` smallest eigenvalues of `T_c`.
pub fn partial_scalar(beta: &BilinearForm, c: f64, k: usize) -> Result<f64> {
    check_k(beta.n(), k)?;
    let eig = ricci_eigenvalues(beta, c)?;
    Ok(eig[..k].iter().sum::<f64>() / k as f64)
}

/// Sums of squares behind the normal curvature, accumulated in double-double.
struct NormalSums {
    /// `||traceless(beta)||^2 = sum_a ||B_a||^2`.
    traceless_sq: Dd,
    /// `||R_perp|| = (sum_{a,b} ||[B_a, B_b]||^2)^{1/2}`.
    r_perp: Dd,
}

fn normal_sums(ops: &[DMatrix<f64>]) -> NormalSums {
    let n = ops.first().map_or(0, |a| a.nrows());
    let mut traceless_sq = Dd::ZERO;
    for b in ops {
        for x in b.iter() {
            traceless_sq = traceless_sq + Dd::prod(*x, *x);
        }
    }
    let mut pairs = Dd::ZERO;
    for (a, ba) in ops.iter().enumerate() {
        for bb in &ops[a + 1..] {
            for i in 0..n {
                for j in 0..n {
                    let mut entry = Dd::ZERO;
                    for k in 0..n {
                        entry = entry + Dd::prod(ba[(i, k)], bb[(k, j)])
                            - Dd::prod(bb[(i, k)], ba[(k, j)]);
                    }
                    pairs = pairs + entry.square();
                }
            }
        }
    }
    // Ordered pairs: (a, b) and (b, a) contribute equally.
    let p = pairs.scale(2.0);
    NormalSums { traceless_sq, r_perp: p.sqrt() }
}

/// `||R_perp(beta)||`, computed from the traceless shape operators.
pub fn normal_curvature_norm(beta: &BilinearForm) -> f64 {
    let inv = beta.first_order_invariants();
    normal_sums(inv.traceless.shape_ops()).r_perp.to_f64()
}

/// `rho_perp = ||R_perp|| / (n (n - 1))`.
pub fn normal_scalar(beta: &BilinearForm) -> f64 {
    let n = beta.n() as f64;
    normal_curvature_norm(beta) / (n * (n - 1.0))
}

/// Same quantity computed from the full shape operators `A_a`; the
/// umbilical part drops out of every commutator.
pub fn normal_scalar_from_full(beta: &BilinearForm) -> f64 {
    let n = beta.n() as f64;
    normal_sums(beta.shape_ops()).r_perp.to_f64() / (n * (n - 1.0))
}

/// `phi^{k,lam}(beta) = c + H^2 - lam rho_perp - rho_{c,k}`.
///
/// The value does not depend on `c` and is evaluated at `c = 0` as
/// `(||B||^2 - lam ||R_perp||) / (n(n-1)) + (rho_{0,n} - rho_{0,k})`,
/// with the first term accumulated in double-double so the small deficits of
/// near-equality forms keep full relative accuracy.
pub fn deficit(beta: &BilinearForm, c: f64, k: usize, lam: f64) -> Result<f64> {
    let n = beta.n();
    check_k(n, k)?;
    check_lam(lam)?;
    if !c.is_finite() {
        return Err(Error::NonFinite(format!("c = {c}")));
    }
    let nn = n as f64 * (n as f64 - 1.0);
    let inv = beta.first_order_invariants();
    let sums = normal_sums(inv.traceless.shape_ops());
    let ddvv = (sums.traceless_sq - sums.r_perp.scale(lam)).to_f64() / nn;
    if k == n {
        return Ok(ddvv);
    }
    let eig = ricci_eigenvalues(beta, 0.0)?;
    let mean = eig.iter().sum::<f64>() / n as f64;
    let head = eig[..k].iter().sum::<f64>() / k as f64;
    Ok(ddvv + (mean - head))
}

/// Every pointwise invariant of one form at curvature parameter `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub c: f64,
    pub n: usize,
    pub m: usize,
    pub h_sq: f64,
    pub norm_sq: f64,
    pub traceless_norm_sq: f64,
    /// Ascending eigenvalues `lambda_{c,1} <= ... <= lambda_{c,n}`.
    pub eigenvalues: Vec<f64>,
    /// `rho_{c,k}` for `k = 1..=n`.
    pub rho_k: Vec<f64>,
    pub rho_perp: f64,
    /// `deficit(n, 1)`, the DDVV slack.
    pub ddvv_deficit: f64,
    /// `deficit(k, 1)` for `k = 1..=n`.
    pub partial_deficits: Vec<f64>,
}

impl CurvatureReport {
    /// Derived value `c + H^2 - lam rho_perp - rho_{c,k}` from the stored fields.
    pub fn deficit(&self, k: usize, lam: f64) -> f64 {
        self.c + self.h_sq - lam * self.rho_perp - self.rho_k[k - 1]
    }

    pub fn rho(&self) -> f64 {
        self.rho_k[self.n - 1]
    }
}

pub fn full_report(beta: &BilinearForm, c: f64) -> Result<CurvatureReport> {
    let n = beta.n();
    let inv = beta.first_order_invariants();
    let eigenvalues = ricci_eigenvalues(beta, c)?;
    let mut rho_k = Vec::with_capacity(n);
    let mut acc = 0.0;
    for (i, l) in eigenvalues.iter().enumerate() {
        acc += l;
        rho_k.push(acc / (i + 1) as f64);
    }
    let partial_deficits = (1..=n)
        .map(|k| deficit(beta, c, k, 1.0))
        .collect::<Result<Vec<_>>>()?;
    Ok(CurvatureReport {
        c,
        n,
        m: beta.m(),
        h_sq: inv.h_sq,
        norm_sq: inv.norm_sq,
        traceless_norm_sq: inv.traceless.norm_sq(),
        eigenvalues,
        rho_k,
        rho_perp: normal_scalar(beta),
        ddvv_deficit: partial_deficits[n - 1],
        partial_deficits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::form::{example1_form, random_form, wintgen_canonical_form};

    #[test]
    fn zero_form() {
        let z = BilinearForm::zero(4, 2).unwrap();
        assert_eq!(ricci_tensor(&z, 2.0), DMatrix::identity(4, 4) * 6.0);
        assert_eq!(ricci_eigenvalues(&z, 2.0).unwrap(), vec![2.0; 4]);
        let r = full_report(&z, 1.5).unwrap();
        assert!(r.rho_k.iter().all(|&x| x == 1.5));
        assert_eq!(r.rho_perp, 0.0);
        assert_eq!(r.h_sq, 0.0);
    }

    #[test]
    fn umbilical_ricci() {
        let (n, c) = (4usize, 0.3);
        let l = [1.0, -2.0, 0.5];
        let f = BilinearForm::umbilical(n, &l).unwrap();
        let h2: f64 = l.iter().map(|x| x * x).sum();
        let expect = DMatrix::identity(n, n) * ((n as f64 - 1.0) * (c + h2));
        assert!((ricci_tensor(&f, c) - expect).amax() < 1e-12);
        for k in 1..=n {
            assert!((partial_scalar(&f, c, k).unwrap() - (c + h2)).abs() < 1e-12);
            for &lam in &[0.0, 0.5, 1.0] {
                assert!(deficit(&f, c, k, lam).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wintgen_ricci_diagonal() {
        let (n, c, mu) = (5usize, 0.7, 1.3);
        let f = wintgen_canonical_form(n, 2, mu, &[0.0, 0.0]).unwrap();
        let ric = ricci_tensor(&f, c);
        let d = (n as f64 - 1.0) * c - 2.0 * mu * mu;
        assert!((ric[(0, 0)] - d).abs() < 1e-12);
        assert!((ric[(1, 1)] - d).abs() < 1e-12);
        assert!((ric[(2, 2)] - (n as f64 - 1.0) * c).abs() < 1e-12);
    }

    #[test]
    fn wintgen_ricci_with_mean_curvature() {
        let (n, c, mu) = (4usize, -0.4, 0.9);
        let l = [0.6, -0.3, 1.1];
        let f = wintgen_canonical_form(n, 3, mu, &l).unwrap();
        let h2: f64 = l.iter().map(|x| x * x).sum();
        let base = (n as f64 - 1.0) * (c + h2);
        let ric = ricci_tensor(&f, c);
        let nm2 = n as f64 - 2.0;
        assert!((ric[(0, 0)] - (base + mu * (nm2 * l[0] - 2.0 * mu))).abs() < 1e-12);
        assert!((ric[(1, 1)] - (base - mu * (nm2 * l[0] + 2.0 * mu))).abs() < 1e-12);
        assert!((ric[(3, 3)] - base).abs() < 1e-12);
    }

    #[test]
    fn eigenvalue_shift() {
        let f = random_form(5, 3, 1.0, 3).unwrap();
        let e0 = ricci_eigenvalues(&f, 0.0).unwrap();
        let e1 = ricci_eigenvalues(&f, 1.0).unwrap();
        for (a, b) in e0.iter().zip(&e1) {
            assert!((a + 1.0 - b).abs() < 1e-12);
        }
    }

    /// Roots of the characteristic cubic of a symmetric 3x3 matrix by the
    /// trigonometric formula.
    fn cubic_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
        let q = a.trace() / 3.0;
        let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
        let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b = (a - DMatrix::identity(3, 3) * q) / p;
        let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let mut v = vec![e1, 3.0 * q - e1 - e3, e3];
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn eigenvalues_match_cubic_oracle() {
        for seed in 0..200 {
            let f = random_form(3, 2, 1.0, seed).unwrap();
            let t = ricci_tensor(&f, 0.4) / 2.0;
            let oracle = cubic_eigenvalues(&t);
            let got = ricci_eigenvalues(&f, 0.4).unwrap();
            for (a, b) in got.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-8, "seed {seed}: {got:?} vs {oracle:?}");
            }
        }
    }

    #[test]
    fn normal_scalar_single_operator_is_zero() {
        let f = random_form(4, 1, 1.0, 1).unwrap();
        assert_eq!(normal_scalar(&f), 0.0);
    }

    #[test]
    fn normal_scalar_wintgen() {
        for &(n, m) in &[(3usize, 2usize), (4, 3), (5, 2)] {
            for &mu in &[0.1, 1.0, 10.0] {
                let f = wintgen_canonical_form(n, m, mu, &vec![0.3; m]).unwrap();
                let expect = 4.0 * mu * mu / (n * (n - 1)) as f64;
                assert!((normal_scalar(&f) - expect).abs() <= 1e-12 * expect);
            }
        }
    }

    #[test]
    fn normal_scalar_brute_force() {
        for seed in 0..50 {
            let f = random_form(3, 3, 1.0, seed).unwrap();
            let ops = f.shape_ops();
            let mut total = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    for i in 0..3 {
                        for j in 0..3 {
                            let mut e = 0.0;
                            for k in 0..3 {
                                e += ops[a][(i, k)] * ops[b][(k, j)] - ops[b][(i, k)] * ops[a][(k, j)];
                            }
                            total += e * e;
                        }
                    }
                }
            }
            let brute = total.sqrt() / 6.0;
            assert!((normal_scalar(&f) - brute).abs() < 1e-12 * (1.0 + brute));
            assert!((normal_scalar_from_full(&f) - normal_scalar(&f)).abs() < 1e-10);
        }
    }

    #[test]
    fn deficit_matches_direct_formula() {
        for seed in 0..100 {
            let f = random_form(4, 2, 1.0, seed).unwrap();
            let c = 0.9;
            let h2 = f.first_order_invariants().h_sq;
            let rp = normal_scalar(&f);
            for k in 1..=4 {
                let direct = c + h2 - 0.5 * rp - partial_scalar(&f, c, k).unwrap();
                assert!((deficit(&f, c, k, 0.5).unwrap() - direct).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn wintgen_deficits() {
        let mu = 1.0;
        let n = 4;
        let f = wintgen_canonical_form(n, 2, mu, &[0.0, 0.0]).unwrap();
        assert!(deficit(&f, 0.0, n, 1.0).unwrap().abs() < 1e-14);
        let gap = partial_scalar(&f, 0.0, n).unwrap() - partial_scalar(&f, 0.0, n - 1).unwrap();
        let d = deficit(&f, 0.0, n - 1, 1.0).unwrap();
        assert!(gap > 0.0);
        assert!((d - gap).abs() < 1e-12);
    }

    #[test]
    fn example1_deficit_closed_form() {
        for n in 3..=7usize {
            let nf = n as f64;
            let dn = 4.0 * (3.0 * nf - 8.0) / (nf * nf * (nf - 1.0));
            for &s in &[1e-1, 1e-2, 1e-3, 1e-4] {
                let f = example1_form(n, 2, 1.0, s).unwrap();
                let d = deficit(&f, 0.0, n, 1.0).unwrap();
                let expect = dn * s * s;
                assert!(((d - expect) / expect).abs() < 1e-8, "n={n} s={s}: {d} vs {expect}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        let f = random_form(3, 2, 1.0, 0).unwrap();
        assert!(partial_scalar(&f, 0.0, 0).is_err());
        assert!(partial_scalar(&f, 0.0, 4).is_err());
        assert!(deficit(&f, 0.0, 2, 1.5).is_err());
        assert!(deficit(&f, 0.0, 2, -0.1).is_err());
        assert!(ricci_eigenvalues(&f, f64::NAN).is_err());
    }

    #[test]
    fn report_trace_identity() {
        let f = random_form(5, 3, 1.0, 11).unwrap();
        let r = full_report(&f, 0.25).unwrap();
        let tr = ricci_tensor(&f, 0.25).trace();
        assert!((r.rho() - tr / 20.0).abs() < 1e-10);
        assert!(r.rho_k.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        assert!((r.deficit(5, 1.0) - r.ddvv_deficit).abs() < 1e-10);
    }
}
