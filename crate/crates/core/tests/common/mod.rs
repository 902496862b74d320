//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;

/// Ricci tensor by contracting `R_ijkl = c(d_ik d_jl - d_il d_jk) + sum_a (A_ik A_jl - A_il A_jk)`
/// over the first and third slots.
pub fn ricci_by_contraction(ops: &[DMatrix<f64>], c: f64) -> DMatrix<f64> {
    let n = ops[0].nrows();
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    DMatrix::from_fn(n, n, |j, l| {
        let mut s = 0.0;
        for i in 0..n {
            s += c * (d(i, i) * d(j, l) - d(i, l) * d(j, i));
            for a in ops {
                s += a[(i, i)] * a[(j, l)] - a[(i, l)] * a[(j, i)];
            }
        }
        s
    })
}

pub fn mean_curvature_sq(ops: &[DMatrix<f64>]) -> f64 {
    let n = ops[0].nrows() as f64;
    ops.iter().map(|a| (a.trace() / n).powi(2)).sum()
}

pub fn norm_sq(ops: &[DMatrix<f64>]) -> f64 {
    ops.iter().map(|a| a.iter().map(|x| x * x).sum::<f64>()).sum()
}

/// `rho_n` from the Gauss equation: `c + (n^2 H^2 - ||beta||^2) / (n(n-1))`.
pub fn scalar_curvature(ops: &[DMatrix<f64>], c: f64) -> f64 {
    let n = ops[0].nrows() as f64;
    c + (n * n * mean_curvature_sq(ops) - norm_sq(ops)) / (n * (n - 1.0))
}

/// `||R_perp|| / (n(n-1))` with every ordered commutator formed entry by entry.
pub fn normal_scalar_bruteforce(ops: &[DMatrix<f64>]) -> f64 {
    let n = ops[0].nrows();
    let mut total = 0.0;
    for a in ops {
        for b in ops {
            for i in 0..n {
                for j in 0..n {
                    let mut e = 0.0;
                    for k in 0..n {
                        e += a[(i, k)] * b[(k, j)] - b[(i, k)] * a[(k, j)];
                    }
                    total += e * e;
                }
            }
        }
    }
    total.sqrt() / (n * (n - 1)) as f64
}

/// Ascending eigenvalues of `Ric / (n - 1)` from the contraction above.
pub fn normalized_ricci_eigenvalues(ops: &[DMatrix<f64>], c: f64) -> Vec<f64> {
    let n = ops[0].nrows();
    let t = ricci_by_contraction(ops, c) / (n as f64 - 1.0);
    let mut e: Vec<f64> = t.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// `Gamma(k / 2)` for a positive integer `k`.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k >= 1);
    let (mut g, mut x) = if k % 2 == 0 { (1.0, 1.0) } else { (std::f64::consts::PI.sqrt(), 0.5) };
    while x < k as f64 / 2.0 - 1e-9 {
        g *= x;
        x += 1.0;
    }
    g
}

/// `mu^2 ∫_{S^1} |u|^2 |u_1 + u_2|^{n-2} ds = mu^2 2^{(n-2)/2} ∫_0^{2pi} |cos t|^{n-2} dt`.
pub fn example1_i_circle(n: usize, mu: f64) -> f64 {
    let p = (n - 2) as f64;
    let pi = std::f64::consts::PI;
    mu * mu * 2f64.powf(p / 2.0) * 2.0 * pi.sqrt() * gamma_half(n - 1) / gamma_half(n)
}

/// `4(3n - 8) / (n^2 (n - 1))`.
pub fn example1_d(n: usize) -> f64 {
    let n = n as f64;
    4.0 * (3.0 * n - 8.0) / (n * n * (n - 1.0))
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
