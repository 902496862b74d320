//! psi_p(beta): |det A_u| integrated over the directions u whose shape
//! operator has index strictly between p and n - p.
//!
//! cargo run --example psi_strata

use curvlab::form::random_form;
use curvlab::sphere::{build_sphere_rule, RuleMethod};
use curvlab::strata::{psi_p, INDEX_TOL};

fn main() -> curvlab::Result<()> {
    for (n, m) in [(4, 2), (5, 3), (5, 5)] {
        let beta = random_form(n, m, 1.0, 3)?;
        let rule = build_sphere_rule(m, 20_000, None, 9)?;
        println!("n = {n}, m = {m}: {:?} rule, {} nodes", rule.method, rule.len());
        for p in 0..n.div_ceil(2) {
            let s = psi_p(&beta, p, &rule, INDEX_TOL)?;
            println!("  psi_{p} = {:.6} +- {:.1e}", s.value, s.error_estimate);
        }
        let s = psi_p(&beta, 0, &rule, INDEX_TOL)?;
        let by_index: Vec<String> = s.contributions.iter().map(|c| format!("{c:.4}")).collect();
        println!("  by index: [{}], degenerate nodes: {}", by_index.join(", "), s.near_degenerate);
    }

    // Monte Carlo on S^2 against the product rule.
    let beta = random_form(3, 3, 1.0, 5)?;
    let exact = psi_p(&beta, 0, &build_sphere_rule(3, 40_000, None, 0)?, INDEX_TOL)?;
    let mc = psi_p(&beta, 0, &build_sphere_rule(3, 40_000, Some(RuleMethod::MonteCarlo), 1)?, INDEX_TOL)?;
    println!("S^2: product {:.5}, Monte Carlo {:.5} +- {:.5}", exact.value, mc.value, mc.error_estimate);
    Ok(())
}
