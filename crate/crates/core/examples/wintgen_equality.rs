//! The Wintgen canonical forms attain equality in rho <= c + H^2 - rho_perp,
//! umbilical forms make every deficit vanish.
//!
//! cargo run --example wintgen_equality

use curvlab::curvature::{deficit, full_report};
use curvlab::form::wintgen_canonical_form;
use curvlab::BilinearForm;

fn main() -> curvlab::Result<()> {
    println!("{:>3} {:>3} {:>6} {:>14} {:>14} {:>14}", "n", "m", "mu", "rho_perp", "4mu^2/n(n-1)", "deficit(n,1)");
    for (n, m) in [(3, 2), (4, 3), (5, 2)] {
        for mu in [0.1, 1.0, 10.0] {
            let beta = wintgen_canonical_form(n, m, mu, &vec![0.5; m])?;
            let r = full_report(&beta, 0.0)?;
            let expect = 4.0 * mu * mu / (n * (n - 1)) as f64;
            println!("{n:>3} {m:>3} {mu:>6} {:>14.6e} {expect:>14.6e} {:>14.3e}", r.rho_perp, r.ddvv_deficit);
        }
    }

    let u = BilinearForm::umbilical(4, &[1.0, -2.0, 0.5])?;
    let worst = (1..=4)
        .flat_map(|k| [0.0, 0.5, 1.0].map(|lam| deficit(&u, 0.0, k, lam)))
        .collect::<curvlab::Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    println!("umbilical: max deficit over (k, lam) = {worst:e}");
    Ok(())
}
