//! Pointwise invariants of a random form and of its traceless part.
//!
//! cargo run --example form_invariants

use curvlab::curvature::full_report;
use curvlab::form::random_form;

fn main() -> curvlab::Result<()> {
    let beta = random_form(4, 2, 1.0, 11)?;
    println!("{}", beta.to_json_string());

    for c in [-1.0, 0.0, 1.0] {
        let r = full_report(&beta, c)?;
        println!("c = {c:+}: H^2 = {:.6}, rho = {:.6}, rho_perp = {:.6}", r.h_sq, r.rho(), r.rho_perp);
        for (k, d) in r.partial_deficits.iter().enumerate() {
            println!("  k = {}: rho_k = {:+.6}, deficit(k, 1) = {:.6}", k + 1, r.rho_k[k], d);
        }
    }

    // The deficit only sees the traceless part.
    let inv = beta.first_order_invariants();
    let a = full_report(&beta, 0.0)?;
    let b = full_report(&inv.traceless, 0.0)?;
    println!("DDVV deficit: full {:.12}, traceless {:.12}", a.ddvv_deficit, b.ddvv_deficit);
    Ok(())
}
