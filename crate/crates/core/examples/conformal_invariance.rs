//! The k = n integrand (||Phi||^2 - lam ||R_perp||)^(n/2) dM does not change
//! under dilations or inversions of the ambient space.
//!
//! cargo run --release --example conformal_invariance

use curvlab::immersion::{clifford_torus, conformal_invariance_check, product_torus, ConformalMap};

fn main() -> curvlab::Result<()> {
    let maps = [
        ConformalMap::Dilation { t: 3.0 },
        ConformalMap::Inversion { center: vec![0.4, 0.3, 0.2, 1.2], radius: 1.0 },
    ];
    let torus = clifford_torus();
    for map in &maps {
        let c = conformal_invariance_check(&torus, 0.5, map, None)?;
        println!("Clifford torus, {map:?}: {:.9} -> {:.9} (rel {:.1e})", c.before.value, c.after.value, c.rel_diff);
    }
    let t3 = product_torus(3)?;
    let inv = ConformalMap::Inversion { center: vec![0.5, 0.2, 0.3, 0.4, 0.1, 1.6], radius: 1.5 };
    let c = conformal_invariance_check(&t3, 0.0, &inv, Some(&[16, 16, 16]))?;
    println!("T^3, inversion: {:.9} -> {:.9} (rel {:.1e})", c.before.value, c.after.value, c.rel_diff);
    println!("min deficit after inversion {:.4} (before {:.4})", c.after.min_deficit, c.before.min_deficit);
    Ok(())
}
