//! The degenerating family with deficit D(n) sigma^2 and psi_1 = I sigma^(n-2):
//! the quotient decays like sigma^(4/n), so the constant with k = n and
//! lam = 1 cannot be positive.
//!
//! cargo run --example example1_sweep

use curvlab::delta::example1_sweep;
use curvlab::sphere::build_sphere_rule;
use curvlab::strata::example1_i_constant;

fn main() -> curvlab::Result<()> {
    let rule = build_sphere_rule(2, 4096, None, 0)?;
    let sigmas = [1e-1, 1e-2, 1e-3, 1e-4];
    for n in 3..=6 {
        let table = example1_sweep(n, 2, 1.0, &sigmas, &rule)?;
        let i = example1_i_constant(n, 2, 1.0, &rule)?;
        let d = 4.0 * (3.0 * n as f64 - 8.0) / ((n * n * (n - 1)) as f64);
        println!("n = {n}: D(n) = {d:.6}, I = {i:.6}, quotient uses psi_{}", table.quotient_p);
        table.write_csv(std::io::stdout())?;
        println!("log-log slope {:.6} (expected {:.6})\n", table.loglog_slope(), 4.0 / n as f64);
    }
    Ok(())
}
