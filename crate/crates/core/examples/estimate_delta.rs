//! Upper bounds on delta_k(n, m) by multi-start minimization of
//! deficit / psi_0^(2/n), and the epsilon they imply.
//!
//! cargo run --release --example estimate_delta

use curvlab::delta::{estimate_delta, EstimateSettings, QuotientSpec};
use curvlab::sphere::build_sphere_rule;

fn main() -> curvlab::Result<()> {
    let rule = build_sphere_rule(2, 256, None, 0)?;
    let settings = EstimateSettings { starts: 8, budget: 800, seed: 1, ..Default::default() };
    for (n, k, lam) in [(3, 1, 1.0), (3, 2, 1.0), (3, 3, 0.5), (4, 3, 1.0), (4, 4, 1.0)] {
        let spec = QuotientSpec::new(k, lam, 0);
        let est = estimate_delta(n, 2, &spec, &settings, &rule)?;
        println!(
            "n = {n}, k = {k}, lam = {lam}: delta <= {:.6e}, epsilon <= {:.6e}{}{}",
            est.delta_upper,
            est.epsilon_upper,
            if est.positivity_guaranteed { "" } else { " (no positivity guarantee)" },
            if est.zero_flagged { " [indistinguishable from 0]" } else { "" },
        );
    }
    Ok(())
}
