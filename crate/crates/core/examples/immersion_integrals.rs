//! Deficit integrals over the built-in submanifolds, set against the
//! Betti-number side of the inequality.
//!
//! cargo run --release --example immersion_integrals

use curvlab::delta::{estimate_delta, EstimateSettings, QuotientSpec};
use curvlab::immersion::{builtin, deficit_integral, theorem_consistency_report};
use curvlab::sphere::build_sphere_rule;

fn main() -> curvlab::Result<()> {
    for name in ["sphere", "sphere3", "clifford", "t3", "ellipsoid"] {
        let f = builtin(name)?;
        let n = f.n();
        let r = deficit_integral(&f, 0.0, n, 0.5, None)?;
        println!(
            "{name:>10}: n = {n}, m = {}, integral {:.8} +- {:.1e}, min deficit {:.3e}, volume {:.6}",
            f.m(),
            r.value,
            r.error_estimate,
            r.min_deficit,
            r.volume
        );
    }

    let torus = builtin("clifford")?;
    let rule = build_sphere_rule(2, 256, None, 0)?;
    let settings = EstimateSettings { starts: 4, budget: 400, seed: 0, ..Default::default() };
    let est = estimate_delta(2, 2, &QuotientSpec::new(2, 0.5, 0), &settings, &rule)?;
    let rep = theorem_consistency_report(&torus, 0.0, &est, None)?;
    println!("{}", serde_json::to_string_pretty(&rep).expect("report serializes"));
    Ok(())
}
