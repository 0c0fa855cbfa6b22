//! Classify a tour of catalog operators and print the sampled verdicts.
//!
//! ```sh
//! cargo run --example classify_operators
//! ```

use maxrank::catalog::make_catalog_operator;
use maxrank::classify::{classify, SampleConfig};
use std::collections::BTreeMap;

fn params(kv: &[(&str, i64)]) -> BTreeMap<String, i64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn main() -> maxrank::Result<()> {
    let cfg = SampleConfig::default();
    println!(
        "{:<28} {:>4} {:>8} {:>8} {:>8} {:>9} {:>9}",
        "operator", "rank", "const", "elliptic", "system", "maximal", "canceling"
    );
    for (name, ps) in [
        ("divergence", params(&[("n", 2), ("rows", 1)])),
        ("divergence", params(&[("n", 3), ("rows", 2)])),
        ("div_k", params(&[("n", 2), ("k", 2)])),
        ("gradient", params(&[("n", 2)])),
        ("laplacian", params(&[("n", 3)])),
        ("bilaplacian", params(&[("n", 2)])),
        ("cauchy_riemann", params(&[])),
        ("sym_gradient", params(&[("n", 3)])),
        ("deviatoric", params(&[("n", 2)])),
        ("deviatoric", params(&[("n", 3)])),
        ("ext_derivative", params(&[("n", 3), ("l", 1)])),
        ("codifferential", params(&[("n", 3), ("l", 1)])),
        ("laplace_beltrami", params(&[("n", 4), ("l", 2)])),
        ("adjoint_of:sym_gradient", params(&[("n", 2)])),
    ] {
        let entry = make_catalog_operator(name, &ps)?;
        let c = classify(&entry.spec, &cfg)?;
        println!(
            "{:<28} {:>4} {:>8} {:>8} {:>8} {:>9} {:>9}",
            entry.label(),
            c.rank_min,
            c.is_constant_rank,
            c.is_elliptic,
            c.is_elliptic_system,
            c.is_maximal_rank,
            c.is_canceling
        );
        let mismatches = entry.expected.mismatches(&c);
        if !mismatches.is_empty() {
            println!("    !! unexpected: {mismatches:?}");
        }
    }
    println!("\n(verdicts are sampled on {} unit directions)", cfg.quasi_samples + cfg.random_samples);
    Ok(())
}
