//! Seeded identity suites: Newton tensor traces and recursion, Lovelock
//! relations, curvature contractions and the conformal-change relations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reilly_lab::conformal::conformal_suite;
use reilly_lab::tensorlab::algebraic_suite;

fn main() -> reilly_lab::Result<()> {
    let seed: u64 = std::env::var("REILLY_LAB_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(42);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = algebraic_suite(&mut rng, 100)?;
    rows.extend(conformal_suite(&mut rng, 100)?);
    for r in &rows {
        println!(
            "{:<36} {:<10} {:>4} {:>12.3e} <= {:.0e} {}",
            r.identity,
            r.kind,
            r.instances,
            r.max_residual,
            r.tolerance,
            if r.passed() { "ok" } else { "FAIL" }
        );
    }
    Ok(())
}
