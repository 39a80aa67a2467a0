//! The three lower-bound constructions.
//!
//! cargo run --release -p partial-correction --example lower_bounds

use partial_correction::experiments::{
    run_single_query_lower_bound, run_sparse_lower_bound, run_two_point_lower_bound,
};

fn main() -> partial_correction::Result<()> {
    for c in [2, 4, 10, 20] {
        println!(
            "single query, c = {c:>2}: {} rounds to per-component error 1/2",
            run_single_query_lower_bound(c)?
        );
    }
    for (c, eps) in [(4, 0.05), (8, 0.05), (16, 0.05), (8, 0.025)] {
        let r = run_two_point_lower_bound(c, eps, 200, 0)?;
        println!(
            "two-point c = {c:>2}, eps = {eps}: mean {:.1} steps (c/(4 eps) = {:.1}), 5th percentile {}",
            r.mean_steps,
            c as f64 / (4.0 * eps),
            r.p5_steps
        );
    }
    for c in [2, 4] {
        let r = run_sparse_lower_bound(2, c, 0.25, 200, 0)?;
        println!(
            "sparse l = 2, c = {c}: mean {:.1} queries vs c*l/(2 eps) = {:.1}",
            r.mean_queries, r.reference
        );
    }
    Ok(())
}
