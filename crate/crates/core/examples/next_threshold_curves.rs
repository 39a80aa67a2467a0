//! Expected next threshold after one correction, in closed form and by
//! simulation, for experts that fix the smallest or largest wrong point.
//!
//! cargo run -p partial-correction --example next_threshold_curves

use partial_correction::analytics::{
    expected_next_threshold, monte_carlo_next_threshold, reduction_ratio, ValuePolicy,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> partial_correction::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    println!("policy    c   v_t   E[v_t+1]  simulated (se)     ratio");
    for policy in ValuePolicy::ALL {
        for c in [1, 4, 8] {
            for v in [0.2, 0.5, 0.9] {
                let exact = expected_next_threshold(policy, v, c)?;
                let (mean, se) = monte_carlo_next_threshold(policy, v, c, 20_000, &mut rng)?;
                println!(
                    "{policy:<8} {c:>2}  {v:.1}   {exact:.4}    {mean:.4} ({se:.4})   {:.3}",
                    reduction_ratio(policy, v, c)?
                );
            }
        }
    }
    Ok(())
}
