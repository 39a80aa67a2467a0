//! The per-step weight update the auditor uses: mass `mu` poured into the
//! lowest entries of a row, none rising above `t * mu / c`. Before step `t`
//! a row holds `(t - 1) * mu` in total.
//!
//! cargo run -p partial-correction --example water_filling

use partial_correction::auditor::water_fill;

fn main() -> partial_correction::Result<()> {
    let cases: [(&[f64], u64, f64); 4] = [
        (&[0.0, 0.0, 0.0, 0.0], 1, 1.0),
        (&[0.5, 0.0, 0.25, 0.25], 2, 1.0),
        (&[1.0, 1.0, 0.0, 0.0], 3, 1.0),
        (&[0.0, 1.4, 0.4], 4, 0.6),
    ];
    for (prev, t, mu) in cases {
        let add = water_fill(prev, t, mu, prev.len())?;
        let after: Vec<f64> = prev.iter().zip(&add).map(|(p, a)| p + a).collect();
        println!("t={t} mu={mu} cap={:.3}", t as f64 * mu / prev.len() as f64);
        println!("  before {prev:?}\n  added  {add:?}\n  after  {after:?}");
    }
    Ok(())
}
