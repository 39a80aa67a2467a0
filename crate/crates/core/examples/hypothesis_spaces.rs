//! Every built-in hypothesis space, built from its text spec.
//!
//! cargo run -p partial-correction --example hypothesis_spaces

use partial_correction::{ComponentIndex, Instance, QueryId, SpaceSpec};

fn main() -> partial_correction::Result<()> {
    for text in [
        "grid:M=10,c=4,pool=8",
        "single:c=6",
        "two-point:c=4,eps=0.05",
        "sparse:l=2,c=3,eps=0.25",
        "triplet:n=5,m=4",
    ] {
        let spec: SpaceSpec = text.parse()?;
        let instance = Instance::new(spec.build()?);
        let space = instance.space();
        let q = QueryId(0);
        let target = instance.target();
        println!("{}", space.describe());
        println!(
            "  |H| = {}, |Q| = {}, c = {}, alphabet = {}",
            instance.num_hypotheses(),
            instance.num_queries(),
            instance.components(),
            instance.alphabet_size()
        );
        println!("  target {} on query 0:", space.render_hypothesis(target));
        for j in 0..instance.components() {
            let j = ComponentIndex(j);
            let a = instance.answer(target, q, j)?;
            println!(
                "    {:<12} -> {}",
                space.render_component(q, j),
                space.render_answer(q, j, a)
            );
        }
        if let Some(d) = space.render_display(target, q) {
            println!("    as a whole: {d}");
        }
    }
    Ok(())
}
