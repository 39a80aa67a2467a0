//! An oracle session over rooted trees: each query is a subtree on four
//! leaves and each component one of its triplets.
//!
//! cargo run -p partial-correction --example triplet_session

use partial_correction::session::{
    FeedbackAction, FeedbackRequest, Session, SessionConfig, SessionMode,
};
use partial_correction::QueryId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = SessionConfig::new("triplet:n=5,m=4".parse()?);
    config.mode = SessionMode::Oracle {
        target: Some("((a,b),((c,d),e));".into()),
    };
    let mut session = Session::new("trees", config)?;
    while !session.terminated() {
        let view = session.view();
        let query = view.query.as_ref().unwrap();
        let truth = session.instance().truth(QueryId(query.id)).to_vec();
        let wrong = query
            .components
            .iter()
            .find(|c| c.displayed != truth[c.index]);
        if let Some(c) = wrong {
            println!(
                "step {:>3} shows {}  {} is wrong, should be {}",
                view.step,
                query.display.as_deref().unwrap_or("?"),
                c.displayed_label,
                c.options[truth[c.index] as usize].label
            );
        }
        let action = wrong.map_or(FeedbackAction::Accept, |c| FeedbackAction::Correct {
            component: c.index,
            value: truth[c.index],
        });
        session.submit(FeedbackRequest {
            step: view.step,
            action,
        })?;
    }
    let view = session.view();
    println!(
        "verified {} after {} steps (err {:.3})",
        view.final_hypothesis.unwrap(),
        view.step,
        view.err.unwrap()
    );
    Ok(())
}
