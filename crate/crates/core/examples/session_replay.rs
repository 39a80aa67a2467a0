//! A scripted person acting as the expert in an authoritative session, then
//! an export and a replay reproducing the same trajectory.
//!
//! cargo run -p partial-correction --example session_replay

use partial_correction::session::{
    FeedbackAction, FeedbackRequest, Session, SessionConfig, SessionMode,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = SessionConfig::new("grid:M=10,c=3,pool=16".parse()?);
    config.mode = SessionMode::Authoritative;
    config.seed = 4;
    let mut session = Session::new("demo", config)?;

    // The person believes every point above 0.4 is positive.
    while !session.terminated() {
        let view = session.view();
        let query = view.query.as_ref().expect("pending query");
        let points = query.payload["points"].as_array().expect("grid payload");
        let wrong = query.components.iter().find(|c| {
            let x = points[c.index].as_f64().unwrap();
            c.displayed != u8::from(x > 0.4)
        });
        let action = match wrong {
            Some(c) => FeedbackAction::Correct {
                component: c.index,
                value: 1 - c.displayed,
            },
            None => FeedbackAction::Accept,
        };
        let next = session.submit(FeedbackRequest {
            step: view.step,
            action,
        })?;
        if !matches!(action, FeedbackAction::Accept) {
            println!(
                "step {:>3}: corrected, |V| = {}",
                view.step, next.version_space_size
            );
        }
    }
    let view = session.view();
    println!(
        "terminated at step {} with {}",
        view.step,
        view.final_hypothesis.unwrap()
    );

    let export = session.export();
    let replayed = Session::replay_export("again", &export)?;
    assert_eq!(replayed.history(), session.history());
    println!(
        "replayed {} records to the same trajectory",
        replayed.transcript().len()
    );
    Ok(())
}
