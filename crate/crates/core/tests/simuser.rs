use grounded_dialog::agent::Agent;
use grounded_dialog::dialog::{DialogAct, PolicyConfig, SessionConfig, UserInput};
use grounded_dialog::simuser::{run_episode, split_tasks, validate_log, SimUser, Templates};
use grounded_dialog::world::Split;

fn setup() -> (Agent, Templates) {
    (Agent::fixture(7).unwrap(), Templates::bundled().unwrap())
}

#[test]
fn episodes_are_deterministic() {
    let (agent, t) = setup();
    let train = agent.world.objects_in(Split::Train);
    let test = agent.world.objects_in(Split::Test);
    let splits = split_tasks(&agent.world, &t, &train, &test, 10, 3).unwrap();
    assert_eq!(splits, split_tasks(&agent.world, &t, &train, &test, 10, 3).unwrap());
    for task in splits.test.iter().take(4) {
        let cfg = SessionConfig::new(test.clone(), test.clone());
        let a = run_episode(agent.clone(), task, &t, cfg.clone()).unwrap();
        let b = run_episode(agent.clone(), task, &t, cfg).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn test_split_closes_truthfully_within_budget() {
    let (agent, t) = setup();
    let train = agent.world.objects_in(Split::Train);
    let test = agent.world.objects_in(Split::Test);
    let splits = split_tasks(&agent.world, &t, &train, &test, 40, 7).unwrap();
    assert_eq!(splits.test.len(), 24);
    let max_turns = PolicyConfig::default().max_turns;
    for task in &splits.test {
        let cfg = SessionConfig::new(test.clone(), test.clone());
        let (log, r) = run_episode(agent.clone(), task, &t, cfg).unwrap();
        assert!(r.success, "{} failed: {:?}", task.id, log.outcome);
        assert!(r.turns <= max_turns);
        assert!(validate_log(&log, task, &agent.world, &t).is_empty(), "{}", task.id);

        let denials = log
            .turns
            .windows(2)
            .filter(|w| {
                matches!(w[0].act, Some(DialogAct::Confirmation { .. })) && w[1].input == Some(UserInput::No)
            })
            .count();
        let relevant = task.action().roles().len() + 1;
        assert!(
            r.confirmations <= 1 + relevant + denials,
            "{}: {} confirmations, {denials} denials",
            task.id,
            r.confirmations
        );
    }
}

#[test]
fn answers_follow_gold() {
    let (agent, t) = setup();
    let test = agent.world.objects_in(Split::Test);
    let splits = split_tasks(&agent.world, &t, &test, &test, 10, 1).unwrap();
    let task = splits.test.iter().find(|x| x.action().name() == "deliver").unwrap().clone();
    let mut user = SimUser::new(&agent.world, &t, task.clone());

    let syn = DialogAct::SynonymQuery {
        word: "rattling".into(),
        candidate: "empty".into(),
    };
    assert_eq!(user.answer(&syn, &test), Some(UserInput::No));
    let prop = DialogAct::PropertyQuery { word: "rattling".into() };
    assert_eq!(user.answer(&prop, &test), Some(UserInput::Yes));

    let gold = task.frame.clone();
    let yes = DialogAct::Confirmation { frame: gold.clone() };
    assert_eq!(user.answer(&yes, &test), Some(UserInput::Yes));
    let mut wrong = gold;
    wrong.recipient = Some(if wrong.recipient.as_deref() == Some("bob") { "alice" } else { "bob" }.into());
    assert_eq!(user.answer(&DialogAct::Confirmation { frame: wrong }, &test), Some(UserInput::No));

    // a second ask for the same role is answered from the menu
    let ask = DialogAct::RoleClarification {
        role: grounded_dialog::frame::Role::Recipient,
    };
    assert!(matches!(user.answer(&ask, &test), Some(UserInput::Text(_))));
    assert_eq!(
        user.answer(&ask, &test),
        Some(UserInput::Choice(task.frame.recipient.clone().unwrap()))
    );

    for o in &test {
        let want = agent.world.object(o).unwrap().latent_attributes["contents"] == "rattly";
        assert_eq!(user.word_applies("rattling", o), Some(want));
    }
    assert_eq!(user.word_applies("xyzzy", &test[0]), None);
    assert_eq!(user.answer(&DialogAct::DialogFailed, &test), None);
}
