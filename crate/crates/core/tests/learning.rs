use std::collections::BTreeSet;

use grounded_dialog::agent::{Agent, LearningEvent, TRAINING_EPOCHS};
use grounded_dialog::dialog::{ConversationLog, EpisodeMetrics, SessionConfig};
use grounded_dialog::learning::{
    aggregate_labels, evaluate_agents, grounds_to, harvest_pairs, induce_latent_parses, metrics_csv, plan_phases,
    retrain_phase, run_phase, seed_examples, train_phases, AgentSnapshot, Denotation,
};
use grounded_dialog::semparse::{train_on_pairs, ParserWeights};
use grounded_dialog::simuser::{run_episode, sample_tasks, Templates};
use grounded_dialog::frame::Action;
use grounded_dialog::world::Split;

fn setup() -> (Agent, Templates) {
    (Agent::fixture(7).unwrap(), Templates::bundled().unwrap())
}

fn empty_log(id: &str, events: Vec<LearningEvent>) -> ConversationLog {
    ConversationLog {
        session_id: id.into(),
        patient_scope: Vec::new(),
        local_objects: Vec::new(),
        turns: Vec::new(),
        events,
        outcome: None,
        failed: false,
        metrics: EpisodeMetrics::default(),
    }
}

fn label(p: &str, o: &str, l: i8) -> LearningEvent {
    LearningEvent::Label {
        predicate: p.into(),
        object: o.into(),
        label: l,
    }
}

#[test]
fn harvest_uses_confirmed_outcomes_only() {
    let (agent, t) = setup();
    let test = agent.world.objects_in(Split::Test);
    let task = &sample_tasks(&agent.world, &t, Action::Relocate, &test, 1, 7, "h").unwrap()[0];
    let (log, r) = run_episode(agent.clone(), task, &t, SessionConfig::new(test.clone(), test.clone())).unwrap();
    assert!(r.success);
    let pairs = harvest_pairs(&log);
    let command = t_command(&log);
    assert_eq!(pairs[0].tokens, command);
    assert_eq!(
        pairs[0].target,
        Denotation::Frame {
            frame: task.frame.clone()
        }
    );
    assert!(pairs.iter().all(|p| p.parse.is_none() && p.scope == test));
    for p in &pairs[1..] {
        match &p.target {
            Denotation::Role { role, value } => assert_eq!(task.frame.get(*role), Some(value.as_str())),
            Denotation::Frame { frame } => assert_eq!(frame, &task.frame),
        }
    }
    let distinct: BTreeSet<_> = pairs.iter().map(|p| (&p.tokens, &p.target)).collect();
    assert_eq!(distinct.len(), pairs.len());

    let mut failed = log.clone();
    failed.outcome = None;
    failed.failed = true;
    assert!(harvest_pairs(&failed).is_empty());
}

fn t_command(log: &ConversationLog) -> Vec<String> {
    match log.turns.iter().find_map(|t| t.reading.clone()).unwrap() {
        grounded_dialog::dialog::Reading::Command { tokens } => tokens,
        other => panic!("first reading is {other:?}"),
    }
}

#[test]
fn induced_parses_reground_to_their_targets() {
    let (agent, t) = setup();
    let train = agent.world.objects_in(Split::Train);
    let plans = plan_phases(&agent.world, &t, &train, 3, 4, 7).unwrap();
    let k = agent.parser.config().beam_width;
    let (mut harvested, mut resolved) = (0, 0);
    for (log, _) in run_phase(&agent, &plans[0], &t).unwrap() {
        for pair in harvest_pairs(&log) {
            harvested += 1;
            let induced = induce_latent_parses(&agent, &pair, k);
            resolved += usize::from(!induced.is_empty());
            for p in induced {
                assert!(grounds_to(&agent, p.parse.as_ref().unwrap(), &p.target, &p.scope));
                assert_eq!((p.tokens.clone(), p.target.clone()), (pair.tokens.clone(), pair.target.clone()));
            }
        }
    }
    assert!(harvested > 0 && resolved > 0, "{resolved}/{harvested}");
}

#[test]
fn label_votes() {
    let logs = [
        empty_log("a", vec![label("p", "o1", 1), label("p", "o2", 1)]),
        empty_log("b", vec![label("p", "o1", 1), label("p", "o2", -1)]),
        empty_log("c", vec![label("p", "o1", -1), label("q", "o3", -1)]),
    ];
    let votes = aggregate_labels(&logs);
    assert_eq!(votes.get(&("p".into(), "o1".into())), Some(&1));
    assert_eq!(votes.get(&("p".into(), "o2".into())), None);
    assert_eq!(votes.get(&("q".into(), "o3".into())), Some(&-1));
    assert_eq!(votes.len(), 2);
}

#[test]
fn zero_logs_is_a_seed_retrain() {
    let (agent, _) = setup();
    let prev = AgentSnapshot::of_agent(&agent, 1);
    let next = retrain_phase(&prev, &agent, &[]).unwrap();
    let mut p = agent.parser.clone();
    p.set_weights(ParserWeights::prior());
    let want = train_on_pairs(&p, &seed_examples().unwrap(), TRAINING_EPOCHS);
    assert_eq!(next.weights, want);
    assert_eq!(next.version, 2);
    assert!(next.pairs.is_empty());
    assert_eq!(next.lexicon, prev.lexicon);
    assert_eq!(next.concepts, prev.concepts);
}

#[test]
fn phases_partition_the_train_objects() {
    let (agent, t) = setup();
    let train = agent.world.objects_in(Split::Train);
    let plans = plan_phases(&agent.world, &t, &train, 3, 2, 7).unwrap();
    assert_eq!(plans.len(), 3);
    let mut all = BTreeSet::new();
    for plan in &plans {
        assert_eq!(plan.objects.len(), 8);
        assert_eq!(plan.tasks.len(), 6);
        for task in &plan.tasks {
            if let Some(o) = &task.frame.patient {
                assert!(plan.objects.contains(o));
            }
        }
        all.extend(plan.objects.iter().cloned());
    }
    assert_eq!(all, train.into_iter().collect());
    assert!(plan_phases(&agent.world, &t, &[], 3, 2, 7).is_err());
}

#[test]
fn short_training_run() {
    let (agent, t) = setup();
    let train = agent.world.objects_in(Split::Train);
    let test = agent.world.objects_in(Split::Test);
    let plans = plan_phases(&agent.world, &t, &train, 3, 3, 11).unwrap();
    let run = train_phases(&agent, &plans, &t).unwrap();
    let again = train_phases(&agent, &plans, &t).unwrap();
    let hashes: Vec<String> = run.snapshots.iter().map(AgentSnapshot::hash).collect();
    assert_eq!(hashes, again.snapshots.iter().map(AgentSnapshot::hash).collect::<Vec<_>>());
    assert_eq!(hashes.len(), 4);
    assert!(hashes.iter().all(|h| h.len() == 64));
    assert_eq!(
        run.snapshots.iter().map(|s| s.version).collect::<Vec<_>>(),
        [1, 2, 3, 4]
    );
    // pairs accumulate and provenance lists each consumed conversation
    for w in run.snapshots.windows(2) {
        assert!(w[1].pairs.starts_with(&w[0].pairs));
    }
    assert_eq!(run.snapshots[3].provenance.len(), 27);

    let dir = std::env::temp_dir().join(format!("gd-snap-{}", std::process::id()));
    let path = dir.join("a4.json");
    run.snapshots[3].save(&path).unwrap();
    let loaded = AgentSnapshot::load(&path).unwrap();
    assert_eq!(loaded.hash(), hashes[3]);
    std::fs::remove_dir_all(&dir).unwrap();

    // the retrained parser still fits the seed corpus
    let last = run.snapshots[3].to_agent(&agent).unwrap();
    let seed = seed_examples().unwrap();
    let correct = seed
        .iter()
        .filter(|e| last.parser.parse_beam(&e.tokens, 1).first().is_some_and(|p| p.lf == e.target))
        .count();
    assert!(correct * 10 >= seed.len() * 9, "{correct}/{}", seed.len());

    let mut tasks = Vec::new();
    for a in Action::ALL {
        tasks.extend(sample_tasks(&agent.world, &t, a, &test, 2, 7, "test").unwrap());
    }
    let agents = vec![("A1".to_string(), agent.clone()), ("A4".to_string(), last)];
    let (rows, eps) = evaluate_agents(&agents, &tasks, &test, &t).unwrap();
    let (rows2, eps2) = evaluate_agents(&agents, &tasks, &test, &t).unwrap();
    assert_eq!(metrics_csv(&rows), metrics_csv(&rows2));
    assert_eq!(eps, eps2);
    assert_eq!(rows.len(), 6);
    assert_eq!(metrics_csv(&rows).lines().count(), 7);
}
