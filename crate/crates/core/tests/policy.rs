use std::collections::BTreeMap;

use grounded_dialog::dialog::{init_belief, next_act, BeliefState, DialogAct, PolicyConfig, Verbalizer};
use grounded_dialog::frame::{Role, TaskFrame, EMPTY};
use grounded_dialog::world::{standard_fixture, Split, WorldModel};
use proptest::prelude::*;

fn world() -> (WorldModel, Vec<String>) {
    let (w, _) = standard_fixture(7).unwrap();
    let scope = w.objects_in(Split::Test);
    (w, scope)
}

/// Puts `top` at probability `p` in `role` and spreads the rest evenly.
fn set(b: &mut BeliefState<f64>, role: Role, top: &str, p: f64) {
    let rb = b.roles.get_mut(&role).unwrap();
    let n = rb.dist.len() as f64 - 1.0;
    for (v, x) in rb.dist.iter_mut() {
        *x = if v == top { p } else { (1.0 - p) / n };
    }
}

fn confirm(b: &mut BeliefState<f64>, role: Role, v: &str) {
    b.confirm(role, v).unwrap();
}

#[test]
fn table_scenarios() {
    let (w, scope) = world();
    let cfg = PolicyConfig::default();
    let say = Verbalizer { world: &w };

    // Nothing known.
    let b: BeliefState<f64> = init_belief(&w, &scope);
    let act = next_act(&b, &cfg);
    assert_eq!(act, DialogAct::AllClarification);
    assert_eq!(say.text(&act, &b.top_frame()), "What should I do?");

    // (walk, ∅, ∅, ∅, r1), action least certain.
    let mut b: BeliefState<f64> = init_belief(&w, &scope);
    set(&mut b, Role::Action, "walk", 0.8);
    confirm(&mut b, Role::Goal, "r1");
    let act = next_act(&b, &cfg);
    let DialogAct::Confirmation { frame } = &act else {
        panic!("expected a confirmation, got {act:?}")
    };
    assert_eq!(frame.action.as_deref(), Some("walk"));
    assert_eq!(frame.filled().len(), 1);
    assert_eq!(say.text(&act, &b.top_frame()), "You want me to go somewhere?");

    // (deliver, ∅, p1, ∅, ∅), patient least certain.
    let mut b: BeliefState<f64> = init_belief(&w, &scope);
    set(&mut b, Role::Action, "deliver", 0.9);
    set(&mut b, Role::Recipient, "bob", 0.8);
    let act = next_act(&b, &cfg);
    assert_eq!(act, DialogAct::RoleClarification { role: Role::Patient });
    assert_eq!(say.text(&act, &b.top_frame()), "What should I deliver to Bob?");

    // (relocate, ∅, ∅, ∅, ∅), source least certain.
    let mut b: BeliefState<f64> = init_belief(&w, &scope);
    set(&mut b, Role::Action, "relocate", 0.9);
    set(&mut b, Role::Source, EMPTY, 0.45);
    let act = next_act(&b, &cfg);
    assert_eq!(act, DialogAct::RoleClarification { role: Role::Source });
    assert_eq!(
        say.text(&act, &b.top_frame()),
        "Where should I move something from on its way somewhere else?"
    );

    // (relocate, o1, ∅, r1, r2), everything clear of the threshold.
    let mut b: BeliefState<f64> = init_belief(&w, &scope);
    let o = scope[0].clone();
    set(&mut b, Role::Action, "relocate", 0.9);
    set(&mut b, Role::Patient, &o, 0.7);
    set(&mut b, Role::Source, "r1", 0.8);
    set(&mut b, Role::Goal, "r2", 0.6);
    let act = next_act(&b, &cfg);
    assert_eq!(
        act,
        DialogAct::Confirmation {
            frame: TaskFrame::relocate(&o, "r1", "r2")
        }
    );
    assert_eq!(
        say.text(&act, &b.top_frame()),
        format!("You want me to move {} from 3.510 to 3.512?", w.display_name(&o))
    );
}

#[test]
fn all_confirmed_completes() {
    let (w, scope) = world();
    let mut b: BeliefState<f64> = init_belief(&w, &scope);
    confirm(&mut b, Role::Action, "walk");
    confirm(&mut b, Role::Goal, "r4");
    assert_eq!(
        next_act(&b, &PolicyConfig::default()),
        DialogAct::TaskComplete {
            frame: TaskFrame::walk("r4")
        }
    );
}

#[test]
fn confirmation_frames_hold_no_empty_values() {
    let (w, scope) = world();
    let mut b: BeliefState<f64> = init_belief(&w, &scope);
    set(&mut b, Role::Action, "walk", 0.9);
    set(&mut b, Role::Goal, "r3", 0.9);
    let act = next_act(&b, &PolicyConfig::default());
    assert!(act.asserted().iter().all(|(_, v)| v != EMPTY));
    assert_eq!(act.asserted().len(), 2);
}

proptest! {
    #[test]
    fn policy_is_deterministic(ps in prop::collection::vec(0.05f64..0.95, 5), tops in prop::collection::vec(0usize..6, 5)) {
        let (w, scope) = world();
        let mut b: BeliefState<f64> = init_belief(&w, &scope);
        let values: BTreeMap<Role, Vec<String>> = b
            .roles
            .iter()
            .map(|(r, rb)| (*r, rb.dist.keys().cloned().collect()))
            .collect();
        for ((r, p), t) in Role::ALL.iter().zip(&ps).zip(&tops) {
            let vs = &values[r];
            set(&mut b, *r, &vs[t % vs.len()], *p);
        }
        let cfg = PolicyConfig::default();
        let first = next_act(&b, &cfg);
        prop_assert_eq!(&first, &next_act(&b.clone(), &cfg));
        if let DialogAct::Confirmation { frame } = &first {
            prop_assert!(frame.filled().iter().all(|(_, v)| *v != EMPTY));
        }
    }
}
