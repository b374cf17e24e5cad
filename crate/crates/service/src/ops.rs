use std::io::{BufRead, Write};

use grounded_dialog::dialog::{Affordance, Session, SessionConfig};
use grounded_dialog::learning::{evaluate_agents, plan_phases, run_phase, MetricsRow};
use grounded_dialog::simuser::{split_tasks, Templates};
use grounded_dialog::world::Split;

use crate::error::{Result, ServiceError};
use crate::store::Store;

/// Phases in the training protocol.
pub const PHASES: usize = 3;

/// Holds simulated conversations between snapshot `phase` and the users of
/// that phase and stores their logs. Returns how many succeeded and the
/// total.
pub fn simulate_phase(store: &Store, phase: usize, tasks_per_action: usize, seed: u64) -> Result<(usize, usize)> {
    if phase == 0 || phase > PHASES {
        return Err(ServiceError::BadRequest(format!("phase must be 1..={PHASES}")));
    }
    let templates = Templates::bundled()?;
    let train = store.world().objects_in(Split::Train);
    let plans = plan_phases(store.world(), &templates, &train, PHASES, tasks_per_action, seed)?;
    let agent = store.agent(phase)?;
    let results = run_phase(&agent, &plans[phase - 1], &templates)?;
    let ok = results.iter().filter(|(_, r)| r.success).count();
    for (log, _) in &results {
        store.save_log(phase, log)?;
    }
    Ok((ok, results.len()))
}

/// Evaluates named agents on one split of the task set and records the
/// table as the store's current metrics.
pub fn evaluate(store: &Store, names: &[String], split: Split, per_action: usize, seed: u64) -> Result<Vec<MetricsRow>> {
    let templates = Templates::bundled()?;
    let train = store.world().objects_in(Split::Train);
    let test = store.world().objects_in(Split::Test);
    let splits = split_tasks(store.world(), &templates, &train, &test, per_action, seed)?;
    let (tasks, objects) = match split {
        Split::Test => (splits.test, test),
        Split::Train => (splits.train, train),
    };
    let agents = names
        .iter()
        .map(|n| Ok((n.clone(), store.named_agent(n)?)))
        .collect::<Result<Vec<_>>>()?;
    let (rows, _) = evaluate_agents(&agents, &tasks, &objects, &templates)?;
    store.save_metrics(&rows)?;
    Ok(rows)
}

fn hint(a: &Affordance) -> String {
    match a {
        Affordance::YesNo => "[yes/no]".into(),
        Affordance::Menu { options, allow_none } => {
            let mut s = format!("[text or one of: {}", options.join(", "));
            if *allow_none {
                s.push_str(", none");
            }
            s.push(']');
            s
        }
        Affordance::FreeText | Affordance::Closed => String::new(),
    }
}

fn say(text: &str, a: &Affordance) -> String {
    let h = hint(a);
    if h.is_empty() {
        text.to_string()
    } else {
        format!("{text} {h}")
    }
}

/// Terminal conversation with snapshot `version`. Returns the conversation
/// log once the dialog ends or input runs out.
pub fn repl(store: &Store, version: usize, input: impl BufRead, mut out: impl Write) -> Result<Option<grounded_dialog::dialog::ConversationLog>> {
    let io = |e| ServiceError::io(std::path::Path::new("<terminal>"), e);
    let objects = store.session_objects();
    let mut session = Session::new("repl", store.agent(version)?, SessionConfig::new(objects.clone(), objects));
    let first = session.current();
    writeln!(out, "agent> {}", say(&first.text, &first.affordance)).map_err(io)?;
    for line in input.lines() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let m = session.step_text(&line)?;
        if let Some(p) = &m.preamble {
            writeln!(out, "agent> {p}").map_err(io)?;
        }
        writeln!(out, "agent> {}", say(&m.text, &m.affordance)).map_err(io)?;
        if m.finished {
            return Ok(Some(session.into_log()));
        }
    }
    Ok(None)
}
