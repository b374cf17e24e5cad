#![allow(dead_code)]

use std::collections::BTreeMap;

use grounded_dialog::concepts::{predict, select_query_object, train_concept, ConceptModel};
use grounded_dialog::frame::{Action, TaskFrame};
use grounded_dialog::semparse::{Lf, SemType};
use grounded_dialog::world::{standard_fixture, FeatureStore, Split, WorldModel, ROOM_TYPES};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const CONCEPTS: [&str; 3] = ["red", "can", "heavy"];

pub type Table = BTreeMap<(String, String), f64>;

pub fn fixture() -> (WorldModel, Vec<String>) {
    let (w, _) = standard_fixture(7).unwrap();
    let scope = w.objects_in(Split::Test);
    (w, scope)
}

pub fn random_table(w: &WorldModel, rng: &mut ChaCha8Rng) -> Table {
    let mut t = Table::new();
    for p in CONCEPTS {
        for o in w.objects() {
            // some exact zeros so hard filtering is exercised too
            let c = if rng.random_bool(0.15) { 0.0 } else { rng.random_range(0.0..1.0) };
            t.insert((p.to_string(), o.id.clone()), c);
        }
    }
    t
}

pub fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs[rng.random_range(0..xs.len())]
}

pub fn quant(rng: &mut ChaCha8Rng) -> &'static str {
    if rng.random_bool(0.5) {
        "the"
    } else {
        "a"
    }
}

pub fn room_expr(rng: &mut ChaCha8Rng, depth: usize, var: &mut usize) -> String {
    if rng.random_bool(0.3) {
        return pick(rng, &["r1", "r2", "r3", "r4", "r5"]).to_string();
    }
    *var += 1;
    let x = format!("x{var}");
    let mut conds = Vec::new();
    if rng.random_bool(0.7) {
        conds.push(format!("({} {x})", pick(rng, &ROOM_TYPES)));
    }
    if rng.random_bool(0.3) {
        conds.push(format!("(possesses {} {x})", pick(rng, &["bob", "alice"])));
    }
    if depth > 0 && rng.random_bool(0.4) {
        let inner = room_expr(rng, depth - 1, var);
        conds.push(format!("(adjacent {x} {inner})"));
    }
    if conds.is_empty() {
        conds.push(format!("({} {x})", pick(rng, &ROOM_TYPES)));
    }
    format!("({} (lambda {x} room {}))", quant(rng), conj(conds))
}

pub fn person_expr(rng: &mut ChaCha8Rng, var: &mut usize) -> String {
    if rng.random_bool(0.6) {
        return pick(rng, &["bob", "alice"]).to_string();
    }
    *var += 1;
    let x = format!("x{var}");
    let room = room_expr(rng, 0, var);
    format!("({} (lambda {x} person (possesses {x} {room})))", quant(rng))
}

pub fn object_expr(rng: &mut ChaCha8Rng, var: &mut usize) -> String {
    *var += 1;
    let x = format!("x{var}");
    let mut conds: Vec<String> = CONCEPTS
        .iter()
        .filter(|_| rng.random_bool(0.5))
        .map(|p| format!("({p} {x})"))
        .collect();
    if conds.is_empty() {
        conds.push(format!("(item {x})"));
    }
    format!("({} (lambda {x} object {}))", quant(rng), conj(conds))
}

pub fn conj(conds: Vec<String>) -> String {
    if conds.len() == 1 {
        conds.into_iter().next().unwrap()
    } else {
        format!("(and {})", conds.join(" "))
    }
}

pub fn random_command(rng: &mut ChaCha8Rng) -> String {
    let mut var = 0;
    match rng.random_range(0..3) {
        0 => format!("(walk {})", room_expr(rng, 2, &mut var)),
        1 => {
            let o = object_expr(rng, &mut var);
            let p = person_expr(rng, &mut var);
            format!("(deliver {o} {p})")
        }
        _ => {
            let o = object_expr(rng, &mut var);
            let s = room_expr(rng, 1, &mut var);
            let g = room_expr(rng, 1, &mut var);
            format!("(relocate {o} {s} {g})")
        }
    }
}

/// Independent evaluator: substitutes constants for variables and scores
/// every assignment explicitly.
pub struct Oracle<'a> {
    pub world: &'a WorldModel,
    pub table: &'a Table,
    pub objects: &'a [String],
}

impl Oracle<'_> {
    fn constants(&self, ty: &SemType) -> Vec<String> {
        match ty {
            SemType::Room => self.world.rooms().iter().map(|r| r.id.clone()).collect(),
            SemType::Person => self.world.people().iter().map(|p| p.id.clone()).collect(),
            SemType::Object => self.objects.to_vec(),
            _ => panic!("not an entity type"),
        }
    }

    fn type_of_arg(&self, lf: &Lf) -> SemType {
        match lf {
            Lf::Const(c) if self.world.room(c).is_some() => SemType::Room,
            Lf::Const(c) if self.world.person(c).is_some() => SemType::Person,
            Lf::Const(_) => SemType::Object,
            Lf::Desc(_, l) => match l.as_ref() {
                Lf::Lambda { ty, .. } => ty.clone(),
                _ => panic!("bad description"),
            },
            _ => panic!("bad argument {lf}"),
        }
    }

    /// Weight with which entity expression `lf` denotes `c`.
    fn denotes(&self, lf: &Lf, c: &str) -> f64 {
        match lf {
            Lf::Const(k) => f64::from(u8::from(k == c)),
            Lf::Desc(_, l) => match l.as_ref() {
                Lf::Lambda { var, body, .. } => self.truth(&substitute(body, var, c)),
                _ => panic!("bad description"),
            },
            _ => panic!("bad entity {lf}"),
        }
    }

    fn truth(&self, lf: &Lf) -> f64 {
        match lf {
            Lf::And(parts) => parts.iter().map(|p| self.truth(p)).product(),
            Lf::App(..) => {
                let (head, args) = lf.spine();
                let Lf::Const(pred) = head else { panic!() };
                // all assignments of the argument expressions
                let domains: Vec<Vec<String>> = args.iter().map(|a| self.constants(&self.type_of_arg(a))).collect();
                let mut best = 0.0f64;
                for tuple in cartesian(&domains) {
                    let mut w = self.predicate(pred, &tuple);
                    for (a, c) in args.iter().zip(&tuple) {
                        w *= self.denotes(a, c);
                    }
                    best = best.max(w);
                }
                best
            }
            _ => panic!("bad truth form {lf}"),
        }
    }

    fn predicate(&self, pred: &str, args: &[String]) -> f64 {
        let w = self.world;
        let b = |x: bool| f64::from(u8::from(x));
        match (pred, args) {
            ("adjacent", [a, c]) => b(w.adjacent(a, c)),
            ("possesses", [p, r]) => b(w.possesses(p, r)),
            ("item", [_]) => 1.0,
            (t, [r]) if ROOM_TYPES.contains(&t) => b(w.room_has_type(r, t)),
            (p, [o]) => self.table[&(p.to_string(), o.clone())],
            _ => panic!("unknown predicate {pred}"),
        }
    }

    pub fn ground(&self, lf: &Lf) -> Vec<(TaskFrame, f64)> {
        let (head, args) = lf.spine();
        let Lf::Const(a) = head else { panic!() };
        let action = Action::from_name(a).unwrap();
        let domains: Vec<Vec<String>> = args.iter().map(|a| self.constants(&self.type_of_arg(a))).collect();
        let mut raw = Vec::new();
        for tuple in cartesian(&domains) {
            let w: f64 = args.iter().zip(&tuple).map(|(a, c)| self.denotes(a, c)).product();
            if w > 0.0 {
                let mut f = TaskFrame {
                    action: Some(a.clone()),
                    ..Default::default()
                };
                for (r, c) in action.roles().iter().zip(&tuple) {
                    f.set(*r, Some(c.clone()));
                }
                raw.push((f, w));
            }
        }
        let z: f64 = raw.iter().map(|(_, w)| w).sum();
        raw.into_iter().map(|(f, w)| (f, w / z)).collect()
    }
}

pub fn substitute(lf: &Lf, var: &str, c: &str) -> Lf {
    match lf {
        Lf::Var(v) if v == var => Lf::Const(c.to_string()),
        Lf::Var(_) | Lf::Const(_) => lf.clone(),
        Lf::Lambda { var: v, ty, body } if v != var => Lf::lambda(v, ty.clone(), substitute(body, var, c)),
        Lf::Lambda { .. } => lf.clone(),
        Lf::App(f, a) => Lf::app(substitute(f, var, c), substitute(a, var, c)),
        Lf::And(ps) => Lf::And(ps.iter().map(|p| substitute(p, var, c)).collect()),
        Lf::Desc(q, l) => Lf::Desc(*q, Box::new(substitute(l, var, c))),
    }
}

pub fn cartesian(domains: &[Vec<String>]) -> Vec<Vec<String>> {
    domains.iter().fold(vec![Vec::new()], |acc, d| {
        acc.into_iter()
            .flat_map(|prefix| {
                d.iter().map(move |c| {
                    let mut p = prefix.clone();
                    p.push(c.clone());
                    p
                })
            })
            .collect()
    })
}

pub fn as_map(entries: &[(TaskFrame, f64)]) -> BTreeMap<String, f64> {
    entries.iter().map(|(f, p)| (format!("{f:?}"), *p)).collect()
}


pub const PLANTED: [(&str, &str, &str); 5] = [
    ("rattling", "contents", "rattly"),
    ("red", "color", "red"),
    ("heavy", "weight", "heavy"),
    ("empty", "contents", "empty"),
    ("can", "shape", "can"),
];

pub fn gold(w: &WorldModel, attr: &str, value: &str, o: &str) -> i8 {
    if w.object(o).unwrap().latent_attributes[attr] == value {
        1
    } else {
        -1
    }
}

pub fn labeled(w: &WorldModel, name: &str, attr: &str, value: &str, objects: &[String]) -> ConceptModel {
    let mut m = ConceptModel::new(name);
    for o in objects {
        m.labels.insert(o.clone(), gold(w, attr, value, o));
    }
    m
}

pub fn accuracy(w: &WorldModel, f: &FeatureStore, m: &ConceptModel, attr: &str, value: &str, objects: &[String]) -> f64 {
    let hits = objects
        .iter()
        .filter(|o| predict(m, f, o).unwrap().decision == gold(w, attr, value, o))
        .count();
    hits as f64 / objects.len() as f64
}

/// Labels needed before held-out accuracy reaches 0.9, labelling `order`
/// front to back, or picking with `select_query_object` when `order` is
/// `None`. The first two labels (one of each class) are shared.
pub fn labels_to_target(
    w: &WorldModel,
    f: &FeatureStore,
    (name, attr, value): (&str, &str, &str),
    start: &[String],
    pool: &[String],
    order: Option<&[String]>,
    test: &[String],
) -> usize {
    let mut m = labeled(w, name, attr, value, start);
    let mut queue = order.map(|o| o.iter());
    loop {
        m = train_concept(&m, f).unwrap();
        if accuracy(w, f, &m, attr, value, test) >= 0.9 {
            return m.labels.len();
        }
        let next = match queue.as_mut() {
            Some(q) => q.find(|o| !m.labels.contains_key(*o)).cloned(),
            None => select_query_object(&m, f, pool).unwrap(),
        };
        let Some(o) = next else {
            return m.labels.len() + 1;
        };
        m.labels.insert(o.clone(), gold(w, attr, value, &o));
    }
}

