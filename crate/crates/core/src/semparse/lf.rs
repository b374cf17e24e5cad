//! Typed lambda-calculus logical forms.
//!
//! Text syntax (used in the lexicon and corpus files):
//!
//! ```text
//! (lambda x room (office x))          λx.office(x)
//! (and A B ...)                        conjunction
//! (the P) / (a P)                      definite / indefinite description
//! (f a b)                              curried application ((f a) b)
//! ```
//!
//! Atoms bound by an enclosing `lambda` are variables, all others constants.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::sexpr::{self, Sexpr};
use super::types::SemType;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quant {
    The,
    A,
}

impl Quant {
    pub fn name(self) -> &'static str {
        match self {
            Quant::The => "the",
            Quant::A => "a",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lf {
    Const(String),
    Var(String),
    Lambda {
        var: String,
        ty: SemType,
        body: Box<Lf>,
    },
    App(Box<Lf>, Box<Lf>),
    And(Vec<Lf>),
    Desc(Quant, Box<Lf>),
}

static FRESH: AtomicUsize = AtomicUsize::new(0);

fn fresh_var() -> String {
    format!("_g{}", FRESH.fetch_add(1, Ordering::Relaxed))
}

impl Lf {
    pub fn constant(name: impl Into<String>) -> Lf {
        Lf::Const(name.into())
    }

    pub fn app(f: Lf, arg: Lf) -> Lf {
        Lf::App(Box::new(f), Box::new(arg))
    }

    /// `head(args...)` as a curried application.
    pub fn call(head: &str, args: impl IntoIterator<Item = Lf>) -> Lf {
        args.into_iter()
            .fold(Lf::constant(head), |acc, arg| Lf::app(acc, arg))
    }

    pub fn lambda(var: &str, ty: SemType, body: Lf) -> Lf {
        Lf::Lambda {
            var: var.to_string(),
            ty,
            body: Box::new(body),
        }
    }

    pub fn parse(text: &str) -> Result<Lf> {
        let s = sexpr::parse(text)?;
        let lf = Self::from_sexpr(&s, &mut Vec::new())?;
        Ok(lf.normalize())
    }

    fn from_sexpr(s: &Sexpr, scope: &mut Vec<String>) -> Result<Lf> {
        match s {
            Sexpr::Atom(a) => {
                if scope.iter().any(|v| v == a) {
                    Ok(Lf::Var(a.clone()))
                } else {
                    Ok(Lf::Const(a.clone()))
                }
            }
            Sexpr::List(items) => {
                let head = match &items[0] {
                    Sexpr::Atom(a) => Some(a.as_str()),
                    _ => None,
                };
                match head {
                    Some("lambda") => {
                        let [_, Sexpr::Atom(var), ty, body] = items.as_slice() else {
                            return Err(Error::LfSyntax(format!(
                                "lambda needs (lambda VAR TYPE BODY): `{s}`"
                            )));
                        };
                        let ty = SemType::from_sexpr(ty)?;
                        scope.push(var.clone());
                        let body = Self::from_sexpr(body, scope);
                        scope.pop();
                        Ok(Lf::lambda(var, ty, body?))
                    }
                    Some("and") => {
                        if items.len() < 3 {
                            return Err(Error::LfSyntax(format!("`and` needs two operands: `{s}`")));
                        }
                        let parts = items[1..]
                            .iter()
                            .map(|x| Self::from_sexpr(x, scope))
                            .collect::<Result<Vec<_>>>()?;
                        Ok(Lf::And(parts))
                    }
                    Some(q @ ("the" | "a")) if items.len() == 2 => {
                        let quant = if q == "the" { Quant::The } else { Quant::A };
                        Ok(Lf::Desc(quant, Box::new(Self::from_sexpr(&items[1], scope)?)))
                    }
                    _ => {
                        if items.len() < 2 {
                            return Err(Error::LfSyntax(format!("bare list `{s}`")));
                        }
                        let mut acc = Self::from_sexpr(&items[0], scope)?;
                        for arg in &items[1..] {
                            acc = Lf::app(acc, Self::from_sexpr(arg, scope)?);
                        }
                        Ok(acc)
                    }
                }
            }
        }
    }

    pub fn to_sexpr(&self) -> String {
        match self {
            Lf::Const(c) | Lf::Var(c) => c.clone(),
            Lf::Lambda { var, ty, body } => {
                format!("(lambda {var} {} {})", ty.to_sexpr(), body.to_sexpr())
            }
            Lf::App(..) => {
                let (head, args) = self.spine();
                let mut out = format!("({}", head.to_sexpr());
                for a in args {
                    out.push(' ');
                    out.push_str(&a.to_sexpr());
                }
                out.push(')');
                out
            }
            Lf::And(parts) => {
                let inner: Vec<String> = parts.iter().map(|p| p.to_sexpr()).collect();
                format!("(and {})", inner.join(" "))
            }
            Lf::Desc(q, body) => format!("({} {})", q.name(), body.to_sexpr()),
        }
    }

    /// Head and arguments of an application spine; non-applications return
    /// themselves with no arguments.
    pub fn spine(&self) -> (&Lf, Vec<&Lf>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Lf::App(f, a) = cur {
            args.push(a.as_ref());
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    /// Beta-normal form with flattened conjunctions and canonical variable
    /// names, so structurally equal meanings compare equal.
    pub fn normalize(&self) -> Lf {
        canonicalize(&beta(self))
    }

    /// Applies `self` to `arg` and normalizes.
    pub fn apply_to(&self, arg: &Lf) -> Lf {
        Lf::app(self.clone(), arg.clone()).normalize()
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// All constants mentioned anywhere in the form.
    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |lf| {
            if let Lf::Const(c) = lf {
                out.insert(c.clone());
            }
        });
        out
    }

    pub fn visit(&self, f: &mut impl FnMut(&Lf)) {
        f(self);
        match self {
            Lf::Const(_) | Lf::Var(_) => {}
            Lf::Lambda { body, .. } => body.visit(f),
            Lf::App(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Lf::And(parts) => parts.iter().for_each(|p| p.visit(f)),
            Lf::Desc(_, body) => body.visit(f),
        }
    }

    /// Replaces every occurrence of constant `from` with `to`.
    pub fn rename_constant(&self, from: &str, to: &str) -> Lf {
        match self {
            Lf::Const(c) if c == from => Lf::Const(to.to_string()),
            Lf::Const(_) | Lf::Var(_) => self.clone(),
            Lf::Lambda { var, ty, body } => Lf::lambda(var, ty.clone(), body.rename_constant(from, to)),
            Lf::App(a, b) => Lf::app(a.rename_constant(from, to), b.rename_constant(from, to)),
            Lf::And(parts) => Lf::And(parts.iter().map(|p| p.rename_constant(from, to)).collect()),
            Lf::Desc(q, body) => Lf::Desc(*q, Box::new(body.rename_constant(from, to))),
        }
    }

    /// Infers the type under `sig` (constant → type).
    pub fn type_of(&self, sig: &dyn Fn(&str) -> Option<SemType>) -> Result<SemType> {
        type_of(self, sig, &mut Vec::new())
    }
}

fn collect_free(lf: &Lf, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
    match lf {
        Lf::Var(v) => {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        }
        Lf::Const(_) => {}
        Lf::Lambda { var, body, .. } => {
            bound.push(var.clone());
            collect_free(body, bound, out);
            bound.pop();
        }
        Lf::App(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Lf::And(parts) => parts.iter().for_each(|p| collect_free(p, bound, out)),
        Lf::Desc(_, body) => collect_free(body, bound, out),
    }
}

fn subst(body: &Lf, var: &str, val: &Lf, val_free: &BTreeSet<String>) -> Lf {
    match body {
        Lf::Var(v) if v == var => val.clone(),
        Lf::Var(_) | Lf::Const(_) => body.clone(),
        Lf::Lambda { var: v, .. } if v == var => body.clone(),
        Lf::Lambda { var: v, ty, body: b } => {
            if val_free.contains(v) {
                let fresh = fresh_var();
                let renamed = subst(b, v, &Lf::Var(fresh.clone()), &BTreeSet::from([fresh.clone()]));
                Lf::lambda(&fresh, ty.clone(), subst(&renamed, var, val, val_free))
            } else {
                Lf::lambda(v, ty.clone(), subst(b, var, val, val_free))
            }
        }
        Lf::App(a, b) => Lf::app(subst(a, var, val, val_free), subst(b, var, val, val_free)),
        Lf::And(parts) => Lf::And(parts.iter().map(|p| subst(p, var, val, val_free)).collect()),
        Lf::Desc(q, b) => Lf::Desc(*q, Box::new(subst(b, var, val, val_free))),
    }
}

fn beta(lf: &Lf) -> Lf {
    match lf {
        Lf::Const(_) | Lf::Var(_) => lf.clone(),
        Lf::Lambda { var, ty, body } => Lf::lambda(var, ty.clone(), beta(body)),
        Lf::App(f, a) => {
            let f = beta(f);
            let a = beta(a);
            match f {
                Lf::Lambda { var, body, .. } => {
                    let free = a.free_vars();
                    beta(&subst(&body, &var, &a, &free))
                }
                f => Lf::app(f, a),
            }
        }
        Lf::And(parts) => {
            let mut flat = Vec::new();
            for p in parts {
                match beta(p) {
                    Lf::And(inner) => flat.extend(inner),
                    other => flat.push(other),
                }
            }
            Lf::And(flat)
        }
        Lf::Desc(q, body) => Lf::Desc(*q, Box::new(beta(body))),
    }
}

const ENTITY_NAMES: [&str; 4] = ["x", "y", "z", "w"];
const FN_NAMES: [&str; 3] = ["P", "Q", "R"];

fn canonicalize(lf: &Lf) -> Lf {
    fn go(lf: &Lf, map: &mut Vec<(String, String)>, depth: (usize, usize)) -> Lf {
        match lf {
            Lf::Var(v) => match map.iter().rev().find(|(from, _)| from == v) {
                Some((_, to)) => Lf::Var(to.clone()),
                None => lf.clone(),
            },
            Lf::Const(_) => lf.clone(),
            Lf::Lambda { var, ty, body } => {
                let (ent, fun) = depth;
                let (name, next) = if ty.is_entity() {
                    let n = ENTITY_NAMES
                        .get(ent)
                        .map(|s| s.to_string())
                        .unwrap_or_else(|| format!("v{ent}"));
                    (n, (ent + 1, fun))
                } else {
                    let n = FN_NAMES
                        .get(fun)
                        .map(|s| s.to_string())
                        .unwrap_or_else(|| format!("F{fun}"));
                    (n, (ent, fun + 1))
                };
                map.push((var.clone(), name.clone()));
                let body = go(body, map, next);
                map.pop();
                Lf::lambda(&name, ty.clone(), body)
            }
            Lf::App(a, b) => Lf::app(go(a, map, depth), go(b, map, depth)),
            Lf::And(parts) => Lf::And(parts.iter().map(|p| go(p, map, depth)).collect()),
            Lf::Desc(q, b) => Lf::Desc(*q, Box::new(go(b, map, depth))),
        }
    }
    go(lf, &mut Vec::new(), (0, 0))
}

fn type_of(lf: &Lf, sig: &dyn Fn(&str) -> Option<SemType>, env: &mut Vec<(String, SemType)>) -> Result<SemType> {
    match lf {
        Lf::Const(c) => sig(c).ok_or_else(|| Error::Type(format!("unknown constant `{c}`"))),
        Lf::Var(v) => env
            .iter()
            .rev()
            .find(|(n, _)| n == v)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| Error::Type(format!("free variable `{v}`"))),
        Lf::Lambda { var, ty, body } => {
            env.push((var.clone(), ty.clone()));
            let body_ty = type_of(body, sig, env);
            env.pop();
            Ok(SemType::func(ty.clone(), body_ty?))
        }
        Lf::App(f, a) => {
            let fty = type_of(f, sig, env)?;
            let aty = type_of(a, sig, env)?;
            match fty {
                SemType::Fn(arg, res) if *arg == aty => Ok(*res),
                SemType::Fn(arg, _) => Err(Error::Type(format!(
                    "`{}` expects {arg}, got {aty} from `{}`",
                    f.to_sexpr(),
                    a.to_sexpr()
                ))),
                other => Err(Error::Type(format!(
                    "`{}` of type {other} is not a function",
                    f.to_sexpr()
                ))),
            }
        }
        Lf::And(parts) => {
            for p in parts {
                let t = type_of(p, sig, env)?;
                if t != SemType::Truth {
                    return Err(Error::Type(format!("conjunct `{}` has type {t}", p.to_sexpr())));
                }
            }
            Ok(SemType::Truth)
        }
        Lf::Desc(q, body) => match type_of(body, sig, env)? {
            SemType::Fn(arg, res) if arg.is_entity() && *res == SemType::Truth => Ok(*arg),
            other => Err(Error::Type(format!(
                "`{}` needs an entity predicate, got {other}",
                q.name()
            ))),
        },
    }
}

impl fmt::Display for Lf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lf::Const(c) | Lf::Var(c) => f.write_str(c),
            Lf::Lambda { var, body, .. } => write!(f, "λ{var}.{body}"),
            Lf::App(..) => {
                let (head, args) = self.spine();
                match head {
                    Lf::Const(_) | Lf::Var(_) => write!(f, "{head}(")?,
                    _ => write!(f, "({head})(")?,
                }
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Lf::And(parts) => {
                f.write_str("(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ∧ ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
            Lf::Desc(q, body) => write!(f, "{}({body})", q.name()),
        }
    }
}

impl Serialize for Lf {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_sexpr())
    }
}

impl<'de> Deserialize<'de> for Lf {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Lf::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Constant → type table used for type checking.
#[derive(Debug, Clone, Default)]
pub struct Signature {
    known: BTreeMap<String, SemType>,
}

impl Signature {
    pub fn insert(&mut self, name: impl Into<String>, ty: SemType) {
        self.known.insert(name.into(), ty);
    }

    pub fn get(&self, name: &str) -> Option<&SemType> {
        self.known.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.known.contains_key(name)
    }

    /// Type of a constant; anything not declared is taken to be a perceptual
    /// concept predicate over objects.
    pub fn type_of(&self, name: &str) -> SemType {
        self.known
            .get(name)
            .cloned()
            .unwrap_or_else(|| SemType::pred(SemType::Object))
    }

    pub fn typer(&self) -> impl Fn(&str) -> Option<SemType> + '_ {
        move |c| Some(self.type_of(c))
    }
}
