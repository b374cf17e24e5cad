//! Minimal s-expression reader for the lexicon and corpus files.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexpr {
    Atom(String),
    List(Vec<Sexpr>),
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(a) => f.write_str(a),
            Sexpr::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

pub fn parse(text: &str) -> Result<Sexpr> {
    let tokens = lex(text);
    let mut pos = 0;
    let expr = parse_at(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(Error::LfSyntax(format!("trailing input in `{text}`")));
    }
    Ok(expr)
}

fn lex(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_at(tokens: &[String], pos: &mut usize) -> Result<Sexpr> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| Error::LfSyntax("unexpected end of input".into()))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(|s| s.as_str()) {
                    None => return Err(Error::LfSyntax("unbalanced `(`".into())),
                    Some(")") => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => items.push(parse_at(tokens, pos)?),
                }
            }
            if items.is_empty() {
                return Err(Error::LfSyntax("empty list".into()));
            }
            Ok(Sexpr::List(items))
        }
        ")" => Err(Error::LfSyntax("unexpected `)`".into())),
        atom => Ok(Sexpr::Atom(atom.to_string())),
    }
}
