use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::types::SemType;
use crate::error::{Error, Result};

/// CCG syntactic category. `X/Y` takes `Y` to its right, `X\Y` to its left.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Atom(String),
    Fwd(Box<Category>, Box<Category>),
    Bwd(Box<Category>, Box<Category>),
}

impl Category {
    pub fn atom(name: &str) -> Category {
        Category::Atom(name.to_string())
    }

    pub fn parse(text: &str) -> Result<Category> {
        let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        let cat = parse_expr(&chars, &mut pos)?;
        if pos != chars.len() {
            return Err(Error::Lexicon(format!("trailing input in category `{text}`")));
        }
        Ok(cat)
    }

    /// Number of arguments before reaching an atomic result.
    pub fn arity(&self) -> usize {
        match self {
            Category::Atom(_) => 0,
            Category::Fwd(res, _) | Category::Bwd(res, _) => 1 + res.arity(),
        }
    }

    /// Does this category's shape agree with a semantic type?
    pub fn matches_type(&self, ty: &SemType) -> bool {
        match self {
            Category::Atom(a) => match a.as_str() {
                "S" => *ty == SemType::Action,
                "N" => matches!(ty, SemType::Fn(arg, res) if arg.is_entity() && **res == SemType::Truth),
                "NP" => ty.is_entity(),
                pp if pp.starts_with("PP") => ty.is_entity(),
                _ => false,
            },
            Category::Fwd(res, arg) | Category::Bwd(res, arg) => match ty {
                SemType::Fn(a, r) => arg.matches_type(a) && res.matches_type(r),
                _ => false,
            },
        }
    }
}

fn parse_expr(chars: &[char], pos: &mut usize) -> Result<Category> {
    let mut left = parse_primary(chars, pos)?;
    while let Some(&c) = chars.get(*pos) {
        match c {
            '/' | '\\' => {
                *pos += 1;
                let right = parse_primary(chars, pos)?;
                left = if c == '/' {
                    Category::Fwd(Box::new(left), Box::new(right))
                } else {
                    Category::Bwd(Box::new(left), Box::new(right))
                };
            }
            _ => break,
        }
    }
    Ok(left)
}

fn parse_primary(chars: &[char], pos: &mut usize) -> Result<Category> {
    match chars.get(*pos) {
        Some('(') => {
            *pos += 1;
            let inner = parse_expr(chars, pos)?;
            if chars.get(*pos) != Some(&')') {
                return Err(Error::Lexicon("unbalanced parenthesis in category".into()));
            }
            *pos += 1;
            Ok(inner)
        }
        Some(c) if c.is_ascii_alphabetic() => {
            let start = *pos;
            while chars.get(*pos).is_some_and(|c| c.is_ascii_alphanumeric()) {
                *pos += 1;
            }
            Ok(Category::Atom(chars[start..*pos].iter().collect()))
        }
        other => Err(Error::Lexicon(format!("unexpected {other:?} in category"))),
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn part(c: &Category, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match c {
                Category::Atom(a) => f.write_str(a),
                _ => write!(f, "({c})"),
            }
        }
        match self {
            Category::Atom(a) => f.write_str(a),
            Category::Fwd(res, arg) => {
                part(res, f)?;
                f.write_str("/")?;
                part(arg, f)
            }
            Category::Bwd(res, arg) => {
                part(res, f)?;
                f.write_str("\\")?;
                part(arg, f)
            }
        }
    }
}

impl Serialize for Category {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Category {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Category::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slashes_associate_left() {
        let a = Category::parse("S/PPto/NP").unwrap();
        let b = Category::parse("(S/PPto)/NP").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.arity(), 2);
        assert_eq!(b.to_string(), "(S/PPto)/NP");
    }

    #[test]
    fn backward_slash() {
        let c = Category::parse("(NP/N)\\NP").unwrap();
        assert!(matches!(c, Category::Bwd(..)));
        assert_eq!(Category::parse(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn type_agreement() {
        let cat = Category::parse("S/PPto").unwrap();
        assert!(cat.matches_type(&SemType::func(SemType::Room, SemType::Action)));
        assert!(!cat.matches_type(&SemType::Action));
        let n = Category::parse("N").unwrap();
        assert!(n.matches_type(&SemType::pred(SemType::Object)));
    }
}
