use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::sexpr::{self, Sexpr};
use crate::error::{Error, Result};

/// Semantic type of a logical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SemType {
    Room,
    Person,
    Object,
    Action,
    Truth,
    Fn(Box<SemType>, Box<SemType>),
}

impl SemType {
    pub fn func(arg: SemType, result: SemType) -> SemType {
        SemType::Fn(Box::new(arg), Box::new(result))
    }

    /// `τ → t` for an entity type.
    pub fn pred(arg: SemType) -> SemType {
        SemType::func(arg, SemType::Truth)
    }

    pub fn is_entity(&self) -> bool {
        matches!(self, SemType::Room | SemType::Person | SemType::Object)
    }

    pub fn parse(text: &str) -> Result<SemType> {
        Self::from_sexpr(&sexpr::parse(text)?)
    }

    pub(crate) fn from_sexpr(s: &Sexpr) -> Result<SemType> {
        match s {
            Sexpr::Atom(a) => match a.as_str() {
                "room" => Ok(SemType::Room),
                "person" => Ok(SemType::Person),
                "object" => Ok(SemType::Object),
                "action" => Ok(SemType::Action),
                "t" | "truth" => Ok(SemType::Truth),
                other => Err(Error::LfSyntax(format!("unknown type `{other}`"))),
            },
            Sexpr::List(items) => match items.as_slice() {
                [Sexpr::Atom(arrow), rest @ ..] if arrow == "->" && rest.len() >= 2 => {
                    let mut ty = Self::from_sexpr(rest.last().unwrap())?;
                    for arg in rest[..rest.len() - 1].iter().rev() {
                        ty = SemType::func(Self::from_sexpr(arg)?, ty);
                    }
                    Ok(ty)
                }
                _ => Err(Error::LfSyntax(format!("bad type expression `{s}`"))),
            },
        }
    }

    pub fn to_sexpr(&self) -> String {
        match self {
            SemType::Room => "room".into(),
            SemType::Person => "person".into(),
            SemType::Object => "object".into(),
            SemType::Action => "action".into(),
            SemType::Truth => "t".into(),
            SemType::Fn(a, b) => format!("(-> {} {})", a.to_sexpr(), b.to_sexpr()),
        }
    }
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemType::Fn(a, b) => match **a {
                SemType::Fn(..) => write!(f, "({a}) → {b}"),
                _ => write!(f, "{a} → {b}"),
            },
            other => f.write_str(&other.to_sexpr()),
        }
    }
}

impl Serialize for SemType {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_sexpr())
    }
}

impl<'de> Deserialize<'de> for SemType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        SemType::parse(&s).map_err(serde::de::Error::custom)
    }
}
