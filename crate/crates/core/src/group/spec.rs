use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GroupError;

/// How a [`FiniteGroup`](super::FiniteGroup) was built.
///
/// The text form is what the CLI accepts and what dataset headers and model
/// files record: `cyclic:60`, `product:cyclic:2,cyclic:4`, `symmetric:3`,
/// `alternating:5`. Groups built from a raw table (quotients, subgroups) carry
/// a free-form description that cannot be parsed back.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum GroupSpec {
    Cyclic(usize),
    Product(Vec<GroupSpec>),
    Symmetric(usize),
    Alternating(usize),
    Table(String),
}

impl GroupSpec {
    fn parse_atom(s: &str) -> Result<GroupSpec, GroupError> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| GroupError::BadSpec(format!("missing ':' in {s:?}")))?;
        let n = || {
            arg.trim()
                .parse::<usize>()
                .map_err(|_| GroupError::BadSpec(format!("bad integer {arg:?} in {s:?}")))
        };
        match kind.trim() {
            "cyclic" => Ok(GroupSpec::Cyclic(n()?)),
            "symmetric" => Ok(GroupSpec::Symmetric(n()?)),
            "alternating" => Ok(GroupSpec::Alternating(n()?)),
            "table" => Err(GroupError::BadSpec(
                "table-built groups have no parseable descriptor".into(),
            )),
            other => Err(GroupError::BadSpec(format!("unknown group kind {other:?}"))),
        }
    }
}

impl FromStr for GroupSpec {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("product:") {
            let factors = rest
                .split(',')
                .map(GroupSpec::parse_atom)
                .collect::<Result<Vec<_>, _>>()?;
            if factors.len() < 2 {
                return Err(GroupError::BadSpec(format!(
                    "product needs at least two factors: {s:?}"
                )));
            }
            return Ok(GroupSpec::Product(factors));
        }
        GroupSpec::parse_atom(s)
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(n) => write!(f, "cyclic:{n}"),
            GroupSpec::Symmetric(n) => write!(f, "symmetric:{n}"),
            GroupSpec::Alternating(n) => write!(f, "alternating:{n}"),
            GroupSpec::Product(parts) => {
                write!(f, "product:")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            GroupSpec::Table(desc) => write!(f, "table:{desc}"),
        }
    }
}

impl From<GroupSpec> for String {
    fn from(spec: GroupSpec) -> String {
        spec.to_string()
    }
}

impl TryFrom<String> for GroupSpec {
    type Error = GroupError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        if let Some(desc) = s.strip_prefix("table:") {
            return Ok(GroupSpec::Table(desc.to_string()));
        }
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_compact_forms() {
        assert_eq!("cyclic:60".parse::<GroupSpec>().unwrap(), GroupSpec::Cyclic(60));
        assert_eq!(
            "product:cyclic:2,cyclic:4".parse::<GroupSpec>().unwrap(),
            GroupSpec::Product(vec![GroupSpec::Cyclic(2), GroupSpec::Cyclic(4)])
        );
        assert_eq!("alternating:5".parse::<GroupSpec>().unwrap(), GroupSpec::Alternating(5));
        for text in ["symmetric:3", "product:cyclic:3,cyclic:6", "cyclic:1"] {
            assert_eq!(text.parse::<GroupSpec>().unwrap().to_string(), text);
        }
    }

    #[test]
    fn rejects_garbage() {
        for text in ["", "cyclic", "cyclic:x", "dihedral:4", "product:cyclic:2", "table:foo"] {
            assert!(text.parse::<GroupSpec>().is_err(), "{text}");
        }
    }
}
