//! Source labels and edge labels.

use crate::{Error, Result};
use std::fmt;

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | '\''))
}

/// A source label. Labels are totally ordered (lexicographically), which is
/// what makes canonical colorings and canonical term forms deterministic.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SourceLabel(String);

impl SourceLabel {
    pub fn new(name: impl Into<String>) -> Result<SourceLabel> {
        let name = name.into();
        if !valid_name(&name) {
            return Err(Error::Syntax(format!("invalid source label `{name}`")));
        }
        Ok(SourceLabel(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SourceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An edge label together with its arity (always at least one).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EdgeLabel {
    name: String,
    arity: usize,
}

impl EdgeLabel {
    pub fn new(name: impl Into<String>, arity: usize) -> Result<EdgeLabel> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::Syntax("empty edge label".into()));
        }
        if arity == 0 {
            return Err(Error::Syntax(format!(
                "edge label `{name}` must have arity at least 1"
            )));
        }
        Ok(EdgeLabel { name, arity })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_unary(&self) -> bool {
        self.arity == 1
    }

    pub fn is_binary(&self) -> bool {
        self.arity == 2
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_names() {
        assert!(SourceLabel::new("").is_err());
        assert!(SourceLabel::new("s 1").is_err());
        assert!(SourceLabel::new("(s)").is_err());
        assert!(SourceLabel::new("s1").is_ok());
    }

    #[test]
    fn rejects_arity_zero() {
        assert!(EdgeLabel::new("a", 0).is_err());
        assert!(EdgeLabel::new("a", 1).is_ok());
    }
}
