//! Minimal s-expression reader and writer shared by all file formats.
//!
//! Atoms are bare tokens; lists are parenthesized. A `;` starts a comment
//! that runs to the end of the line.

use crate::{Error, Result};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexpr {
    Atom(String),
    List(Vec<Sexpr>),
}

impl Sexpr {
    pub fn atom(s: impl Into<String>) -> Sexpr {
        Sexpr::Atom(s.into())
    }

    pub fn list(items: Vec<Sexpr>) -> Sexpr {
        Sexpr::List(items)
    }

    pub fn as_atom(&self) -> Result<&str> {
        match self {
            Sexpr::Atom(s) => Ok(s),
            Sexpr::List(_) => Err(Error::Syntax("expected an atom, found a list".into())),
        }
    }

    pub fn as_list(&self) -> Result<&[Sexpr]> {
        match self {
            Sexpr::List(items) => Ok(items),
            Sexpr::Atom(a) => Err(Error::Syntax(format!("expected a list, found atom `{a}`"))),
        }
    }

    /// List whose head is the atom `tag`; returns the remaining items.
    pub fn as_tagged(&self, tag: &str) -> Result<&[Sexpr]> {
        let items = self.as_list()?;
        match items.first() {
            Some(Sexpr::Atom(head)) if head == tag => Ok(&items[1..]),
            Some(Sexpr::Atom(head)) => Err(Error::Syntax(format!(
                "expected `({tag} ...)`, found `({head} ...)`"
            ))),
            _ => Err(Error::Syntax(format!("expected `({tag} ...)`"))),
        }
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            Sexpr::List(items) => match items.first() {
                Some(Sexpr::Atom(h)) => Some(h),
                _ => None,
            },
            Sexpr::Atom(_) => None,
        }
    }

    pub fn as_usize(&self) -> Result<usize> {
        let a = self.as_atom()?;
        a.parse()
            .map_err(|_| Error::Syntax(format!("expected a number, found `{a}`")))
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(a) => write!(f, "{a}"),
            Sexpr::List(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn is_atom_char(c: char) -> bool {
    !c.is_whitespace() && c != '(' && c != ')' && c != ';'
}

struct Lexer<'a> {
    input: &'a str,
    pos: usize,
}

#[derive(Debug, PartialEq)]
enum Token {
    Open,
    Close,
    Atom(String),
}

impl<'a> Lexer<'a> {
    fn new(input: &'a str) -> Self {
        Lexer { input, pos: 0 }
    }

    fn next_token(&mut self) -> Result<Option<Token>> {
        let bytes = self.input.as_bytes();
        loop {
            while self.pos < bytes.len() && (bytes[self.pos] as char).is_whitespace() {
                self.pos += 1;
            }
            if self.pos < bytes.len() && bytes[self.pos] == b';' {
                while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        if self.pos >= bytes.len() {
            return Ok(None);
        }
        match bytes[self.pos] {
            b'(' => {
                self.pos += 1;
                Ok(Some(Token::Open))
            }
            b')' => {
                self.pos += 1;
                Ok(Some(Token::Close))
            }
            _ => {
                let start = self.pos;
                while self.pos < bytes.len() && is_atom_char(bytes[self.pos] as char) {
                    self.pos += 1;
                }
                if start == self.pos {
                    return Err(Error::Syntax(format!(
                        "unexpected character `{}`",
                        bytes[self.pos] as char
                    )));
                }
                Ok(Some(Token::Atom(self.input[start..self.pos].to_string())))
            }
        }
    }
}

/// Parse every top-level form in the input.
pub fn parse_many(input: &str) -> Result<Vec<Sexpr>> {
    let mut lexer = Lexer::new(input);
    let mut stack: Vec<Vec<Sexpr>> = Vec::new();
    let mut top: Vec<Sexpr> = Vec::new();
    while let Some(tok) = lexer.next_token()? {
        match tok {
            Token::Open => stack.push(Vec::new()),
            Token::Close => {
                let items = stack
                    .pop()
                    .ok_or_else(|| Error::Syntax("unbalanced `)`".into()))?;
                let expr = Sexpr::List(items);
                match stack.last_mut() {
                    Some(parent) => parent.push(expr),
                    None => top.push(expr),
                }
            }
            Token::Atom(a) => {
                let expr = Sexpr::Atom(a);
                match stack.last_mut() {
                    Some(parent) => parent.push(expr),
                    None => top.push(expr),
                }
            }
        }
    }
    if !stack.is_empty() {
        return Err(Error::Syntax("unbalanced `(`".into()));
    }
    Ok(top)
}

/// Parse exactly one top-level form.
pub fn parse_one(input: &str) -> Result<Sexpr> {
    let mut forms = parse_many(input)?;
    match forms.len() {
        1 => Ok(forms.remove(0)),
        0 => Err(Error::Syntax("empty input".into())),
        n => Err(Error::Syntax(format!("expected one form, found {n}"))),
    }
}

/// Render a form with each top-level child on its own line; diff-friendly
/// output for graph, grammar and decomposition files.
pub fn pretty(expr: &Sexpr) -> String {
    match expr {
        Sexpr::Atom(a) => a.clone(),
        Sexpr::List(items) => {
            if items.iter().all(|i| matches!(i, Sexpr::Atom(_))) || items.len() <= 2 {
                return expr.to_string();
            }
            let mut out = String::from("(");
            let mut first = true;
            for item in items {
                if first {
                    out.push_str(&item.to_string());
                    first = false;
                } else {
                    out.push_str("\n  ");
                    out.push_str(&item.to_string().replace('\n', "\n  "));
                }
            }
            out.push(')');
            out
        }
    }
}
