//! Notation templates: how a symbol application is written down.
//!
//! A template is a flat token sequence. Literals are TeX-like text, `#N` is an
//! argument slot (optionally `#N!P`, demanding that the argument binds at least
//! as tightly as `P`), and `#*[sep]` joins all arguments of a flexary symbol with
//! `sep`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Precedence used when a declaration does not give one. Atom-like: never bracketed.
pub const DEFAULT_PRECEDENCE: i32 = 1000;

/// Precedence of variables, numbers, bracketed groups and macro calls.
pub const ATOM_PRECEDENCE: i32 = i32::MAX;

/// Number of arguments a symbol takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arity {
    Fixed(usize),
    Flexary,
}

impl Arity {
    pub fn accepts(self, count: usize) -> bool {
        match self {
            Arity::Fixed(n) => n == count,
            Arity::Flexary => count >= 1,
        }
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Fixed(n) => write!(f, "{n}"),
            Arity::Flexary => f.write_str("flexary"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemplateToken {
    Literal(String),
    /// 1-based argument slot.
    Slot { index: usize, precedence: i32 },
    FlexJoin { separator: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NotationTemplate {
    tokens: Vec<TemplateToken>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{message} (at byte {offset} of template)")]
pub struct TemplateError {
    pub offset: usize,
    pub message: String,
}

impl NotationTemplate {
    pub fn new(tokens: Vec<TemplateToken>) -> Self {
        let mut merged: Vec<TemplateToken> = Vec::with_capacity(tokens.len());
        for token in tokens {
            match (merged.last_mut(), token) {
                (Some(TemplateToken::Literal(prev)), TemplateToken::Literal(next)) => {
                    prev.push_str(&next)
                }
                (_, TemplateToken::Literal(text)) if text.is_empty() => {}
                (_, token) => merged.push(token),
            }
        }
        NotationTemplate { tokens: merged }
    }

    /// Parses the template surface syntax, e.g. `#*[\cup]` or `\mathcal{C}^{#2}_{#1}`.
    pub fn parse(source: &str) -> Result<Self, TemplateError> {
        let bytes = source.as_bytes();
        let mut tokens = Vec::new();
        let mut literal = String::new();
        let mut pos = 0;
        while pos < source.len() {
            let ch = source[pos..].chars().next().unwrap();
            if ch != '#' {
                literal.push(ch);
                pos += ch.len_utf8();
                continue;
            }
            let start = pos;
            pos += 1;
            if !literal.is_empty() {
                tokens.push(TemplateToken::Literal(std::mem::take(&mut literal)));
            }
            match bytes.get(pos) {
                Some(b'*') => {
                    pos += 1;
                    if bytes.get(pos) != Some(&b'[') {
                        return Err(TemplateError {
                            offset: start,
                            message: "expected `[` after `#*`".into(),
                        });
                    }
                    pos += 1;
                    let sep_start = pos;
                    let mut depth = 0usize;
                    loop {
                        match bytes.get(pos) {
                            None => {
                                return Err(TemplateError {
                                    offset: start,
                                    message: "unterminated flexary separator".into(),
                                })
                            }
                            Some(b'[') => depth += 1,
                            Some(b']') if depth == 0 => break,
                            Some(b']') => depth -= 1,
                            _ => {}
                        }
                        pos += 1;
                    }
                    let separator = source[sep_start..pos].to_string();
                    pos += 1;
                    if separator.trim().is_empty() {
                        return Err(TemplateError {
                            offset: start,
                            message: "flexary separator must be non-empty".into(),
                        });
                    }
                    tokens.push(TemplateToken::FlexJoin { separator });
                }
                Some(b) if b.is_ascii_digit() => {
                    let digits_start = pos;
                    while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
                        pos += 1;
                    }
                    let index: usize = source[digits_start..pos].parse().map_err(|_| TemplateError {
                        offset: start,
                        message: "slot index out of range".into(),
                    })?;
                    if index == 0 {
                        return Err(TemplateError {
                            offset: start,
                            message: "slot indices are 1-based".into(),
                        });
                    }
                    let mut precedence = 0;
                    if bytes.get(pos) == Some(&b'!') {
                        pos += 1;
                        let prec_start = pos;
                        if bytes.get(pos) == Some(&b'-') {
                            pos += 1;
                        }
                        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
                            pos += 1;
                        }
                        precedence = source[prec_start..pos].parse().map_err(|_| TemplateError {
                            offset: start,
                            message: "expected an integer precedence after `!`".into(),
                        })?;
                    }
                    tokens.push(TemplateToken::Slot { index, precedence });
                }
                _ => {
                    return Err(TemplateError {
                        offset: start,
                        message: "`#` must be followed by a slot number or `*[`".into(),
                    })
                }
            }
        }
        if !literal.is_empty() {
            tokens.push(TemplateToken::Literal(literal));
        }
        if tokens.is_empty() {
            return Err(TemplateError {
                offset: 0,
                message: "empty notation template".into(),
            });
        }
        Ok(NotationTemplate::new(tokens))
    }

    pub fn tokens(&self) -> &[TemplateToken] {
        &self.tokens
    }

    /// Arity implied by the slots the template uses.
    pub fn implied_arity(&self) -> Arity {
        if self.tokens.iter().any(|t| matches!(t, TemplateToken::FlexJoin { .. })) {
            return Arity::Flexary;
        }
        let max = self
            .tokens
            .iter()
            .filter_map(|t| match t {
                TemplateToken::Slot { index, .. } => Some(*index),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        Arity::Fixed(max)
    }

    /// Checks the template against the arity of the symbol it presents.
    pub fn check_arity(&self, arity: Arity) -> Result<(), String> {
        let slots: Vec<usize> = self
            .tokens
            .iter()
            .filter_map(|t| match t {
                TemplateToken::Slot { index, .. } => Some(*index),
                _ => None,
            })
            .collect();
        let joins = self
            .tokens
            .iter()
            .filter(|t| matches!(t, TemplateToken::FlexJoin { .. }))
            .count();
        match arity {
            Arity::Flexary => {
                if joins != 1 || !slots.is_empty() {
                    return Err(
                        "flexary templates need exactly one `#*[sep]` and no numbered slots".into(),
                    );
                }
            }
            Arity::Fixed(n) => {
                if joins != 0 {
                    return Err("fixed-arity templates cannot use `#*[sep]`".into());
                }
                for i in 1..=n {
                    if !slots.contains(&i) {
                        return Err(format!("slot #{i} is never used"));
                    }
                }
                if let Some(bad) = slots.iter().find(|&&i| i > n) {
                    return Err(format!("slot #{bad} exceeds arity {n}"));
                }
            }
        }
        Ok(())
    }

    pub fn has_slots(&self) -> bool {
        self.tokens.iter().any(|t| !matches!(t, TemplateToken::Literal(_)))
    }
}

impl fmt::Display for NotationTemplate {
    /// Writes the template back in its surface syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for token in &self.tokens {
            match token {
                TemplateToken::Literal(text) => f.write_str(text)?,
                TemplateToken::Slot { index, precedence: 0 } => write!(f, "#{index}")?,
                TemplateToken::Slot { index, precedence } => write!(f, "#{index}!{precedence}")?,
                TemplateToken::FlexJoin { separator } => write!(f, "#*[{separator}]")?,
            }
        }
        Ok(())
    }
}
