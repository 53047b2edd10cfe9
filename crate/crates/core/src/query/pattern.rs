use std::fmt;

use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq, Serialize)]
#[error("{message}")]
pub struct PatternError {
    pub message: String,
}

impl PatternError {
    pub(crate) fn new(message: impl Into<String>) -> Self {
        PatternError {
            message: message.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PatternTerm {
    Var(String),
    Iri(String),
    /// `prefix:local`, expanded against the store's prefix map.
    Prefixed { prefix: String, local: String },
    Literal(String),
}

impl PatternTerm {
    pub fn var(name: &str) -> Self {
        PatternTerm::Var(name.trim_start_matches('?').to_string())
    }

    pub fn iri(iri: impl Into<String>) -> Self {
        PatternTerm::Iri(iri.into())
    }

    pub fn prefixed(prefix: &str, local: &str) -> Self {
        PatternTerm::Prefixed {
            prefix: prefix.to_string(),
            local: local.to_string(),
        }
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => write!(f, "?{v}"),
            PatternTerm::Iri(i) => write!(f, "<{i}>"),
            PatternTerm::Prefixed { prefix, local } => write!(f, "{prefix}:{local}"),
            PatternTerm::Literal(l) => write!(f, "{l:?}"),
        }
    }
}

/// How a predicate is followed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum PathMod {
    #[default]
    Plain,
    /// One or more edges.
    Plus,
    /// Zero or more edges.
    Star,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub path: PathMod,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(subject: PatternTerm, predicate: PatternTerm, object: PatternTerm) -> Self {
        TriplePattern {
            subject,
            predicate,
            path: PathMod::Plain,
            object,
        }
    }

    pub fn with_path(mut self, path: PathMod) -> Self {
        self.path = path;
        self
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = match self.path {
            PathMod::Plain => "",
            PathMod::Plus => "+",
            PathMod::Star => "*",
        };
        write!(f, "{} {}{path} {}", self.subject, self.predicate, self.object)
    }
}

/// A conjunction of triple patterns.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub triples: Vec<TriplePattern>,
}

impl Pattern {
    pub fn new(triples: Vec<TriplePattern>) -> Result<Self, PatternError> {
        if triples.is_empty() {
            return Err(PatternError::new("a pattern needs at least one triple pattern"));
        }
        Ok(Pattern { triples })
    }

    /// Variables in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for t in &self.triples {
            for term in [&t.subject, &t.predicate, &t.object] {
                if let PatternTerm::Var(v) = term {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }

    /// Parses `?s o:imports+ ?t . ?t a o:Theory` style text.
    ///
    /// Terms are `?var`, `<iri>`, `"literal"`, `prefix:local`, or `a` for
    /// `rdf:type` in predicate position; a predicate may end in `+` or `*`.
    pub fn parse(text: &str) -> Result<Self, PatternError> {
        let tokens = tokenize(text)?;
        let mut triples = Vec::new();
        let mut current: Vec<(String, bool)> = Vec::new();
        for token in tokens.into_iter().chain(std::iter::once((".".to_string(), false))) {
            if token.0 == "." && !token.1 {
                match current.len() {
                    0 => continue,
                    3 => {
                        let object = term(&current[2].0, current[2].1)?;
                        let (pred_text, path) = split_path(&current[1].0);
                        let predicate = if pred_text == "a" && !current[1].1 {
                            PatternTerm::prefixed("rdf", "type")
                        } else {
                            term(pred_text, current[1].1)?
                        };
                        let subject = term(&current[0].0, current[0].1)?;
                        triples.push(TriplePattern {
                            subject,
                            predicate,
                            path,
                            object,
                        });
                        current.clear();
                    }
                    n => {
                        return Err(PatternError::new(format!(
                            "triple pattern needs 3 terms, found {n}"
                        )))
                    }
                }
            } else {
                current.push(token);
            }
        }
        Pattern::new(triples)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.triples.iter().enumerate() {
            if i > 0 {
                f.write_str(" . ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

fn split_path(text: &str) -> (&str, PathMod) {
    if let Some(t) = text.strip_suffix('+') {
        (t, PathMod::Plus)
    } else if let Some(t) = text.strip_suffix('*') {
        (t, PathMod::Star)
    } else {
        (text, PathMod::Plain)
    }
}

/// Tokens with a flag telling whether they were a quoted literal.
fn tokenize(text: &str) -> Result<Vec<(String, bool)>, PatternError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut value = String::new();
            loop {
                match chars.next() {
                    None => return Err(PatternError::new("unterminated literal")),
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some('n') => value.push('\n'),
                        Some('t') => value.push('\t'),
                        Some(other) => value.push(other),
                        None => return Err(PatternError::new("unterminated literal")),
                    },
                    Some(other) => value.push(other),
                }
            }
            out.push((value, true));
        } else if c == '<' {
            let mut value = String::new();
            loop {
                match chars.next() {
                    None => return Err(PatternError::new("unterminated IRI")),
                    Some('>') => {
                        value.push('>');
                        break;
                    }
                    Some(other) => value.push(other),
                }
            }
            while let Some(&m) = chars.peek() {
                if m == '+' || m == '*' {
                    value.push(m);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push((value, false));
        } else if c == '.' {
            chars.next();
            out.push((".".into(), false));
        } else {
            let mut value = String::new();
            while let Some(&m) = chars.peek() {
                if m.is_whitespace() || m == '"' || m == '<' {
                    break;
                }
                // a trailing `.` ends the triple unless it sits inside a name
                if m == '.' {
                    let mut ahead = chars.clone();
                    ahead.next();
                    if ahead.peek().is_none_or(|n| n.is_whitespace()) {
                        break;
                    }
                }
                value.push(m);
                chars.next();
            }
            out.push((value, false));
        }
    }
    Ok(out)
}

fn term(text: &str, literal: bool) -> Result<PatternTerm, PatternError> {
    if literal {
        return Ok(PatternTerm::Literal(text.to_string()));
    }
    if let Some(v) = text.strip_prefix('?') {
        if v.is_empty() || !v.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
            return Err(PatternError::new(format!("invalid variable `{text}`")));
        }
        return Ok(PatternTerm::Var(v.to_string()));
    }
    if let Some(iri) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
        return Ok(PatternTerm::Iri(iri.to_string()));
    }
    match text.split_once(':') {
        Some((prefix, local)) if !text.contains("//") => Ok(PatternTerm::prefixed(prefix, local)),
        _ => Err(PatternError::new(format!("cannot read term `{text}`"))),
    }
}
