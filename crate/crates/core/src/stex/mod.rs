//! Frontend for the semantic-LaTeX subset.
//!
//! ```text
//! \begin{module}[id=sets]
//!   \importmodule{base}
//!   \symdef{union}[prec=500]{#*[\cup]}
//!   \symvariant{union}{big}{\bigcup #*[,]}
//!   \begin{definition}[id=union-def, for=union] ... $\union{A,B}$ ... \end{definition}
//!   \begin{proof}[for=thm] \step[just=union-def]{...} \step{...} \end{proof}
//! \end{module}
//! ```
//!
//! [`parse_module`] produces an unresolved [`SourceModule`]; [`resolve`] binds
//! imports, references and formulas into a [`TheoryCollection`](crate::omdoc::TheoryCollection).

pub(crate) mod math;
mod parser;
mod resolve;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::notation::{Arity, NotationTemplate};
use crate::omdoc::StatementKind;

pub use math::{parse_math, Scope, ScopeEntry};
pub use parser::parse_module;
pub use resolve::{resolve, resolve_all, ResolveError};

#[derive(Clone, Debug, Error, PartialEq, Eq, Serialize)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: warning: {}", self.line, self.column, self.message)
    }
}

/// A parsed `.stex` module, before imports and references are resolved.
#[derive(Clone, Debug)]
pub struct SourceModule {
    pub id: String,
    pub imports: Vec<String>,
    pub body: Vec<BodyItem>,
    pub warnings: Vec<Warning>,
}

// Warnings are diagnostics; two modules are the same if their content is.
impl PartialEq for SourceModule {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.imports == other.imports && self.body == other.body
    }
}

impl Eq for SourceModule {}

impl SourceModule {
    pub fn symbols(&self) -> impl Iterator<Item = &SymDecl> {
        self.body.iter().filter_map(|b| match b {
            BodyItem::Symbol(s) => Some(s),
            _ => None,
        })
    }

    pub fn statements(&self) -> impl Iterator<Item = &StatementEnv> {
        self.body.iter().filter_map(|b| match b {
            BodyItem::Statement(s) => Some(s),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BodyItem {
    Symbol(SymDecl),
    Variant(NotationVariantDecl),
    Statement(StatementEnv),
    Prose(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymDecl {
    pub name: String,
    pub arity: Arity,
    pub precedence: i32,
    pub template: NotationTemplate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotationVariantDecl {
    pub symbol: String,
    pub key: String,
    pub template: NotationTemplate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Run {
    Prose(String),
    Math(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceStep {
    pub index: usize,
    pub content: Vec<Run>,
    pub justification: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatementEnv {
    pub kind: StatementKind,
    pub id: Option<String>,
    pub for_refs: Vec<String>,
    pub content: Vec<Run>,
    pub steps: Vec<SourceStep>,
}

/// `[A-Za-z][A-Za-z0-9-]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '-')
}

/// Symbol names double as macro names, so they are letters only.
pub fn is_symbol_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphabetic())
}
