//! The semantic document model: theories, symbols, statements and formulas.
//!
//! Everything here is a plain value type. `validate` checks the cross-theory
//! invariants, `xml` provides the canonical interchange format and `uri` the
//! naming scheme every other output relies on.

pub mod openmath;
pub mod uri;
mod validate;
mod xml;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::notation::{Arity, NotationTemplate};

pub use uri::{Entity, UriScheme};
pub use validate::{validate, Violation, ViolationCode};
pub use xml::{from_xml, theory_to_xml, to_xml, FormatError};

/// Reference to a symbol by the theory that declares it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SymbolRef {
    pub theory: String,
    pub name: String,
}

impl SymbolRef {
    pub fn new(theory: impl Into<String>, name: impl Into<String>) -> Self {
        SymbolRef {
            theory: theory.into(),
            name: name.into(),
        }
    }
}

/// OpenMath-style formula tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MathObject {
    Sym(SymbolRef),
    Var(String),
    Int(i64),
    Apply {
        head: Box<MathObject>,
        args: Vec<MathObject>,
    },
    Bind {
        binder: Box<MathObject>,
        vars: Vec<String>,
        body: Box<MathObject>,
    },
}

impl MathObject {
    pub fn sym(theory: &str, name: &str) -> Self {
        MathObject::Sym(SymbolRef::new(theory, name))
    }

    pub fn var(name: &str) -> Self {
        MathObject::Var(name.to_string())
    }

    pub fn apply(head: MathObject, args: Vec<MathObject>) -> Self {
        MathObject::Apply {
            head: Box::new(head),
            args,
        }
    }

    /// Collects every symbol occurring anywhere in the tree.
    pub fn symbols_into(&self, out: &mut BTreeSet<SymbolRef>) {
        match self {
            MathObject::Sym(s) => {
                out.insert(s.clone());
            }
            MathObject::Var(_) | MathObject::Int(_) => {}
            MathObject::Apply { head, args } => {
                head.symbols_into(out);
                for a in args {
                    a.symbols_into(out);
                }
            }
            MathObject::Bind { binder, body, .. } => {
                binder.symbols_into(out);
                body.symbols_into(out);
            }
        }
    }

    /// Number of nodes that carry cross-references in parallel markup.
    pub fn node_count(&self) -> usize {
        match self {
            MathObject::Sym(_) | MathObject::Var(_) | MathObject::Int(_) => 1,
            MathObject::Apply { head, args } => {
                1 + head.node_count() + args.iter().map(MathObject::node_count).sum::<usize>()
            }
            MathObject::Bind {
                binder, vars, body, ..
            } => 1 + binder.node_count() + vars.len() + body.node_count(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StatementKind {
    Definition,
    Example,
    Theorem,
    Axiom,
    Proof,
}

impl StatementKind {
    pub const ALL: [StatementKind; 5] = [
        StatementKind::Definition,
        StatementKind::Example,
        StatementKind::Theorem,
        StatementKind::Axiom,
        StatementKind::Proof,
    ];

    /// Environment / XML attribute name.
    pub fn keyword(self) -> &'static str {
        match self {
            StatementKind::Definition => "definition",
            StatementKind::Example => "example",
            StatementKind::Theorem => "theorem",
            StatementKind::Axiom => "axiom",
            StatementKind::Proof => "proof",
        }
    }

    /// Ontology class name.
    pub fn class_name(self) -> &'static str {
        match self {
            StatementKind::Definition => "Definition",
            StatementKind::Example => "Example",
            StatementKind::Theorem => "Theorem",
            StatementKind::Axiom => "Axiom",
            StatementKind::Proof => "Proof",
        }
    }
}

impl FromStr for StatementKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StatementKind::ALL
            .into_iter()
            .find(|k| k.keyword() == s)
            .ok_or(())
    }
}

impl fmt::Display for StatementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A resolved reference to a symbol or statement: `theory#fragment`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Ref {
    pub theory: String,
    pub fragment: String,
}

impl Ref {
    pub fn new(theory: impl Into<String>, fragment: impl Into<String>) -> Self {
        Ref {
            theory: theory.into(),
            fragment: fragment.into(),
        }
    }
}

impl fmt::Display for Ref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.theory, self.fragment)
    }
}

impl FromStr for Ref {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (theory, fragment) = s.split_once('#').ok_or(())?;
        if theory.is_empty() || fragment.is_empty() {
            return Err(());
        }
        Ok(Ref::new(theory, fragment))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Content {
    Prose(String),
    Formula(MathObject),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofStep {
    pub index: usize,
    pub content: Vec<Content>,
    pub justification: Option<Ref>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Statement {
    pub id: String,
    /// True when the id was assigned by the compiler rather than written by the author.
    pub generated_id: bool,
    pub kind: StatementKind,
    pub for_targets: Vec<Ref>,
    pub content: Vec<Content>,
    pub steps: Vec<ProofStep>,
}

impl Statement {
    /// All formulas of the statement, including those inside proof steps.
    pub fn formulas(&self) -> impl Iterator<Item = &MathObject> {
        let own = self.content.iter();
        let steps = self.steps.iter().flat_map(|s| s.content.iter());
        own.chain(steps).filter_map(|c| match c {
            Content::Formula(f) => Some(f),
            Content::Prose(_) => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolInfo {
    pub name: String,
    pub arity: Arity,
    pub precedence: i32,
    pub notation: NotationTemplate,
    pub variants: BTreeMap<String, NotationTemplate>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Theory {
    pub id: String,
    pub imports: Vec<String>,
    pub symbols: Vec<SymbolInfo>,
    pub statements: Vec<Statement>,
}

impl Theory {
    pub fn new(id: impl Into<String>) -> Self {
        Theory {
            id: id.into(),
            imports: Vec::new(),
            symbols: Vec::new(),
            statements: Vec::new(),
        }
    }

    pub fn symbol(&self, name: &str) -> Option<&SymbolInfo> {
        self.symbols.iter().find(|s| s.name == name)
    }

    pub fn statement(&self, id: &str) -> Option<&Statement> {
        self.statements.iter().find(|s| s.id == id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TheoryCollection {
    pub base_uri: String,
    pub theories: BTreeMap<String, Theory>,
}

impl TheoryCollection {
    pub fn new(base_uri: impl Into<String>) -> Self {
        TheoryCollection {
            base_uri: base_uri.into(),
            theories: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, theory: Theory) {
        self.theories.insert(theory.id.clone(), theory);
    }

    pub fn symbol(&self, r: &SymbolRef) -> Option<&SymbolInfo> {
        self.theories.get(&r.theory)?.symbol(&r.name)
    }

    pub fn uris(&self) -> UriScheme<'_> {
        UriScheme::new(&self.base_uri)
    }

    /// What a `theory#fragment` reference points at, if anything.
    pub fn lookup(&self, r: &Ref) -> Option<Target<'_>> {
        let theory = self.theories.get(&r.theory)?;
        if let Some(sym) = theory.symbol(&r.fragment) {
            return Some(Target::Symbol(sym));
        }
        theory.statement(&r.fragment).map(Target::Statement)
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    Symbol(&'a SymbolInfo),
    Statement(&'a Statement),
}
