//! RDF outline of a theory collection: triples, extraction and serialization.

mod extract;
mod serialize;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

pub use extract::{extract, theory_triples};
pub use serialize::{parse_ntriples, to_ntriples, to_turtle, NTriplesError};

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const DEFAULT_ONTOLOGY_NS: &str = "http://ex.org/ontology#";

pub const CLASSES: [&str; 8] = [
    "Theory",
    "Symbol",
    "Definition",
    "Example",
    "Theorem",
    "Axiom",
    "Proof",
    "ProofStep",
];

pub const PROPERTIES: [&str; 9] = [
    "imports",
    "declares",
    "defines",
    "exemplifies",
    "proves",
    "hasStep",
    "justifiedBy",
    "usesSymbol",
    "title",
];

/// The ontology namespace and its closed term set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    namespace: String,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::new(DEFAULT_ONTOLOGY_NS)
    }
}

impl Vocabulary {
    pub fn new(namespace: impl Into<String>) -> Self {
        Vocabulary {
            namespace: namespace.into(),
        }
    }

    pub fn namespace(&self) -> &str {
        &self.namespace
    }

    /// Full IRI of a class or property; panics on terms outside the vocabulary.
    pub fn term(&self, local: &str) -> String {
        assert!(
            CLASSES.contains(&local) || PROPERTIES.contains(&local),
            "`{local}` is not an ontology term"
        );
        format!("{}{local}", self.namespace)
    }

    /// The local name of `iri` if it is an ontology term.
    pub fn local_name<'a>(&self, iri: &'a str) -> Option<&'a str> {
        let local = iri.strip_prefix(self.namespace.as_str())?;
        (CLASSES.contains(&local) || PROPERTIES.contains(&local)).then_some(local)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(String),
    Literal(String),
}

impl Term {
    pub fn iri(s: impl Into<String>) -> Self {
        Term::Iri(s.into())
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            Term::Literal(_) => None,
        }
    }

    pub fn value(&self) -> &str {
        match self {
            Term::Iri(s) | Term::Literal(s) => s,
        }
    }
}

impl fmt::Display for Term {
    /// N-Triples form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        match self {
            Term::Iri(s) => serialize::write_iri(s, &mut out),
            Term::Literal(s) => serialize::write_literal(s, &mut out),
        }
        f.write_str(&out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<String>, predicate: impl Into<String>, object: Term) -> Self {
        Triple {
            subject: subject.into(),
            predicate: predicate.into(),
            object,
        }
    }
}

/// Subject, then predicate, then the object's serialized form.
impl Ord for Triple {
    fn cmp(&self, other: &Self) -> Ordering {
        self.subject
            .cmp(&other.subject)
            .then_with(|| self.predicate.cmp(&other.predicate))
            .then_with(|| self.object.to_string().cmp(&other.object.to_string()))
    }
}

impl PartialOrd for Triple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} .",
            Term::Iri(self.subject.clone()),
            Term::Iri(self.predicate.clone()),
            self.object
        )
    }
}

/// A set of triples in serialization order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TripleSet {
    triples: BTreeSet<Triple>,
}

impl TripleSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn extend(&mut self, triples: impl IntoIterator<Item = Triple>) {
        self.triples.extend(triples);
    }
}

impl FromIterator<Triple> for TripleSet {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        TripleSet {
            triples: iter.into_iter().collect(),
        }
    }
}

impl IntoIterator for TripleSet {
    type Item = Triple;
    type IntoIter = std::collections::btree_set::IntoIter<Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.into_iter()
    }
}

impl<'a> IntoIterator for &'a TripleSet {
    type Item = &'a Triple;
    type IntoIter = std::collections::btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}
