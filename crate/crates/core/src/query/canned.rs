//! The ready-made queries: examples within a prerequisite horizon, and didactic gaps.

use std::collections::BTreeSet;

use serde::Serialize;

use super::pattern::{PathMod, Pattern, PatternTerm, TriplePattern};
use super::store::Store;
use crate::omdoc::uri::document_of;
use crate::rdf::{Term, Triple, TripleSet, RDF_TYPE};

fn o(local: &str) -> PatternTerm {
    PatternTerm::prefixed("o", local)
}

fn rdf_type() -> PatternTerm {
    PatternTerm::prefixed("rdf", "type")
}

fn run(store: &Store, triples: Vec<TriplePattern>) -> Vec<super::Binding> {
    let pattern = Pattern::new(triples).expect("canned patterns are non-empty");
    // Canned patterns only use the built-in prefixes.
    store.select(&pattern).expect("canned patterns are well-formed")
}

fn values(rows: &[super::Binding], var: &str) -> BTreeSet<String> {
    rows.iter().map(|b| b[var].value().to_string()).collect()
}

/// Theories reachable from `theory` over `o:imports`, including itself.
pub fn import_closure(store: &Store, theory: &str) -> BTreeSet<String> {
    let rows = run(
        store,
        vec![TriplePattern::new(PatternTerm::iri(theory), o("imports"), PatternTerm::var("t")).with_path(PathMod::Star)],
    );
    values(&rows, "t")
}

/// `(concept, example)` pairs for the symbols declared by `topic`, keeping
/// only examples homed in the topic, a prerequisite, or anything a
/// prerequisite imports. Sorted, without duplicates.
pub fn examples_for<'a>(
    store: &Store,
    topic: &str,
    prerequisites: impl IntoIterator<Item = &'a str>,
) -> Vec<(String, String)> {
    let mut allowed: BTreeSet<String> = BTreeSet::from([topic.to_string()]);
    for prereq in prerequisites {
        allowed.extend(import_closure(store, prereq));
    }
    let rows = run(
        store,
        vec![
            TriplePattern::new(PatternTerm::iri(topic), o("declares"), PatternTerm::var("c")),
            TriplePattern::new(PatternTerm::var("e"), o("exemplifies"), PatternTerm::var("c")),
            TriplePattern::new(PatternTerm::var("e"), rdf_type(), o("Example")),
        ],
    );
    let pairs: BTreeSet<(String, String)> = rows
        .into_iter()
        .map(|b| (b["c"].value().to_string(), b["e"].value().to_string()))
        .filter(|(_, e)| allowed.contains(document_of(e)))
        .collect();
    pairs.into_iter().collect()
}

/// Triples with `resource` as subject or object, plus the `rdf:type` of each
/// resource on the other end. `None` if the store never mentions `resource`.
pub fn neighborhood(store: &Store, resource: &str) -> Option<TripleSet> {
    let out_rows = run(
        store,
        vec![TriplePattern::new(PatternTerm::iri(resource), PatternTerm::var("p"), PatternTerm::var("o"))],
    );
    let in_rows = run(
        store,
        vec![TriplePattern::new(PatternTerm::var("s"), PatternTerm::var("p"), PatternTerm::iri(resource))],
    );
    if out_rows.is_empty() && in_rows.is_empty() {
        return None;
    }
    let mut out = TripleSet::new();
    let mut neighbours = BTreeSet::new();
    for b in out_rows {
        if let Term::Iri(o) = &b["o"] {
            neighbours.insert(o.clone());
        }
        out.insert(Triple::new(resource, b["p"].value(), b["o"].clone()));
    }
    for b in in_rows {
        let s = b["s"].value().to_string();
        out.insert(Triple::new(&s, b["p"].value(), Term::Iri(resource.to_string())));
        neighbours.insert(s);
    }
    neighbours.remove(resource);
    for n in neighbours {
        let rows = run(store, vec![TriplePattern::new(PatternTerm::iri(n.clone()), rdf_type(), PatternTerm::var("t"))]);
        for b in rows {
            out.insert(Triple::new(&n, RDF_TYPE, b["t"].clone()));
        }
    }
    Some(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub concepts_without_examples: Vec<String>,
    pub unjustified_steps: Vec<String>,
}

impl GapReport {
    pub fn is_empty(&self) -> bool {
        self.concepts_without_examples.is_empty() && self.unjustified_steps.is_empty()
    }
}

/// Symbols nothing exemplifies, and proof steps without a justification.
pub fn find_gaps(store: &Store) -> GapReport {
    let symbols = values(
        &run(store, vec![TriplePattern::new(PatternTerm::var("s"), rdf_type(), o("Symbol"))]),
        "s",
    );
    let exemplified = values(
        &run(store, vec![TriplePattern::new(PatternTerm::var("e"), o("exemplifies"), PatternTerm::var("s"))]),
        "s",
    );
    let steps = values(
        &run(store, vec![TriplePattern::new(PatternTerm::var("s"), rdf_type(), o("ProofStep"))]),
        "s",
    );
    let justified = values(
        &run(store, vec![TriplePattern::new(PatternTerm::var("s"), o("justifiedBy"), PatternTerm::var("j"))]),
        "s",
    );
    GapReport {
        concepts_without_examples: symbols.difference(&exemplified).cloned().collect(),
        unjustified_steps: steps.difference(&justified).cloned().collect(),
    }
}
