//! The ontology document describing the RDF vocabulary.

use std::fmt::Write;

use crate::rdf::{Term, Triple, TripleSet, Vocabulary, RDFS_NS, RDF_NS, RDF_TYPE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermKind {
    Class,
    ObjectProperty,
    DatatypeProperty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OntologyTerm {
    pub name: &'static str,
    pub kind: TermKind,
    pub label: &'static str,
    pub comment: &'static str,
    pub domain: Option<&'static str>,
    /// A class of the vocabulary, or `rdfs:Literal` for datatype properties.
    pub range: Option<&'static str>,
}

const fn class(name: &'static str, label: &'static str, comment: &'static str) -> OntologyTerm {
    OntologyTerm {
        name,
        kind: TermKind::Class,
        label,
        comment,
        domain: None,
        range: None,
    }
}

const fn property(
    name: &'static str,
    label: &'static str,
    comment: &'static str,
    domain: Option<&'static str>,
    range: Option<&'static str>,
) -> OntologyTerm {
    OntologyTerm {
        name,
        kind: TermKind::ObjectProperty,
        label,
        comment,
        domain,
        range,
    }
}

pub const TERMS: [OntologyTerm; 17] = [
    class("Theory", "theory", "A module of symbol declarations and statements."),
    class("Symbol", "symbol", "A mathematical symbol introduced by a theory."),
    class("Definition", "definition", "A statement defining one or more symbols."),
    class("Example", "example", "A statement illustrating symbols or statements."),
    class("Theorem", "theorem", "A statement claimed to follow from others."),
    class("Axiom", "axiom", "A statement assumed without proof."),
    class("Proof", "proof", "A structured argument for a theorem."),
    class("ProofStep", "proof step", "One step of a structured proof."),
    property("imports", "imports", "The subject theory can use everything the object theory declares.", Some("Theory"), Some("Theory")),
    property("declares", "declares", "The theory introduces the symbol.", Some("Theory"), Some("Symbol")),
    property("defines", "defines", "The definition gives meaning to the symbol.", Some("Definition"), Some("Symbol")),
    property("exemplifies", "exemplifies", "The example illustrates the symbol or statement.", Some("Example"), None),
    property("proves", "proves", "The proof establishes the theorem.", Some("Proof"), Some("Theorem")),
    property("hasStep", "has step", "The proof consists of the step.", Some("Proof"), Some("ProofStep")),
    property("justifiedBy", "justified by", "The step relies on the symbol or statement.", Some("ProofStep"), None),
    property("usesSymbol", "uses symbol", "A formula of the statement mentions the symbol.", None, Some("Symbol")),
    OntologyTerm {
        name: "title",
        kind: TermKind::DatatypeProperty,
        label: "title",
        comment: "Author-given name of the statement.",
        domain: None,
        range: Some("rdfs:Literal"),
    },
];

fn term_iri(vocab: &Vocabulary, name: &str) -> String {
    match name.strip_prefix("rdfs:") {
        Some(local) => format!("{RDFS_NS}{local}"),
        None => vocab.term(name),
    }
}

/// The ontology as triples.
pub fn ontology_triples(vocab: &Vocabulary) -> TripleSet {
    let mut out = TripleSet::new();
    let rdfs = |local: &str| format!("{RDFS_NS}{local}");
    for t in &TERMS {
        let s = vocab.term(t.name);
        let kind = match t.kind {
            TermKind::Class => rdfs("Class"),
            TermKind::ObjectProperty | TermKind::DatatypeProperty => format!("{RDF_NS}Property"),
        };
        out.insert(Triple::new(&s, RDF_TYPE, Term::Iri(kind)));
        out.insert(Triple::new(&s, rdfs("label"), Term::Literal(t.label.into())));
        out.insert(Triple::new(&s, rdfs("comment"), Term::Literal(t.comment.into())));
        if let Some(d) = t.domain {
            out.insert(Triple::new(&s, rdfs("domain"), Term::Iri(term_iri(vocab, d))));
        }
        if let Some(r) = t.range {
            out.insert(Triple::new(&s, rdfs("range"), Term::Iri(term_iri(vocab, r))));
        }
    }
    out
}

fn curie(name: &str) -> String {
    if name.contains(':') {
        name.to_string()
    } else {
        format!("o:{name}")
    }
}

/// Turtle document declaring every term once; properties lead with their domain.
pub fn emit_ontology(vocab: &Vocabulary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@prefix o: <{}> .", vocab.namespace());
    let _ = writeln!(out, "@prefix rdf: <{RDF_NS}> .");
    let _ = writeln!(out, "@prefix rdfs: <{RDFS_NS}> .");
    for t in &TERMS {
        let mut lines: Vec<String> = Vec::new();
        if let Some(d) = t.domain {
            lines.push(format!("rdfs:domain {}", curie(d)));
        }
        lines.push(match t.kind {
            TermKind::Class => "a rdfs:Class".into(),
            TermKind::ObjectProperty | TermKind::DatatypeProperty => "a rdf:Property".into(),
        });
        if let Some(r) = t.range {
            lines.push(format!("rdfs:range {}", curie(r)));
        }
        lines.push(format!("rdfs:label \"{}\"", t.label));
        lines.push(format!("rdfs:comment \"{}\"", t.comment));
        let _ = write!(out, "\no:{} {}", t.name, lines.join(" ;\n    "));
        out.push_str(" .\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{CLASSES, PROPERTIES};

    #[test]
    fn vocabulary_matches_table() {
        let classes: Vec<_> = TERMS.iter().filter(|t| t.kind == TermKind::Class).map(|t| t.name).collect();
        let props: Vec<_> = TERMS.iter().filter(|t| t.kind != TermKind::Class).map(|t| t.name).collect();
        assert_eq!(classes, CLASSES);
        assert_eq!(props, PROPERTIES);
    }

    #[test]
    fn required_lines() {
        let ttl = emit_ontology(&Vocabulary::default());
        assert!(ttl.contains("o:Example a rdfs:Class"));
        assert!(ttl.contains("o:exemplifies rdfs:domain o:Example"));
        for p in PROPERTIES {
            assert_eq!(ttl.matches(&format!("o:{p} ")).count(), 1, "{p}");
        }
    }
}
