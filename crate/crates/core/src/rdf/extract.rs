use std::collections::BTreeSet;

use super::{Term, Triple, TripleSet, Vocabulary, RDF_TYPE};
use crate::omdoc::{StatementKind, SymbolRef, TheoryCollection};

/// Structural outline of the collection: typing, imports, declarations,
/// for-links, proof steps and symbol usage. No prose, no formula trees.
pub fn extract(collection: &TheoryCollection, vocab: &Vocabulary) -> TripleSet {
    let uris = collection.uris();
    let mut out = TripleSet::new();
    let mut add = |s: &str, p: String, o: Term| {
        out.insert(Triple::new(s, p, o));
    };
    let class = |name: &str| Term::Iri(vocab.term(name));

    for theory in collection.theories.values() {
        let t = uris.theory(&theory.id);
        add(&t, RDF_TYPE.into(), class("Theory"));
        for import in &theory.imports {
            add(&t, vocab.term("imports"), Term::Iri(uris.theory(import)));
        }
        for symbol in &theory.symbols {
            let s = uris.symbol(&SymbolRef::new(theory.id.clone(), symbol.name.clone()));
            add(&t, vocab.term("declares"), Term::Iri(s.clone()));
            add(&s, RDF_TYPE.into(), class("Symbol"));
        }
        for statement in &theory.statements {
            let st = uris.fragment(&theory.id, &statement.id);
            add(&st, RDF_TYPE.into(), class(statement.kind.class_name()));
            if let Some(pred) = for_predicate(statement.kind) {
                for target in &statement.for_targets {
                    add(&st, vocab.term(pred), Term::Iri(uris.reference(target)));
                }
            }
            if !statement.generated_id {
                add(&st, vocab.term("title"), Term::Literal(statement.id.clone()));
            }
            let mut used = BTreeSet::new();
            for f in statement.formulas() {
                f.symbols_into(&mut used);
            }
            for s in &used {
                add(&st, vocab.term("usesSymbol"), Term::Iri(uris.symbol(s)));
            }
            for step in &statement.steps {
                let su = uris.step(&theory.id, &statement.id, step.index);
                add(&su, RDF_TYPE.into(), class("ProofStep"));
                add(&st, vocab.term("hasStep"), Term::Iri(su.clone()));
                if let Some(j) = &step.justification {
                    add(&su, vocab.term("justifiedBy"), Term::Iri(uris.reference(j)));
                }
            }
        }
    }
    out
}

fn for_predicate(kind: StatementKind) -> Option<&'static str> {
    match kind {
        StatementKind::Definition => Some("defines"),
        StatementKind::Example => Some("exemplifies"),
        StatementKind::Proof => Some("proves"),
        StatementKind::Theorem | StatementKind::Axiom => None,
    }
}

/// The triples describing one theory: those whose subject is the theory or one of its fragments.
pub fn theory_triples(all: &TripleSet, theory_uri: &str) -> TripleSet {
    let fragment_prefix = format!("{theory_uri}#");
    all.iter()
        .filter(|t| t.subject == theory_uri || t.subject.starts_with(&fragment_prefix))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stex::{parse_module, resolve};

    #[test]
    fn example_and_usage() {
        let src = r"\begin{module}[id=sets]
\symdef{union}[prec=500]{#*[\cup]}
\begin{example}[id=union-ex, for=union] $\union{A,\union{B,C}}$ \end{example}
\end{module}";
        let c = resolve(&[parse_module(src).unwrap()], "http://ex.org").unwrap();
        let v = Vocabulary::default();
        let triples = extract(&c, &v);
        let ex = "http://ex.org/omdoc/sets#union-ex";
        let union = "http://ex.org/omdoc/sets#union";
        assert!(triples.contains(&Triple::new(ex, RDF_TYPE, Term::iri(v.term("Example")))));
        assert!(triples.contains(&Triple::new(ex, v.term("exemplifies"), Term::iri(union))));
        let uses = triples
            .iter()
            .filter(|t| t.subject == ex && t.predicate == v.term("usesSymbol"))
            .count();
        assert_eq!(uses, 1);
    }

    #[test]
    fn empty_collection() {
        assert!(extract(&TheoryCollection::new("http://ex.org"), &Vocabulary::default()).is_empty());
    }
}
