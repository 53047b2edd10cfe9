use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{Content, MathObject, Ref, Statement, StatementKind, Target, Theory, TheoryCollection};
use crate::notation::Arity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ViolationCode {
    DanglingRef,
    ArityMismatch,
    CyclicImport,
    DuplicateId,
    ProofWithoutTheorem,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Violation {
    pub subject: String,
    pub code: ViolationCode,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {}", self.code, self.subject, self.message)
    }
}

/// Checks every model invariant across the collection.
///
/// Violations are sorted by subject URI, then code, then message.
pub fn validate(collection: &TheoryCollection) -> Vec<Violation> {
    let mut out = Vec::new();
    let uris = collection.uris();
    for theory in collection.theories.values() {
        check_theory(collection, theory, &mut out);
    }
    for anchor in import_cycles(collection) {
        out.push(Violation {
            subject: uris.theory(&anchor.0),
            code: ViolationCode::CyclicImport,
            message: format!("import cycle through {}", anchor.1.join(", ")),
        });
    }
    out.sort();
    out.dedup();
    out
}

fn push(out: &mut Vec<Violation>, subject: String, code: ViolationCode, message: String) {
    out.push(Violation {
        subject,
        code,
        message,
    });
}

fn check_theory(collection: &TheoryCollection, theory: &Theory, out: &mut Vec<Violation>) {
    let uris = collection.uris();
    let theory_uri = uris.theory(&theory.id);
    for import in &theory.imports {
        if !collection.theories.contains_key(import) {
            push(
                out,
                theory_uri.clone(),
                ViolationCode::DanglingRef,
                format!("imports unknown theory `{import}`"),
            );
        }
    }

    let mut fragments: BTreeMap<&str, usize> = BTreeMap::new();
    for name in theory
        .symbols
        .iter()
        .map(|s| s.name.as_str())
        .chain(theory.statements.iter().map(|s| s.id.as_str()))
    {
        *fragments.entry(name).or_default() += 1;
    }
    for (name, count) in fragments {
        if count > 1 {
            push(
                out,
                uris.fragment(&theory.id, name),
                ViolationCode::DuplicateId,
                format!("`{name}` is declared {count} times in theory `{}`", theory.id),
            );
        }
    }

    for symbol in &theory.symbols {
        let subject = uris.fragment(&theory.id, &symbol.name);
        let templates = std::iter::once((None, &symbol.notation))
            .chain(symbol.variants.iter().map(|(k, t)| (Some(k), t)));
        for (variant, template) in templates {
            if let Err(msg) = template.check_arity(symbol.arity) {
                let which = variant.map_or("default notation".to_string(), |k| format!("variant `{k}`"));
                push(out, subject.clone(), ViolationCode::ArityMismatch, format!("{which}: {msg}"));
            }
        }
    }

    for statement in &theory.statements {
        check_statement(collection, theory, statement, out);
    }
}

fn check_statement(
    collection: &TheoryCollection,
    theory: &Theory,
    statement: &Statement,
    out: &mut Vec<Violation>,
) {
    let uris = collection.uris();
    let subject = uris.fragment(&theory.id, &statement.id);

    if !statement.steps.is_empty() && statement.kind != StatementKind::Proof {
        push(
            out,
            subject.clone(),
            ViolationCode::ProofWithoutTheorem,
            format!("{} has proof steps", statement.kind),
        );
    }
    for (expected, step) in (1..).zip(&statement.steps) {
        if step.index != expected {
            push(
                out,
                subject.clone(),
                ViolationCode::DuplicateId,
                format!("proof step {} out of sequence (expected {expected})", step.index),
            );
        }
    }

    match statement.kind {
        StatementKind::Definition if statement.for_targets.is_empty() => push(
            out,
            subject.clone(),
            ViolationCode::DanglingRef,
            "definition does not name the symbol it defines".into(),
        ),
        StatementKind::Proof if statement.for_targets.is_empty() => push(
            out,
            subject.clone(),
            ViolationCode::ProofWithoutTheorem,
            "proof does not name the theorem it proves".into(),
        ),
        _ => {}
    }

    for target in &statement.for_targets {
        match (statement.kind, collection.lookup(target)) {
            (_, None) => push(
                out,
                subject.clone(),
                ViolationCode::DanglingRef,
                format!("`for` target `{target}` does not exist"),
            ),
            (StatementKind::Definition, Some(Target::Statement(_))) => push(
                out,
                subject.clone(),
                ViolationCode::DanglingRef,
                format!("definitions must target symbols, `{target}` is a statement"),
            ),
            (StatementKind::Proof, Some(Target::Statement(s))) if s.kind != StatementKind::Theorem => {
                push(
                    out,
                    subject.clone(),
                    ViolationCode::ProofWithoutTheorem,
                    format!("proof target `{target}` is a {}, not a theorem", s.kind),
                )
            }
            (StatementKind::Proof, Some(Target::Symbol(_))) => push(
                out,
                subject.clone(),
                ViolationCode::ProofWithoutTheorem,
                format!("proof target `{target}` is a symbol, not a theorem"),
            ),
            _ => {}
        }
    }

    for step in &statement.steps {
        if let Some(j) = &step.justification {
            if collection.lookup(j).is_none() {
                push(
                    out,
                    uris.step(&theory.id, &statement.id, step.index),
                    ViolationCode::DanglingRef,
                    format!("justification `{j}` does not exist"),
                );
            }
        }
    }

    let formulas = statement
        .content
        .iter()
        .chain(statement.steps.iter().flat_map(|s| s.content.iter()))
        .filter_map(|c| match c {
            Content::Formula(f) => Some(f),
            Content::Prose(_) => None,
        });
    for formula in formulas {
        check_formula(collection, formula, &subject, out);
    }
}

fn check_formula(
    collection: &TheoryCollection,
    obj: &MathObject,
    subject: &str,
    out: &mut Vec<Violation>,
) {
    match obj {
        MathObject::Sym(s) => {
            if collection.symbol(s).is_none() {
                push(
                    out,
                    subject.to_string(),
                    ViolationCode::DanglingRef,
                    format!("formula uses unknown symbol `{}`", Ref::new(&s.theory, &s.name)),
                );
            }
        }
        MathObject::Var(_) | MathObject::Int(_) => {}
        MathObject::Apply { head, args } => {
            if args.is_empty() {
                push(
                    out,
                    subject.to_string(),
                    ViolationCode::ArityMismatch,
                    "application without arguments".into(),
                );
            }
            if let MathObject::Sym(s) = head.as_ref() {
                if let Some(info) = collection.symbol(s) {
                    if !args.is_empty() && !info.arity.accepts(args.len()) {
                        let expected = match info.arity {
                            Arity::Fixed(n) => n.to_string(),
                            Arity::Flexary => "at least 1".into(),
                        };
                        push(
                            out,
                            subject.to_string(),
                            ViolationCode::ArityMismatch,
                            format!(
                                "`{}` applied to {} arguments, expects {expected}",
                                s.name,
                                args.len()
                            ),
                        );
                    }
                }
            }
            check_formula(collection, head, subject, out);
            for a in args {
                check_formula(collection, a, subject, out);
            }
        }
        MathObject::Bind { binder, vars, body } => {
            if vars.is_empty() {
                push(
                    out,
                    subject.to_string(),
                    ViolationCode::ArityMismatch,
                    "binder without bound variables".into(),
                );
            }
            let distinct: BTreeSet<&String> = vars.iter().collect();
            if distinct.len() != vars.len() {
                push(
                    out,
                    subject.to_string(),
                    ViolationCode::DuplicateId,
                    "binder binds the same variable twice".into(),
                );
            }
            check_formula(collection, binder, subject, out);
            check_formula(collection, body, subject, out);
        }
    }
}

/// One entry per strongly connected import component that forms a cycle:
/// (lexicographically least theory id, members in order).
fn import_cycles(collection: &TheoryCollection) -> Vec<(String, Vec<String>)> {
    let ids: Vec<&str> = collection.theories.keys().map(String::as_str).collect();
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let edges: Vec<Vec<usize>> = ids
        .iter()
        .map(|id| {
            collection.theories[*id]
                .imports
                .iter()
                .filter_map(|imp| index.get(imp.as_str()).copied())
                .collect()
        })
        .collect();

    // Reachability by DFS from each node; desk-scale corpora keep this cheap.
    let reach: Vec<BTreeSet<usize>> = (0..ids.len())
        .map(|start| {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<usize> = edges[start].clone();
            while let Some(n) = stack.pop() {
                if seen.insert(n) {
                    stack.extend(edges[n].iter().copied());
                }
            }
            seen
        })
        .collect();

    let mut assigned = vec![false; ids.len()];
    let mut cycles = Vec::new();
    for i in 0..ids.len() {
        if assigned[i] || !reach[i].contains(&i) {
            continue;
        }
        let members: Vec<usize> = (0..ids.len())
            .filter(|&j| j == i || (reach[i].contains(&j) && reach[j].contains(&i)))
            .collect();
        for &m in &members {
            assigned[m] = true;
        }
        // ids are sorted, so the first member is the least
        cycles.push((
            ids[members[0]].to_string(),
            members.iter().map(|&m| ids[m].to_string()).collect(),
        ));
    }
    cycles
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::NotationTemplate;
    use crate::omdoc::{SymbolInfo, SymbolRef};

    fn union() -> SymbolInfo {
        SymbolInfo {
            name: "union".into(),
            arity: Arity::Flexary,
            precedence: 500,
            notation: NotationTemplate::parse(r"#*[\cup]").unwrap(),
            variants: Default::default(),
        }
    }

    fn statement(id: &str, kind: StatementKind, targets: Vec<Ref>) -> Statement {
        Statement {
            id: id.into(),
            generated_id: false,
            kind,
            for_targets: targets,
            content: vec![],
            steps: vec![],
        }
    }

    fn sets() -> TheoryCollection {
        let mut c = TheoryCollection::new("http://ex.org");
        let mut t = Theory::new("sets");
        t.symbols.push(union());
        t.statements.push(statement(
            "union-def",
            StatementKind::Definition,
            vec![Ref::new("sets", "union")],
        ));
        c.insert(t);
        let mut g = Theory::new("graphs");
        g.imports.push("sets".into());
        let mut ex = statement("ex", StatementKind::Example, vec![Ref::new("sets", "union")]);
        ex.content.push(Content::Formula(MathObject::apply(
            MathObject::Sym(SymbolRef::new("sets", "union")),
            vec![MathObject::var("A"), MathObject::var("B")],
        )));
        g.statements.push(ex);
        c.insert(g);
        c
    }

    #[test]
    fn well_formed_corpus_is_valid() {
        assert_eq!(validate(&sets()), vec![]);
    }

    #[test]
    fn definition_without_targets_is_dangling() {
        let mut c = sets();
        c.theories.get_mut("sets").unwrap().statements[0].for_targets.clear();
        let v = validate(&c);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code, ViolationCode::DanglingRef);
        assert_eq!(v[0].subject, "http://ex.org/omdoc/sets#union-def");
    }

    #[test]
    fn two_cycle_reported_once_at_least_id() {
        let mut c = TheoryCollection::new("http://ex.org");
        let mut a = Theory::new("a");
        a.imports.push("b".into());
        let mut b = Theory::new("b");
        b.imports.push("a".into());
        c.insert(a);
        c.insert(b);
        let v = validate(&c);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code, ViolationCode::CyclicImport);
        assert_eq!(v[0].subject, "http://ex.org/omdoc/a");
    }

    #[test]
    fn self_import_is_a_cycle() {
        let mut c = TheoryCollection::new("http://ex.org");
        let mut a = Theory::new("a");
        a.imports.push("a".into());
        c.insert(a);
        let v = validate(&c);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].code, ViolationCode::CyclicImport);
    }

    #[test]
    fn arity_and_proof_checks() {
        let mut c = sets();
        let g = c.theories.get_mut("graphs").unwrap();
        g.statements[0].content.push(Content::Formula(MathObject::apply(
            MathObject::sym("sets", "union"),
            vec![],
        )));
        g.statements
            .push(statement("pf", StatementKind::Proof, vec![Ref::new("graphs", "ex")]));
        g.statements.push(statement("ex", StatementKind::Axiom, vec![]));
        let codes: Vec<ViolationCode> = validate(&c).into_iter().map(|v| v.code).collect();
        assert!(codes.contains(&ViolationCode::ArityMismatch));
        assert!(codes.contains(&ViolationCode::ProofWithoutTheorem));
        assert!(codes.contains(&ViolationCode::DuplicateId));
    }

    #[test]
    fn validate_is_idempotent() {
        let mut c = sets();
        c.theories.get_mut("graphs").unwrap().imports.push("nosuch".into());
        assert_eq!(validate(&c), validate(&c));
        assert_eq!(validate(&c).len(), 1);
    }
}
