use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use super::math::{parse_math, Scope, ScopeEntry};
use super::{BodyItem, ParseError, Run, SourceModule};
use crate::notation::NotationTemplate;
use crate::omdoc::{
    Content, ProofStep, Ref, Statement, StatementKind, SymbolInfo, SymbolRef, Theory,
    TheoryCollection,
};

#[derive(Clone, Debug, Error, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ResolveError {
    #[error("module `{id}` is defined more than once")]
    DuplicateModule { id: String },
    #[error("module `{module}` imports unknown module `{target}`")]
    MissingImport { module: String, target: String },
    #[error("import cycle: {}", cycle.join(" -> "))]
    ImportCycle { cycle: Vec<String> },
    #[error("module `{module}`: `{id}` names more than one symbol or statement")]
    DuplicateId { module: String, id: String },
    #[error("module `{module}`, {statement}: unresolved for_ref \"{reference}\"")]
    UnresolvedFor {
        module: String,
        statement: String,
        reference: String,
    },
    #[error("module `{module}`, {statement} step {step}: unresolved justification \"{reference}\"")]
    UnresolvedJustification {
        module: String,
        statement: String,
        step: usize,
        reference: String,
    },
    #[error("module `{module}`, {statement}: in `{source_text}`: {error}")]
    Math {
        module: String,
        statement: String,
        source_text: String,
        error: ParseError,
    },
}

/// Resolves a module set, reporting the first problem found.
pub fn resolve(modules: &[SourceModule], base_uri: &str) -> Result<TheoryCollection, ResolveError> {
    resolve_all(modules, base_uri).map_err(|mut errors| errors.remove(0))
}

/// Resolves a module set, reporting every problem found (never an empty list).
///
/// Import problems are reported alone: scopes cannot be computed until the
/// import graph is complete and acyclic.
pub fn resolve_all(
    modules: &[SourceModule],
    base_uri: &str,
) -> Result<TheoryCollection, Vec<ResolveError>> {
    let mut by_id: BTreeMap<&str, &SourceModule> = BTreeMap::new();
    let mut errors = Vec::new();
    for m in modules {
        if by_id.insert(&m.id, m).is_some() {
            errors.push(ResolveError::DuplicateModule { id: m.id.clone() });
        }
    }
    for m in by_id.values() {
        for target in &m.imports {
            if !by_id.contains_key(target.as_str()) {
                errors.push(ResolveError::MissingImport {
                    module: m.id.clone(),
                    target: target.clone(),
                });
            }
        }
    }
    errors.extend(import_cycles(&by_id));
    if !errors.is_empty() {
        errors.dedup();
        return Err(errors);
    }

    let symbols: BTreeMap<&str, Vec<SymbolInfo>> =
        by_id.iter().map(|(id, m)| (*id, symbol_infos(m))).collect();
    let fragments: BTreeMap<&str, Fragments> = by_id
        .iter()
        .map(|(id, m)| {
            let f = fragments(m, &symbols[id]);
            for dup in &f.duplicates {
                errors.push(ResolveError::DuplicateId {
                    module: id.to_string(),
                    id: dup.clone(),
                });
            }
            (*id, f)
        })
        .collect();

    let mut collection = TheoryCollection::new(base_uri);
    for (id, module) in &by_id {
        let order = import_order(id, &by_id);
        let scope = scope_for(&order, &symbols);
        let mut ctx = ModuleCtx {
            module: id,
            order: &order,
            fragments: &fragments,
            scope: &scope,
            errors: &mut errors,
        };
        let statements = ctx.statements(module);
        collection.insert(Theory {
            id: id.to_string(),
            imports: module.imports.clone(),
            symbols: symbols[id].clone(),
            statements,
        });
    }
    if errors.is_empty() {
        Ok(collection)
    } else {
        Err(errors)
    }
}

fn symbol_infos(module: &SourceModule) -> Vec<SymbolInfo> {
    let mut out: Vec<SymbolInfo> = module
        .symbols()
        .map(|s| SymbolInfo {
            name: s.name.clone(),
            arity: s.arity,
            precedence: s.precedence,
            notation: s.template.clone(),
            variants: BTreeMap::new(),
        })
        .collect();
    for item in &module.body {
        if let BodyItem::Variant(v) = item {
            if let Some(info) = out.iter_mut().find(|s| s.name == v.symbol) {
                info.variants.insert(v.key.clone(), v.template.clone());
            }
        }
    }
    out
}

struct Fragments {
    symbols: BTreeSet<String>,
    /// Statement ids in source order, explicit or generated.
    statements: Vec<(String, bool)>,
    duplicates: Vec<String>,
}

impl Fragments {
    fn contains(&self, name: &str) -> bool {
        self.symbols.contains(name) || self.statements.iter().any(|(id, _)| id == name)
    }
}

fn fragments(module: &SourceModule, symbols: &[SymbolInfo]) -> Fragments {
    let mut seen = BTreeSet::new();
    let mut duplicates = Vec::new();
    for s in symbols {
        seen.insert(s.name.clone());
    }
    let mut ordinals: BTreeMap<StatementKind, usize> = BTreeMap::new();
    let mut statements = Vec::new();
    for stmt in module.statements() {
        let ordinal = ordinals.entry(stmt.kind).or_insert(0);
        *ordinal += 1;
        let (id, generated) = match &stmt.id {
            Some(id) => (id.clone(), false),
            None => (format!("{}-{}", stmt.kind.keyword(), ordinal), true),
        };
        if !seen.insert(id.clone()) {
            duplicates.push(id.clone());
        }
        statements.push((id, generated));
    }
    Fragments {
        symbols: symbols.iter().map(|s| s.name.clone()).collect(),
        statements,
        duplicates,
    }
}

/// The module itself, then its transitive imports breadth-first in declaration order.
fn import_order(id: &str, modules: &BTreeMap<&str, &SourceModule>) -> Vec<String> {
    let mut order = vec![id.to_string()];
    let mut seen: BTreeSet<&str> = BTreeSet::from([id]);
    let mut queue = VecDeque::from([id]);
    while let Some(current) = queue.pop_front() {
        for next in &modules[current].imports {
            if seen.insert(next) {
                order.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    order
}

fn scope_for(order: &[String], symbols: &BTreeMap<&str, Vec<SymbolInfo>>) -> Scope {
    let mut scope = Scope::new();
    for theory in order {
        for s in &symbols[theory.as_str()] {
            let mut notations: Vec<NotationTemplate> = vec![s.notation.clone()];
            notations.extend(s.variants.values().cloned());
            scope.insert(
                s.name.clone(),
                ScopeEntry {
                    symbol: SymbolRef::new(theory.clone(), s.name.clone()),
                    arity: s.arity,
                    precedence: s.precedence,
                    notations,
                },
            );
        }
    }
    scope
}

/// One error per distinct cycle, each rotated to start at its smallest module id.
fn import_cycles(modules: &BTreeMap<&str, &SourceModule>) -> Vec<ResolveError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit<'a>(
        id: &'a str,
        modules: &BTreeMap<&str, &'a SourceModule>,
        marks: &mut BTreeMap<&'a str, Mark>,
        path: &mut Vec<&'a str>,
        cycles: &mut BTreeSet<Vec<String>>,
    ) {
        marks.insert(id, Mark::Active);
        path.push(id);
        for next in &modules[id].imports {
            let next = next.as_str();
            if !modules.contains_key(next) {
                continue;
            }
            match marks.get(next) {
                Some(Mark::Active) => {
                    let start = path.iter().position(|p| *p == next).unwrap_or(0);
                    let mut cycle: Vec<String> = path[start..].iter().map(|s| s.to_string()).collect();
                    let min = (0..cycle.len()).min_by_key(|&i| &cycle[i]).unwrap_or(0);
                    cycle.rotate_left(min);
                    cycle.push(cycle[0].clone());
                    cycles.insert(cycle);
                }
                Some(Mark::Done) => {}
                None => visit(next, modules, marks, path, cycles),
            }
        }
        path.pop();
        marks.insert(id, Mark::Done);
    }

    let mut marks = BTreeMap::new();
    let mut cycles = BTreeSet::new();
    for id in modules.keys() {
        if !marks.contains_key(id) {
            visit(id, modules, &mut marks, &mut Vec::new(), &mut cycles);
        }
    }
    cycles
        .into_iter()
        .map(|cycle| ResolveError::ImportCycle { cycle })
        .collect()
}

struct ModuleCtx<'a> {
    module: &'a str,
    order: &'a [String],
    fragments: &'a BTreeMap<&'a str, Fragments>,
    scope: &'a Scope,
    errors: &'a mut Vec<ResolveError>,
}

impl ModuleCtx<'_> {
    fn statements(&mut self, module: &SourceModule) -> Vec<Statement> {
        let ids = &self.fragments[self.module].statements;
        module
            .statements()
            .zip(ids)
            .map(|(env, (id, generated))| {
                let for_targets = env
                    .for_refs
                    .iter()
                    .filter_map(|r| {
                        let found = self.reference(r);
                        if found.is_none() {
                            self.errors.push(ResolveError::UnresolvedFor {
                                module: self.module.to_string(),
                                statement: id.clone(),
                                reference: r.clone(),
                            });
                        }
                        found
                    })
                    .collect();
                let content = self.content(id, &env.content);
                let steps = env
                    .steps
                    .iter()
                    .map(|step| {
                        let justification = step.justification.as_ref().and_then(|r| {
                            let found = self.reference(r);
                            if found.is_none() {
                                self.errors.push(ResolveError::UnresolvedJustification {
                                    module: self.module.to_string(),
                                    statement: id.clone(),
                                    step: step.index,
                                    reference: r.clone(),
                                });
                            }
                            found
                        });
                        ProofStep {
                            index: step.index,
                            content: self.content(id, &step.content),
                            justification,
                        }
                    })
                    .collect();
                Statement {
                    id: id.clone(),
                    generated_id: *generated,
                    kind: env.kind,
                    for_targets,
                    content,
                    steps,
                }
            })
            .collect()
    }

    fn content(&mut self, statement: &str, runs: &[Run]) -> Vec<Content> {
        runs.iter()
            .filter_map(|run| match run {
                Run::Prose(text) => Some(Content::Prose(text.clone())),
                Run::Math(src) => match parse_math(src, self.scope) {
                    Ok(obj) => Some(Content::Formula(obj)),
                    Err(error) => {
                        self.errors.push(ResolveError::Math {
                            module: self.module.to_string(),
                            statement: statement.to_string(),
                            source_text: src.clone(),
                            error,
                        });
                        None
                    }
                },
            })
            .collect()
    }

    /// `name` searches this module, then its imports breadth-first;
    /// `theory?name` names the theory explicitly.
    fn reference(&self, reference: &str) -> Option<Ref> {
        if let Some((theory, name)) = reference.split_once('?') {
            let f = self.fragments.get(theory)?;
            return f.contains(name).then(|| Ref::new(theory, name));
        }
        self.order
            .iter()
            .find(|t| self.fragments[t.as_str()].contains(reference))
            .map(|t| Ref::new(t.clone(), reference))
    }
}
