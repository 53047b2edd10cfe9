//! Random generators and brute-force oracles shared by the integration tests.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use lectures_core::notation::{Arity, NotationTemplate};
use lectures_core::omdoc::{
    Content, MathObject, ProofStep, Ref, Statement, StatementKind, SymbolInfo, SymbolRef, Theory,
    TheoryCollection,
};
use lectures_core::rdf::{Term, Triple, TripleSet, Vocabulary, RDF_TYPE};
use lectures_core::render::RenderContext;
use lectures_core::stex::{self, Scope, ScopeEntry};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const BASE: &str = "http://example.org/notes";

/// Directory holding the sample lecture notes.
pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Every `.stex` file of the sample corpus, keyed by file name.
pub fn corpus_files() -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(corpus_dir()).expect("corpus directory") {
        let path = entry.expect("corpus entry").path();
        if path.extension().is_some_and(|e| e == "stex") {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            out.insert(name, std::fs::read_to_string(&path).expect("corpus file"));
        }
    }
    out
}

/// Compiles sources straight to a collection, panicking on any error.
pub fn compile(sources: &[&str], base: &str) -> TheoryCollection {
    let modules: Vec<_> = sources
        .iter()
        .map(|s| stex::parse_module(s).unwrap_or_else(|e| panic!("{e}")))
        .collect();
    stex::resolve(&modules, base).unwrap_or_else(|e| panic!("{e}"))
}

/// A corpus with exactly one symbol nothing exemplifies (`gaps#lonely`) and
/// one proof step without justification (step 2 of `gaps#pf`).
pub const GAP_CORPUS: &str = r"\begin{module}[id=gaps]
\symdef{covered}{c}
\symdef{lonely}{l}
\begin{definition}[id=covered-def, for=covered]A covered concept $\covered$.\end{definition}
\begin{definition}[id=lonely-def, for=lonely]A concept nobody illustrates: $\lonely$.\end{definition}
\begin{example}[id=covered-ex, for=covered]$\covered$ in use.\end{example}
\begin{theorem}[id=thm, for=covered]Something about $\covered$.\end{theorem}
\begin{proof}[id=pf, for=thm]
\step[just=covered-def]{Unfold the definition.}
\step{Then it is obvious.}
\step[just=thm]{Conclude.}
\end{proof}
\end{module}";

// ---------------------------------------------------------------------------
// Formulas that survive linearize → parse_math.

/// Module declaring the symbols random formulas are built from.
pub const FUZZ_MODULE: &str = r"\begin{module}[id=fuzz]
\symdef{emptyset}{\emptyset}
\symdef{union}[prec=500]{#*[\cup]}
\symdef{inter}[prec=500]{#*[\cap]}
\symdef{conj}[prec=700]{#*[\wedge]}
\symdef{compl}[prec=600]{\overline{#1}}
\symdef{neg}[prec=900]{\neg #1!900}
\symdef{times}[prec=800]{#1!800 \times #2!801}
\symdef{impl}[prec=400]{#1!401 \Rightarrow #2!400}
\symdef{incl}[prec=300]{#1!301 \subseteq #2!301}
\symdef{binom}{\binom{#1}{#2}}
\symvariant{binom}{fr}{\mathcal{C}^{#2}_{#1}}
\symdef{pair}{\langle #1, #2 \rangle}
\end{module}";

pub struct FuzzVocabulary {
    pub collection: TheoryCollection,
    pub scope: Scope,
    pub context: RenderContext,
}

impl FuzzVocabulary {
    pub fn new() -> Self {
        let collection = compile(&[FUZZ_MODULE], BASE);
        let theory = &collection.theories["fuzz"];
        let mut scope = Scope::new();
        for s in &theory.symbols {
            let mut notations = vec![s.notation.clone()];
            notations.extend(s.variants.values().cloned());
            scope.insert(
                s.name.clone(),
                ScopeEntry {
                    symbol: SymbolRef::new("fuzz", s.name.clone()),
                    arity: s.arity,
                    precedence: s.precedence,
                    notations,
                },
            );
        }
        let context = RenderContext::from_collection(&collection);
        FuzzVocabulary {
            collection,
            scope,
            context,
        }
    }

    fn symbols(&self) -> &[SymbolInfo] {
        &self.collection.theories["fuzz"].symbols
    }

    /// A random formula whose default rendering reads back to itself.
    ///
    /// Excluded by construction: binders, negative numbers, flexary
    /// applications with fewer than two arguments, bare symbols that take
    /// arguments, and a flexary argument directly under a different flexary
    /// operator of the same precedence (`a ∪ b ∩ c` has no unique reading).
    pub fn random_object<R: Rng + ?Sized>(&self, rng: &mut R, depth: usize) -> MathObject {
        self.object(rng, depth, None)
    }

    fn object<R: Rng + ?Sized>(&self, rng: &mut R, depth: usize, flex_parent: Option<i32>) -> MathObject {
        if depth == 0 || rng.random_bool(0.3) {
            return match rng.random_range(0..5) {
                0 => MathObject::Int(rng.random_range(0..200)),
                1 => MathObject::sym("fuzz", "emptyset"),
                _ => {
                    let c = *b"abcdefghijkmnpqrstuvwxyzABCDEFHKMNPQRSTUVWXYZ".choose(rng).unwrap();
                    MathObject::var(&(c as char).to_string())
                }
            };
        }
        let candidates: Vec<&SymbolInfo> = self
            .symbols()
            .iter()
            .filter(|s| s.arity != Arity::Fixed(0))
            .filter(|s| !(s.arity == Arity::Flexary && flex_parent == Some(s.precedence)))
            .collect();
        let s = candidates.choose(rng).unwrap();
        let (n, flex) = match s.arity {
            Arity::Fixed(n) => (n, None),
            Arity::Flexary => (rng.random_range(2..=4), Some(s.precedence)),
        };
        let args = (0..n).map(|_| self.object(rng, depth - 1, flex)).collect();
        MathObject::apply(MathObject::sym("fuzz", &s.name), args)
    }
}

impl Default for FuzzVocabulary {
    fn default() -> Self {
        Self::new()
    }
}

// ---------------------------------------------------------------------------
// Random valid collections.

const PROSE_ALPHABET: &[char] = &[
    'a', 'b', 'x', 'Z', '0', '7', ' ', ',', '.', '<', '>', '&', '"', '\'', 'é', '∪', '$', '{', '}',
];

fn random_word<R: Rng + ?Sized>(rng: &mut R, len: usize) -> String {
    (0..len).map(|_| (b'a' + rng.random_range(0..26)) as char).collect()
}

fn random_prose<R: Rng + ?Sized>(rng: &mut R) -> String {
    let len = rng.random_range(1..24);
    (0..len).map(|_| *PROSE_ALPHABET.choose(rng).unwrap()).collect()
}

fn random_template<R: Rng + ?Sized>(rng: &mut R, arity: Arity) -> NotationTemplate {
    let text = match arity {
        Arity::Flexary => format!("#*[{}]", ["+", r"\cup", ",", r"\circ"].choose(rng).unwrap()),
        Arity::Fixed(0) => [r"\emptyset", "e", r"\mathbb{N}"].choose(rng).unwrap().to_string(),
        Arity::Fixed(n) => {
            let slots: Vec<String> = (1..=n)
                .map(|i| {
                    if rng.random_bool(0.5) {
                        format!("#{i}!{}", rng.random_range(0..1200))
                    } else {
                        format!("#{i}")
                    }
                })
                .collect();
            format!("f_{{{}}}({})", random_word(rng, 1), slots.join(", "))
        }
    };
    NotationTemplate::parse(&text).expect("generated template")
}

/// A formula over `symbols` (theory, info) with matching arities.
fn random_formula<R: Rng + ?Sized>(
    rng: &mut R,
    symbols: &[(String, SymbolInfo)],
    depth: usize,
) -> MathObject {
    let leaf = depth == 0 || rng.random_bool(0.35);
    if leaf || symbols.is_empty() {
        return match rng.random_range(0..3) {
            0 => MathObject::Int(rng.random_range(-50..50)),
            1 if !symbols.is_empty() => {
                let (t, s) = symbols.choose(rng).unwrap();
                MathObject::sym(t, &s.name)
            }
            _ => {
                let len = rng.random_range(1..3);
                MathObject::var(&random_word(rng, len))
            }
        };
    }
    if rng.random_bool(0.15) {
        let (t, s) = symbols.choose(rng).unwrap();
        let vars: BTreeSet<String> = (0..rng.random_range(1..3)).map(|_| random_word(rng, 1)).collect();
        return MathObject::Bind {
            binder: Box::new(MathObject::sym(t, &s.name)),
            vars: vars.into_iter().collect(),
            body: Box::new(random_formula(rng, symbols, depth - 1)),
        };
    }
    let applicable: Vec<&(String, SymbolInfo)> =
        symbols.iter().filter(|(_, s)| s.arity != Arity::Fixed(0)).collect();
    let Some((t, s)) = applicable.choose(rng) else {
        return MathObject::var("x");
    };
    let n = match s.arity {
        Arity::Fixed(n) => n,
        Arity::Flexary => rng.random_range(1..4),
    };
    MathObject::apply(
        MathObject::sym(t, &s.name),
        (0..n).map(|_| random_formula(rng, symbols, depth - 1)).collect(),
    )
}

fn random_content<R: Rng + ?Sized>(rng: &mut R, symbols: &[(String, SymbolInfo)]) -> Vec<Content> {
    (0..rng.random_range(0..4))
        .map(|_| {
            if rng.random_bool(0.5) {
                Content::Prose(random_prose(rng))
            } else {
                Content::Formula(random_formula(rng, symbols, 3))
            }
        })
        .collect()
}

/// A collection that passes validation: imports only point backwards,
/// references resolve, proofs target theorems, steps are numbered from 1.
pub fn random_collection<R: Rng + ?Sized>(rng: &mut R) -> TheoryCollection {
    let mut collection = TheoryCollection::new(BASE);
    let n_theories = rng.random_range(1..5);
    let ids: Vec<String> = (0..n_theories).map(|i| format!("t{i}-{}", random_word(rng, 3))).collect();

    // Symbols first so formulas anywhere may use any of them.
    let mut all_symbols: Vec<(String, SymbolInfo)> = Vec::new();
    let mut per_theory: Vec<Vec<SymbolInfo>> = Vec::new();
    for id in &ids {
        let mut names = BTreeSet::new();
        for _ in 0..rng.random_range(0..4) {
            let len = rng.random_range(2..6);
            names.insert(random_word(rng, len));
        }
        let mut symbols = Vec::new();
        for name in names {
            let arity = if rng.random_bool(0.25) {
                Arity::Flexary
            } else {
                Arity::Fixed(rng.random_range(0..3))
            };
            let mut variants = BTreeMap::new();
            if rng.random_bool(0.3) {
                variants.insert("fr".to_string(), random_template(rng, arity));
            }
            let info = SymbolInfo {
                name: name.clone(),
                arity,
                precedence: rng.random_range(0..1100),
                notation: random_template(rng, arity),
                variants,
            };
            all_symbols.push((id.clone(), info.clone()));
            symbols.push(info);
        }
        per_theory.push(symbols);
    }

    let mut refs: Vec<(Ref, Option<StatementKind>)> = all_symbols
        .iter()
        .map(|(t, s)| (Ref::new(t.clone(), s.name.clone()), None))
        .collect();
    for (i, id) in ids.iter().enumerate() {
        let mut theory = Theory::new(id.clone());
        for other in ids.iter().take(i) {
            if rng.random_bool(0.4) {
                theory.imports.push(other.clone());
            }
        }
        theory.symbols = per_theory[i].clone();
        let taken: BTreeSet<String> = theory.symbols.iter().map(|s| s.name.clone()).collect();
        let mut counts: BTreeMap<StatementKind, usize> = BTreeMap::new();
        for _ in 0..rng.random_range(0..6) {
            let kind = *StatementKind::ALL.choose(rng).unwrap();
            let ordinal = {
                let c = counts.entry(kind).or_default();
                *c += 1;
                *c
            };
            let generated = rng.random_bool(0.5);
            let id = if generated {
                format!("{}-{ordinal}", kind.keyword())
            } else {
                format!("s{}-{}", theory.statements.len(), random_word(rng, 3))
            };
            if taken.contains(&id) || theory.statement(&id).is_some() {
                continue;
            }
            let symbol_refs: Vec<Ref> = refs.iter().filter(|(_, k)| k.is_none()).map(|(r, _)| r.clone()).collect();
            let theorem_refs: Vec<Ref> = refs
                .iter()
                .filter(|(_, k)| *k == Some(StatementKind::Theorem))
                .map(|(r, _)| r.clone())
                .collect();
            let for_targets: Vec<Ref> = match kind {
                StatementKind::Definition => match symbol_refs.choose(rng) {
                    Some(r) => vec![r.clone()],
                    None => continue,
                },
                StatementKind::Proof => match theorem_refs.choose(rng) {
                    Some(r) => vec![r.clone()],
                    None => continue,
                },
                _ => {
                    let pool: Vec<&Ref> = refs.iter().map(|(r, _)| r).collect();
                    let mut chosen = BTreeSet::new();
                    for _ in 0..rng.random_range(0..3) {
                        if let Some(r) = pool.choose(rng) {
                            chosen.insert((*r).clone());
                        }
                    }
                    chosen.into_iter().collect()
                }
            };
            let steps = if kind == StatementKind::Proof {
                (1..=rng.random_range(0..4))
                    .map(|index| ProofStep {
                        index,
                        content: random_content(rng, &all_symbols),
                        justification: if rng.random_bool(0.6) {
                            refs.choose(rng).map(|(r, _)| r.clone())
                        } else {
                            None
                        },
                    })
                    .collect()
            } else {
                Vec::new()
            };
            theory.statements.push(Statement {
                id: id.clone(),
                generated_id: generated,
                kind,
                for_targets,
                content: random_content(rng, &all_symbols),
                steps,
            });
            refs.push((Ref::new(theory.id.clone(), id), Some(kind)));
        }
        collection.insert(theory);
    }
    collection
}

// ---------------------------------------------------------------------------
// Graph oracles.

/// A random directed graph on `n` nodes (self-loops and cycles allowed).
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, max_nodes: usize) -> (usize, Vec<(usize, usize)>) {
    let n = rng.random_range(1..=max_nodes);
    let density = rng.random_range(0.0..0.5);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.random_bool(density) {
                edges.push((a, b));
            }
        }
    }
    (n, edges)
}

/// Reachability matrix by Warshall's algorithm; `reflexive` adds the diagonal.
pub fn closure_matrix(n: usize, edges: &[(usize, usize)], reflexive: bool) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n]; n];
    for &(a, b) in edges {
        m[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if m[i][k] {
                for j in 0..n {
                    if m[k][j] {
                        m[i][j] = true;
                    }
                }
            }
        }
    }
    if reflexive {
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = true;
        }
    }
    m
}

fn objects_of<'a>(triples: &'a TripleSet, predicate: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> + 'a {
    triples.iter().filter(move |t| t.predicate == predicate).filter_map(|t| match &t.object {
        Term::Iri(o) => Some((t.subject.as_str(), o.as_str())),
        Term::Literal(_) => None,
    })
}

fn typed<'a>(triples: &'a TripleSet, class: &str) -> BTreeSet<&'a str> {
    triples
        .iter()
        .filter(|t| t.predicate == RDF_TYPE && t.object == Term::Iri(class.to_string()))
        .map(|t| t.subject.as_str())
        .collect()
}

/// Theories reachable from `start` over imports, including `start`, by
/// fixpoint iteration over the raw triples.
pub fn brute_import_closure(triples: &TripleSet, vocab: &Vocabulary, start: &str) -> BTreeSet<String> {
    let imports = vocab.term("imports");
    let mut reached = BTreeSet::from([start.to_string()]);
    loop {
        let before = reached.len();
        let next: Vec<String> = objects_of(triples, &imports)
            .filter(|(s, _)| reached.contains(*s))
            .map(|(_, o)| o.to_string())
            .collect();
        reached.extend(next);
        if reached.len() == before {
            return reached;
        }
    }
}

/// `(concept, example)` pairs by scanning every triple.
pub fn brute_examples_for(
    triples: &TripleSet,
    vocab: &Vocabulary,
    topic: &str,
    prereqs: &[&str],
) -> Vec<(String, String)> {
    let mut allowed = BTreeSet::from([topic.to_string()]);
    for p in prereqs {
        allowed.extend(brute_import_closure(triples, vocab, p));
    }
    let declares = vocab.term("declares");
    let concepts: BTreeSet<&str> = objects_of(triples, &declares)
        .filter(|(s, _)| *s == topic)
        .map(|(_, o)| o)
        .collect();
    let examples = typed(triples, &vocab.term("Example"));
    let exemplifies = vocab.term("exemplifies");
    let mut out: BTreeSet<(String, String)> = BTreeSet::new();
    for (e, c) in objects_of(triples, &exemplifies) {
        let home = e.split('#').next().unwrap_or(e);
        if concepts.contains(c) && examples.contains(e) && allowed.contains(home) {
            out.insert((c.to_string(), e.to_string()));
        }
    }
    out.into_iter().collect()
}

/// `(symbols never exemplified, proof steps never justified)` by scanning every triple.
pub fn brute_gaps(triples: &TripleSet, vocab: &Vocabulary) -> (Vec<String>, Vec<String>) {
    let exemplifies = vocab.term("exemplifies");
    let justified_by = vocab.term("justifiedBy");
    let symbols = typed(triples, &vocab.term("Symbol"));
    let steps = typed(triples, &vocab.term("ProofStep"));
    let concepts = symbols
        .into_iter()
        .filter(|s| !triples.iter().any(|t| t.predicate == exemplifies && t.object.value() == *s))
        .map(str::to_string)
        .collect();
    let unjustified = steps
        .into_iter()
        .filter(|s| !triples.iter().any(|t| t.predicate == justified_by && t.subject == *s))
        .map(str::to_string)
        .collect();
    (concepts, unjustified)
}

/// Import triples for a graph whose node `i` is theory `{base}/g{i}`.
pub fn graph_triples(vocab: &Vocabulary, n: usize, edges: &[(usize, usize)]) -> (Vec<String>, TripleSet) {
    let nodes: Vec<String> = (0..n).map(|i| format!("{BASE}/g{i}")).collect();
    let mut triples = TripleSet::new();
    for node in &nodes {
        triples.insert(Triple::new(node, RDF_TYPE, Term::Iri(vocab.term("Theory"))));
    }
    for &(a, b) in edges {
        triples.insert(Triple::new(&nodes[a], vocab.term("imports"), Term::Iri(nodes[b].clone())));
    }
    (nodes, triples)
}

// ---------------------------------------------------------------------------
// Independent RDF parsing.

fn convert(t: oxrdf::Triple) -> Triple {
    let subject = match t.subject {
        oxrdf::NamedOrBlankNode::NamedNode(n) => n.into_string(),
        oxrdf::NamedOrBlankNode::BlankNode(b) => panic!("unexpected blank node {b}"),
    };
    let object = match t.object {
        oxrdf::Term::NamedNode(n) => Term::Iri(n.into_string()),
        oxrdf::Term::Literal(l) => {
            assert_eq!(l.datatype(), oxrdf::vocab::xsd::STRING, "plain literal expected");
            Term::Literal(l.value().to_string())
        }
        other => panic!("unexpected object {other}"),
    };
    Triple::new(subject, t.predicate.into_string(), object)
}

/// Parses Turtle with a third-party parser.
pub fn parse_turtle(text: &str) -> Result<TripleSet, String> {
    oxttl::TurtleParser::new()
        .for_slice(text.as_bytes())
        .map(|r| r.map(convert).map_err(|e| e.to_string()))
        .collect()
}

/// Parses N-Triples with a third-party parser.
pub fn parse_ntriples(text: &str) -> Result<TripleSet, String> {
    oxttl::NTriplesParser::new()
        .for_slice(text.as_bytes())
        .map(|r| r.map(convert).map_err(|e| e.to_string()))
        .collect()
}
