use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use super::pattern::{PathMod, Pattern, PatternError, PatternTerm, TriplePattern};
use crate::rdf::{Term, Triple, TripleSet, Vocabulary, RDFS_NS, RDF_NS};

/// Variable name → value.
pub type Binding = BTreeMap<String, Term>;

type Id = u32;

/// In-memory triple store with three index orders.
#[derive(Clone, Debug)]
pub struct Store {
    terms: Vec<Term>,
    ids: HashMap<Term, Id>,
    spo: BTreeSet<(Id, Id, Id)>,
    pos: BTreeSet<(Id, Id, Id)>,
    osp: BTreeSet<(Id, Id, Id)>,
    prefixes: BTreeMap<String, String>,
}

impl PartialEq for Store {
    fn eq(&self, other: &Self) -> bool {
        self.prefixes == other.prefixes && self.triples() == other.triples()
    }
}

impl Eq for Store {}

impl Default for Store {
    fn default() -> Self {
        Store::new(&Vocabulary::default())
    }
}

impl Store {
    /// Empty store with prefixes `rdf`, `rdfs` and `o` (the ontology namespace).
    pub fn new(vocab: &Vocabulary) -> Self {
        let prefixes = [
            ("rdf", RDF_NS),
            ("rdfs", RDFS_NS),
            ("o", vocab.namespace()),
        ]
        .into_iter()
        .map(|(p, ns)| (p.to_string(), ns.to_string()))
        .collect();
        Store {
            terms: Vec::new(),
            ids: HashMap::new(),
            spo: BTreeSet::new(),
            pos: BTreeSet::new(),
            osp: BTreeSet::new(),
            prefixes,
        }
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    fn intern(&mut self, term: Term) -> Id {
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = Id::try_from(self.terms.len()).expect("term table overflow");
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    fn id(&self, term: &Term) -> Option<Id> {
        self.ids.get(term).copied()
    }

    fn term(&self, id: Id) -> &Term {
        &self.terms[id as usize]
    }

    /// Adds triples; already present ones are ignored.
    pub fn load<'a>(&mut self, triples: impl IntoIterator<Item = &'a Triple>) {
        for t in triples {
            let s = self.intern(Term::Iri(t.subject.clone()));
            let p = self.intern(Term::Iri(t.predicate.clone()));
            let o = self.intern(t.object.clone());
            self.spo.insert((s, p, o));
            self.pos.insert((p, o, s));
            self.osp.insert((o, s, p));
        }
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    pub fn triples(&self) -> TripleSet {
        self.spo
            .iter()
            .map(|&(s, p, o)| {
                Triple::new(
                    self.term(s).value(),
                    self.term(p).value(),
                    self.term(o).clone(),
                )
            })
            .collect()
    }

    /// Consistency check between the three indexes.
    pub fn indexes_agree(&self) -> bool {
        let from_pos: BTreeSet<_> = self.pos.iter().map(|&(p, o, s)| (s, p, o)).collect();
        let from_osp: BTreeSet<_> = self.osp.iter().map(|&(o, s, p)| (s, p, o)).collect();
        from_pos == self.spo && from_osp == self.spo
    }

    fn expand(&self, term: &PatternTerm) -> Result<Option<Term>, PatternError> {
        Ok(match term {
            PatternTerm::Var(_) => None,
            PatternTerm::Iri(i) => Some(Term::Iri(i.clone())),
            PatternTerm::Literal(l) => Some(Term::Literal(l.clone())),
            PatternTerm::Prefixed { prefix, local } => {
                let ns = self
                    .prefixes
                    .get(prefix)
                    .ok_or_else(|| PatternError::new(format!("unknown prefix `{prefix}:`")))?;
                Some(Term::Iri(format!("{ns}{local}")))
            }
        })
    }

    /// All bindings satisfying every triple pattern, sorted by their values
    /// in variable-name order, without duplicates.
    pub fn select(&self, pattern: &Pattern) -> Result<Vec<Binding>, PatternError> {
        let compiled = pattern
            .triples
            .iter()
            .map(|t| self.compile(t))
            .collect::<Result<Vec<_>, _>>()?;
        let mut solutions: Vec<Binding> = vec![Binding::new()];
        for tp in &compiled {
            let mut next = Vec::new();
            for sol in &solutions {
                self.extend(tp, sol, &mut next);
            }
            solutions = next;
            if solutions.is_empty() {
                break;
            }
        }
        let unique: BTreeSet<Vec<(String, Term)>> =
            solutions.into_iter().map(|b| b.into_iter().collect()).collect();
        Ok(unique.into_iter().map(|v| v.into_iter().collect()).collect())
    }

    fn compile(&self, tp: &TriplePattern) -> Result<Compiled, PatternError> {
        let slot = |t: &PatternTerm| -> Result<Slot, PatternError> {
            Ok(match t {
                PatternTerm::Var(v) => Slot::Var(v.clone()),
                other => Slot::Const(self.expand(other)?.expect("constant term")),
            })
        };
        let predicate = slot(&tp.predicate)?;
        if tp.path != PathMod::Plain && matches!(predicate, Slot::Var(_)) {
            return Err(PatternError::new(format!(
                "property path `{}` needs a constant predicate",
                tp.predicate
            )));
        }
        Ok(Compiled {
            subject: slot(&tp.subject)?,
            predicate,
            path: tp.path,
            object: slot(&tp.object)?,
        })
    }

    fn extend(&self, tp: &Compiled, sol: &Binding, out: &mut Vec<Binding>) {
        let s = tp.subject.resolve(sol);
        let p = tp.predicate.resolve(sol);
        let o = tp.object.resolve(sol);
        let pairs: Vec<(Term, Term, Term)> = match tp.path {
            PathMod::Plain => self.match_plain(s.as_ref(), p.as_ref(), o.as_ref()),
            PathMod::Plus | PathMod::Star => {
                let p = p.expect("path predicates are constant");
                self.match_path(s.as_ref(), &p, o.as_ref(), tp.path == PathMod::Star)
                    .into_iter()
                    .map(|(a, b)| (a, p.clone(), b))
                    .collect()
            }
        };
        'candidates: for (cs, cp, co) in pairs {
            let mut b = sol.clone();
            for (slot, value) in [(&tp.subject, cs), (&tp.predicate, cp), (&tp.object, co)] {
                if let Slot::Var(v) = slot {
                    match b.get(v) {
                        Some(existing) if *existing != value => continue 'candidates,
                        Some(_) => {}
                        None => {
                            b.insert(v.clone(), value);
                        }
                    }
                }
            }
            out.push(b);
        }
    }

    fn match_plain(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Vec<(Term, Term, Term)> {
        let lookup = |t: Option<&Term>| -> Result<Option<Id>, ()> {
            match t {
                None => Ok(None),
                Some(t) => self.id(t).map(Some).ok_or(()),
            }
        };
        let (Ok(s), Ok(p), Ok(o)) = (lookup(s), lookup(p), lookup(o)) else {
            return Vec::new();
        };
        let full = |a: Id| (a, Id::MIN, Id::MIN)..=(a, Id::MAX, Id::MAX);
        let pair = |a: Id, b: Id| (a, b, Id::MIN)..=(a, b, Id::MAX);
        let ids: Vec<(Id, Id, Id)> = match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                if self.spo.contains(&(s, p, o)) {
                    vec![(s, p, o)]
                } else {
                    Vec::new()
                }
            }
            (Some(s), Some(p), None) => self.spo.range(pair(s, p)).copied().collect(),
            (Some(s), None, Some(o)) => self.osp.range(pair(o, s)).map(|&(o, s, p)| (s, p, o)).collect(),
            (Some(s), None, None) => self.spo.range(full(s)).copied().collect(),
            (None, Some(p), Some(o)) => self.pos.range(pair(p, o)).map(|&(p, o, s)| (s, p, o)).collect(),
            (None, Some(p), None) => self.pos.range(full(p)).map(|&(p, o, s)| (s, p, o)).collect(),
            (None, None, Some(o)) => self.osp.range(full(o)).map(|&(o, s, p)| (s, p, o)).collect(),
            (None, None, None) => self.spo.iter().copied().collect(),
        };
        ids.into_iter()
            .map(|(s, p, o)| (self.term(s).clone(), self.term(p).clone(), self.term(o).clone()))
            .collect()
    }

    fn successors(&self, node: Id, p: Id) -> impl Iterator<Item = Id> + '_ {
        self.spo.range((node, p, Id::MIN)..=(node, p, Id::MAX)).map(|&(_, _, o)| o)
    }

    fn predecessors(&self, node: Id, p: Id) -> impl Iterator<Item = Id> + '_ {
        self.pos.range((p, node, Id::MIN)..=(p, node, Id::MAX)).map(|&(_, _, s)| s)
    }

    /// Nodes reachable from `start` in one or more steps.
    fn reach(&self, start: Id, p: Id, forward: bool) -> BTreeSet<Id> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            let next: Vec<Id> = if forward {
                self.successors(n, p).collect()
            } else {
                self.predecessors(n, p).collect()
            };
            for m in next {
                if seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        seen
    }

    /// Every subject and object in the store.
    fn nodes(&self) -> BTreeSet<Id> {
        self.spo.iter().flat_map(|&(s, _, o)| [s, o]).collect()
    }

    fn match_path(&self, s: Option<&Term>, p: &Term, o: Option<&Term>, reflexive: bool) -> Vec<(Term, Term)> {
        let mut out: BTreeSet<(Term, Term)> = BTreeSet::new();
        let p_id = self.id(p);
        match (s, o) {
            (Some(s), Some(o)) => {
                let linked = match (self.id(s), self.id(o), p_id) {
                    (Some(si), Some(oi), Some(pi)) => self.reach(si, pi, true).contains(&oi),
                    _ => false,
                };
                if linked || (reflexive && s == o) {
                    out.insert((s.clone(), o.clone()));
                }
            }
            (Some(s), None) => {
                if reflexive {
                    out.insert((s.clone(), s.clone()));
                }
                if let (Some(si), Some(pi)) = (self.id(s), p_id) {
                    for m in self.reach(si, pi, true) {
                        out.insert((s.clone(), self.term(m).clone()));
                    }
                }
            }
            (None, Some(o)) => {
                if reflexive {
                    out.insert((o.clone(), o.clone()));
                }
                if let (Some(oi), Some(pi)) = (self.id(o), p_id) {
                    for m in self.reach(oi, pi, false) {
                        out.insert((self.term(m).clone(), o.clone()));
                    }
                }
            }
            (None, None) => {
                if reflexive {
                    for n in self.nodes() {
                        let t = self.term(n).clone();
                        out.insert((t.clone(), t));
                    }
                }
                if let Some(pi) = p_id {
                    let starts: BTreeSet<Id> = self.pos.range((pi, Id::MIN, Id::MIN)..=(pi, Id::MAX, Id::MAX)).map(|&(_, _, s)| s).collect();
                    for start in starts {
                        for m in self.reach(start, pi, true) {
                            out.insert((self.term(start).clone(), self.term(m).clone()));
                        }
                    }
                }
            }
        }
        out.into_iter().collect()
    }
}

#[derive(Clone, Debug)]
enum Slot {
    Var(String),
    Const(Term),
}

impl Slot {
    fn resolve(&self, sol: &Binding) -> Option<Term> {
        match self {
            Slot::Var(v) => sol.get(v).cloned(),
            Slot::Const(t) => Some(t.clone()),
        }
    }
}

#[derive(Clone, Debug)]
struct Compiled {
    subject: Slot,
    predicate: Slot,
    path: PathMod,
    object: Slot,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::RDF_TYPE;

    fn chain() -> Store {
        let v = Vocabulary::default();
        let imports = v.term("imports");
        let triples: TripleSet = [("A", "B"), ("B", "C")]
            .iter()
            .map(|(a, b)| Triple::new(format!("http://t/{a}"), imports.clone(), Term::iri(format!("http://t/{b}"))))
            .chain(std::iter::once(Triple::new("http://t/D", RDF_TYPE, Term::iri(v.term("Theory")))))
            .collect();
        let mut store = Store::new(&v);
        store.load(&triples);
        store
    }

    fn pairs(store: &Store, text: &str) -> Vec<(String, String)> {
        store
            .select(&Pattern::parse(text).unwrap())
            .unwrap()
            .into_iter()
            .map(|b| (b["x"].value().to_string(), b["y"].value().to_string()))
            .collect()
    }

    #[test]
    fn plus_on_chain() {
        let t = |s: &str| format!("http://t/{s}");
        assert_eq!(
            pairs(&chain(), "?x o:imports+ ?y"),
            vec![(t("A"), t("B")), (t("A"), t("C")), (t("B"), t("C"))]
        );
    }

    #[test]
    fn star_identity_for_isolated_node() {
        let rows = chain()
            .select(&Pattern::parse("<http://t/D> o:imports* ?y").unwrap())
            .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0]["y"], Term::iri("http://t/D"));
    }

    #[test]
    fn unknown_prefix_and_variable_path() {
        let store = chain();
        assert!(store.select(&Pattern::parse("?x zz:p ?y").unwrap()).is_err());
        assert!(store.select(&Pattern::parse("?x ?p+ ?y").unwrap()).is_err());
    }

    #[test]
    fn idempotent_load() {
        let mut store = chain();
        let before = store.clone();
        let triples = store.triples();
        store.load(&triples);
        assert_eq!(store, before);
        assert!(store.indexes_agree());
    }

    #[test]
    fn repeated_variable_must_agree() {
        let v = Vocabulary::default();
        let mut store = Store::new(&v);
        let set: TripleSet = [
            Triple::new("http://t/a", v.term("imports"), Term::iri("http://t/a")),
            Triple::new("http://t/a", v.term("imports"), Term::iri("http://t/b")),
        ]
        .into_iter()
        .collect();
        store.load(&set);
        let rows = store.select(&Pattern::parse("?x o:imports ?x").unwrap()).unwrap();
        assert_eq!(rows.len(), 1);
    }
}
