use std::collections::BTreeSet;

use lectures_core::omdoc::{self, Entity, UriScheme};
use lectures_core::query::{PathMod, Pattern, PatternTerm, Store, TriplePattern};
use lectures_core::rdf::{self, Term, Triple, TripleSet, Vocabulary};
use lectures_core::render::{linearize, render_object};
use lectures_core::stex::parse_math;
use lectures_testkit::{closure_matrix, graph_triples, random_collection, random_graph, FuzzVocabulary};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_collections_are_valid(seed in any::<u64>()) {
        let c = random_collection(&mut rng(seed));
        prop_assert_eq!(omdoc::validate(&c), vec![]);
    }

    #[test]
    fn xml_round_trip(seed in any::<u64>()) {
        let c = random_collection(&mut rng(seed));
        let xml = omdoc::to_xml(&c);
        let back = omdoc::from_xml(&xml).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(omdoc::to_xml(&back), xml);
    }

    #[test]
    fn linearize_then_parse_is_identity(seed in any::<u64>()) {
        let fuzz = FuzzVocabulary::new();
        let obj = fuzz.random_object(&mut rng(seed), 4);
        let text = linearize(&obj, &fuzz.context).unwrap();
        let back = parse_math(&text, &fuzz.scope).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, obj, "{}", text);
    }

    #[test]
    fn every_content_node_has_one_presentation_id(seed in any::<u64>()) {
        let fuzz = FuzzVocabulary::new();
        let obj = fuzz.random_object(&mut rng(seed), 4);
        let r = render_object(&obj, &fuzz.context).unwrap();
        let mut xml = String::new();
        r.presentation.write_compact(&mut xml);
        let doc = roxmltree::Document::parse(&xml).unwrap();
        let ids: Vec<&str> = doc.descendants().filter_map(|n| n.attribute("id")).collect();
        let distinct: BTreeSet<&str> = ids.iter().copied().collect();
        prop_assert_eq!(ids.len(), distinct.len());
        prop_assert_eq!(distinct.len(), obj.node_count());
        prop_assert_eq!(r.xrefs.len(), obj.node_count());
    }

    #[test]
    fn ntriples_round_trip(seed in any::<u64>()) {
        let c = random_collection(&mut rng(seed));
        let triples = rdf::extract(&c, &Vocabulary::default());
        let nt = rdf::to_ntriples(&triples);
        prop_assert_eq!(&rdf::parse_ntriples(&nt).unwrap(), &triples);
        prop_assert_eq!(&lectures_testkit::parse_ntriples(&nt).unwrap(), &triples);
        let ttl = rdf::to_turtle(&triples, &Vocabulary::default());
        prop_assert_eq!(&lectures_testkit::parse_turtle(&ttl).unwrap(), &triples);
    }

    #[test]
    fn ntriples_lines_are_sorted_and_unique(seed in any::<u64>()) {
        let c = random_collection(&mut rng(seed));
        let triples = rdf::extract(&c, &Vocabulary::default());
        let nt = rdf::to_ntriples(&triples);
        let lines: Vec<&str> = nt.lines().collect();
        prop_assert_eq!(lines.len(), triples.len());
        prop_assert!(lines.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn extracted_subjects_live_in_a_theory(seed in any::<u64>()) {
        let c = random_collection(&mut rng(seed));
        let uris = c.uris();
        for t in rdf::extract(&c, &Vocabulary::default()).iter() {
            let home = uris.home_theory(&t.subject).expect("subject under base");
            prop_assert!(c.theories.contains_key(home), "{}", t.subject);
        }
    }

    #[test]
    fn store_indexes_agree(seed in any::<u64>()) {
        let c = random_collection(&mut rng(seed));
        let v = Vocabulary::default();
        let triples = rdf::extract(&c, &v);
        let mut store = Store::new(&v);
        store.load(&triples);
        prop_assert!(store.indexes_agree());
        prop_assert_eq!(store.len(), triples.len());
        prop_assert_eq!(store.triples(), triples);
    }

    #[test]
    fn paths_match_matrix_closure(seed in any::<u64>()) {
        let v = Vocabulary::default();
        let (n, edges) = random_graph(&mut rng(seed), 8);
        let (nodes, triples) = graph_triples(&v, n, &edges);
        let mut store = Store::new(&v);
        store.load(&triples);
        for (path, reflexive) in [(PathMod::Plus, false), (PathMod::Star, true)] {
            let expected = closure_matrix(n, &edges, reflexive);
            let p = Pattern::new(vec![TriplePattern::new(
                PatternTerm::var("a"),
                PatternTerm::prefixed("o", "imports"),
                PatternTerm::var("b"),
            )
            .with_path(path)])
            .unwrap();
            let got: BTreeSet<(String, String)> = store
                .select(&p)
                .unwrap()
                .into_iter()
                .map(|b| (b["a"].value().to_string(), b["b"].value().to_string()))
                .collect();
            let mut want: BTreeSet<(String, String)> = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .filter(|&(i, j)| expected[i][j])
                .map(|(i, j)| (nodes[i].clone(), nodes[j].clone()))
                .collect();
            if reflexive {
                // Zero-length paths also relate every other term of the graph to itself.
                for t in triples.iter() {
                    for x in [t.subject.as_str(), t.object.value()] {
                        want.insert((x.to_string(), x.to_string()));
                    }
                }
            }
            prop_assert_eq!(got, want, "{:?}", path);
        }
    }

    #[test]
    fn uris_are_injective(
        theories in prop::collection::vec("[a-z][a-z0-9-]{0,6}", 1..4),
        names in prop::collection::vec("[a-z]{1,5}", 1..6),
        index in 1usize..20,
    ) {
        let scheme = UriScheme::new("http://ex.org/notes");
        let mut entities: BTreeSet<String> = BTreeSet::new();
        let mut uris: BTreeSet<String> = BTreeSet::new();
        for t in &theories {
            let mut add = |label: String, e: Entity<'_>| {
                if entities.insert(label) {
                    prop_assert!(uris.insert(scheme.uri_for(e)), "collision for {:?}", e);
                }
                Ok(())
            };
            add(format!("T {t}"), Entity::Theory(t))?;
            for n in &names {
                // Symbols and statements share the fragment namespace of a theory.
                add(format!("F {t} {n}"), Entity::Symbol { theory: t, name: n })?;
                add(format!("P {t} {n} {index}"), Entity::ProofStep { theory: t, proof: n, index })?;
            }
        }
    }
}

#[test]
fn store_round_trips_literal_escapes() {
    let v = Vocabulary::default();
    let mut triples = TripleSet::new();
    for (i, text) in ["plain", "quote \" and \\ slash", "line\nbreak\ttab", "ünï ∪ 𝒞", ""].iter().enumerate() {
        triples.insert(Triple::new(format!("http://ex.org/s{i}"), v.term("title"), Term::Literal(text.to_string())));
    }
    let nt = rdf::to_ntriples(&triples);
    assert_eq!(rdf::parse_ntriples(&nt).unwrap(), triples);
    assert_eq!(lectures_testkit::parse_ntriples(&nt).unwrap(), triples);
    assert_eq!(lectures_testkit::parse_turtle(&rdf::to_turtle(&triples, &v)).unwrap(), triples);
}
