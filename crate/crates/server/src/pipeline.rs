//! Whole-corpus build: parse → resolve → validate → render → extract.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use lectures_core::omdoc::{self, TheoryCollection, Violation};
use lectures_core::rdf::{self, TripleSet, Vocabulary};
use lectures_core::render::{render_document, PageOptions, RenderContext};
use lectures_core::stex::{self, ResolveError};
use serde::Serialize;

use crate::config::Config;

pub const SOURCE_EXTENSION: &str = "stex";

/// Everything served for one theory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifacts {
    pub omdoc: String,
    pub xhtml: String,
    pub triples: TripleSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Build {
    pub collection: TheoryCollection,
    pub collection_xml: String,
    pub theories: BTreeMap<String, Artifacts>,
    pub triples: TripleSet,
}

impl Build {
    pub fn empty(config: &Config) -> Self {
        Build {
            collection: TheoryCollection::new(config.base_uri.clone()),
            collection_xml: omdoc::to_xml(&TheoryCollection::new(config.base_uri.clone())),
            theories: BTreeMap::new(),
            triples: TripleSet::new(),
        }
    }
}

/// Why a source set does not build.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "stage", rename_all = "kebab-case")]
pub enum Problem {
    Parse {
        path: String,
        line: u32,
        column: u32,
        message: String,
    },
    Resolve {
        #[serde(flatten)]
        error: ResolveError,
        message: String,
    },
    Violation {
        #[serde(flatten)]
        violation: Violation,
    },
    Render {
        theory: String,
        message: String,
    },
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Problem::Parse {
                path,
                line,
                column,
                message,
            } => write!(f, "{path}:{line}:{column}: {message}"),
            Problem::Resolve { message, .. } => write!(f, "{message}"),
            Problem::Violation { violation } => write!(f, "{violation}"),
            Problem::Render { theory, message } => write!(f, "rendering {theory}: {message}"),
        }
    }
}

pub fn is_source(path: &str) -> bool {
    Path::new(path)
        .extension()
        .is_some_and(|e| e == SOURCE_EXTENSION)
}

/// Builds every `.stex` file in `files` (path → text); other files are ignored.
pub fn build(files: &BTreeMap<String, String>, config: &Config) -> Result<Build, Vec<Problem>> {
    let mut modules = Vec::new();
    let mut problems = Vec::new();
    for (path, text) in files.iter().filter(|(p, _)| is_source(p)) {
        match stex::parse_module(text) {
            Ok(m) => modules.push(m),
            Err(e) => problems.push(Problem::Parse {
                path: path.clone(),
                line: e.line,
                column: e.column,
                message: e.message,
            }),
        }
    }
    if !problems.is_empty() {
        return Err(problems);
    }

    let collection = stex::resolve_all(&modules, &config.base_uri).map_err(|errors| {
        errors
            .into_iter()
            .map(|error| Problem::Resolve {
                message: error.to_string(),
                error,
            })
            .collect::<Vec<_>>()
    })?;

    let violations = omdoc::validate(&collection);
    if !violations.is_empty() {
        return Err(violations
            .into_iter()
            .map(|violation| Problem::Violation { violation })
            .collect());
    }

    let vocab = Vocabulary::new(config.ontology_ns.clone());
    let ctx = RenderContext::from_collection(&collection);
    let options = PageOptions {
        ontology_ns: config.ontology_ns.clone(),
        ..PageOptions::default()
    };
    let triples = rdf::extract(&collection, &vocab);
    let uris = collection.uris();
    let mut theories = BTreeMap::new();
    for (id, theory) in &collection.theories {
        let xhtml = match render_document(theory, &collection, &ctx, &options) {
            Ok(x) => x,
            Err(e) => {
                problems.push(Problem::Render {
                    theory: id.clone(),
                    message: e.to_string(),
                });
                continue;
            }
        };
        let omdoc = omdoc::theory_to_xml(&collection, id).expect("theory is in its collection");
        theories.insert(
            id.clone(),
            Artifacts {
                omdoc,
                xhtml,
                triples: rdf::theory_triples(&triples, &uris.theory(id)),
            },
        );
    }
    if !problems.is_empty() {
        return Err(problems);
    }
    Ok(Build {
        collection_xml: omdoc::to_xml(&collection),
        collection,
        theories,
        triples,
    })
}

/// Reads every file under `dir` into a path → text map with `/`-separated relative paths.
pub fn read_dir(dir: &Path) -> anyhow::Result<BTreeMap<String, String>> {
    let mut files = BTreeMap::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(dir)?;
        let key = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        if !is_source(&key) {
            continue;
        }
        let text = std::fs::read_to_string(entry.path())
            .with_context(|| format!("reading {}", entry.path().display()))?;
        files.insert(key, text);
    }
    Ok(files)
}
