//! Compiler core for semantically annotated lecture notes.
//!
//! The pipeline is `stex` (parse + resolve) → `omdoc` (model, validation,
//! XML) → `render` (XHTML + MathML + RDFa) and `rdf` (triples) → `query`.

pub mod notation;
pub mod omdoc;
pub mod ontology;
pub mod query;
pub mod rdf;
pub mod render;
pub mod stex;
pub mod xml;
