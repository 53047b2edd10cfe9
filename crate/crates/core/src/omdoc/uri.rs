//! URI scheme for everything a collection names.
//!
//! theory      `{base}/omdoc/{theory}`
//! symbol      `{theory-uri}#{name}`
//! statement   `{theory-uri}#{statement-id}`
//! proof step  `{theory-uri}#{proof-id}.{index}`
//!
//! Symbol names and statement ids never contain `.`, so step URIs cannot
//! collide with either.

use super::{Ref, SymbolRef};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Entity<'a> {
    Theory(&'a str),
    Symbol { theory: &'a str, name: &'a str },
    Statement { theory: &'a str, id: &'a str },
    ProofStep { theory: &'a str, proof: &'a str, index: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct UriScheme<'a> {
    base: &'a str,
}

impl<'a> UriScheme<'a> {
    pub fn new(base: &'a str) -> Self {
        UriScheme {
            base: base.trim_end_matches('/'),
        }
    }

    pub fn base(&self) -> &'a str {
        self.base
    }

    pub fn uri_for(&self, entity: Entity<'_>) -> String {
        match entity {
            Entity::Theory(id) => self.theory(id),
            Entity::Symbol { theory, name } => self.fragment(theory, name),
            Entity::Statement { theory, id } => self.fragment(theory, id),
            Entity::ProofStep {
                theory,
                proof,
                index,
            } => format!("{}#{proof}.{index}", self.theory(theory)),
        }
    }

    pub fn theory(&self, id: &str) -> String {
        format!("{}/omdoc/{id}", self.base)
    }

    pub fn fragment(&self, theory: &str, fragment: &str) -> String {
        format!("{}#{fragment}", self.theory(theory))
    }

    pub fn symbol(&self, sym: &SymbolRef) -> String {
        self.fragment(&sym.theory, &sym.name)
    }

    pub fn reference(&self, r: &Ref) -> String {
        self.fragment(&r.theory, &r.fragment)
    }

    pub fn step(&self, theory: &str, proof: &str, index: usize) -> String {
        self.uri_for(Entity::ProofStep {
            theory,
            proof,
            index,
        })
    }

    /// The theory id whose document contains `uri`, if the URI is under this base.
    pub fn home_theory<'u>(&self, uri: &'u str) -> Option<&'u str> {
        let rest = uri.strip_prefix(self.base)?.strip_prefix("/omdoc/")?;
        let id = rest.split('#').next().unwrap_or(rest);
        (!id.is_empty()).then_some(id)
    }
}

/// Theory-document part of a URI (everything before `#`).
pub fn document_of(uri: &str) -> &str {
    uri.split('#').next().unwrap_or(uri)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_examples() {
        let s = UriScheme::new("http://ex.org");
        assert_eq!(s.theory("sets"), "http://ex.org/omdoc/sets");
        assert_eq!(
            s.uri_for(Entity::Symbol {
                theory: "sets",
                name: "union"
            }),
            "http://ex.org/omdoc/sets#union"
        );
        assert_eq!(
            s.uri_for(Entity::ProofStep {
                theory: "graphs",
                proof: "pf-1",
                index: 2
            }),
            "http://ex.org/omdoc/graphs#pf-1.2"
        );
    }

    #[test]
    fn trailing_slash_in_base_is_ignored() {
        let s = UriScheme::new("http://ex.org/");
        assert_eq!(s.theory("sets"), "http://ex.org/omdoc/sets");
    }

    #[test]
    fn home_theory_inverts_the_scheme() {
        let s = UriScheme::new("http://ex.org");
        assert_eq!(s.home_theory("http://ex.org/omdoc/sets#union"), Some("sets"));
        assert_eq!(s.home_theory("http://ex.org/omdoc/sets"), Some("sets"));
        assert_eq!(s.home_theory("http://other.org/omdoc/sets"), None);
        assert_eq!(document_of("http://ex.org/omdoc/a#b.1"), "http://ex.org/omdoc/a");
    }
}
