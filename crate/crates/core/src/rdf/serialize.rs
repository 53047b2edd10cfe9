use std::fmt::Write;

use thiserror::Error;

use super::{Term, Triple, TripleSet, Vocabulary, RDF_NS, RDF_TYPE};

pub(crate) fn iri_char_needs_escape(c: char) -> bool {
    matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') || c <= ' '
}

pub(crate) fn write_iri(iri: &str, out: &mut String) {
    out.push('<');
    for c in iri.chars() {
        if iri_char_needs_escape(c) {
            let _ = write!(out, "\\u{:04X}", c as u32);
        } else {
            out.push(c);
        }
    }
    out.push('>');
}

pub(crate) fn write_literal(value: &str, out: &mut String) {
    out.push('"');
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c == '\u{7F}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// One triple per line, lines in byte order; empty set gives the empty string.
pub fn to_ntriples(triples: &TripleSet) -> String {
    let mut lines: Vec<String> = triples.iter().map(ToString::to_string).collect();
    lines.sort_unstable();
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn is_simple_local(local: &str) -> bool {
    let mut chars = local.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric())
}

fn write_turtle_iri(iri: &str, vocab: &Vocabulary, out: &mut String) {
    if let Some(local) = iri.strip_prefix(vocab.namespace()).filter(|l| is_simple_local(l)) {
        out.push_str("o:");
        out.push_str(local);
    } else if let Some(local) = iri.strip_prefix(RDF_NS).filter(|l| is_simple_local(l)) {
        out.push_str("rdf:");
        out.push_str(local);
    } else {
        write_iri(iri, out);
    }
}

/// Turtle with `o:` and `rdf:` prefixes, one block per subject.
pub fn to_turtle(triples: &TripleSet, vocab: &Vocabulary) -> String {
    let mut out = String::new();
    out.push_str("@prefix o: ");
    write_iri(vocab.namespace(), &mut out);
    out.push_str(" .\n@prefix rdf: ");
    write_iri(RDF_NS, &mut out);
    out.push_str(" .\n");

    let mut current: Option<&str> = None;
    for t in triples {
        if current == Some(t.subject.as_str()) {
            out.push_str(" ;\n    ");
        } else {
            if current.is_some() {
                out.push_str(" .\n");
            }
            out.push('\n');
            write_turtle_iri(&t.subject, vocab, &mut out);
            out.push(' ');
            current = Some(&t.subject);
        }
        if t.predicate == RDF_TYPE {
            out.push('a');
        } else {
            write_turtle_iri(&t.predicate, vocab, &mut out);
        }
        out.push(' ');
        match &t.object {
            Term::Iri(iri) => write_turtle_iri(iri, vocab, &mut out),
            Term::Literal(v) => write_literal(v, &mut out),
        }
    }
    if current.is_some() {
        out.push_str(" .\n");
    }
    out
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct NTriplesError {
    pub line: usize,
    pub message: String,
}

/// Parses the N-Triples subset produced by [`to_ntriples`]: IRIs and plain literals.
pub fn parse_ntriples(text: &str) -> Result<TripleSet, NTriplesError> {
    let mut out = TripleSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: &str| NTriplesError {
            line: line_no,
            message: message.to_string(),
        };
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut rest = trimmed;
        let subject = take_iri(&mut rest).ok_or_else(|| err("expected subject IRI"))?;
        let predicate = take_iri(&mut rest).ok_or_else(|| err("expected predicate IRI"))?;
        rest = rest.trim_start();
        let object = if rest.starts_with('<') {
            Term::Iri(take_iri(&mut rest).ok_or_else(|| err("malformed object IRI"))?)
        } else if rest.starts_with('"') {
            Term::Literal(take_literal(&mut rest).ok_or_else(|| err("malformed literal"))?)
        } else {
            return Err(err("expected object"));
        };
        if rest.trim() != "." {
            return Err(err("expected `.` at end of triple"));
        }
        out.insert(Triple::new(subject, predicate, object));
    }
    Ok(out)
}

fn take_iri(rest: &mut &str) -> Option<String> {
    let s = rest.trim_start().strip_prefix('<')?;
    let end = s.find('>')?;
    let value = unescape(&s[..end])?;
    *rest = &s[end + 1..];
    Some(value)
}

fn take_literal(rest: &mut &str) -> Option<String> {
    let s = rest.trim_start().strip_prefix('"')?;
    let mut escaped = false;
    for (i, c) in s.char_indices() {
        if escaped {
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == '"' {
            let value = unescape(&s[..i])?;
            *rest = &s[i + 1..];
            return Some(value);
        }
    }
    None
}

fn unescape(s: &str) -> Option<String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next()? {
            't' => out.push('\t'),
            'n' => out.push('\n'),
            'r' => out.push('\r'),
            'b' => out.push('\u{8}'),
            'f' => out.push('\u{C}'),
            '"' => out.push('"'),
            '\'' => out.push('\''),
            '\\' => out.push('\\'),
            u @ ('u' | 'U') => {
                let n = if u == 'u' { 4 } else { 8 };
                let hex: String = chars.by_ref().take(n).collect();
                if hex.len() != n {
                    return None;
                }
                out.push(char::from_u32(u32::from_str_radix(&hex, 16).ok()?)?);
            }
            _ => return None,
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TripleSet {
        let v = Vocabulary::default();
        [
            Triple::new("http://ex.org/omdoc/sets#union-ex", v.term("exemplifies"), Term::iri("http://ex.org/omdoc/sets#union")),
            Triple::new("http://ex.org/omdoc/sets#union-ex", RDF_TYPE, Term::iri(v.term("Example"))),
        ]
        .into_iter()
        .collect()
    }

    #[test]
    fn empty_outputs() {
        let v = Vocabulary::default();
        assert_eq!(to_ntriples(&TripleSet::new()), "");
        assert_eq!(
            to_turtle(&TripleSet::new(), &v),
            "@prefix o: <http://ex.org/ontology#> .\n@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n"
        );
    }

    #[test]
    fn two_sorted_lines() {
        // sorted by hand: the ontology namespace `http://ex.org/...` sorts before `http://www.w3.org/...`
        assert_eq!(
            to_ntriples(&sample()),
            "<http://ex.org/omdoc/sets#union-ex> <http://ex.org/ontology#exemplifies> <http://ex.org/omdoc/sets#union> .\n\
             <http://ex.org/omdoc/sets#union-ex> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://ex.org/ontology#Example> .\n"
        );
    }

    #[test]
    fn turtle_groups_subjects() {
        let ttl = to_turtle(&sample(), &Vocabulary::default());
        assert!(ttl.ends_with(
            "\n<http://ex.org/omdoc/sets#union-ex> o:exemplifies <http://ex.org/omdoc/sets#union> ;\n    a o:Example .\n"
        ));
    }

    #[test]
    fn ntriples_round_trip_with_escapes() {
        let mut set = sample();
        set.insert(Triple::new("http://a/b", "http://a/p", Term::Literal("say \"hi\"\n\\ \u{1}".into())));
        set.insert(Triple::new("http://a/b c", "http://a/p", Term::iri("http://a/{x}")));
        assert_eq!(parse_ntriples(&to_ntriples(&set)).unwrap(), set);
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = parse_ntriples("\n<a> <b> .\n").unwrap_err();
        assert_eq!(err.line, 2);
    }
}
