//! Formula parser.
//!
//! Two surface forms are accepted and may be mixed freely:
//!
//! * semantic macro calls, `\union{A,B,C}` or `\binom{7}{2}` (brace groups of
//!   comma-separated arguments),
//! * the notation form produced by the symbols' templates, `A \cup B \cup C`,
//!   with round brackets for grouping.
//!
//! Notation parsing is precedence climbing driven by the templates in scope:
//! templates starting with a literal act as prefix/closed forms, templates
//! starting with a slot or flexary join extend an already parsed left operand.
//! Alternatives are tried in a fixed order and the first success wins.

use std::collections::BTreeMap;

use super::ParseError;
use crate::notation::{Arity, NotationTemplate, TemplateToken, ATOM_PRECEDENCE};
use crate::omdoc::{MathObject, SymbolRef};


#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeEntry {
    pub symbol: SymbolRef,
    pub arity: Arity,
    pub precedence: i32,
    /// Default notation first, then variants in key order.
    pub notations: Vec<NotationTemplate>,
}

/// Macros visible to a formula, keyed by macro name (without backslash).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Scope {
    entries: BTreeMap<String, ScopeEntry>,
}

impl Scope {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a macro unless the name is already bound; returns whether it was added.
    pub fn insert(&mut self, name: impl Into<String>, entry: ScopeEntry) -> bool {
        use std::collections::btree_map::Entry;
        match self.entries.entry(name.into()) {
            Entry::Vacant(v) => {
                v.insert(entry);
                true
            }
            Entry::Occupied(_) => false,
        }
    }

    pub fn get(&self, name: &str) -> Option<&ScopeEntry> {
        self.entries.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ScopeEntry)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum MathToken {
    /// Control sequence without the backslash.
    Cs(String),
    Letter(char),
    Digits(String),
    Char(char),
}

impl MathToken {
    fn describe(&self) -> String {
        match self {
            MathToken::Cs(n) => format!("`\\{n}`"),
            MathToken::Letter(c) | MathToken::Char(c) => format!("`{c}`"),
            MathToken::Digits(d) => format!("`{d}`"),
        }
    }
}

/// Splits math source into tokens; whitespace only separates.
pub(crate) fn tokenize(src: &str) -> Result<Vec<(MathToken, usize)>, (usize, String)> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some((offset, ch)) = chars.next() {
        if ch.is_whitespace() {
            continue;
        }
        let token = if ch == '\\' {
            let mut name = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if !c.is_ascii_alphabetic() {
                    break;
                }
                name.push(c);
                chars.next();
            }
            if name.is_empty() {
                match chars.next() {
                    Some((_, c)) if !c.is_whitespace() => name.push(c),
                    _ => return Err((offset, "dangling `\\`".into())),
                }
            }
            MathToken::Cs(name)
        } else if ch.is_ascii_alphabetic() {
            MathToken::Letter(ch)
        } else if ch.is_ascii_digit() {
            let mut digits = ch.to_string();
            while let Some(&(_, c)) = chars.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                digits.push(c);
                chars.next();
            }
            MathToken::Digits(digits)
        } else {
            MathToken::Char(ch)
        };
        out.push((token, offset));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Pat {
    Lit(MathToken),
    Slot { index: usize, precedence: i32 },
    Join { separator: Vec<MathToken> },
}

#[derive(Clone, Debug)]
struct Compiled<'s> {
    entry: &'s ScopeEntry,
    pats: Vec<Pat>,
}

fn compile(template: &NotationTemplate) -> Option<Vec<Pat>> {
    let mut pats = Vec::new();
    for token in template.tokens() {
        match token {
            TemplateToken::Literal(text) => {
                let toks = tokenize(text).ok()?;
                pats.extend(toks.into_iter().map(|(t, _)| Pat::Lit(t)));
            }
            TemplateToken::Slot { index, precedence } => pats.push(Pat::Slot {
                index: *index,
                precedence: *precedence,
            }),
            TemplateToken::FlexJoin { separator } => {
                let toks = tokenize(separator).ok()?;
                if toks.is_empty() {
                    return None;
                }
                pats.push(Pat::Join {
                    separator: toks.into_iter().map(|(t, _)| t).collect(),
                });
            }
        }
    }
    (!pats.is_empty()).then_some(pats)
}

#[derive(Debug)]
struct Failure {
    pos: usize,
    message: String,
}

type Parsed = (MathObject, i32, usize);

struct MathParser<'s> {
    tokens: Vec<MathToken>,
    scope: &'s Scope,
    prefix: Vec<Compiled<'s>>,
    infix: Vec<Compiled<'s>>,
}

/// Parses formula source against the macros in `scope`.
pub fn parse_math(source: &str, scope: &Scope) -> Result<MathObject, ParseError> {
    let position = |offset: usize| {
        let before = &source[..offset.min(source.len())];
        let line = before.matches('\n').count() as u32 + 1;
        let column = before.rsplit('\n').next().unwrap_or("").chars().count() as u32 + 1;
        (line, column)
    };
    let tokenized = tokenize(source).map_err(|(offset, message)| {
        let (line, column) = position(offset);
        ParseError {
            line,
            column,
            message,
        }
    })?;
    let offsets: Vec<usize> = tokenized.iter().map(|(_, o)| *o).collect();
    let tokens: Vec<MathToken> = tokenized.into_iter().map(|(t, _)| t).collect();

    let mut prefix = Vec::new();
    let mut infix = Vec::new();
    for (_, entry) in scope.iter() {
        for template in &entry.notations {
            if let Some(pats) = compile(template) {
                let compiled = Compiled { entry, pats };
                if matches!(compiled.pats[0], Pat::Lit(_)) {
                    prefix.push(compiled);
                } else {
                    infix.push(compiled);
                }
            }
        }
    }
    let parser = MathParser {
        tokens,
        scope,
        prefix,
        infix,
    };

    let fail = |f: Failure| {
        let offset = offsets.get(f.pos).copied().unwrap_or(source.len());
        let (line, column) = position(offset);
        ParseError {
            line,
            column,
            message: f.message,
        }
    };
    if parser.tokens.is_empty() {
        return Err(fail(Failure {
            pos: 0,
            message: "empty formula".into(),
        }));
    }
    let (obj, _, pos) = parser.expr(0, i32::MIN).map_err(fail)?;
    if pos < parser.tokens.len() {
        return Err(fail(Failure {
            pos,
            message: format!("unexpected {}", parser.tokens[pos].describe()),
        }));
    }
    Ok(obj)
}

fn furthest(a: Failure, b: Failure) -> Failure {
    if b.pos > a.pos {
        b
    } else {
        a
    }
}

impl<'s> MathParser<'s> {
    fn at(&self, pos: usize) -> Option<&MathToken> {
        self.tokens.get(pos)
    }

    fn fail(&self, pos: usize, message: impl Into<String>) -> Failure {
        Failure {
            pos,
            message: message.into(),
        }
    }

    fn unexpected(&self, pos: usize) -> Failure {
        match self.at(pos) {
            Some(t) => self.fail(pos, format!("unexpected {}", t.describe())),
            None => self.fail(pos, "unexpected end of formula"),
        }
    }

    fn expr(&self, pos: usize, min_prec: i32) -> Result<Parsed, Failure> {
        let (mut lhs, mut lhs_prec, mut pos) = self.primary(pos)?;
        'extend: loop {
            for template in &self.infix {
                if let Ok((obj, prec, next)) = self.match_infix(template, &lhs, lhs_prec, pos, min_prec) {
                    if next > pos {
                        lhs = obj;
                        lhs_prec = prec;
                        pos = next;
                        continue 'extend;
                    }
                }
            }
            break;
        }
        Ok((lhs, lhs_prec, pos))
    }

    fn primary(&self, pos: usize) -> Result<Parsed, Failure> {
        let Some(token) = self.at(pos) else {
            return Err(self.unexpected(pos));
        };
        let mut failure: Option<Failure> = None;

        if let MathToken::Cs(name) = token {
            if let Some(entry) = self.scope.get(name) {
                match self.macro_call(entry, pos + 1) {
                    Ok(parsed) => return Ok(parsed),
                    Err(f) => failure = Some(f),
                }
            }
        }

        for template in self.prefix.iter().filter(|t| matches!(&t.pats[0], Pat::Lit(l) if l == token)) {
            match self.match_template(template, pos, &mut BTreeMap::new(), &[]) {
                Ok(parsed) => return Ok(parsed),
                Err(f) => {
                    failure = Some(match failure {
                        Some(prev) => furthest(prev, f),
                        None => f,
                    })
                }
            }
        }
        if let Some(f) = failure {
            return Err(f);
        }

        match token {
            MathToken::Letter(c) => Ok((MathObject::Var(c.to_string()), ATOM_PRECEDENCE, pos + 1)),
            MathToken::Digits(d) => d
                .parse()
                .map(|n| (MathObject::Int(n), ATOM_PRECEDENCE, pos + 1))
                .map_err(|_| self.fail(pos, format!("integer `{d}` out of range"))),
            MathToken::Char('(') => {
                let (inner, _, next) = self.expr(pos + 1, i32::MIN)?;
                if self.at(next) != Some(&MathToken::Char(')')) {
                    return Err(match self.at(next) {
                        Some(t) => self.fail(next, format!("expected `)`, found {}", t.describe())),
                        None => self.fail(next, "unclosed `(`"),
                    });
                }
                Ok((inner, ATOM_PRECEDENCE, next + 1))
            }
            MathToken::Cs(name) => Err(self.fail(pos, format!("unknown macro `\\{name}`"))),
            _ => Err(self.unexpected(pos)),
        }
    }

    /// `\name{a,b}{c}`: brace groups of comma-separated arguments.
    fn macro_call(&self, entry: &ScopeEntry, mut pos: usize) -> Result<Parsed, Failure> {
        let head = MathObject::Sym(entry.symbol.clone());
        let name = &entry.symbol.name;
        if entry.arity == Arity::Fixed(0) {
            return Ok((head, ATOM_PRECEDENCE, pos));
        }
        let mut args = Vec::new();
        while self.at(pos) == Some(&MathToken::Char('{')) {
            if let Arity::Fixed(n) = entry.arity {
                if args.len() >= n {
                    break;
                }
            }
            let open = pos;
            pos += 1;
            if self.at(pos) == Some(&MathToken::Char('}')) {
                return Err(self.fail(open, format!("empty argument list for `\\{name}`")));
            }
            loop {
                let (arg, _, next) = self.expr(pos, i32::MIN)?;
                args.push(arg);
                pos = next;
                match self.at(pos) {
                    Some(MathToken::Char(',')) => pos += 1,
                    Some(MathToken::Char('}')) => {
                        pos += 1;
                        break;
                    }
                    Some(t) => {
                        return Err(self.fail(pos, format!("expected `,` or `}}`, found {}", t.describe())))
                    }
                    None => return Err(self.fail(open, format!("unclosed argument group of `\\{name}`"))),
                }
            }
        }
        if args.is_empty() {
            return Err(self.fail(pos, format!("empty argument list for `\\{name}`")));
        }
        if !entry.arity.accepts(args.len()) {
            return Err(self.fail(
                pos,
                format!("`\\{name}` takes {} arguments, got {}", entry.arity, args.len()),
            ));
        }
        Ok((MathObject::apply(head, args), ATOM_PRECEDENCE, pos))
    }

    fn match_infix(
        &self,
        template: &Compiled<'s>,
        lhs: &MathObject,
        lhs_prec: i32,
        pos: usize,
        min_prec: i32,
    ) -> Result<Parsed, Failure> {
        let prec = template.entry.precedence;
        if prec < min_prec {
            return Err(self.fail(pos, "precedence too low"));
        }
        let mut slots = BTreeMap::new();
        match &template.pats[0] {
            Pat::Slot { index, precedence } => {
                if lhs_prec < *precedence {
                    return Err(self.fail(pos, "left operand binds too loosely"));
                }
                slots.insert(*index, lhs.clone());
                self.match_template(template, pos, &mut slots, &[])
            }
            Pat::Join { .. } => {
                if lhs_prec <= prec {
                    return Err(self.fail(pos, "left operand binds too loosely"));
                }
                self.match_template(template, pos, &mut slots, std::slice::from_ref(lhs))
            }
            Pat::Lit(_) => Err(self.fail(pos, "not an infix template")),
        }
    }

    /// Matches a template from `pos`. For infix templates the first pattern is
    /// already satisfied: either `slots` holds the left operand, or
    /// `join_seed` holds the first operand of the leading flexary join.
    fn match_template(
        &self,
        template: &Compiled<'s>,
        mut pos: usize,
        slots: &mut BTreeMap<usize, MathObject>,
        join_seed: &[MathObject],
    ) -> Result<Parsed, Failure> {
        let entry = template.entry;
        let own = entry.precedence;
        let mut joined: Option<Vec<MathObject>> = None;
        for (i, pat) in template.pats.iter().enumerate() {
            match pat {
                Pat::Lit(expected) => {
                    if self.at(pos) != Some(expected) {
                        return Err(match self.at(pos) {
                            Some(t) => self.fail(pos, format!("expected {}, found {}", expected.describe(), t.describe())),
                            None => self.fail(pos, format!("expected {}", expected.describe())),
                        });
                    }
                    pos += 1;
                }
                Pat::Slot { index, precedence } => {
                    if i == 0 && !slots.is_empty() {
                        continue;
                    }
                    let (arg, _, next) = self.expr(pos, *precedence)?;
                    if let Some(prev) = slots.get(index) {
                        if *prev != arg {
                            return Err(self.fail(pos, "repeated slot does not match"));
                        }
                    }
                    slots.insert(*index, arg);
                    pos = next;
                }
                Pat::Join { separator } => {
                    let operand_prec = own.saturating_add(1);
                    let mut operands = Vec::new();
                    if i == 0 && !join_seed.is_empty() {
                        operands.extend_from_slice(join_seed);
                    } else {
                        let (first, _, next) = self.expr(pos, operand_prec)?;
                        operands.push(first);
                        pos = next;
                    }
                    while self.tokens[pos.min(self.tokens.len())..].starts_with(separator) {
                        let (next_operand, _, next) = self.expr(pos + separator.len(), operand_prec)?;
                        operands.push(next_operand);
                        pos = next;
                    }
                    if i == 0 && operands.len() < 2 {
                        return Err(self.fail(pos, "flexary operator without separator"));
                    }
                    joined = Some(operands);
                }
            }
        }

        let head = MathObject::Sym(entry.symbol.clone());
        let args = match joined {
            Some(operands) => operands,
            None => {
                let n = match entry.arity {
                    Arity::Fixed(n) => n,
                    Arity::Flexary => 0,
                };
                let mut args = Vec::with_capacity(n);
                for i in 1..=n {
                    match slots.remove(&i) {
                        Some(a) => args.push(a),
                        None => return Err(self.fail(pos, format!("notation never fills slot #{i}"))),
                    }
                }
                args
            }
        };
        if args.is_empty() {
            return Ok((head, own, pos));
        }
        Ok((MathObject::apply(head, args), own, pos))
    }
}
