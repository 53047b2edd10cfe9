//! Presentation MathML with OpenMath parallel markup, plain-text
//! linearization, and XHTML+RDFa pages.

mod layout;
mod linearize;
mod page;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::notation::{Arity, NotationTemplate, TemplateToken, ATOM_PRECEDENCE};
use crate::omdoc::openmath::{encode, xref_id, OPENMATH_NS};
use crate::omdoc::{MathObject, SymbolRef, TheoryCollection, UriScheme};
use crate::xml::Element;
use layout::{layout, literal_items, Item, LITERAL_MARK};

pub use linearize::linearize;
pub use page::{render_document, PageOptions};

pub const MATHML_NS: &str = "http://www.w3.org/1998/Math/MathML";

/// Precedence of a binding object; brackets it in any slot that asks for more.
const BIND_PRECEDENCE: i32 = 0;

#[derive(Clone, Debug, Error, PartialEq, Eq, Serialize)]
pub enum RenderError {
    #[error("no notation for symbol {0}")]
    MissingNotation(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NotationEntry {
    pub arity: Arity,
    pub precedence: i32,
    pub default: NotationTemplate,
    pub variants: BTreeMap<String, NotationTemplate>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderContext {
    base_uri: String,
    notations: BTreeMap<SymbolRef, NotationEntry>,
    variant: Option<String>,
    ambient_precedence: i32,
}

impl RenderContext {
    pub fn new(base_uri: impl Into<String>) -> Self {
        RenderContext {
            base_uri: base_uri.into(),
            notations: BTreeMap::new(),
            variant: None,
            ambient_precedence: 0,
        }
    }

    /// Notation table holding every symbol of the collection.
    pub fn from_collection(collection: &TheoryCollection) -> Self {
        let mut ctx = RenderContext::new(collection.base_uri.clone());
        for theory in collection.theories.values() {
            for s in &theory.symbols {
                ctx.insert(
                    SymbolRef::new(theory.id.clone(), s.name.clone()),
                    NotationEntry {
                        arity: s.arity,
                        precedence: s.precedence,
                        default: s.notation.clone(),
                        variants: s.variants.clone(),
                    },
                );
            }
        }
        ctx
    }

    pub fn insert(&mut self, symbol: SymbolRef, entry: NotationEntry) {
        self.notations.insert(symbol, entry);
    }

    /// Selects a notation variant; symbols without that variant keep their default.
    pub fn with_variant(mut self, key: Option<&str>) -> Self {
        self.variant = key.map(str::to_string);
        self
    }

    /// Precedence demanded of the top-level formula; negative values are raised to 0.
    pub fn with_ambient_precedence(mut self, precedence: i32) -> Self {
        self.ambient_precedence = precedence.max(0);
        self
    }

    pub fn variant(&self) -> Option<&str> {
        self.variant.as_deref()
    }

    pub fn ambient_precedence(&self) -> i32 {
        self.ambient_precedence
    }

    pub fn base_uri(&self) -> &str {
        &self.base_uri
    }

    pub fn notation(&self, symbol: &SymbolRef) -> Option<&NotationEntry> {
        self.notations.get(symbol)
    }

    pub(crate) fn lookup(&self, symbol: &SymbolRef) -> Result<(&NotationEntry, &NotationTemplate), RenderError> {
        let entry = self
            .notations
            .get(symbol)
            .ok_or_else(|| RenderError::MissingNotation(UriScheme::new(&self.base_uri).symbol(symbol)))?;
        let template = self
            .variant
            .as_ref()
            .and_then(|key| entry.variants.get(key))
            .unwrap_or(&entry.default);
        Ok((entry, template))
    }
}

/// Whether `args` can be written with a template of this arity.
pub(crate) fn fits(arity: Arity, args: usize) -> bool {
    match arity {
        Arity::Fixed(n) => n == args && n > 0,
        Arity::Flexary => args >= 1,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderedFormula {
    /// Presentation MathML; annotated nodes carry `id`.
    pub presentation: Element,
    /// `<OMOBJ>`; every node carries `xref` to a presentation `id`.
    pub content: Element,
    /// Presentation id → content node preorder index.
    pub xrefs: BTreeMap<String, usize>,
}

impl RenderedFormula {
    pub fn to_element(&self) -> Element {
        Element::new("math").attr("xmlns", MATHML_NS).child(
            Element::new("semantics")
                .child(self.presentation.clone())
                .child(
                    Element::new("annotation-xml")
                        .attr("encoding", "OpenMath")
                        .child(self.content.clone()),
                ),
        )
    }

    pub fn to_xml_string(&self) -> String {
        self.to_element().to_compact_string()
    }
}

/// Renders a single formula with ids numbered under ordinal 1.
pub fn render_object(obj: &MathObject, ctx: &RenderContext) -> Result<RenderedFormula, RenderError> {
    render_formula(obj, ctx, 1)
}

/// Renders the `ordinal`-th formula of a page; ids are `{ordinal}.{preorder}`.
pub fn render_formula(
    obj: &MathObject,
    ctx: &RenderContext,
    ordinal: usize,
) -> Result<RenderedFormula, RenderError> {
    let presenter = Presenter { ctx, ordinal };
    let mut counter = 0;
    let (mut presentation, prec) = presenter.present(obj, &mut counter)?;
    if prec < ctx.ambient_precedence {
        presentation = bracket(presentation);
    }
    let mut counter = 0;
    let content = Element::new("OMOBJ")
        .attr("xmlns", OPENMATH_NS)
        .child(encode(obj, Some(ordinal), &mut counter));
    let xrefs = (0..counter).map(|i| (xref_id(ordinal, i), i)).collect();
    Ok(RenderedFormula {
        presentation,
        content,
        xrefs,
    })
}

struct Presenter<'a> {
    ctx: &'a RenderContext,
    ordinal: usize,
}

fn leaf(name: &str, text: impl Into<String>) -> Element {
    Element::new(name).text(text)
}

fn bracket(inner: Element) -> Element {
    Element::new("mrow")
        .child(leaf("mo", "("))
        .child(inner)
        .child(leaf("mo", ")"))
}

fn strip_ids(mut el: Element) -> Element {
    el.walk_mut(&mut |e| e.remove_attr("id"));
    el
}

impl Presenter<'_> {
    fn id(&self, counter: &mut usize) -> String {
        let id = xref_id(self.ordinal, *counter);
        *counter += 1;
        id
    }

    fn present(&self, obj: &MathObject, counter: &mut usize) -> Result<(Element, i32), RenderError> {
        match obj {
            MathObject::Var(name) => Ok((leaf("mi", name.as_str()).attr("id", self.id(counter)), ATOM_PRECEDENCE)),
            MathObject::Int(v) => Ok((leaf("mn", v.to_string()).attr("id", self.id(counter)), ATOM_PRECEDENCE)),
            MathObject::Sym(s) => {
                let id = self.id(counter);
                let (entry, template) = self.ctx.lookup(s)?;
                if entry.arity != Arity::Fixed(0) {
                    return Ok((leaf("mi", s.name.as_str()).attr("id", id), ATOM_PRECEDENCE));
                }
                let mut items = Vec::new();
                for token in template.tokens() {
                    if let TemplateToken::Literal(text) = token {
                        literal_items(text, &mut items);
                    }
                }
                let mut row = layout(items);
                let mut el = if row.len() == 1 {
                    row.remove(0)
                } else {
                    let mut r = Element::new("mrow");
                    for c in row {
                        r.push(c);
                    }
                    r
                };
                el.walk_mut(&mut |e| e.remove_attr(LITERAL_MARK));
                el.set_attr("id", id);
                Ok((el, entry.precedence))
            }
            MathObject::Apply { head, args } => {
                let id = self.id(counter);
                match head.as_ref() {
                    MathObject::Sym(s) => self.apply_symbol(id, s, args, counter),
                    other => {
                        let (head_el, head_prec) = self.present(other, counter)?;
                        let head_el = if head_prec < ATOM_PRECEDENCE { bracket(head_el) } else { head_el };
                        let mut row = Element::new("mrow").attr("id", id).child(head_el);
                        self.argument_list(&mut row, args, counter)?;
                        Ok((row, ATOM_PRECEDENCE))
                    }
                }
            }
            MathObject::Bind { binder, vars, body } => {
                let id = self.id(counter);
                let (binder_el, _) = self.present(binder, counter)?;
                let mut row = Element::new("mrow").attr("id", id).child(binder_el);
                for (i, v) in vars.iter().enumerate() {
                    if i > 0 {
                        row.push(leaf("mo", ","));
                    }
                    row.push(leaf("mi", v.as_str()).attr("id", self.id(counter)));
                }
                row.push(leaf("mo", "."));
                let (body_el, _) = self.present(body, counter)?;
                row.push(body_el);
                Ok((row, BIND_PRECEDENCE))
            }
        }
    }

    fn argument_list(&self, row: &mut Element, args: &[MathObject], counter: &mut usize) -> Result<(), RenderError> {
        row.push(leaf("mo", "("));
        for (i, arg) in args.iter().enumerate() {
            if i > 0 {
                row.push(leaf("mo", ","));
            }
            let (el, _) = self.present(arg, counter)?;
            row.push(el);
        }
        row.push(leaf("mo", ")"));
        Ok(())
    }

    fn apply_symbol(
        &self,
        id: String,
        symbol: &SymbolRef,
        args: &[MathObject],
        counter: &mut usize,
    ) -> Result<(Element, i32), RenderError> {
        let sym_id = self.id(counter);
        let (entry, template) = self.ctx.lookup(symbol)?;
        if !fits(entry.arity, args.len()) {
            let mut row = Element::new("mrow")
                .attr("id", id)
                .child(leaf("mi", symbol.name.as_str()).attr("id", sym_id));
            self.argument_list(&mut row, args, counter)?;
            return Ok((row, ATOM_PRECEDENCE));
        }

        let mut children = Vec::with_capacity(args.len());
        for arg in args {
            children.push(self.present(arg, counter)?);
        }
        let mut used = vec![false; children.len()];
        let mut items = Vec::new();
        for token in template.tokens() {
            match token {
                TemplateToken::Literal(text) => literal_items(text, &mut items),
                TemplateToken::Slot { index, precedence } => {
                    let Some((el, prec)) = children.get(index - 1) else {
                        continue;
                    };
                    let mut el = el.clone();
                    if used[index - 1] {
                        el = strip_ids(el);
                    }
                    used[index - 1] = true;
                    if prec < precedence {
                        el = bracket(el);
                    }
                    items.push(Item::Hole(el));
                }
                TemplateToken::FlexJoin { separator } => {
                    for (i, (el, prec)) in children.iter().enumerate() {
                        if i > 0 {
                            literal_items(separator, &mut items);
                        }
                        let mut el = el.clone();
                        if used[i] {
                            el = strip_ids(el);
                        }
                        used[i] = true;
                        if *prec < entry.precedence {
                            el = bracket(el);
                        }
                        items.push(Item::Hole(el));
                    }
                }
            }
        }

        let mut row = Element::new("mrow").attr("id", id);
        for el in layout(items) {
            row.push(el);
        }
        if !place_symbol_id(&mut row, &sym_id) {
            let marker = leaf("mo", "\u{2061}").attr("id", sym_id);
            row.children.insert(0, crate::xml::Node::Element(marker));
        }
        row.walk_mut(&mut |e| e.remove_attr(LITERAL_MARK));
        Ok((row, entry.precedence))
    }
}

/// Puts the symbol id on the first literal leaf, else the first literal
/// layout element. Returns false when the template produced no literal output.
fn place_symbol_id(row: &mut Element, id: &str) -> bool {
    let mut placed = false;
    row.walk_mut(&mut |e| {
        if !placed && e.get_attr(LITERAL_MARK).is_some() && matches!(e.name.as_str(), "mi" | "mo" | "mn" | "mtext") {
            e.set_attr("id", id);
            placed = true;
        }
    });
    if !placed {
        row.walk_mut(&mut |e| {
            if !placed && e.get_attr(LITERAL_MARK).is_some() {
                e.set_attr("id", id);
                placed = true;
            }
        });
    }
    placed
}
