use std::collections::BTreeSet;

use super::{render_formula, RenderContext, RenderError};
use crate::notation::Arity;
use crate::omdoc::{Content, MathObject, Statement, StatementKind, SymbolInfo, SymbolRef, Theory, TheoryCollection};
use crate::rdf::{Vocabulary, RDF_NS};
use crate::xml::Element;

pub const XHTML_NS: &str = "http://www.w3.org/1999/xhtml";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PageOptions {
    pub ontology_ns: String,
    /// URL prefix of the client assets (`jobad.css`, `jobad.js`).
    pub static_prefix: String,
}

impl Default for PageOptions {
    fn default() -> Self {
        PageOptions {
            ontology_ns: Vocabulary::default().namespace().to_string(),
            static_prefix: "/static".into(),
        }
    }
}

/// XHTML+RDFa page for one theory, formulas as parallel markup.
pub fn render_document(
    theory: &Theory,
    collection: &TheoryCollection,
    ctx: &RenderContext,
    options: &PageOptions,
) -> Result<String, RenderError> {
    let uris = collection.uris();
    let theory_uri = uris.theory(&theory.id);
    let mut page = Page { ctx, ordinal: 0 };

    let assets = options.static_prefix.trim_end_matches('/');
    let head = Element::new("head")
        .child(Element::new("meta").attr("charset", "utf-8"))
        .child(Element::new("title").text(theory.id.as_str()))
        .child(
            Element::new("link")
                .attr("rel", "stylesheet")
                .attr("href", format!("{assets}/jobad.css")),
        )
        .child(
            Element::new("script")
                .attr("src", format!("{assets}/jobad.js"))
                .text(" "),
        );

    let mut body = Element::new("body")
        .attr("about", theory_uri.as_str())
        .attr("typeof", "o:Theory")
        .attr("data-base", uris.base());

    let mut header = Element::new("header").child(
        Element::new("h1")
            .child(Element::new("span").attr("class", "kind").text("Theory"))
            .child(Element::new("span").attr("class", "name").text(format!(" {}", theory.id))),
    );
    if !theory.imports.is_empty() {
        let mut imports = Element::new("p").attr("class", "imports").text("Imports: ");
        for (i, import) in theory.imports.iter().enumerate() {
            if i > 0 {
                imports.push_text(", ");
            }
            imports.push(
                Element::new("a")
                    .attr("rel", "o:imports")
                    .attr("href", uris.theory(import))
                    .text(import.as_str()),
            );
        }
        header.push(imports);
    }
    body.push(header);

    if !theory.symbols.is_empty() {
        let mut symbols = Element::new("div")
            .attr("class", "symbols")
            .attr("rel", "o:declares");
        for symbol in &theory.symbols {
            symbols.push(page.symbol(theory, symbol, collection)?);
        }
        body.push(symbols);
    }

    for statement in &theory.statements {
        body.push(page.statement(theory, statement, collection)?);
    }

    let html = Element::new("html")
        .attr("xmlns", XHTML_NS)
        .attr("prefix", format!("o: {} rdf: {}", options.ontology_ns, RDF_NS))
        .child(head)
        .child(body);
    let mut out = String::from("<!DOCTYPE html>\n");
    html.write_pretty(&mut out, 0);
    Ok(out)
}

struct Page<'a> {
    ctx: &'a RenderContext,
    ordinal: usize,
}

impl Page<'_> {
    fn formula(&mut self, obj: &MathObject) -> Result<Element, RenderError> {
        self.ordinal += 1;
        Ok(render_formula(obj, self.ctx, self.ordinal)?.to_element())
    }

    fn content(&mut self, target: &mut Element, content: &[Content]) -> Result<(), RenderError> {
        for item in content {
            match item {
                Content::Prose(text) => target.push_text(text.as_str()),
                Content::Formula(obj) => target.push(self.formula(obj)?),
            }
        }
        Ok(())
    }

    fn symbol(&mut self, theory: &Theory, symbol: &SymbolInfo, collection: &TheoryCollection) -> Result<Element, RenderError> {
        let sym = SymbolRef::new(theory.id.clone(), symbol.name.clone());
        let mut div = Element::new("div")
            .attr("id", symbol.name.as_str())
            .attr("about", collection.uris().symbol(&sym))
            .attr("typeof", "o:Symbol")
            .attr("class", "symbol")
            .child(Element::new("span").attr("class", "name").text(symbol.name.as_str()));
        if let Some(preview) = preview(&sym, symbol.arity) {
            div.push_text(" ");
            div.push(self.formula(&preview)?);
        }
        Ok(div)
    }

    fn statement(&mut self, theory: &Theory, statement: &Statement, collection: &TheoryCollection) -> Result<Element, RenderError> {
        let uris = collection.uris();
        let mut section = Element::new("section")
            .attr("id", statement.id.as_str())
            .attr("about", uris.fragment(&theory.id, &statement.id))
            .attr("typeof", format!("o:{}", statement.kind.class_name()))
            .attr("class", statement.kind.keyword());

        let mut heading = Element::new("h2").child(
            Element::new("span")
                .attr("class", "kind")
                .text(statement.kind.class_name()),
        );
        if !statement.generated_id {
            heading.push_text(" ");
            heading.push(
                Element::new("span")
                    .attr("property", "o:title")
                    .text(statement.id.as_str()),
            );
        }
        section.push(heading);

        if !statement.for_targets.is_empty() {
            let mut p = Element::new("p").attr("class", "for").text("For: ");
            for (i, target) in statement.for_targets.iter().enumerate() {
                if i > 0 {
                    p.push_text(", ");
                }
                let mut a = Element::new("a");
                if let Some(rel) = for_relation(statement.kind) {
                    a.set_attr("rel", rel);
                }
                a.set_attr("href", uris.reference(target));
                p.push(a.text(target.fragment.as_str()));
            }
            section.push(p);
        }

        let mut symbols = BTreeSet::new();
        for f in statement.formulas() {
            f.symbols_into(&mut symbols);
        }
        if !symbols.is_empty() {
            let mut uses = Element::new("p").attr("class", "uses").attr("hidden", "hidden");
            for s in &symbols {
                uses.push(
                    Element::new("span")
                        .attr("rel", "o:usesSymbol")
                        .attr("resource", uris.symbol(s))
                        .text(s.name.as_str()),
                );
            }
            section.push(uses);
        }

        if !statement.content.is_empty() {
            let mut p = Element::new("p").attr("class", "content");
            self.content(&mut p, &statement.content)?;
            section.push(p);
        }

        if !statement.steps.is_empty() {
            let mut steps = Element::new("div")
                .attr("class", "steps")
                .attr("rel", "o:hasStep");
            for step in &statement.steps {
                let mut div = Element::new("div")
                    .attr("id", format!("{}.{}", statement.id, step.index))
                    .attr("about", uris.step(&theory.id, &statement.id, step.index))
                    .attr("typeof", "o:ProofStep")
                    .attr("class", "step")
                    .child(
                        Element::new("span")
                            .attr("class", "step-label")
                            .text(format!("{}.", step.index)),
                    );
                let mut body = Element::new("div").attr("class", "step-body");
                self.content(&mut body, &step.content)?;
                div.push(body);
                if let Some(just) = &step.justification {
                    div.push(
                        Element::new("p").attr("class", "justification").text("By ").child(
                            Element::new("a")
                                .attr("rel", "o:justifiedBy")
                                .attr("href", uris.reference(just))
                                .text(just.fragment.as_str()),
                        ),
                    );
                }
                steps.push(div);
            }
            section.push(steps);
        }
        Ok(section)
    }
}

/// The ontology property linking a statement to its `for` targets.
pub(crate) fn for_relation(kind: StatementKind) -> Option<&'static str> {
    match kind {
        StatementKind::Definition => Some("o:defines"),
        StatementKind::Example => Some("o:exemplifies"),
        StatementKind::Proof => Some("o:proves"),
        StatementKind::Theorem | StatementKind::Axiom => None,
    }
}

/// The symbol applied to placeholder variables, showing its notation.
fn preview(sym: &SymbolRef, arity: Arity) -> Option<MathObject> {
    let placeholders = |n: usize| -> Vec<MathObject> {
        (0..n)
            .map(|i| MathObject::Var(char::from(b'a' + i as u8).to_string()))
            .collect()
    };
    let head = MathObject::Sym(sym.clone());
    match arity {
        Arity::Fixed(0) => Some(head),
        Arity::Fixed(n) if n <= 26 => Some(MathObject::apply(head, placeholders(n))),
        Arity::Fixed(_) => None,
        Arity::Flexary => Some(MathObject::apply(head, placeholders(2))),
    }
}
