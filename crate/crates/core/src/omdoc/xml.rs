//! Canonical XML form of a [`TheoryCollection`].
//!
//! The vocabulary is frozen in `schema/omdoc-subset.rnc`. Output is
//! byte-deterministic: theories in id order, attributes in a fixed order,
//! two-space indentation.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

use super::openmath;
use super::{
    Content, ProofStep, Ref, Statement, StatementKind, SymbolInfo, Theory,
    TheoryCollection,
};
use crate::notation::{Arity, NotationTemplate, TemplateToken};
use crate::xml::Element;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: u32,
    pub message: String,
}

impl FormatError {
    pub(crate) fn at(node: roxmltree::Node<'_, '_>, message: impl Into<String>) -> Self {
        let pos = node.document().text_pos_at(node.range().start);
        FormatError {
            line: pos.row,
            message: message.into(),
        }
    }

    pub(crate) fn missing_attr(node: roxmltree::Node<'_, '_>, attr: &str) -> Self {
        Self::at(
            node,
            format!("<{}> is missing required attribute `{attr}`", node.tag_name().name()),
        )
    }

    pub(crate) fn unknown_element(node: roxmltree::Node<'_, '_>) -> Self {
        Self::at(node, format!("unknown element <{}>", node.tag_name().name()))
    }
}

const XML_NS: &str = "http://www.w3.org/XML/1998/namespace";

pub fn to_xml(collection: &TheoryCollection) -> String {
    render_root(collection, collection.theories.values())
}

/// XML document containing a single theory of the collection.
pub fn theory_to_xml(collection: &TheoryCollection, theory_id: &str) -> Option<String> {
    let theory = collection.theories.get(theory_id)?;
    Some(render_root(collection, std::iter::once(theory)))
}

fn render_root<'a>(
    collection: &TheoryCollection,
    theories: impl Iterator<Item = &'a Theory>,
) -> String {
    let mut root = Element::new("omdoc").attr("xml:base", collection.base_uri.as_str());
    for theory in theories {
        root.push(theory_element(theory));
    }
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    root.write_pretty(&mut out, 0);
    out
}

fn theory_element(theory: &Theory) -> Element {
    let mut el = Element::new("theory").attr("xml:id", theory.id.as_str());
    for import in &theory.imports {
        el.push(Element::new("imports").attr("from", import.as_str()));
    }
    for symbol in &theory.symbols {
        el.push(symbol_element(symbol));
    }
    for statement in &theory.statements {
        el.push(statement_element(statement));
    }
    el
}

fn symbol_element(symbol: &SymbolInfo) -> Element {
    let mut el = Element::new("symbol")
        .attr("name", symbol.name.as_str())
        .attr("arity", symbol.arity.to_string())
        .attr("prec", symbol.precedence.to_string());
    el.push(notation_element(&symbol.notation, None));
    for (key, template) in &symbol.variants {
        el.push(notation_element(template, Some(key)));
    }
    el
}

fn notation_element(template: &NotationTemplate, variant: Option<&str>) -> Element {
    let mut el = Element::new("notation");
    if let Some(key) = variant {
        el.set_attr("variant", key);
    }
    for token in template.tokens() {
        el.push(match token {
            TemplateToken::Literal(text) => Element::new("lit").text(text.as_str()),
            TemplateToken::Slot { index, precedence } => Element::new("slot")
                .attr("index", index.to_string())
                .attr("prec", precedence.to_string()),
            TemplateToken::FlexJoin { separator } => {
                Element::new("join").attr("sep", separator.as_str())
            }
        });
    }
    el
}

fn content_elements(content: &[Content], into: &mut Element) {
    for item in content {
        into.push(match item {
            Content::Prose(text) => Element::new("p").text(text.as_str()),
            Content::Formula(obj) => openmath::to_omobj(obj, None),
        });
    }
}

fn statement_element(statement: &Statement) -> Element {
    let mut el = Element::new("statement")
        .attr("xml:id", statement.id.as_str())
        .attr("kind", statement.kind.keyword());
    if !statement.for_targets.is_empty() {
        let targets: Vec<String> = statement.for_targets.iter().map(Ref::to_string).collect();
        el.set_attr("for", targets.join(" "));
    }
    if statement.generated_id {
        el.set_attr("generated", "true");
    }
    content_elements(&statement.content, &mut el);
    for step in &statement.steps {
        let mut s = Element::new("step").attr("index", step.index.to_string());
        if let Some(j) = &step.justification {
            s.set_attr("just", j.to_string());
        }
        content_elements(&step.content, &mut s);
        el.push(s);
    }
    el
}

pub fn from_xml(xml: &str) -> Result<TheoryCollection, FormatError> {
    let doc = roxmltree::Document::parse(xml).map_err(|e| FormatError {
        line: e.pos().row,
        message: e.to_string(),
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "omdoc" {
        return Err(FormatError::unknown_element(root));
    }
    let base = root
        .attribute((XML_NS, "base"))
        .ok_or_else(|| FormatError::missing_attr(root, "xml:base"))?;
    let mut collection = TheoryCollection::new(base);
    for node in elements(root) {
        if node.tag_name().name() != "theory" {
            return Err(FormatError::unknown_element(node));
        }
        let theory = parse_theory(node)?;
        if collection.theories.contains_key(&theory.id) {
            return Err(FormatError::at(node, format!("duplicate theory `{}`", theory.id)));
        }
        collection.insert(theory);
    }
    Ok(collection)
}

fn elements<'a, 'i>(node: roxmltree::Node<'a, 'i>) -> impl Iterator<Item = roxmltree::Node<'a, 'i>> {
    node.children().filter(|c| c.is_element())
}

fn attr<'a>(node: roxmltree::Node<'a, '_>, name: &str) -> Result<&'a str, FormatError> {
    node.attribute(name)
        .ok_or_else(|| FormatError::missing_attr(node, name))
}

fn xml_id<'a>(node: roxmltree::Node<'a, '_>) -> Result<&'a str, FormatError> {
    node.attribute((XML_NS, "id"))
        .ok_or_else(|| FormatError::missing_attr(node, "xml:id"))
}

fn parse_number<T: FromStr>(node: roxmltree::Node<'_, '_>, name: &str) -> Result<T, FormatError> {
    let raw = attr(node, name)?;
    raw.parse()
        .map_err(|_| FormatError::at(node, format!("attribute `{name}` is not a number: `{raw}`")))
}

fn parse_theory(node: roxmltree::Node<'_, '_>) -> Result<Theory, FormatError> {
    let mut theory = Theory::new(xml_id(node)?);
    for child in elements(node) {
        match child.tag_name().name() {
            "imports" => theory.imports.push(attr(child, "from")?.to_string()),
            "symbol" => theory.symbols.push(parse_symbol(child)?),
            "statement" => theory.statements.push(parse_statement(child)?),
            _ => return Err(FormatError::unknown_element(child)),
        }
    }
    Ok(theory)
}

fn parse_symbol(node: roxmltree::Node<'_, '_>) -> Result<SymbolInfo, FormatError> {
    let arity = match attr(node, "arity")? {
        "flexary" => Arity::Flexary,
        _ => Arity::Fixed(parse_number(node, "arity")?),
    };
    let mut notation = None;
    let mut variants = BTreeMap::new();
    for child in elements(node) {
        if child.tag_name().name() != "notation" {
            return Err(FormatError::unknown_element(child));
        }
        let template = parse_notation(child)?;
        match child.attribute("variant") {
            Some(key) => {
                variants.insert(key.to_string(), template);
            }
            None if notation.is_none() => notation = Some(template),
            None => return Err(FormatError::at(child, "more than one default notation")),
        }
    }
    Ok(SymbolInfo {
        name: attr(node, "name")?.to_string(),
        arity,
        precedence: parse_number(node, "prec")?,
        notation: notation.ok_or_else(|| FormatError::at(node, "symbol without a default notation"))?,
        variants,
    })
}

fn parse_notation(node: roxmltree::Node<'_, '_>) -> Result<NotationTemplate, FormatError> {
    let mut tokens = Vec::new();
    for child in elements(node) {
        tokens.push(match child.tag_name().name() {
            "lit" => TemplateToken::Literal(child.text().unwrap_or("").to_string()),
            "slot" => TemplateToken::Slot {
                index: parse_number(child, "index")?,
                precedence: parse_number(child, "prec")?,
            },
            "join" => TemplateToken::FlexJoin {
                separator: attr(child, "sep")?.to_string(),
            },
            _ => return Err(FormatError::unknown_element(child)),
        });
    }
    if tokens.is_empty() {
        return Err(FormatError::at(node, "empty notation"));
    }
    Ok(NotationTemplate::new(tokens))
}

fn parse_ref(node: roxmltree::Node<'_, '_>, raw: &str) -> Result<Ref, FormatError> {
    Ref::from_str(raw).map_err(|_| FormatError::at(node, format!("malformed reference `{raw}`")))
}

fn parse_content(node: roxmltree::Node<'_, '_>) -> Result<Option<Content>, FormatError> {
    Ok(match node.tag_name().name() {
        "p" => Some(Content::Prose(node.text().unwrap_or("").to_string())),
        "OMOBJ" => Some(Content::Formula(openmath::decode(node)?)),
        _ => None,
    })
}

fn parse_statement(node: roxmltree::Node<'_, '_>) -> Result<Statement, FormatError> {
    let kind_raw = attr(node, "kind")?;
    let kind = StatementKind::from_str(kind_raw)
        .map_err(|_| FormatError::at(node, format!("unknown statement kind `{kind_raw}`")))?;
    let for_targets = node
        .attribute("for")
        .unwrap_or("")
        .split_whitespace()
        .map(|r| parse_ref(node, r))
        .collect::<Result<Vec<_>, _>>()?;
    let mut statement = Statement {
        id: xml_id(node)?.to_string(),
        generated_id: node.attribute("generated") == Some("true"),
        kind,
        for_targets,
        content: Vec::new(),
        steps: Vec::new(),
    };
    for child in elements(node) {
        if child.tag_name().name() == "step" {
            let mut step = ProofStep {
                index: parse_number(child, "index")?,
                content: Vec::new(),
                justification: child.attribute("just").map(|j| parse_ref(child, j)).transpose()?,
            };
            for c in elements(child) {
                step.content
                    .push(parse_content(c)?.ok_or_else(|| FormatError::unknown_element(c))?);
            }
            statement.steps.push(step);
        } else {
            statement
                .content
                .push(parse_content(child)?.ok_or_else(|| FormatError::unknown_element(child))?);
        }
    }
    Ok(statement)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_collection() {
        let c = TheoryCollection::new("http://ex.org");
        let xml = to_xml(&c);
        assert_eq!(
            xml,
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<omdoc xml:base=\"http://ex.org\"/>\n"
        );
        assert_eq!(from_xml(&xml).unwrap(), c);
    }

    #[test]
    fn theory_without_id_is_rejected() {
        let err = from_xml("<omdoc xml:base=\"http://ex.org\"><theory/></omdoc>").unwrap_err();
        assert!(err.message.contains("xml:id"), "{err}");
    }

    #[test]
    fn unknown_elements_are_rejected() {
        let err = from_xml(
            "<omdoc xml:base=\"http://ex.org\"><theory xml:id=\"a\"><axiom/></theory></omdoc>",
        )
        .unwrap_err();
        assert!(err.message.contains("unknown element <axiom>"), "{err}");
        assert!(from_xml("<notomdoc/>").is_err());
        assert!(from_xml("<omdoc/>").is_err());
    }

    #[test]
    fn symbol_without_required_attribute() {
        let err = from_xml(
            "<omdoc xml:base=\"b\"><theory xml:id=\"a\"><symbol name=\"u\" prec=\"1\">\
             <notation><lit>u</lit></notation></symbol></theory></omdoc>",
        )
        .unwrap_err();
        assert!(err.message.contains("arity"), "{err}");
    }
}
