//! OpenMath XML encoding of [`MathObject`] trees.

use super::xml::FormatError;
use super::{MathObject, SymbolRef};
use crate::xml::Element;

pub const OPENMATH_NS: &str = "http://www.openmath.org/OpenMath";

/// Presentation/content cross-reference id: `{formula-ordinal}.{preorder-index}`.
pub fn xref_id(ordinal: usize, index: usize) -> String {
    format!("{ordinal}.{index}")
}

/// `<OMOBJ>` wrapper around the encoded object.
pub fn to_omobj(obj: &MathObject, xref_ordinal: Option<usize>) -> Element {
    let mut counter = 0;
    Element::new("OMOBJ")
        .attr("xmlns", OPENMATH_NS)
        .child(encode(obj, xref_ordinal, &mut counter))
}

/// Encodes `obj`; with an ordinal, every node gets an `xref` numbered in preorder.
pub fn encode(obj: &MathObject, xref_ordinal: Option<usize>, counter: &mut usize) -> Element {
    let mut next_xref = |el: Element| -> Element {
        let index = *counter;
        *counter += 1;
        match xref_ordinal {
            Some(ord) => el.attr("xref", xref_id(ord, index)),
            None => el,
        }
    };
    match obj {
        MathObject::Sym(s) => next_xref(
            Element::new("OMS")
                .attr("cd", s.theory.as_str())
                .attr("name", s.name.as_str()),
        ),
        MathObject::Var(name) => next_xref(Element::new("OMV").attr("name", name.as_str())),
        MathObject::Int(value) => next_xref(Element::new("OMI").text(value.to_string())),
        MathObject::Apply { head, args } => {
            let mut el = next_xref(Element::new("OMA"));
            el.push(encode(head, xref_ordinal, counter));
            for arg in args {
                el.push(encode(arg, xref_ordinal, counter));
            }
            el
        }
        MathObject::Bind { binder, vars, body } => {
            let mut el = next_xref(Element::new("OMBIND"));
            el.push(encode(binder, xref_ordinal, counter));
            let mut bvar = Element::new("OMBVAR");
            for v in vars {
                bvar.push(encode(&MathObject::Var(v.clone()), xref_ordinal, counter));
            }
            el.push(bvar);
            el.push(encode(body, xref_ordinal, counter));
            el
        }
    }
}

fn element_children<'a, 'i>(
    node: roxmltree::Node<'a, 'i>,
) -> impl Iterator<Item = roxmltree::Node<'a, 'i>> {
    node.children().filter(|c| c.is_element())
}

fn required_attr<'a>(node: roxmltree::Node<'a, '_>, name: &str) -> Result<&'a str, FormatError> {
    node.attribute(name)
        .ok_or_else(|| FormatError::missing_attr(node, name))
}

/// Decodes an `<OMOBJ>` element (or a bare OpenMath element). `xref` attributes are ignored.
pub fn decode(node: roxmltree::Node<'_, '_>) -> Result<MathObject, FormatError> {
    let name = node.tag_name().name();
    match name {
        "OMOBJ" => {
            let mut kids = element_children(node);
            let inner = kids
                .next()
                .ok_or_else(|| FormatError::at(node, "OMOBJ must contain one object"))?;
            if kids.next().is_some() {
                return Err(FormatError::at(node, "OMOBJ must contain one object"));
            }
            decode(inner)
        }
        "OMS" => Ok(MathObject::Sym(SymbolRef::new(
            required_attr(node, "cd")?,
            required_attr(node, "name")?,
        ))),
        "OMV" => Ok(MathObject::Var(required_attr(node, "name")?.to_string())),
        "OMI" => {
            let text = node.text().unwrap_or("").trim();
            text.parse()
                .map(MathObject::Int)
                .map_err(|_| FormatError::at(node, format!("invalid integer `{text}`")))
        }
        "OMA" => {
            let mut kids = element_children(node);
            let head = kids
                .next()
                .ok_or_else(|| FormatError::at(node, "OMA without head"))?;
            let head = decode(head)?;
            let args = kids.map(decode).collect::<Result<Vec<_>, _>>()?;
            Ok(MathObject::apply(head, args))
        }
        "OMBIND" => {
            let kids: Vec<_> = element_children(node).collect();
            if kids.len() != 3 || kids[1].tag_name().name() != "OMBVAR" {
                return Err(FormatError::at(node, "OMBIND needs binder, OMBVAR and body"));
            }
            let binder = decode(kids[0])?;
            let vars = element_children(kids[1])
                .map(|v| {
                    if v.tag_name().name() != "OMV" {
                        return Err(FormatError::unknown_element(v));
                    }
                    Ok(required_attr(v, "name")?.to_string())
                })
                .collect::<Result<Vec<_>, _>>()?;
            let body = decode(kids[2])?;
            Ok(MathObject::Bind {
                binder: Box::new(binder),
                vars,
                body: Box::new(body),
            })
        }
        _ => Err(FormatError::unknown_element(node)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xrefs_follow_preorder() {
        let obj = MathObject::apply(
            MathObject::sym("sets", "union"),
            vec![MathObject::var("A"), MathObject::var("B")],
        );
        let el = to_omobj(&obj, Some(3));
        assert_eq!(
            el.to_compact_string(),
            "<OMOBJ xmlns=\"http://www.openmath.org/OpenMath\"><OMA xref=\"3.0\">\
             <OMS cd=\"sets\" name=\"union\" xref=\"3.1\"/><OMV name=\"A\" xref=\"3.2\"/>\
             <OMV name=\"B\" xref=\"3.3\"/></OMA></OMOBJ>"
        );
    }

    #[test]
    fn decode_round_trips_binders() {
        let obj = MathObject::Bind {
            binder: Box::new(MathObject::sym("logic", "forall")),
            vars: vec!["x".into(), "y".into()],
            body: Box::new(MathObject::apply(
                MathObject::sym("logic", "eq"),
                vec![MathObject::var("x"), MathObject::Int(-4)],
            )),
        };
        let text = to_omobj(&obj, Some(1)).to_compact_string();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(decode(doc.root_element()).unwrap(), obj);
    }

    #[test]
    fn decode_rejects_unknown_elements() {
        let doc = roxmltree::Document::parse("<OMOBJ><OMX/></OMOBJ>").unwrap();
        assert!(decode(doc.root_element()).is_err());
        let doc = roxmltree::Document::parse("<OMS name=\"x\"/>").unwrap();
        assert!(decode(doc.root_element()).is_err());
    }
}
