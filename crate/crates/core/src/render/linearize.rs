use super::{fits, RenderContext, RenderError};
use crate::notation::{Arity, TemplateToken, ATOM_PRECEDENCE};
use crate::omdoc::MathObject;

/// Plain TeX-like text for `obj`, bracketed by the same rules as the MathML.
///
/// For objects written entirely with notations and variables, parsing the
/// result in the same scope gives back `obj`.
pub fn linearize(obj: &MathObject, ctx: &RenderContext) -> Result<String, RenderError> {
    let (text, prec) = lin(obj, ctx)?;
    Ok(if prec < ctx.ambient_precedence() {
        format!("({text})")
    } else {
        text
    })
}

fn bracketed((text, prec): (String, i32), required: i32) -> String {
    if prec < required {
        format!("({text})")
    } else {
        text
    }
}

/// Appends `piece`, separating tokens that would otherwise run together.
fn glue(out: &mut String, piece: &str) {
    let Some(first) = piece.chars().next() else {
        return;
    };
    let trailing_letters = out.len() - out.trim_end_matches(|c: char| c.is_ascii_alphabetic()).len();
    let ends_in_control_word = trailing_letters > 0 && out[..out.len() - trailing_letters].ends_with('\\');
    let ends_in_digit = out.ends_with(|c: char| c.is_ascii_digit());
    if (ends_in_control_word && first.is_ascii_alphabetic()) || (ends_in_digit && first.is_ascii_digit()) {
        out.push(' ');
    }
    out.push_str(piece);
}

fn lin(obj: &MathObject, ctx: &RenderContext) -> Result<(String, i32), RenderError> {
    match obj {
        MathObject::Var(name) => Ok((name.clone(), ATOM_PRECEDENCE)),
        MathObject::Int(v) => Ok((v.to_string(), ATOM_PRECEDENCE)),
        MathObject::Sym(s) => {
            let (entry, template) = ctx.lookup(s)?;
            if entry.arity != Arity::Fixed(0) {
                return Ok((format!("\\{}", s.name), ATOM_PRECEDENCE));
            }
            let mut out = String::new();
            for token in template.tokens() {
                if let TemplateToken::Literal(text) = token {
                    glue(&mut out, text);
                }
            }
            Ok((out.trim().to_string(), entry.precedence))
        }
        MathObject::Apply { head, args } => {
            let MathObject::Sym(s) = head.as_ref() else {
                let head = bracketed(lin(head, ctx)?, ATOM_PRECEDENCE);
                let args = args
                    .iter()
                    .map(|a| lin(a, ctx).map(|(t, _)| t))
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok((format!("{head}({})", args.join(", ")), ATOM_PRECEDENCE));
            };
            let (entry, template) = ctx.lookup(s)?;
            let children = args
                .iter()
                .map(|a| lin(a, ctx))
                .collect::<Result<Vec<_>, _>>()?;
            if !fits(entry.arity, args.len()) {
                let inner: Vec<_> = children.into_iter().map(|(t, _)| t).collect();
                return Ok((format!("\\{}{{{}}}", s.name, inner.join(",")), ATOM_PRECEDENCE));
            }
            let mut out = String::new();
            for token in template.tokens() {
                match token {
                    TemplateToken::Literal(text) => glue(&mut out, text),
                    TemplateToken::Slot { index, precedence } => {
                        if let Some(child) = children.get(index - 1) {
                            glue(&mut out, &bracketed(child.clone(), *precedence));
                        }
                    }
                    TemplateToken::FlexJoin { separator } => {
                        let sep = if separator.starts_with('\\') {
                            format!(" {} ", separator.trim())
                        } else {
                            format!("{} ", separator.trim())
                        };
                        for (i, child) in children.iter().enumerate() {
                            if i > 0 {
                                out.push_str(&sep);
                            }
                            glue(&mut out, &bracketed(child.clone(), entry.precedence));
                        }
                    }
                }
            }
            Ok((out.trim().to_string(), entry.precedence))
        }
        MathObject::Bind { binder, vars, body } => {
            let (binder, _) = lin(binder, ctx)?;
            let (body, _) = lin(body, ctx)?;
            Ok((format!("{binder} {}. {body}", vars.join(", ")), 0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::NotationTemplate;
    use crate::omdoc::SymbolRef;
    use crate::render::NotationEntry;

    fn ctx() -> RenderContext {
        let mut ctx = RenderContext::new("http://ex.org");
        let entry = |arity, precedence, t: &str| NotationEntry {
            arity,
            precedence,
            default: NotationTemplate::parse(t).unwrap(),
            variants: Default::default(),
        };
        ctx.insert(SymbolRef::new("sets", "union"), entry(Arity::Flexary, 500, r"#*[\cup]"));
        ctx.insert(SymbolRef::new("sets", "compl"), entry(Arity::Fixed(1), 600, r"\neg#1!600"));
        ctx
    }

    fn union(args: Vec<MathObject>) -> MathObject {
        MathObject::apply(MathObject::sym("sets", "union"), args)
    }

    #[test]
    fn flexary_join_has_no_brackets() {
        let obj = union(vec![MathObject::var("A"), MathObject::var("B")]);
        assert_eq!(linearize(&obj, &ctx()).unwrap(), r"A \cup B");
    }

    #[test]
    fn lower_precedence_child_is_bracketed() {
        let inner = union(vec![MathObject::var("A"), MathObject::var("B")]);
        let obj = MathObject::apply(MathObject::sym("sets", "compl"), vec![inner]);
        assert_eq!(linearize(&obj, &ctx()).unwrap(), r"\neg(A \cup B)");
        let obj = MathObject::apply(MathObject::sym("sets", "compl"), vec![MathObject::var("x")]);
        assert_eq!(linearize(&obj, &ctx()).unwrap(), r"\neg x");
    }

    #[test]
    fn integer() {
        assert_eq!(linearize(&MathObject::Int(7), &ctx()).unwrap(), "7");
    }
}
