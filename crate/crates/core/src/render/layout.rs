//! A small TeX-to-Presentation-MathML interpreter for notation literals.
//!
//! Input is a token stream where already rendered arguments appear as holes.
//! Every element created from a literal token carries [`LITERAL_MARK`] so the
//! caller can find where the symbol itself ended up; holes never do.

use std::collections::VecDeque;

use crate::stex::math::{tokenize, MathToken};
use crate::xml::{Element, Node};

pub(crate) const LITERAL_MARK: &str = "data-lit";

pub(crate) enum Item {
    Tok(MathToken),
    Hole(Element),
}

/// Tokenizes template literal text into layout items.
pub(crate) fn literal_items(text: &str, out: &mut Vec<Item>) {
    match tokenize(text) {
        Ok(tokens) => out.extend(tokens.into_iter().map(|(t, _)| Item::Tok(t))),
        // Templates are validated at declaration time; keep odd text visible.
        Err(_) => out.push(Item::Hole(marked(Element::new("mtext").text(text)))),
    }
}

fn marked(el: Element) -> Element {
    el.attr(LITERAL_MARK, "1")
}

fn leaf(name: &str, text: impl Into<String>) -> Element {
    marked(Element::new(name).text(text))
}

fn mrow(children: Vec<Element>) -> Element {
    let mut row = Element::new("mrow");
    for c in children {
        row.push(c);
    }
    row
}

/// Lays out the items as a row of MathML elements.
pub(crate) fn layout(items: Vec<Item>) -> Vec<Element> {
    let mut layout = Layout {
        items: items.into(),
    };
    layout.row(false)
}

struct Layout {
    items: VecDeque<Item>,
}

impl Layout {
    fn peek_char(&self) -> Option<char> {
        match self.items.front() {
            Some(Item::Tok(MathToken::Char(c))) => Some(*c),
            _ => None,
        }
    }

    fn row(&mut self, in_group: bool) -> Vec<Element> {
        let mut out: Vec<Element> = Vec::new();
        while let Some(item) = self.items.pop_front() {
            let token = match item {
                Item::Hole(el) => {
                    out.push(el);
                    continue;
                }
                Item::Tok(t) => t,
            };
            match token {
                MathToken::Char('}') if in_group => return out,
                MathToken::Char('{') => {
                    let inner = self.row(true);
                    out.push(single(inner));
                }
                MathToken::Char(c @ ('^' | '_')) => {
                    let base = out.pop().unwrap_or_else(|| mrow(Vec::new()));
                    let script = self.atom();
                    let other = if c == '^' { '_' } else { '^' };
                    let el = if self.peek_char() == Some(other) {
                        self.items.pop_front();
                        let second = self.atom();
                        let (sub, sup) = if c == '_' { (script, second) } else { (second, script) };
                        Element::new("msubsup").child(base).child(sub).child(sup)
                    } else {
                        let name = if c == '^' { "msup" } else { "msub" };
                        Element::new(name).child(base).child(script)
                    };
                    out.push(marked(el));
                }
                MathToken::Cs(name) => {
                    if let Some(el) = self.command(&name) {
                        out.push(el);
                    }
                }
                MathToken::Letter(c) => out.push(leaf("mi", c)),
                MathToken::Digits(d) => out.push(leaf("mn", d)),
                MathToken::Char(c) if c.is_alphabetic() => out.push(leaf("mi", c)),
                MathToken::Char(c) => out.push(leaf("mo", c)),
            }
        }
        out
    }

    /// The next argument: a brace group or a single token.
    fn atom(&mut self) -> Element {
        match self.items.pop_front() {
            None => mrow(Vec::new()),
            Some(Item::Hole(el)) => el,
            Some(Item::Tok(MathToken::Char('{'))) => single(self.row(true)),
            Some(tok) => {
                self.items.push_front(tok);
                let mut one = Layout {
                    items: self.items.drain(..1).collect(),
                };
                single(one.row(false))
            }
        }
    }

    fn command(&mut self, name: &str) -> Option<Element> {
        match name {
            "binom" => {
                let top = self.atom();
                let bottom = self.atom();
                Some(marked(mrow(vec![
                    leaf("mo", "("),
                    marked(
                        Element::new("mfrac")
                            .attr("linethickness", "0")
                            .child(top)
                            .child(bottom),
                    ),
                    leaf("mo", ")"),
                ])))
            }
            "frac" => {
                let top = self.atom();
                let bottom = self.atom();
                Some(marked(Element::new("mfrac").child(top).child(bottom)))
            }
            "sqrt" => Some(marked(Element::new("msqrt").child(self.atom()))),
            "overline" => Some(marked(
                Element::new("mover")
                    .attr("accent", "true")
                    .child(self.atom())
                    .child(leaf("mo", "\u{AF}")),
            )),
            "mathcal" | "mathbb" | "mathfrak" | "mathrm" | "mathit" | "mathbf" => {
                let mut arg = self.atom();
                restyle(&mut arg, name);
                Some(arg)
            }
            "text" | "mbox" => {
                let arg = self.atom();
                Some(leaf("mtext", flat_text(&arg)))
            }
            "left" | "right" | "big" | "Big" | "bigl" | "bigr" => None,
            "," | ";" | "!" | " " | ":" | "quad" | "qquad" => None,
            _ => {
                if let Some(op) = operator(name) {
                    Some(leaf("mo", op))
                } else if let Some(id) = identifier(name) {
                    Some(leaf("mi", id))
                } else if FUNCTIONS.contains(&name) {
                    Some(leaf("mi", name))
                } else if name.chars().count() == 1 {
                    Some(leaf("mo", name))
                } else {
                    Some(leaf("mtext", format!("\\{name}")))
                }
            }
        }
    }
}

fn single(mut row: Vec<Element>) -> Element {
    if row.len() == 1 {
        row.pop().unwrap_or_else(|| mrow(Vec::new()))
    } else {
        mrow(row)
    }
}

fn flat_text(el: &Element) -> String {
    let mut out = String::new();
    el.walk(&mut |e| {
        for child in &e.children {
            if let Node::Text(t) = child {
                out.push_str(t);
            }
        }
    });
    out
}

/// Applies a math alphabet to the literal identifiers inside `el`.
fn restyle(el: &mut Element, alphabet: &str) {
    el.walk_mut(&mut |e| {
        if e.name != "mi" || e.get_attr(LITERAL_MARK).is_none() {
            return;
        }
        match alphabet {
            "mathrm" => e.set_attr("mathvariant", "normal"),
            "mathbf" => e.set_attr("mathvariant", "bold"),
            "mathit" => e.set_attr("mathvariant", "italic"),
            _ => {
                for child in e.children.iter_mut() {
                    if let Node::Text(t) = child {
                        *t = t.chars().map(|c| styled(c, alphabet)).collect();
                    }
                }
            }
        }
    });
}

fn styled(c: char, alphabet: &str) -> char {
    let exceptions: &[(char, char)] = match alphabet {
        "mathcal" => &[
            ('B', '\u{212C}'),
            ('E', '\u{2130}'),
            ('F', '\u{2131}'),
            ('H', '\u{210B}'),
            ('I', '\u{2110}'),
            ('L', '\u{2112}'),
            ('M', '\u{2133}'),
            ('R', '\u{211B}'),
            ('e', '\u{212F}'),
            ('g', '\u{210A}'),
            ('o', '\u{2134}'),
        ],
        "mathbb" => &[
            ('C', '\u{2102}'),
            ('H', '\u{210D}'),
            ('N', '\u{2115}'),
            ('P', '\u{2119}'),
            ('Q', '\u{211A}'),
            ('R', '\u{211D}'),
            ('Z', '\u{2124}'),
        ],
        "mathfrak" => &[
            ('C', '\u{212D}'),
            ('H', '\u{210C}'),
            ('I', '\u{2111}'),
            ('R', '\u{211C}'),
            ('Z', '\u{2128}'),
        ],
        _ => &[],
    };
    if let Some((_, s)) = exceptions.iter().find(|(from, _)| *from == c) {
        return *s;
    }
    let (upper, lower) = match alphabet {
        "mathcal" => (0x1D49C, 0x1D4B6),
        "mathbb" => (0x1D538, 0x1D552),
        "mathfrak" => (0x1D504, 0x1D51E),
        _ => return c,
    };
    let code = if c.is_ascii_uppercase() {
        upper + (c as u32 - 'A' as u32)
    } else if c.is_ascii_lowercase() {
        lower + (c as u32 - 'a' as u32)
    } else {
        return c;
    };
    char::from_u32(code).unwrap_or(c)
}

const FUNCTIONS: &[&str] = &[
    "sin", "cos", "tan", "log", "ln", "exp", "lim", "max", "min", "deg", "det", "dim", "gcd",
    "ker", "sup", "inf",
];

fn operator(name: &str) -> Option<&'static str> {
    Some(match name {
        "cup" => "\u{222A}",
        "cap" => "\u{2229}",
        "bigcup" => "\u{22C3}",
        "bigcap" => "\u{22C2}",
        "times" => "\u{D7}",
        "cdot" => "\u{22C5}",
        "circ" => "\u{2218}",
        "neg" | "lnot" => "\u{AC}",
        "setminus" => "\u{2216}",
        "in" => "\u{2208}",
        "notin" => "\u{2209}",
        "subseteq" => "\u{2286}",
        "subset" => "\u{2282}",
        "supseteq" => "\u{2287}",
        "leq" | "le" => "\u{2264}",
        "geq" | "ge" => "\u{2265}",
        "neq" | "ne" => "\u{2260}",
        "to" | "rightarrow" => "\u{2192}",
        "mapsto" => "\u{21A6}",
        "Rightarrow" | "implies" => "\u{21D2}",
        "Leftrightarrow" | "iff" => "\u{21D4}",
        "land" | "wedge" => "\u{2227}",
        "lor" | "vee" => "\u{2228}",
        "forall" => "\u{2200}",
        "exists" => "\u{2203}",
        "vDash" | "models" => "\u{22A8}",
        "vdash" => "\u{22A2}",
        "langle" => "\u{27E8}",
        "rangle" => "\u{27E9}",
        "sum" => "\u{2211}",
        "prod" => "\u{220F}",
        "mid" => "\u{2223}",
        "pm" => "\u{B1}",
        "ldots" | "dots" => "\u{2026}",
        "cdots" => "\u{22EF}",
        "equiv" => "\u{2261}",
        "approx" => "\u{2248}",
        "oplus" => "\u{2295}",
        "otimes" => "\u{2297}",
        "|" => "\u{2016}",
        "{" => "{",
        "}" => "}",
        _ => return None,
    })
}

fn identifier(name: &str) -> Option<&'static str> {
    Some(match name {
        "emptyset" | "varnothing" => "\u{2205}",
        "infty" => "\u{221E}",
        "ell" => "\u{2113}",
        "alpha" => "\u{3B1}",
        "beta" => "\u{3B2}",
        "gamma" => "\u{3B3}",
        "delta" => "\u{3B4}",
        "epsilon" | "varepsilon" => "\u{3B5}",
        "zeta" => "\u{3B6}",
        "eta" => "\u{3B7}",
        "theta" => "\u{3B8}",
        "iota" => "\u{3B9}",
        "kappa" => "\u{3BA}",
        "lambda" => "\u{3BB}",
        "mu" => "\u{3BC}",
        "nu" => "\u{3BD}",
        "xi" => "\u{3BE}",
        "pi" => "\u{3C0}",
        "rho" => "\u{3C1}",
        "sigma" => "\u{3C3}",
        "tau" => "\u{3C4}",
        "phi" | "varphi" => "\u{3C6}",
        "chi" => "\u{3C7}",
        "psi" => "\u{3C8}",
        "omega" => "\u{3C9}",
        "Gamma" => "\u{393}",
        "Delta" => "\u{394}",
        "Theta" => "\u{398}",
        "Lambda" => "\u{39B}",
        "Xi" => "\u{39E}",
        "Pi" => "\u{3A0}",
        "Sigma" => "\u{3A3}",
        "Phi" => "\u{3A6}",
        "Psi" => "\u{3A8}",
        "Omega" => "\u{3A9}",
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn render(text: &str) -> String {
        let mut items = Vec::new();
        literal_items(text, &mut items);
        let mut row = mrow(layout(items));
        row.walk_mut(&mut |e| e.remove_attr(LITERAL_MARK));
        row.to_compact_string()
    }

    #[test]
    fn scripts_and_alphabets() {
        assert_eq!(
            render(r"\mathcal{C}^{k}_{n}"),
            "<mrow><msubsup><mi>\u{1D49E}</mi><mi>n</mi><mi>k</mi></msubsup></mrow>"
        );
        assert_eq!(render(r"\mathbb{N}"), "<mrow><mi>\u{2115}</mi></mrow>");
        assert_eq!(render("x_1"), "<mrow><msub><mi>x</mi><mn>1</mn></msub></mrow>");
    }

    #[test]
    fn binom_layout() {
        assert_eq!(
            render(r"\binom{n}{k}"),
            "<mrow><mrow><mo>(</mo><mfrac linethickness=\"0\"><mi>n</mi><mi>k</mi></mfrac><mo>)</mo></mrow></mrow>"
        );
    }

    #[test]
    fn operators_and_unknown_commands() {
        assert_eq!(
            render(r"A \cup \emptyset \foo"),
            "<mrow><mi>A</mi><mo>\u{222A}</mo><mi>\u{2205}</mi><mtext>\\foo</mtext></mrow>"
        );
    }
}
