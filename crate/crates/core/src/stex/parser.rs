use std::collections::BTreeMap;
use std::str::FromStr;

use super::{
    is_identifier, is_symbol_name, BodyItem, NotationVariantDecl, ParseError, Run, SourceModule,
    SourceStep, StatementEnv, SymDecl, Warning,
};
use crate::notation::{NotationTemplate, DEFAULT_PRECEDENCE};
use crate::omdoc::StatementKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Loc {
    line: u32,
    column: u32,
}

impl Loc {
    fn error(self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor {
            src,
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn loc(&self) -> Loc {
        Loc {
            line: self.line,
            column: self.column,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let ch = self.peek()?;
        self.pos += ch.len_utf8();
        if ch == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(ch)
    }

    fn eat(&mut self, expected: char) -> bool {
        if self.peek() == Some(expected) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn skip_comment(&mut self) {
        while let Some(ch) = self.bump() {
            if ch == '\n' {
                break;
            }
        }
    }

    fn skip_blank(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('%') => self.skip_comment(),
                _ => break,
            }
        }
    }

    /// Reads a control sequence after the backslash has been consumed.
    fn control_sequence(&mut self) -> String {
        let mut name = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_alphabetic) {
            name.push(c);
            self.bump();
        }
        if name.is_empty() {
            if let Some(c) = self.bump() {
                name.push(c);
            }
        }
        name
    }

    /// Reads a brace group and returns its raw inner text.
    fn group(&mut self, what: &str) -> Result<String, ParseError> {
        let open = self.loc();
        if !self.eat('{') {
            return Err(open.error(format!("expected `{{` to start {what}")));
        }
        let start = self.pos;
        let mut depth = 0usize;
        loop {
            match self.bump() {
                None => return Err(open.error(format!("unbalanced braces in {what}"))),
                Some('\\') => {
                    self.bump();
                }
                Some('{') => depth += 1,
                Some('}') if depth == 0 => break,
                Some('}') => depth -= 1,
                Some(_) => {}
            }
        }
        Ok(self.src[start..self.pos - 1].to_string())
    }

    /// Reads `[key=value, ...]` if the next character opens one.
    fn options(&mut self) -> Result<Option<Options>, ParseError> {
        let open = self.loc();
        if !self.eat('[') {
            return Ok(None);
        }
        let start = self.pos;
        let mut depth = 0usize;
        loop {
            match self.bump() {
                None => return Err(open.error("unterminated `[` option list")),
                Some('{') | Some('[') => depth += 1,
                Some(']') if depth == 0 => break,
                Some('}') | Some(']') => depth = depth.saturating_sub(1),
                Some(_) => {}
            }
        }
        let raw = &self.src[start..self.pos - 1];
        Options::parse(raw, open).map(Some)
    }
}

struct Options {
    loc: Loc,
    entries: Vec<(String, Vec<String>)>,
}

impl Options {
    fn parse(raw: &str, loc: Loc) -> Result<Self, ParseError> {
        let mut entries: Vec<(String, Vec<String>)> = Vec::new();
        for item in raw.split(',') {
            let item = item.trim();
            if item.is_empty() {
                if raw.trim().is_empty() {
                    continue;
                }
                return Err(loc.error("empty entry in option list"));
            }
            match item.split_once('=') {
                Some((key, value)) => {
                    let key = key.trim();
                    let value = value.trim();
                    if key.is_empty() || value.is_empty() {
                        return Err(loc.error(format!("malformed option `{item}`")));
                    }
                    if entries.iter().any(|(k, _)| k == key) {
                        return Err(loc.error(format!("option `{key}` given twice")));
                    }
                    entries.push((key.to_string(), vec![value.to_string()]));
                }
                None => match entries.last_mut() {
                    // `for=a,b`: bare items extend the previous key
                    Some((_, values)) => values.push(item.to_string()),
                    None => return Err(loc.error(format!("malformed option `{item}`, expected key=value"))),
                },
            }
        }
        Ok(Options { loc, entries })
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), ParseError> {
        for (key, _) in &self.entries {
            if !allowed.contains(&key.as_str()) {
                return Err(self.loc.error(format!("unknown option `{key}`")));
            }
        }
        Ok(())
    }

    fn single(&self, key: &str) -> Result<Option<&str>, ParseError> {
        match self.entries.iter().find(|(k, _)| k == key) {
            None => Ok(None),
            Some((_, values)) if values.len() == 1 => Ok(Some(values[0].as_str())),
            Some(_) => Err(self.loc.error(format!("option `{key}` takes a single value"))),
        }
    }

    fn list(&self, key: &str) -> Vec<String> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
            .unwrap_or_default()
    }
}

/// `name` or `theory?name`
fn is_reference(s: &str) -> bool {
    match s.split_once('?') {
        Some((theory, name)) => is_identifier(theory) && is_identifier(name),
        None => is_identifier(s),
    }
}

fn normalize_space(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_space = false;
    for ch in text.chars() {
        if ch.is_whitespace() {
            in_space = true;
        } else {
            if in_space {
                out.push(' ');
                in_space = false;
            }
            out.push(ch);
        }
    }
    if in_space {
        out.push(' ');
    }
    out
}

/// Collapses whitespace, trims the outer edges of the run sequence and drops blank prose.
fn finish_runs(runs: Vec<Run>) -> Vec<Run> {
    let mut runs: Vec<Run> = runs
        .into_iter()
        .map(|r| match r {
            Run::Prose(p) => Run::Prose(normalize_space(&p)),
            m => m,
        })
        .collect();
    if let Some(Run::Prose(first)) = runs.first_mut() {
        *first = first.trim_start().to_string();
    }
    if let Some(Run::Prose(last)) = runs.last_mut() {
        *last = last.trim_end().to_string();
    }
    runs.retain(|r| !matches!(r, Run::Prose(p) if p.trim().is_empty()));
    runs
}

enum Terminator {
    Env { kind: StatementKind, begin: Loc },
    Brace { open: Loc },
}

struct Parser<'a> {
    cur: Cursor<'a>,
    warnings: Vec<Warning>,
}

/// Parses one `.stex` module.
pub fn parse_module(source: &str) -> Result<SourceModule, ParseError> {
    let mut p = Parser {
        cur: Cursor::new(source),
        warnings: Vec::new(),
    };
    p.cur.skip_blank();
    let begin = p.cur.loc();
    if !(p.cur.eat('\\') && p.cur.control_sequence() == "begin") {
        return Err(begin.error("expected `\\begin{module}`"));
    }
    let env = p.cur.group("environment name")?;
    if env != "module" {
        return Err(begin.error(format!("expected `\\begin{{module}}`, found `\\begin{{{env}}}`")));
    }
    let opts = p
        .cur
        .options()?
        .ok_or_else(|| begin.error("module needs an `[id=...]` option"))?;
    opts.check_keys(&["id"])?;
    let id = opts
        .single("id")?
        .ok_or_else(|| begin.error("module needs an `[id=...]` option"))?
        .to_string();
    if !is_identifier(&id) {
        return Err(opts.loc.error(format!("invalid module id `{id}`")));
    }
    let mut module = p.module_body(id, begin)?;
    p.cur.skip_blank();
    if p.cur.peek().is_some() {
        return Err(p.cur.loc().error("unexpected content after `\\end{module}`"));
    }
    module.warnings = p.warnings;
    Ok(module)
}

impl<'a> Parser<'a> {
    fn module_body(&mut self, id: String, begin: Loc) -> Result<SourceModule, ParseError> {
        let mut imports = Vec::new();
        let mut body = Vec::new();
        let mut symbol_locs: BTreeMap<String, Loc> = BTreeMap::new();
        let mut variant_locs: Vec<Loc> = Vec::new();
        let mut prose = String::new();
        let mut depth = 0usize;

        loop {
            let loc = self.cur.loc();
            let Some(ch) = self.cur.peek() else {
                return Err(begin.error("unclosed environment `module`"));
            };
            match ch {
                '%' => {
                    self.cur.skip_comment();
                    continue;
                }
                '{' => {
                    depth += 1;
                    prose.push(ch);
                    self.cur.bump();
                    continue;
                }
                '}' => {
                    if depth == 0 {
                        return Err(loc.error("unbalanced `}`"));
                    }
                    depth -= 1;
                    prose.push(ch);
                    self.cur.bump();
                    continue;
                }
                '\\' => {}
                _ => {
                    prose.push(ch);
                    self.cur.bump();
                    continue;
                }
            }

            self.cur.bump();
            let cs = self.cur.control_sequence();
            if !matches!(cs.as_str(), "importmodule" | "symdef" | "symvariant" | "begin" | "end") {
                // unknown commands inside module-level prose stay verbatim
                prose.push('\\');
                prose.push_str(&cs);
                continue;
            }
            flush_prose(&mut prose, &mut body);
            match cs.as_str() {
                "importmodule" => {
                    let target = self.cur.group("import target")?.trim().to_string();
                    if !is_identifier(&target) {
                        return Err(loc.error(format!("invalid module id `{target}` in import")));
                    }
                    imports.push(target);
                }
                "symdef" => {
                    let name = self.cur.group("symbol name")?.trim().to_string();
                    if !is_symbol_name(&name) {
                        return Err(loc.error(format!("invalid symbol name `{name}` (letters only)")));
                    }
                    let precedence = match self.cur.options()? {
                        Some(opts) => {
                            opts.check_keys(&["prec"])?;
                            match opts.single("prec")? {
                                Some(raw) => raw.parse().map_err(|_| {
                                    opts.loc.error(format!("precedence `{raw}` is not an integer"))
                                })?,
                                None => DEFAULT_PRECEDENCE,
                            }
                        }
                        None => DEFAULT_PRECEDENCE,
                    };
                    let raw = self.cur.group("notation template")?;
                    let template = NotationTemplate::parse(&raw)
                        .map_err(|e| loc.error(format!("symbol `{name}`: {e}")))?;
                    let arity = template.implied_arity();
                    template
                        .check_arity(arity)
                        .map_err(|m| loc.error(format!("symbol `{name}`: {m}")))?;
                    if symbol_locs.insert(name.clone(), loc).is_some() {
                        return Err(loc.error(format!("duplicate symbol `{name}` in module `{id}`")));
                    }
                    body.push(BodyItem::Symbol(SymDecl {
                        name,
                        arity,
                        precedence,
                        template,
                    }));
                }
                "symvariant" => {
                    let symbol = self.cur.group("symbol name")?.trim().to_string();
                    let key = self.cur.group("variant key")?.trim().to_string();
                    if !is_identifier(&key) {
                        return Err(loc.error(format!("invalid variant key `{key}`")));
                    }
                    let raw = self.cur.group("notation template")?;
                    let template = NotationTemplate::parse(&raw)
                        .map_err(|e| loc.error(format!("variant `{key}` of `{symbol}`: {e}")))?;
                    variant_locs.push(loc);
                    body.push(BodyItem::Variant(NotationVariantDecl {
                        symbol,
                        key,
                        template,
                    }));
                }
                "begin" => {
                    let env = self.cur.group("environment name")?;
                    let kind = StatementKind::from_str(&env).map_err(|_| {
                        if env == "module" {
                            loc.error("nested modules are not supported")
                        } else {
                            loc.error(format!("unknown environment `{env}`"))
                        }
                    })?;
                    body.push(BodyItem::Statement(self.statement(kind, loc)?));
                }
                "end" => {
                    let env = self.cur.group("environment name")?;
                    if env != "module" {
                        return Err(loc.error(format!("unexpected `\\end{{{env}}}` in module body")));
                    }
                    if depth != 0 {
                        return Err(loc.error("unbalanced `{` before `\\end{module}`"));
                    }
                    break;
                }
                _ => unreachable!(),
            }
        }
        flush_prose(&mut prose, &mut body);

        self.check_variants(&body, &symbol_locs, &variant_locs)?;
        Ok(SourceModule {
            id,
            imports,
            body,
            warnings: Vec::new(),
        })
    }

    fn check_variants(
        &mut self,
        body: &[BodyItem],
        symbols: &BTreeMap<String, Loc>,
        variant_locs: &[Loc],
    ) -> Result<(), ParseError> {
        let mut seen: BTreeMap<(&str, &str), Loc> = BTreeMap::new();
        let variants = body.iter().filter_map(|b| match b {
            BodyItem::Variant(v) => Some(v),
            _ => None,
        });
        for (variant, &loc) in variants.zip(variant_locs) {
            if !symbols.contains_key(&variant.symbol) {
                return Err(loc.error(format!(
                    "notation variant for `{}`, which this module does not declare",
                    variant.symbol
                )));
            }
            let decl = body
                .iter()
                .find_map(|b| match b {
                    BodyItem::Symbol(s) if s.name == variant.symbol => Some(s),
                    _ => None,
                })
                .expect("declared symbol");
            variant
                .template
                .check_arity(decl.arity)
                .map_err(|m| loc.error(format!("variant `{}` of `{}`: {m}", variant.key, variant.symbol)))?;
            if let Some(prev) = seen.insert((&variant.symbol, &variant.key), loc) {
                self.warnings.push(Warning {
                    line: loc.line,
                    column: loc.column,
                    message: format!(
                        "variant `{}` of `{}` redefined (previous definition at {}:{})",
                        variant.key, variant.symbol, prev.line, prev.column
                    ),
                });
            }
        }
        Ok(())
    }

    fn statement(&mut self, kind: StatementKind, begin: Loc) -> Result<StatementEnv, ParseError> {
        let mut id = None;
        let mut for_refs = Vec::new();
        if let Some(opts) = self.cur.options()? {
            opts.check_keys(&["id", "for"])?;
            if let Some(raw) = opts.single("id")? {
                if !is_identifier(raw) {
                    return Err(opts.loc.error(format!("invalid statement id `{raw}`")));
                }
                id = Some(raw.to_string());
            }
            for r in opts.list("for") {
                if !is_reference(&r) {
                    return Err(opts.loc.error(format!("invalid reference `{r}` in `for`")));
                }
                for_refs.push(r);
            }
        }
        let (content, steps) = self.runs(Terminator::Env { kind, begin }, kind == StatementKind::Proof)?;
        Ok(StatementEnv {
            kind,
            id,
            for_refs,
            content,
            steps,
        })
    }

    /// Reads prose/math runs up to the terminator; proof bodies may also contain steps.
    fn runs(
        &mut self,
        terminator: Terminator,
        allow_steps: bool,
    ) -> Result<(Vec<Run>, Vec<SourceStep>), ParseError> {
        let mut runs = Vec::new();
        let mut steps: Vec<SourceStep> = Vec::new();
        let mut prose = String::new();
        let mut depth = 0usize;

        let unclosed = |t: &Terminator| match t {
            Terminator::Env { kind, begin } => begin.error(format!("unclosed environment `{kind}`")),
            Terminator::Brace { open } => open.error("unbalanced braces: step body is never closed"),
        };

        loop {
            let loc = self.cur.loc();
            let Some(ch) = self.cur.peek() else {
                return Err(unclosed(&terminator));
            };
            if !steps.is_empty() && !ch.is_whitespace() && ch != '%' && ch != '\\' {
                return Err(loc.error("proof steps must be contiguous; no content may follow a step"));
            }
            match ch {
                '%' => self.cur.skip_comment(),
                '$' => {
                    self.cur.bump();
                    let math = self.math(loc)?;
                    runs.push(Run::Prose(std::mem::take(&mut prose)));
                    runs.push(Run::Math(math));
                }
                '{' => {
                    depth += 1;
                    prose.push(ch);
                    self.cur.bump();
                }
                '}' => {
                    self.cur.bump();
                    if depth == 0 {
                        if matches!(terminator, Terminator::Brace { .. }) {
                            break;
                        }
                        return Err(loc.error("unbalanced `}`"));
                    }
                    depth -= 1;
                    prose.push(ch);
                }
                '\\' => {
                    self.cur.bump();
                    let cs = self.cur.control_sequence();
                    match cs.as_str() {
                        "begin" => {
                            let env = self.cur.group("environment name")?;
                            return Err(if StatementKind::from_str(&env).is_ok() {
                                loc.error(format!("nested statement environment `{env}` is not supported"))
                            } else {
                                loc.error(format!("unknown environment `{env}`"))
                            });
                        }
                        "end" => {
                            let env = self.cur.group("environment name")?;
                            match &terminator {
                                Terminator::Env { kind, .. } if env == kind.keyword() => {
                                    if depth != 0 {
                                        return Err(loc.error(format!("unbalanced `{{` in `{kind}`")));
                                    }
                                    break;
                                }
                                Terminator::Env { kind, .. } if env != "module" => {
                                    return Err(loc.error(format!(
                                        "`\\end{{{env}}}` does not match `\\begin{{{kind}}}`"
                                    )))
                                }
                                _ => return Err(unclosed(&terminator)),
                            }
                        }
                        "step" => {
                            if !allow_steps {
                                return Err(loc.error("`\\step` is only allowed directly inside a proof"));
                            }
                            steps.push(self.step(steps.len() + 1, loc)?);
                        }
                        _ if !steps.is_empty() => {
                            return Err(loc.error("proof steps must be contiguous; no content may follow a step"));
                        }
                        "$" | "%" | "{" | "}" | "&" | "#" | "_" => prose.push_str(&cs),
                        _ => {
                            prose.push('\\');
                            prose.push_str(&cs);
                        }
                    }
                }
                _ => {
                    prose.push(ch);
                    self.cur.bump();
                }
            }
        }
        runs.push(Run::Prose(prose));
        Ok((finish_runs(runs), steps))
    }

    fn step(&mut self, index: usize, loc: Loc) -> Result<SourceStep, ParseError> {
        let mut justification = None;
        if let Some(opts) = self.cur.options()? {
            opts.check_keys(&["just"])?;
            if let Some(j) = opts.single("just")? {
                if !is_reference(j) {
                    return Err(opts.loc.error(format!("invalid reference `{j}` in `just`")));
                }
                justification = Some(j.to_string());
            }
        }
        let open = self.cur.loc();
        if !self.cur.eat('{') {
            return Err(loc.error("expected `{` after `\\step`"));
        }
        let (content, _) = self.runs(Terminator::Brace { open }, false)?;
        Ok(SourceStep {
            index,
            content,
            justification,
        })
    }

    /// Reads inline math after the opening `$`.
    fn math(&mut self, open: Loc) -> Result<String, ParseError> {
        let mut text = String::new();
        loop {
            match self.cur.bump() {
                None => return Err(open.error("unclosed `$` math")),
                Some('$') => break,
                Some('%') => self.cur.skip_comment(),
                Some('\\') => {
                    text.push('\\');
                    if let Some(c) = self.cur.bump() {
                        text.push(c);
                    }
                }
                Some(c) => text.push(c),
            }
        }
        let text = text.trim().to_string();
        if text.is_empty() {
            return Err(open.error("empty math run"));
        }
        Ok(text)
    }
}

fn flush_prose(prose: &mut String, body: &mut Vec<BodyItem>) {
    let text = normalize_space(prose).trim().to_string();
    prose.clear();
    if !text.is_empty() {
        body.push(BodyItem::Prose(text));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::{Arity, TemplateToken};

    #[test]
    fn union_declaration() {
        let m = parse_module(r"\begin{module}[id=sets]\symdef{union}[prec=500]{#*[\cup]}\end{module}")
            .unwrap();
        assert_eq!(m.id, "sets");
        assert_eq!(m.body.len(), 1);
        let BodyItem::Symbol(s) = &m.body[0] else { panic!() };
        assert_eq!(s.name, "union");
        assert_eq!(s.arity, Arity::Flexary);
        assert_eq!(s.precedence, 500);
        assert_eq!(
            s.template.tokens(),
            &[TemplateToken::FlexJoin {
                separator: r"\cup".into()
            }]
        );
    }

    #[test]
    fn empty_module() {
        let m = parse_module(r"\begin{module}[id=empty]\end{module}").unwrap();
        assert_eq!(m.id, "empty");
        assert!(m.body.is_empty());
        assert!(m.imports.is_empty());
    }

    #[test]
    fn unclosed_environment_points_at_its_begin() {
        let err = parse_module(r"\begin{module}[id=x]\begin{example}\end{module}").unwrap_err();
        assert_eq!((err.line, err.column), (1, 21));
        assert!(err.message.contains("unclosed environment `example`"), "{err}");
    }

    #[test]
    fn default_precedence() {
        let m = parse_module(r"\begin{module}[id=c]\symdef{binom}{\binom{#1}{#2}}\end{module}").unwrap();
        let s = m.symbols().next().unwrap();
        assert_eq!(s.precedence, DEFAULT_PRECEDENCE);
        assert_eq!(s.arity, Arity::Fixed(2));
    }

    #[test]
    fn statements_with_options_and_math() {
        let src = r"
% a comment
\begin{module}[id=sets]
  \importmodule{base}
  \symdef{union}[prec=500]{#*[\cup]}
  Some module prose.
  \begin{example}[id=union-ex, for=union,base?thing]
    The union   $\union{A,B}$ of two sets.   % trailing comment
  \end{example}
\end{module}
";
        let m = parse_module(src).unwrap();
        assert_eq!(m.imports, vec!["base"]);
        assert!(m.body.contains(&BodyItem::Prose("Some module prose.".into())));
        let st = m.statements().next().unwrap();
        assert_eq!(st.kind, StatementKind::Example);
        assert_eq!(st.id.as_deref(), Some("union-ex"));
        assert_eq!(st.for_refs, vec!["union", "base?thing"]);
        assert_eq!(
            st.content,
            vec![
                Run::Prose("The union ".into()),
                Run::Math(r"\union{A,B}".into()),
                Run::Prose(" of two sets.".into()),
            ]
        );
    }

    #[test]
    fn proof_steps() {
        let src = r"\begin{module}[id=m]
\begin{proof}[id=pf-1, for=thm]
  By cases.
  \step[just=lem]{First $x$.}
  \step{Second {grouped} text.}
  % between steps
  \step[just=m?lem]{Third.}
\end{proof}
\end{module}";
        let m = parse_module(src).unwrap();
        let pf = m.statements().next().unwrap();
        assert_eq!(pf.content, vec![Run::Prose("By cases.".into())]);
        assert_eq!(pf.steps.len(), 3);
        assert_eq!(pf.steps[0].justification.as_deref(), Some("lem"));
        assert_eq!(
            pf.steps[0].content,
            vec![Run::Prose("First ".into()), Run::Math("x".into()), Run::Prose(".".into())]
        );
        assert_eq!(pf.steps[1].content, vec![Run::Prose("Second {grouped} text.".into())]);
        assert_eq!(pf.steps[2].index, 3);
    }

    #[test]
    fn non_contiguous_steps() {
        let src = r"\begin{module}[id=m]\begin{proof}[for=t]\step{a} interrupt \step{b}\end{proof}\end{module}";
        let err = parse_module(src).unwrap_err();
        assert!(err.message.contains("contiguous"), "{err}");
        let src = r"\begin{module}[id=m]\begin{proof}[for=t]\step{a} $x$\end{proof}\end{module}";
        assert!(parse_module(src).is_err());
    }

    #[test]
    fn step_outside_proof() {
        let src = r"\begin{module}[id=m]\begin{theorem}\step{a}\end{theorem}\end{module}";
        let err = parse_module(src).unwrap_err();
        assert!(err.message.contains("only allowed"), "{err}");
    }

    #[test]
    fn errors_carry_positions() {
        let cases = [
            (r"\begin{module}[id=m]\begin{lemma}\end{lemma}\end{module}", "unknown environment"),
            (r"\begin{module}[id=m]\symdef{u}{a}\symdef{u}{b}\end{module}", "duplicate symbol"),
            (r"\begin{module}[id=m]\symdef{u}{#1 #3}\end{module}", "never used"),
            (r"\begin{module}[id=m]\symdef{u}{{a}\end{module}", "unbalanced"),
            (r"\begin{module}[id=m]} \end{module}", "unbalanced"),
            (r"\begin{module}[id=m]\begin{example}[for]\end{example}\end{module}", "malformed option"),
            (r"\begin{module}[id=m]\begin{example}[colour=red]\end{example}\end{module}", "unknown option"),
            (r"\begin{module}[id=1m]\end{module}", "invalid module id"),
            (r"\begin{module}\end{module}", "id="),
            (r"\begin{module}[id=m]\begin{example}$x\end{example}\end{module}", "unclosed `$`"),
            (r"\begin{module}[id=m]\end{module} trailing", "after"),
            (r"\begin{module}[id=m]\symvariant{u}{fr}{x}\end{module}", "does not declare"),
            (r"\begin{module}[id=m]\begin{example}\end{proof}\end{module}", "does not match"),
            (r"\begin{module}[id=m]", "unclosed environment `module`"),
        ];
        for (src, needle) in cases {
            let err = parse_module(src).expect_err(src);
            assert!(err.message.contains(needle), "{src}: {err}");
            assert!(err.line >= 1 && err.column >= 1);
        }
    }

    #[test]
    fn duplicate_variant_warns_and_last_wins() {
        let src = r"\begin{module}[id=c]
\symdef{binom}{\binom{#1}{#2}}
\symvariant{binom}{fr}{C^{#2}_{#1}}
\symvariant{binom}{fr}{\mathcal{C}^{#2}_{#1}}
\end{module}";
        let m = parse_module(src).unwrap();
        assert_eq!(m.warnings.len(), 1);
        assert_eq!(m.warnings[0].line, 4);
        let variants: Vec<_> = m
            .body
            .iter()
            .filter_map(|b| match b {
                BodyItem::Variant(v) => Some(v.template.to_string()),
                _ => None,
            })
            .collect();
        assert_eq!(variants.len(), 2);
    }

    #[test]
    fn parse_is_deterministic_and_ignores_warnings_in_equality() {
        let src = r"\begin{module}[id=c]\symdef{b}{#1}\symvariant{b}{k}{#1}\symvariant{b}{k}{#1}\end{module}";
        let a = parse_module(src).unwrap();
        let mut b = parse_module(src).unwrap();
        b.warnings.clear();
        assert_eq!(a, b);
    }
}
