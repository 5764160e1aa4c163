use std::collections::BTreeSet;

use super::lexer::{lex, span, Pos, Tok, Token};
use crate::diag::{Diagnostic, SourceSpan};
use crate::model::{
    away_id, AssuranceCase, EdgeKind, EvidenceDescriptor, GriceRating, GsnNode, Maxim, ModelError,
    Multiplicity, NodeFlag, NodeKind, Provenance,
};

struct EdgeDecl {
    module: String,
    from: (String, SourceSpan),
    to: (String, SourceSpan),
    kind: EdgeKind,
}

struct Parser<'a> {
    file: &'a str,
    tokens: Vec<Token>,
    at: usize,
    eof: Pos,
    diags: Vec<Diagnostic>,
    meta: Vec<(String, String, SourceSpan)>,
    modules: Vec<(String, String, SourceSpan)>,
    nodes: Vec<GsnNode>,
    edges: Vec<EdgeDecl>,
}

/// Marker for a failed production; the diagnostic has already been recorded.
struct Failed;

type PResult<T> = Result<T, Failed>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at)
    }

    fn peek_tok(&self, ahead: usize) -> Option<&Tok> {
        self.tokens.get(self.at + ahead).map(|t| &t.tok)
    }

    fn here(&self) -> SourceSpan {
        match self.peek() {
            Some(t) => span(self.file, t.start, t.end),
            None => span(self.file, self.eof, self.eof),
        }
    }

    fn fail<T>(&mut self, code: &str, message: String, at: SourceSpan) -> PResult<T> {
        self.diags
            .push(Diagnostic::error(code, message).with_span(Some(at)));
        Err(Failed)
    }

    fn unexpected<T>(&mut self, wanted: &str) -> PResult<T> {
        let found = match self.peek() {
            Some(t) => t.tok.describe(),
            None => "end of input".to_string(),
        };
        let at = self.here();
        self.fail("E-PARSE-001", format!("expected {wanted}, found {found}"), at)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn ident(&mut self, wanted: &str) -> PResult<(String, SourceSpan)> {
        match self.peek() {
            Some(Token {
                tok: Tok::Ident(_), ..
            }) => {
                let t = self.next().expect("peeked");
                let Tok::Ident(word) = t.tok else { unreachable!() };
                Ok((word, span(self.file, t.start, t.end)))
            }
            _ => self.unexpected(wanted),
        }
    }

    fn string(&mut self, wanted: &str) -> PResult<String> {
        match self.peek() {
            Some(Token { tok: Tok::Str(_), .. }) => {
                let Tok::Str(s) = self.next().expect("peeked").tok else { unreachable!() };
                Ok(s)
            }
            _ => self.unexpected(wanted),
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if self.peek_tok(0) == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            self.unexpected(&tok.describe())
        }
    }

    /// Skips to the first token on a later line than `line`, or to a `}`.
    fn recover(&mut self, line: u32) {
        while let Some(t) = self.peek() {
            if t.start.0 > line || t.tok == Tok::RBrace {
                break;
            }
            self.at += 1;
        }
    }

    fn error_line(&self) -> u32 {
        self.diags
            .last()
            .and_then(|d| d.span.as_ref())
            .map(|s| s.start_line)
            .unwrap_or(0)
    }

    fn parse_case(&mut self) {
        while let Some(t) = self.peek() {
            let result = match &t.tok {
                Tok::Ident(w) if w == "meta" => self.parse_meta(),
                Tok::Ident(w) if w == "module" => self.parse_module(),
                Tok::Ident(w) => {
                    let msg = format!("unknown keyword `{w}`; expected `meta` or `module`");
                    let at = self.here();
                    self.fail("E-PARSE-002", msg, at)
                }
                _ => self.unexpected("`meta` or `module`"),
            };
            if result.is_err() {
                let line = self.error_line();
                self.recover(line);
                if self.peek_tok(0) == Some(&Tok::RBrace) {
                    self.at += 1;
                }
            }
        }
    }

    fn parse_meta(&mut self) -> PResult<()> {
        self.at += 1;
        let (key, key_span) = self.ident("metadata key")?;
        let value = self.string("metadata value string")?;
        self.meta.push((key, value, key_span));
        Ok(())
    }

    fn parse_module(&mut self) -> PResult<()> {
        self.at += 1;
        let (id, id_span) = self.ident("module id")?;
        let title = self.string("module title string")?;
        self.expect(Tok::LBrace)?;
        self.modules.push((id.clone(), title, id_span));
        loop {
            match self.peek_tok(0) {
                None => return self.unexpected("`}`"),
                Some(Tok::RBrace) => {
                    self.at += 1;
                    return Ok(());
                }
                _ => {
                    if self.parse_item(&id).is_err() {
                        let line = self.error_line();
                        self.recover(line);
                    }
                }
            }
        }
    }

    fn parse_item(&mut self, module: &str) -> PResult<()> {
        let (word, word_span) = self.ident("node declaration or edge")?;
        match self.peek_tok(0) {
            Some(Tok::Supports) | Some(Tok::InContext) => {
                let kind = if self.next().expect("peeked").tok == Tok::Supports {
                    EdgeKind::SupportedBy
                } else {
                    EdgeKind::InContextOf
                };
                let to = self.ident("edge target")?;
                self.edges.push(EdgeDecl {
                    module: module.to_string(),
                    from: (word, word_span),
                    to,
                    kind,
                });
                return Ok(());
            }
            _ => {}
        }
        let Some(kind) = NodeKind::from_keyword(&word) else {
            return self.fail(
                "E-PARSE-002",
                format!("unknown keyword `{word}`; expected a node kind or an edge"),
                word_span,
            );
        };
        let mut node = if kind.is_away() {
            let (target, target_span) = self.ident("away target")?;
            let (from, from_span) = self.ident("`from`")?;
            if from != "from" {
                return self.fail("E-PARSE-001", format!("expected `from`, found `{from}`"), from_span);
            }
            let (target_module, _) = self.ident("module id")?;
            let mut node = GsnNode::away(kind, module, &target_module, &target);
            node.span = Some(target_span);
            if matches!(self.peek_tok(0), Some(Tok::Str(_))) {
                node.statement = self.string("statement")?;
            }
            node
        } else {
            let (id, id_span) = self.ident("node id")?;
            let statement = self.string("statement string")?;
            let mut node = GsnNode::new(&id, kind, module, &statement);
            node.span = Some(id_span);
            node
        };
        if self.peek_tok(0) == Some(&Tok::LBracket) {
            self.parse_flags(&mut node)?;
        }
        self.nodes.push(node);
        Ok(())
    }

    fn parse_flags(&mut self, node: &mut GsnNode) -> PResult<()> {
        self.expect(Tok::LBracket)?;
        let mut seen = BTreeSet::new();
        if self.peek_tok(0) == Some(&Tok::RBracket) {
            self.at += 1;
            return Ok(());
        }
        loop {
            let (name, name_span) = self.ident("flag")?;
            let value = if self.peek_tok(0) == Some(&Tok::Eq) {
                self.at += 1;
                match self.peek_tok(0) {
                    Some(Tok::Str(_)) => Some(self.string("flag value")?),
                    Some(Tok::Ident(_)) => Some(self.ident("flag value")?.0),
                    _ => return self.unexpected("flag value"),
                }
            } else {
                None
            };
            if !seen.insert(name.clone()) {
                return self.fail("E-PARSE-005", format!("flag `{name}` given twice"), name_span);
            }
            self.apply_flag(node, &name, value, name_span)?;
            match self.next().map(|t| t.tok) {
                Some(Tok::Comma) => continue,
                Some(Tok::RBracket) => return Ok(()),
                _ => {
                    self.at = self.at.saturating_sub(1);
                    return self.unexpected("`,` or `]`");
                }
            }
        }
    }

    fn apply_flag(
        &mut self,
        node: &mut GsnNode,
        name: &str,
        value: Option<String>,
        at: SourceSpan,
    ) -> PResult<()> {
        if let Some(flag) = NodeFlag::from_word(name) {
            if value.is_some() {
                return self.fail("E-PARSE-004", format!("flag `{name}` takes no value"), at);
            }
            node.flags.insert(flag);
            return Ok(());
        }
        let Some(value) = value else {
            return if is_valued_flag(name) {
                self.fail("E-PARSE-004", format!("flag `{name}` needs a value"), at)
            } else {
                self.fail("E-PARSE-003", format!("unknown flag `{name}`"), at)
            };
        };
        let bad = |p: &mut Self, what: &str| {
            p.fail::<()>("E-PARSE-004", format!("invalid {what} `{value}`"), at.clone())
        };
        match name {
            "multiplicity" => match value.parse::<Multiplicity>() {
                Ok(m) => node.multiplicity = Some(m),
                Err(_) => return bad(self, "multiplicity"),
            },
            "label" => node.label = Some(value.clone()),
            "evidence" => node.evidence.get_or_insert_with(EvidenceDescriptor::default).description = value.clone(),
            "provenance" => match Provenance::from_word(&value) {
                Some(p) => node.evidence.get_or_insert_with(EvidenceDescriptor::default).provenance = p,
                None => return bad(self, "provenance"),
            },
            _ => match (Maxim::from_word(name), GriceRating::from_word(&value)) {
                (Some(maxim), Some(rating)) => node
                    .evidence
                    .get_or_insert_with(EvidenceDescriptor::default)
                    .set_rating(maxim, rating),
                (Some(_), None) => return bad(self, "rating"),
                (None, _) => return self.fail("E-PARSE-003", format!("unknown flag `{name}`"), at),
            },
        }
        Ok(())
    }

    /// Builds the case from the collected declarations.
    fn build(mut self) -> Result<AssuranceCase, Vec<Diagnostic>> {
        let mut case = AssuranceCase::default();
        for (key, value, at) in std::mem::take(&mut self.meta) {
            if !case.meta.set(&key, value) {
                self.diags.push(
                    Diagnostic::error("E-PARSE-006", format!("unknown metadata key `{key}`"))
                        .with_span(Some(at)),
                );
            }
        }
        for (id, title, at) in std::mem::take(&mut self.modules) {
            if let Err(e) = case.add_module(&id, &title) {
                let code = match e {
                    ModelError::DuplicateModule(_) => "E-DUP-MODULE",
                    _ => "E-INVALID-ID",
                };
                self.diags
                    .push(Diagnostic::error(code, e.to_string()).with_span(Some(at)));
            }
        }
        for node in std::mem::take(&mut self.nodes) {
            let at = node.span.clone();
            let subject = node.id.clone();
            if let Err(e) = case.add_node(node) {
                let code = match e {
                    ModelError::DuplicateNode(_) => "E-DUP-ID",
                    ModelError::EvidenceOnNonSolution(_) => "E-EVIDENCE-KIND",
                    ModelError::UnknownModule(_) => "E-UNKNOWN-MODULE",
                    _ => "E-INVALID-ID",
                };
                self.diags.push(
                    Diagnostic::error(code, e.to_string())
                        .with_subject(subject)
                        .with_span(at),
                );
            }
        }
        let shadowed: Vec<(String, Option<SourceSpan>)> = case
            .nodes()
            .filter(|n| n.kind.is_away())
            .filter(|n| {
                case.node(n.local_name())
                    .is_some_and(|real| real.module == n.module)
            })
            .map(|n| (n.local_name().to_string(), n.span.clone()))
            .collect();
        for (name, at) in shadowed {
            self.diags.push(
                Diagnostic::error(
                    "E-AWAY-SHADOW",
                    format!("module declares both a node and an away reference named `{name}`"),
                )
                .with_subject(name)
                .with_span(at),
            );
        }
        for edge in std::mem::take(&mut self.edges) {
            let resolve = |name: &str| -> String {
                let local = away_id(&edge.module, name);
                if !name.contains("::") && case.node(&local).is_some_and(|n| n.kind.is_away()) {
                    local
                } else {
                    name.to_string()
                }
            };
            let from = resolve(&edge.from.0);
            let to = resolve(&edge.to.0);
            if let Err(e) = case.connect(&from, &to, edge.kind) {
                let (code, at) = match &e {
                    ModelError::UnknownNode(id) if *id == from => ("E-EDGE-UNKNOWN", edge.from.1.clone()),
                    ModelError::UnknownNode(_) => ("E-EDGE-UNKNOWN", edge.to.1.clone()),
                    ModelError::SelfEdge(_) => ("E-EDGE-SELF", edge.from.1.clone()),
                    _ => ("E-EDGE-ILLEGAL", edge.from.1.clone()),
                };
                self.diags
                    .push(Diagnostic::error(code, e.to_string()).with_span(Some(at)));
            }
        }
        if self.diags.is_empty() {
            Ok(case)
        } else {
            self.diags.sort_by(|a, b| a.span.cmp(&b.span).then_with(|| a.code.cmp(&b.code)));
            Err(self.diags)
        }
    }
}

fn is_valued_flag(name: &str) -> bool {
    matches!(name, "multiplicity" | "label" | "evidence" | "provenance") || Maxim::from_word(name).is_some()
}

/// Parses DSL text. On any error the partial case is discarded and every
/// diagnostic found is returned, each with a span into `text`.
pub fn parse_named(file: &str, text: &str) -> Result<AssuranceCase, Vec<Diagnostic>> {
    let (tokens, diags, eof) = lex(file, text);
    let mut parser = Parser {
        file,
        tokens,
        at: 0,
        eof,
        diags,
        meta: Vec::new(),
        modules: Vec::new(),
        nodes: Vec::new(),
        edges: Vec::new(),
    };
    parser.parse_case();
    parser.build()
}

pub fn parse(text: &str) -> Result<AssuranceCase, Vec<Diagnostic>> {
    parse_named("<input>", text)
}

/// Parses raw bytes, reporting invalid UTF-8 as a diagnostic.
pub fn parse_bytes(file: &str, bytes: &[u8]) -> Result<AssuranceCase, Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_named(file, text),
        Err(e) => {
            let valid = std::str::from_utf8(&bytes[..e.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() as u32 + 1;
            let col = valid.rsplit('\n').next().map(|l| l.chars().count()).unwrap_or(0) as u32 + 1;
            Err(vec![Diagnostic::error("E-LEX-000", "input is not valid UTF-8")
                .with_span(Some(span(file, (line, col), (line, col))))])
        }
    }
}
