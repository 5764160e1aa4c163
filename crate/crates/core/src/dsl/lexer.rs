use crate::diag::{Diagnostic, SourceSpan};
use crate::model::is_id_char;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Eq,
    /// `<-`
    Supports,
    /// `<~`
    InContext,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(_) => "string".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LBracket => "`[`".to_string(),
            Tok::RBracket => "`]`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Eq => "`=`".to_string(),
            Tok::Supports => "`<-`".to_string(),
            Tok::InContext => "`<~`".to_string(),
        }
    }
}

/// Line and column, both 1-based, columns counted in characters.
pub(crate) type Pos = (u32, u32);

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub start: Pos,
    pub end: Pos,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn pos(&self) -> Pos {
        (self.line, self.col)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

pub(crate) fn span(file: &str, start: Pos, end: Pos) -> SourceSpan {
    SourceSpan::new(file, start, end)
}

/// Splits the text into tokens. Lexical errors are collected and the offending
/// characters skipped, so the parser still sees the rest of the input.
pub(crate) fn lex(file: &str, text: &str) -> (Vec<Token>, Vec<Diagnostic>, Pos) {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    let error = |code: &str, msg: String, start: Pos, end: Pos| {
        Diagnostic::error(code, msg).with_span(Some(span(file, start, end)))
    };
    while let Some(c) = cur.peek() {
        let start = cur.pos();
        match c {
            '\r' | '\n' | ' ' | '\t' => {
                cur.bump();
            }
            '#' => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
            }
            '{' | '}' | '[' | ']' | ',' | '=' => {
                cur.bump();
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    _ => Tok::Eq,
                };
                tokens.push(Token {
                    tok,
                    start,
                    end: cur.pos(),
                });
            }
            '<' => {
                cur.bump();
                let tok = match cur.peek() {
                    Some('-') => Some(Tok::Supports),
                    Some('~') => Some(Tok::InContext),
                    _ => None,
                };
                match tok {
                    Some(tok) => {
                        cur.bump();
                        tokens.push(Token {
                            tok,
                            start,
                            end: cur.pos(),
                        });
                    }
                    None => diags.push(error(
                        "E-LEX-001",
                        "`<` must be followed by `-` or `~`".to_string(),
                        start,
                        cur.pos(),
                    )),
                }
            }
            '"' => {
                cur.bump();
                let mut value = String::new();
                let mut closed = false;
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    let at = cur.pos();
                    cur.bump();
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => match cur.peek() {
                            Some(e @ ('"' | '\\' | 'n' | 't' | 'r')) => {
                                cur.bump();
                                value.push(match e {
                                    'n' => '\n',
                                    't' => '\t',
                                    'r' => '\r',
                                    other => other,
                                });
                            }
                            _ => diags.push(error(
                                "E-LEX-003",
                                "unknown escape sequence".to_string(),
                                at,
                                cur.pos(),
                            )),
                        },
                        other => value.push(other),
                    }
                }
                if closed {
                    tokens.push(Token {
                        tok: Tok::Str(value),
                        start,
                        end: cur.pos(),
                    });
                } else {
                    diags.push(error(
                        "E-LEX-002",
                        "unterminated string".to_string(),
                        start,
                        cur.pos(),
                    ));
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                let mut depth = 0usize;
                while let Some(c) = cur.peek() {
                    if is_id_char(c) {
                        word.push(c);
                    } else if c == '[' {
                        // Instance keys attach directly to the id: `BG2[group/benefit]`.
                        // Flag lists are always preceded by whitespace or a string.
                        depth += 1;
                        word.push(c);
                    } else if c == ']' && depth > 0 {
                        depth -= 1;
                        word.push(c);
                    } else {
                        break;
                    }
                    cur.bump();
                }
                if depth > 0 {
                    diags.push(error(
                        "E-LEX-004",
                        format!("unbalanced `[` in identifier `{word}`"),
                        start,
                        cur.pos(),
                    ));
                } else {
                    tokens.push(Token {
                        tok: Tok::Ident(word),
                        start,
                        end: cur.pos(),
                    });
                }
            }
            other => {
                cur.bump();
                diags.push(error(
                    "E-LEX-001",
                    format!("unexpected character `{}`", other.escape_debug()),
                    start,
                    cur.pos(),
                ));
            }
        }
    }
    (tokens, diags, cur.pos())
}
