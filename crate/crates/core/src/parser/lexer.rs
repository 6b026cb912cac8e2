use crate::diagnostic::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Semi,
    Colon,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eq,
    FatArrow,
    Arrow,
    Dot,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Eq => "`=`".into(),
            Tok::FatArrow => "`=>`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eof => "end of file".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Splits `text` into tokens. `--` starts a line comment; `\r` is
/// whitespace, so CRLF files lex exactly like LF files.
pub fn lex(text: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut out = Vec::new();
    let mut errs = Vec::new();
    let mut line = 1;
    let mut line_start = 0;
    let mut it = text.char_indices().peekable();
    while let Some(&(i, c)) = it.peek() {
        let col = text[line_start..i].chars().count() + 1;
        let span_of = |end: usize| Span::new(i, end, line, col);
        if c == '\n' {
            it.next();
            line += 1;
            line_start = i + 1;
            continue;
        }
        if c.is_whitespace() {
            it.next();
            continue;
        }
        if c == '-' && text[i..].starts_with("--") {
            while let Some(&(_, c)) = it.peek() {
                if c == '\n' {
                    break;
                }
                it.next();
            }
            continue;
        }
        if is_ident_start(c) {
            let mut end = i;
            while let Some(&(j, c)) = it.peek() {
                if !is_ident_continue(c) {
                    break;
                }
                end = j + c.len_utf8();
                it.next();
            }
            out.push(Token { tok: Tok::Ident(text[i..end].to_string()), span: span_of(end) });
            continue;
        }
        let two = |s: &str| text[i..].starts_with(s);
        let (tok, len) = if two("->") {
            (Tok::Arrow, 2)
        } else if two("=>") {
            (Tok::FatArrow, 2)
        } else {
            match c {
                ';' => (Tok::Semi, 1),
                ':' => (Tok::Colon, 1),
                ',' => (Tok::Comma, 1),
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                '=' => (Tok::Eq, 1),
                '.' => (Tok::Dot, 1),
                '→' => (Tok::Arrow, c.len_utf8()),
                '∘' => (Tok::Dot, c.len_utf8()),
                '⇒' => (Tok::FatArrow, c.len_utf8()),
                _ => {
                    errs.push(
                        Diagnostic::error(format!("unexpected character `{c}`"))
                            .with_span(span_of(i + c.len_utf8())),
                    );
                    it.next();
                    continue;
                }
            }
        };
        let mut consumed = 0;
        while consumed < len {
            let (_, c) = it.next().expect("in bounds");
            consumed += c.len_utf8();
        }
        out.push(Token { tok, span: span_of(i + len) });
    }
    let col = text[line_start..].chars().count() + 1;
    out.push(Token { tok: Tok::Eof, span: Span::new(text.len(), text.len(), line, col) });
    if errs.is_empty() {
        Ok(out)
    } else {
        Err(errs)
    }
}
