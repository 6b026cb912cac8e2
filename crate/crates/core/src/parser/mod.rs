//! Concrete syntax for `.qiit` signature files.
//!
//! ```text
//! external A = {a0, a1};
//! sort T;
//! point leaf : T;
//! point node : (f : A -> T) -> T;
//! path mix : (f : A -> T) -> (s : Perm A) -> node f = node (f . s);
//! ```
//!
//! The grammar is published in `docs/qiit.ebnf`.

mod lexer;
mod print;

use std::path::PathBuf;

pub use lexer::{lex, Tok, Token};
pub use print::{print_expr, print_signature, print_sortref};

use crate::check::infer_sort;
use crate::diagnostic::{Diagnostic, Span};
use crate::syntax::{
    Decl, Entry, ExternalSet, IndexExpr, ParamType, PathDecl, PointDecl, Signature, SortDecl, SortRef,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFile {
    pub path: PathBuf,
    pub text: String,
}

impl SourceFile {
    pub fn new(path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        SourceFile { path: path.into(), text: text.into() }
    }

    pub fn read(path: impl Into<PathBuf>) -> std::io::Result<Self> {
        let path = path.into();
        let text = std::fs::read_to_string(&path)?;
        Ok(SourceFile { path, text })
    }
}

/// Parses a signature file. Name resolution happens during parsing, so
/// every name must be declared before its first use.
pub fn parse_signature(src: &SourceFile) -> Result<Signature, Vec<Diagnostic>> {
    parse_str(&src.text)
}

pub fn parse_str(text: &str) -> Result<Signature, Vec<Diagnostic>> {
    let tokens = lex(text)?;
    let mut p = Parser::new(tokens);
    p.file();
    if p.errors.is_empty() {
        Ok(p.sig)
    } else {
        Err(p.errors)
    }
}

/// Parses a closed point term against a signature, e.g.
/// `ext eps (iota eps)`.
pub fn parse_term(sig: &Signature, text: &str) -> Result<IndexExpr, Vec<Diagnostic>> {
    let tokens = lex(text)?;
    let mut p = Parser::new(tokens);
    p.sig = sig.clone();
    p.all_names = sig.decls.iter().map(|d| d.name().to_string()).collect();
    let e = p.expr();
    match e {
        Ok(e) if p.errors.is_empty() => match p.peek() {
            Tok::Eof => Ok(e),
            t => Err(vec![Diagnostic::error(format!("unexpected {} after term", t.describe()))
                .with_span(p.span())]),
        },
        Ok(_) => Err(p.errors),
        Err(d) => {
            p.errors.push(d);
            Err(p.errors)
        }
    }
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    sig: Signature,
    errors: Vec<Diagnostic>,
    /// Every declared name in the file, for forward-reference messages.
    all_names: Vec<String>,
    /// Variables in scope with their types, innermost last.
    scope: Vec<(String, ParamType)>,
}

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        let mut all_names = Vec::new();
        for w in tokens.windows(2) {
            if let (Tok::Ident(kw), Tok::Ident(name)) = (&w[0].tok, &w[1].tok) {
                if matches!(kw.as_str(), "sort" | "point" | "path") {
                    all_names.push(name.clone());
                }
            }
        }
        Parser { tokens, pos: 0, sig: Signature::new(), errors: Vec::new(), all_names, scope: Vec::new() }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        Diagnostic::error(format!("expected {wanted}, found {}", self.peek().describe())).with_span(self.span())
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => Err(self.unexpected(&format!("`{kw}`"))),
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn recover(&mut self) {
        loop {
            match self.peek() {
                Tok::Semi => {
                    self.bump();
                    return;
                }
                Tok::Eof => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn file(&mut self) {
        while *self.peek() != Tok::Eof {
            if let Err(d) = self.item() {
                self.errors.push(d);
                self.recover();
            }
        }
    }

    fn item(&mut self) -> PResult<()> {
        let start = self.span();
        let (kw, kw_span) = self.ident()?;
        self.scope.clear();
        match kw.as_str() {
            "external" => {
                let (name, _) = self.ident()?;
                self.expect(Tok::Eq)?;
                self.expect(Tok::LBrace)?;
                let mut elements = Vec::new();
                if *self.peek() != Tok::RBrace {
                    loop {
                        elements.push(self.ident()?.0);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrace)?;
                let end = self.expect(Tok::Semi)?;
                self.sig.externals.push(ExternalSet { name, elements });
                self.sig.external_spans.push(join(start, end));
                Ok(())
            }
            "sort" => {
                let (name, _) = self.ident()?;
                let mut indices = Vec::new();
                if *self.peek() == Tok::Colon {
                    self.bump();
                    indices = self.telescope(|p| p.is_keyword("Set"))?;
                    self.keyword("Set")?;
                }
                let end = self.expect(Tok::Semi)?;
                self.push_decl(Decl::Sort(SortDecl { name, indices }), join(start, end));
                Ok(())
            }
            "point" => {
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let args = self.telescope(|_| false)?;
                let target = self.sortref()?;
                let end = self.expect(Tok::Semi)?;
                self.push_decl(Decl::Point(PointDecl { name, args, target }), join(start, end));
                Ok(())
            }
            "path" => {
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let args = self.telescope(|_| false)?;
                let lhs_span = self.span();
                let lhs = self.expr()?;
                self.expect(Tok::Eq)?;
                let rhs = self.expr()?;
                let end = self.expect(Tok::Semi)?;
                let upto = self.sig.decls.len();
                let at = infer_sort(&self.sig, upto, &args, &lhs)
                    .or_else(|_| infer_sort(&self.sig, upto, &args, &rhs))
                    .map_err(|e| {
                        Diagnostic::error(format!("cannot determine the sort of path `{name}`: {e}"))
                            .with_span(lhs_span)
                    })?;
                self.push_decl(Decl::Path(PathDecl { name, args, at, lhs, rhs }), join(start, end));
                Ok(())
            }
            other => Err(Diagnostic::error(format!(
                "expected `external`, `sort`, `point` or `path`, found `{other}`"
            ))
            .with_span(kw_span)),
        }
    }

    fn push_decl(&mut self, d: Decl, span: Span) {
        self.sig.decls.push(d);
        self.sig.decl_spans.push(span);
    }

    /// Parses `(x : T) -> ...` entries (named or not) until the remainder
    /// is no longer followed by `->`.
    fn telescope(&mut self, stop: impl Fn(&Parser) -> bool) -> PResult<Vec<Entry>> {
        let mut entries = Vec::new();
        loop {
            if stop(self) {
                break;
            }
            let named = *self.peek() == Tok::LParen
                && matches!(self.peek_at(1), Tok::Ident(_))
                && *self.peek_at(2) == Tok::Colon;
            if named {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.param_type()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Arrow)?;
                self.scope.push((name.clone(), ty.clone()));
                entries.push(Entry { name, ty });
                continue;
            }
            // Unnamed entry: try it, and backtrack if no arrow follows.
            let save = (self.pos, self.errors.len());
            match self.unnamed_param() {
                Ok(ty) if *self.peek() == Tok::Arrow => {
                    self.bump();
                    let name = format!("_{}", entries.len());
                    self.scope.push((name.clone(), ty.clone()));
                    entries.push(Entry { name, ty });
                }
                _ => {
                    self.pos = save.0;
                    self.errors.truncate(save.1);
                    break;
                }
            }
        }
        Ok(entries)
    }

    fn unnamed_param(&mut self) -> PResult<ParamType> {
        if self.is_keyword("Perm") {
            self.bump();
            let (set, _) = self.ident()?;
            return Ok(ParamType::Perm { set });
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if self.sig.external(&name).is_some() {
                self.bump();
                return Ok(ParamType::External { set: name });
            }
        }
        Ok(ParamType::Sort { target: self.sortref()? })
    }

    fn param_type(&mut self) -> PResult<ParamType> {
        if self.is_keyword("Perm") {
            self.bump();
            let (set, span) = self.ident()?;
            self.require_set(&set, span)?;
            return Ok(ParamType::Perm { set });
        }
        // (a : A) -> S idx
        if *self.peek() == Tok::LParen {
            self.bump();
            let (binder, _) = self.ident()?;
            self.expect(Tok::Colon)?;
            let (domain, span) = self.ident()?;
            self.require_set(&domain, span)?;
            self.expect(Tok::RParen)?;
            self.expect(Tok::Arrow)?;
            self.scope.push((binder.clone(), ParamType::External { set: domain.clone() }));
            let codomain = self.sortref();
            self.scope.pop();
            return Ok(ParamType::Function { domain, binder: Some(binder), codomain: codomain? });
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if self.sig.external(&name).is_some() {
                self.bump();
                if *self.peek() == Tok::Arrow {
                    self.bump();
                    let codomain = self.sortref()?;
                    return Ok(ParamType::Function { domain: name, binder: None, codomain });
                }
                return Ok(ParamType::External { set: name });
            }
        }
        Ok(ParamType::Sort { target: self.sortref()? })
    }

    fn require_set(&self, set: &str, span: Span) -> PResult<()> {
        if self.sig.external(set).is_some() {
            Ok(())
        } else {
            Err(Diagnostic::error(format!("unknown external set `{set}`")).with_span(span))
        }
    }

    fn sortref(&mut self) -> PResult<SortRef> {
        let (name, span) = self.ident()?;
        let arity = match self.sig.sort(&name) {
            Some(s) => s.indices.len(),
            None => return Err(self.unresolved("sort", &name, span)),
        };
        let mut indices = Vec::with_capacity(arity);
        for _ in 0..arity {
            indices.push(self.atom()?);
        }
        Ok(SortRef { sort: name, indices })
    }

    fn unresolved(&self, what: &str, name: &str, span: Span) -> Diagnostic {
        let msg = if self.all_names.iter().any(|n| n == name) {
            format!("forward {what} reference `{name}`")
        } else {
            format!("unresolved name `{name}`")
        };
        Diagnostic::error(msg).with_span(span)
    }

    fn lookup_var(&self, name: &str) -> Option<&ParamType> {
        self.scope.iter().rev().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    fn lookup_atom(&self, name: &str) -> Option<String> {
        self.sig.externals.iter().find(|e| e.position(name).is_some()).map(|e| e.name.clone())
    }

    fn expr(&mut self) -> PResult<IndexExpr> {
        let fun = self.app()?;
        if *self.peek() == Tok::Dot {
            self.bump();
            let perm = self.app()?;
            return Ok(IndexExpr::Compose { fun: Box::new(fun), perm: Box::new(perm) });
        }
        Ok(fun)
    }

    fn app(&mut self) -> PResult<IndexExpr> {
        if let Tok::Ident(name) = self.peek().clone() {
            if let Some(ty) = self.lookup_var(&name) {
                let applicable = matches!(ty, ParamType::Function { .. } | ParamType::Perm { .. });
                self.bump();
                let var = IndexExpr::var(name);
                if applicable && starts_atom(self.peek()) {
                    let arg = self.atom()?;
                    return Ok(IndexExpr::At { fun: Box::new(var), arg: Box::new(arg) });
                }
                return Ok(var);
            }
            if let Some(p) = self.sig.point(&name) {
                let arity = p.args.len();
                self.bump();
                let mut args = Vec::with_capacity(arity);
                for _ in 0..arity {
                    args.push(self.atom()?);
                }
                return Ok(IndexExpr::Apply { ctor: name, args });
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<IndexExpr> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => self.table(),
            Tok::Ident(name) => {
                let span = self.span();
                if self.lookup_var(&name).is_some() {
                    self.bump();
                    return Ok(IndexExpr::var(name));
                }
                if let Some(p) = self.sig.point(&name) {
                    if p.args.is_empty() {
                        self.bump();
                        return Ok(IndexExpr::apply(name, Vec::new()));
                    }
                    return Err(Diagnostic::error(format!(
                        "constructor `{name}` must be applied; wrap the application in parentheses"
                    ))
                    .with_span(span));
                }
                if let Some(set) = self.lookup_atom(&name) {
                    self.bump();
                    return Ok(IndexExpr::Atom { set, elem: name });
                }
                if self.sig.decls.iter().any(|d| d.name() == name) {
                    return Err(Diagnostic::error(format!("`{name}` cannot be used in a term")).with_span(span));
                }
                Err(self.unresolved("constructor", &name, span))
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    fn table(&mut self) -> PResult<IndexExpr> {
        let open = self.expect(Tok::LBrace)?;
        let mut pairs: Vec<(String, Span, IndexExpr)> = Vec::new();
        loop {
            let (key, span) = self.ident()?;
            self.expect(Tok::FatArrow)?;
            let value = self.expr()?;
            pairs.push((key, span, value));
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        let domain = self
            .lookup_atom(&pairs[0].0)
            .ok_or_else(|| Diagnostic::error(format!("`{}` is not an atom", pairs[0].0)).with_span(pairs[0].1))?;
        let set = self.sig.external(&domain).expect("found above").clone();
        let mut entries: Vec<Option<IndexExpr>> = vec![None; set.elements.len()];
        for (key, span, value) in pairs {
            let k = set
                .position(&key)
                .ok_or_else(|| Diagnostic::error(format!("`{key}` is not an element of `{domain}`")).with_span(span))?;
            if entries[k].replace(value).is_some() {
                return Err(Diagnostic::error(format!("`{key}` appears twice in function literal")).with_span(span));
            }
        }
        if let Some(k) = entries.iter().position(Option::is_none) {
            return Err(Diagnostic::error(format!(
                "function literal over `{domain}` is missing `{}`",
                set.elements[k]
            ))
            .with_span(open));
        }
        Ok(IndexExpr::Table { domain, entries: entries.into_iter().map(Option::unwrap).collect() })
    }
}

fn starts_atom(t: &Tok) -> bool {
    matches!(t, Tok::Ident(_) | Tok::LParen | Tok::LBrace)
}

fn join(a: Span, b: Span) -> Span {
    Span::new(a.start, b.end, a.line, a.column)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::validate;

    #[test]
    fn trees_example() {
        let sig = parse_str("external A = {a0, a1};\nsort T; point leaf : T; point node : (f : A -> T) -> T;").unwrap();
        assert_eq!(sig.sorts().count(), 1);
        assert_eq!(sig.points().count(), 2);
        assert!(validate(&sig).is_empty());
    }

    #[test]
    fn empty_file() {
        let sig = parse_str("").unwrap();
        assert!(sig.decls.is_empty() && sig.externals.is_empty());
        assert_eq!(parse_str("  -- only a comment\n").unwrap(), Signature::new());
    }

    #[test]
    fn unresolved_name_points_at_token() {
        let text = "sort T;\npoint c : Missing;";
        let errs = parse_str(text).unwrap_err();
        let span = errs[0].span.unwrap();
        assert_eq!(&text[span.start..span.end], "Missing");
        assert!(errs[0].message.contains("Missing"));
    }

    #[test]
    fn forward_sort_reference() {
        let errs = parse_str("sort B : (a : A) -> Set;\nsort A : (b : B) -> Set;").unwrap_err();
        assert!(errs[0].message.contains("forward sort reference"), "{:?}", errs);
    }

    #[test]
    fn unnamed_entries() {
        let sig = parse_str("sort Con; sort Ty : Con -> Set; point eps : Con; point iota : (G : Con) -> Ty G;").unwrap();
        assert_eq!(sig.sort("Ty").unwrap().indices[0].name, "_0");
        assert!(validate(&sig).is_empty());
    }

    #[test]
    fn table_literal_needs_total_coverage() {
        let errs = parse_str("external A = {a0, a1}; sort T; point leaf : T; point node : (f : A -> T) -> T;\npath p : node {a0 => leaf} = leaf;")
            .unwrap_err();
        assert!(errs[0].message.contains("missing `a1`"), "{errs:?}");
    }

    #[test]
    fn several_errors_are_collected() {
        let errs = parse_str("sort T; point a : Nope; point b : Nope2; point c : T;").unwrap_err();
        assert_eq!(errs.len(), 2);
    }

    #[test]
    fn parse_closed_term() {
        let sig = parse_str("sort N; point zero : N; point suc : (n : N) -> N;").unwrap();
        let t = parse_term(&sig, "suc (suc zero)").unwrap();
        assert_eq!(print_expr(&sig, &t), "suc (suc zero)");
        assert!(parse_term(&sig, "suc").is_err());
    }
}
