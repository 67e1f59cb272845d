//! Concrete syntax (`.act` files): tokenizer, recursive-descent parser and
//! the canonical pretty printer.
//!
//! ```text
//! program := method*
//! method  := IDENT "(" [IDENT ("," IDENT)*] ")" block
//! block   := "{" stmt+ "}"
//! stmt    := IDENT ":=" rhs ";" | "await" IDENT ";" | "skip" ";"
//!          | "return" ["*" | "[" IDENT "]"] IDENT ";"
//!          | "if" "(" bexp ")" block "else" block | "while" "(" bexp ")" block
//! rhs     := "new" | IDENT "." "get" | IDENT "!" IDENT "(" args ")"
//!          | IDENT "(" args ")" | vexp
//! vexp    := mexp (("+" | "-") mexp)*
//! mexp    := term (("*" | "/" | "%") term)*
//! term    := INT | "-" INT | IDENT | "(" vexp ")"
//! bexp    := conj ("||" conj)* ; conj := unary ("&&" unary)*
//! unary   := "!" unary | "(" bexp ")" | vexp "==" vexp
//! ```

use std::fmt::Write as _;

use thiserror::Error;

use crate::source_lang::{
    validate, BoolExpr, Diagnostic, Expr, MethodDecl, ReturnMark, SourceProgram, SourceStmt, ValueExpr, MAIN,
};

/// Program text together with where it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceText {
    pub text: String,
    pub origin: String,
}

impl SourceText {
    pub fn inline(text: impl Into<String>) -> Self {
        SourceText { text: text.into(), origin: "<inline>".to_string() }
    }

    pub fn from_file(path: &std::path::Path) -> std::io::Result<Self> {
        Ok(SourceText { text: std::fs::read_to_string(path)?, origin: path.display().to_string() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{origin}:{line}:{col}: syntax error: {message}")]
    Syntax { origin: String, line: usize, col: usize, message: String },
    #[error("{1}: invalid program: {diags}", diags = render_diags(.0))]
    Validation(Vec<Diagnostic>, String),
}

impl ParseError {
    fn origin(&self) -> &str {
        match self {
            ParseError::Syntax { origin, .. } => origin,
            ParseError::Validation(_, origin) => origin,
        }
    }
}

fn render_diags(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Assign,
    Semi,
    Comma,
    Dot,
    Bang,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    AndAnd,
    OrOr,
    EqEq,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", tok_text(other)),
        }
    }
}

fn tok_text(t: &Tok) -> &'static str {
    match t {
        Tok::Assign => ":=",
        Tok::Semi => ";",
        Tok::Comma => ",",
        Tok::Dot => ".",
        Tok::Bang => "!",
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        Tok::LBracket => "[",
        Tok::RBracket => "]",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        Tok::Percent => "%",
        Tok::AndAnd => "&&",
        Tok::OrOr => "||",
        Tok::EqEq => "==",
        _ => "?",
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
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

    fn tokenize(mut self) -> Result<Vec<Spanned>, (usize, usize, String)> {
        let mut out = Vec::new();
        loop {
            while let Some(&c) = self.chars.peek() {
                if c.is_whitespace() {
                    self.bump();
                } else if c == '/' {
                    let mut probe = self.chars.clone();
                    probe.next();
                    if probe.peek() == Some(&'/') {
                        while let Some(c) = self.bump() {
                            if c == '\n' {
                                break;
                            }
                        }
                    } else {
                        break;
                    }
                } else {
                    break;
                }
            }
            let (line, col) = (self.line, self.col);
            let Some(c) = self.bump() else {
                out.push(Spanned { tok: Tok::Eof, line, col });
                return Ok(out);
            };
            let tok = match c {
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '!' => Tok::Bang,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '%' => Tok::Percent,
                ':' if self.chars.peek() == Some(&'=') => {
                    self.bump();
                    Tok::Assign
                }
                '&' if self.chars.peek() == Some(&'&') => {
                    self.bump();
                    Tok::AndAnd
                }
                '|' if self.chars.peek() == Some(&'|') => {
                    self.bump();
                    Tok::OrOr
                }
                '=' if self.chars.peek() == Some(&'=') => {
                    self.bump();
                    Tok::EqEq
                }
                c if c.is_ascii_digit() => {
                    let mut digits = String::from(c);
                    while let Some(&d) = self.chars.peek() {
                        if d.is_ascii_digit() {
                            digits.push(d);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    // Parsed as a magnitude first so that i64::MIN can be
                    // written as a negated literal.
                    let mag: u64 =
                        digits.parse().map_err(|_| (line, col, format!("integer literal `{digits}` out of range")))?;
                    if mag > i64::MAX as u64 + 1 {
                        return Err((line, col, format!("integer literal `{digits}` out of range")));
                    }
                    out.push(Spanned { tok: Tok::Int(mag as i64), line, col });
                    if mag == i64::MAX as u64 + 1 {
                        // only valid directly after a unary minus; checked by the parser
                        out.last_mut().unwrap().tok = Tok::Int(i64::MIN);
                    }
                    continue;
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut ident = String::from(c);
                    while let Some(&d) = self.chars.peek() {
                        if d.is_ascii_alphanumeric() || d == '_' {
                            ident.push(d);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(ident)
                }
                other => return Err((line, col, format!("unexpected character `{}`", other.escape_debug()))),
            };
            out.push(Spanned { tok, line, col });
        }
    }
}

const KEYWORDS: &[&str] = &["await", "skip", "return", "if", "else", "while", "new", "get"];

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    origin: &'a str,
    params: Vec<String>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here<T>(&self, message: impl Into<String>) -> PResult<T> {
        let s = &self.toks[self.pos];
        Err(ParseError::Syntax { origin: self.origin.to_string(), line: s.line, col: s.col, message: message.into() })
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.advance();
            Ok(())
        } else {
            self.error_here(format!("expected `{}`, found {}", tok_text(&t), self.peek().describe()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.advance();
                Ok(s)
            }
            other => self.error_here(format!("expected identifier, found {}", other.describe())),
        }
    }

    /// An identifier in a position that must denote an attribute.
    fn attr(&mut self) -> PResult<String> {
        let save = self.pos;
        let name = self.ident()?;
        if self.params.contains(&name) {
            self.pos = save;
            return self.error_here(format!("parameter `{name}` used where an attribute is required"));
        }
        Ok(name)
    }

    fn program(&mut self) -> PResult<SourceProgram> {
        let mut methods: Vec<MethodDecl> = Vec::new();
        let mut main: Option<SourceStmt> = None;
        while *self.peek() != Tok::Eof {
            let name_pos = self.pos;
            let name = self.ident()?;
            self.expect(Tok::LParen)?;
            let mut params = Vec::new();
            if *self.peek() != Tok::RParen {
                params.push(self.ident()?);
                while *self.peek() == Tok::Comma {
                    self.advance();
                    params.push(self.ident()?);
                }
            }
            self.expect(Tok::RParen)?;
            if name == MAIN && !params.is_empty() {
                self.pos = name_pos;
                return self.error_here("main takes no parameters");
            }
            if methods.iter().any(|m| m.name == name) || (name == MAIN && main.is_some()) {
                self.pos = name_pos;
                return self.error_here(format!("duplicate method `{name}`"));
            }
            self.params = params.clone();
            let body = self.block()?;
            self.params.clear();
            if name == MAIN {
                main = Some(body);
            } else {
                methods.push(MethodDecl { name, params, body });
            }
        }
        let Some(main) = main else {
            return self.error_here("program has no `main()` method");
        };
        let mut stmts = Vec::new();
        main.flatten_into(&mut stmts);
        Ok(SourceProgram::with_implicit_return(methods, stmts))
    }

    fn block(&mut self) -> PResult<SourceStmt> {
        self.expect(Tok::LBrace)?;
        let mut stmts = Vec::new();
        while *self.peek() != Tok::RBrace {
            if *self.peek() == Tok::Eof {
                return self.error_here("unterminated block");
            }
            stmts.push(self.stmt()?);
        }
        if stmts.is_empty() {
            return self.error_here("empty block");
        }
        self.advance();
        Ok(SourceStmt::seq(stmts).expect("non-empty"))
    }

    fn stmt(&mut self) -> PResult<SourceStmt> {
        if self.is_keyword("await") {
            self.advance();
            let f = self.attr()?;
            self.expect(Tok::Semi)?;
            return Ok(SourceStmt::Await(f));
        }
        if self.is_keyword("skip") {
            self.advance();
            self.expect(Tok::Semi)?;
            return Ok(SourceStmt::Skip);
        }
        if self.is_keyword("return") {
            self.advance();
            let mark = match self.peek() {
                Tok::Star => {
                    self.advance();
                    ReturnMark::Star
                }
                Tok::LBracket => {
                    self.advance();
                    let z = self.attr()?;
                    self.expect(Tok::RBracket)?;
                    ReturnMark::WriteBack(z)
                }
                _ => ReturnMark::Unmarked,
            };
            let x = self.attr()?;
            self.expect(Tok::Semi)?;
            return Ok(SourceStmt::Return(x, mark));
        }
        if self.is_keyword("if") {
            self.advance();
            self.expect(Tok::LParen)?;
            let b = self.bexp()?;
            self.expect(Tok::RParen)?;
            let t = self.block()?;
            if !self.is_keyword("else") {
                return self.error_here(format!("expected `else`, found {}", self.peek().describe()));
            }
            self.advance();
            let e = self.block()?;
            return Ok(SourceStmt::if_else(b, t, e));
        }
        if self.is_keyword("while") {
            self.advance();
            self.expect(Tok::LParen)?;
            let b = self.bexp()?;
            self.expect(Tok::RParen)?;
            let body = self.block()?;
            return Ok(SourceStmt::while_loop(b, body));
        }
        let x = self.attr()?;
        self.expect(Tok::Assign)?;
        let stmt = self.rhs(x)?;
        self.expect(Tok::Semi)?;
        Ok(stmt)
    }

    fn rhs(&mut self, x: String) -> PResult<SourceStmt> {
        if self.is_keyword("new") {
            self.advance();
            return Ok(SourceStmt::Assign(x, Expr::New));
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if !KEYWORDS.contains(&name.as_str()) {
                match self.peek_at(1) {
                    Tok::Dot => {
                        let f = self.attr()?;
                        self.advance();
                        if !self.is_keyword("get") {
                            return self.error_here(format!("expected `get`, found {}", self.peek().describe()));
                        }
                        self.advance();
                        return Ok(SourceStmt::Assign(x, Expr::Get(f)));
                    }
                    Tok::Bang => {
                        let callee = self.attr()?;
                        self.advance();
                        let method = self.ident()?;
                        let args = self.args()?;
                        return Ok(SourceStmt::AsyncCall { fut: x, callee, method, args });
                    }
                    Tok::LParen => {
                        let method = self.ident()?;
                        let args = self.args()?;
                        return Ok(SourceStmt::Assign(x, Expr::SyncCall(method, args)));
                    }
                    _ => {}
                }
            }
        }
        Ok(SourceStmt::Assign(x, Expr::Val(self.vexp()?)))
    }

    fn args(&mut self) -> PResult<Vec<String>> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if *self.peek() != Tok::RParen {
            args.push(self.attr()?);
            while *self.peek() == Tok::Comma {
                self.advance();
                args.push(self.attr()?);
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn vexp(&mut self) -> PResult<ValueExpr> {
        let mut lhs = self.mexp()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.advance();
                    lhs = ValueExpr::add(lhs, self.mexp()?);
                }
                Tok::Minus => {
                    self.advance();
                    lhs = ValueExpr::sub(lhs, self.mexp()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn mexp(&mut self) -> PResult<ValueExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.advance();
                    lhs = ValueExpr::mul(lhs, self.term()?);
                }
                Tok::Slash => {
                    self.advance();
                    lhs = ValueExpr::div(lhs, self.term()?);
                }
                Tok::Percent => {
                    self.advance();
                    lhs = ValueExpr::rem(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> PResult<ValueExpr> {
        match self.peek().clone() {
            Tok::Int(i) => {
                if i == i64::MIN {
                    return self.error_here("integer literal out of range");
                }
                self.advance();
                Ok(ValueExpr::IntLit(i))
            }
            Tok::Minus => {
                self.advance();
                match self.peek().clone() {
                    Tok::Int(i) => {
                        self.advance();
                        Ok(ValueExpr::IntLit(i.wrapping_neg()))
                    }
                    other => self.error_here(format!("expected integer after `-`, found {}", other.describe())),
                }
            }
            Tok::LParen => {
                self.advance();
                let v = self.vexp()?;
                self.expect(Tok::RParen)?;
                Ok(v)
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.params.contains(&name) {
                    Ok(ValueExpr::Param(name))
                } else {
                    Ok(ValueExpr::Attr(name))
                }
            }
            other => self.error_here(format!("expected value, found {}", other.describe())),
        }
    }

    fn bexp(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.conj()?;
        while *self.peek() == Tok::OrOr {
            self.advance();
            lhs = BoolExpr::or(lhs, self.conj()?);
        }
        Ok(lhs)
    }

    fn conj(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::AndAnd {
            self.advance();
            lhs = BoolExpr::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<BoolExpr> {
        match self.peek() {
            Tok::Bang => {
                self.advance();
                Ok(BoolExpr::not(self.unary()?))
            }
            Tok::LParen => {
                // `(` opens either a nested boolean or a parenthesised value
                // on the left of `==`; try the comparison first.
                let save = self.pos;
                if let Ok(cmp) = self.comparison() {
                    return Ok(cmp);
                }
                self.pos = save;
                self.advance();
                let b = self.bexp()?;
                self.expect(Tok::RParen)?;
                Ok(b)
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> PResult<BoolExpr> {
        let lhs = self.vexp()?;
        self.expect(Tok::EqEq)?;
        let rhs = self.vexp()?;
        Ok(BoolExpr::Eq(lhs, rhs))
    }
}

/// Parses program text without running validation.
pub fn parse_unvalidated(src: &SourceText) -> Result<SourceProgram, ParseError> {
    let toks = Lexer { chars: src.text.chars().peekable(), line: 1, col: 1 }
        .tokenize()
        .map_err(|(line, col, message)| ParseError::Syntax { origin: src.origin.clone(), line, col, message })?;
    let mut p = Parser { toks, pos: 0, origin: &src.origin, params: Vec::new() };
    p.program()
}

/// Parses and validates a program.
pub fn parse_program(src: &SourceText) -> Result<SourceProgram, ParseError> {
    let program = parse_unvalidated(src)?;
    let diags = validate(&program);
    if diags.is_empty() {
        Ok(program)
    } else {
        Err(ParseError::Validation(diags, src.origin.clone()))
    }
}

/// Parses a single statement sequence, e.g. a dumped closure body.
pub fn parse_stmt(text: &str) -> Result<SourceStmt, ParseError> {
    let wrapped = format!("main() {{ {text} }}");
    let src = SourceText::inline(wrapped);
    let toks = Lexer { chars: src.text.chars().peekable(), line: 1, col: 1 }
        .tokenize()
        .map_err(|(line, col, message)| ParseError::Syntax { origin: src.origin.clone(), line, col, message })?;
    let mut p = Parser { toks, pos: 0, origin: "<inline>", params: Vec::new() };
    p.advance();
    p.expect(Tok::LParen)?;
    p.expect(Tok::RParen)?;
    let s = p.block()?;
    if *p.peek() != Tok::Eof {
        return p.error_here("trailing input");
    }
    Ok(s)
}

impl std::fmt::Display for ValueExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&render_value(self, 0))
    }
}

// Precedence levels: 0 = additive context, 1 = multiplicative operand,
// 2 = term.
fn render_value(v: &ValueExpr, ctx: u8) -> String {
    let (prec, text) = match v {
        ValueExpr::Attr(a) | ValueExpr::Param(a) => (2, a.clone()),
        ValueExpr::IntLit(i) => (2, i.to_string()),
        ValueExpr::Add(a, b) => (0, format!("{} + {}", render_value(a, 0), render_value(b, 1))),
        ValueExpr::Sub(a, b) => (0, format!("{} - {}", render_value(a, 0), render_value(b, 1))),
        ValueExpr::Mul(a, b) => (1, format!("{} * {}", render_value(a, 1), render_value(b, 2))),
        ValueExpr::Div(a, b) => (1, format!("{} / {}", render_value(a, 1), render_value(b, 2))),
        ValueExpr::Mod(a, b) => (1, format!("{} % {}", render_value(a, 1), render_value(b, 2))),
    };
    if prec < ctx {
        format!("({text})")
    } else {
        text
    }
}

impl std::fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&render_bool(self, 0))
    }
}

// 0 = disjunction, 1 = conjunction operand, 2 = unary operand.
fn render_bool(b: &BoolExpr, ctx: u8) -> String {
    let (prec, text) = match b {
        BoolExpr::Or(a, c) => (0, format!("{} || {}", render_bool(a, 0), render_bool(c, 1))),
        BoolExpr::And(a, c) => (1, format!("{} && {}", render_bool(a, 1), render_bool(c, 2))),
        BoolExpr::Not(a) => (2, format!("!{}", render_bool(a, 2))),
        BoolExpr::Eq(x, y) => (2, format!("{x} == {y}")),
    };
    // A parenthesised comparison would be read back as a value group, so
    // wrap any non-trivial operand of `!` as well.
    let needs = prec < ctx || (ctx == 2 && matches!(b, BoolExpr::Eq(..)));
    if needs {
        format!("({text})")
    } else {
        text
    }
}

/// Renders one atomic statement on a single line (nested bodies inline).
pub fn render_stmt(s: &SourceStmt) -> String {
    let mut out = String::new();
    write_stmt(&mut out, s, None);
    out
}

fn write_block(out: &mut String, s: &SourceStmt, indent: Option<usize>) {
    out.push('{');
    match indent {
        None => {
            for a in s.atoms() {
                out.push(' ');
                write_stmt(out, a, None);
            }
            out.push_str(" }");
        }
        Some(n) => {
            out.push('\n');
            for a in s.atoms() {
                out.push_str(&"    ".repeat(n + 1));
                write_stmt(out, a, Some(n + 1));
                out.push('\n');
            }
            out.push_str(&"    ".repeat(n));
            out.push('}');
        }
    }
}

fn write_stmt(out: &mut String, s: &SourceStmt, indent: Option<usize>) {
    match s {
        SourceStmt::Assign(x, e) => {
            let _ = match e {
                Expr::Val(v) => write!(out, "{x} := {v};"),
                Expr::New => write!(out, "{x} := new;"),
                Expr::Get(f) => write!(out, "{x} := {f}.get;"),
                Expr::SyncCall(m, args) => write!(out, "{x} := {m}({});", args.join(", ")),
            };
        }
        SourceStmt::AsyncCall { fut, callee, method, args } => {
            let _ = write!(out, "{fut} := {callee}!{method}({});", args.join(", "));
        }
        SourceStmt::Await(f) => {
            let _ = write!(out, "await {f};");
        }
        SourceStmt::Skip => out.push_str("skip;"),
        SourceStmt::Return(x, ReturnMark::Unmarked) => {
            let _ = write!(out, "return {x};");
        }
        SourceStmt::Return(x, ReturnMark::Star) => {
            let _ = write!(out, "return* {x};");
        }
        SourceStmt::Return(x, ReturnMark::WriteBack(z)) => {
            let _ = write!(out, "return[{z}] {x};");
        }
        SourceStmt::Seq(..) => {
            let atoms = s.atoms();
            for (i, a) in atoms.iter().enumerate() {
                if i > 0 {
                    match indent {
                        None => out.push(' '),
                        Some(n) => {
                            out.push('\n');
                            out.push_str(&"    ".repeat(n));
                        }
                    }
                }
                write_stmt(out, a, indent);
            }
        }
        SourceStmt::If(b, t, e) => {
            let _ = write!(out, "if ({b}) ");
            write_block(out, t, indent);
            out.push_str(" else ");
            write_block(out, e, indent);
        }
        SourceStmt::While(b, body) => {
            let _ = write!(out, "while ({b}) ");
            write_block(out, body, indent);
        }
    }
}

/// Canonical rendering of a program. `main` comes first, then the methods
/// in declaration order.
pub fn pretty(program: &SourceProgram) -> SourceText {
    let mut out = String::new();
    out.push_str("main() ");
    write_block(&mut out, &program.main, Some(0));
    out.push('\n');
    for m in program.methods.values() {
        out.push('\n');
        let _ = write!(out, "{}({}) ", m.name, m.params.join(", "));
        write_block(&mut out, &m.body, Some(0));
        out.push('\n');
    }
    SourceText { text: out, origin: "<pretty>".to_string() }
}

impl ParseError {
    /// `(line, column)` of a syntax error.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            ParseError::Syntax { line, col, .. } => Some((*line, *col)),
            ParseError::Validation(..) => None,
        }
    }

    pub fn source_origin(&self) -> &str {
        self.origin()
    }
}
