//! Hand-written lexer and recursive-descent parser.
//!
//! ```text
//! prog  := decl* stmt*
//! decl  := "input" ID "in" "[" INT "," INT "]" ";"
//! stmt  := ID ":=" rhs ";" | ID "[" expr "]" ":=" expr ";"
//!        | "if" "(" cond ")" block ("else" block)?
//!        | "while" "(" cond ")" block
//!        | "for" "(" ID ":=" expr ";" cond ";" ID ":=" expr ")" block
//!        | "assert" "(" cond ")" ";"
//! rhs   := expr | "(" cond ")" | "new" "Int" "[" expr "]" | "true" | "false"
//! expr  := INT | ID | ID ".length" | expr ("+"|"-") expr
//! cond  := expr ("<"|"<="|">"|">="|"=") expr | ID | "!" cond
//! block := "{" stmt* "}" | stmt
//! ```
//!
//! `//` starts a comment running to the end of the line.

use std::collections::BTreeMap;

use super::ast::*;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Ident(String),
    Input,
    In,
    If,
    Else,
    While,
    For,
    Assert,
    New,
    IntType,
    True,
    False,
    Length,
    Assign,
    Semi,
    Comma,
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Plus,
    Minus,
    Lt,
    Le,
    Gt,
    Ge,
    EqSign,
    Bang,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(k) => format!("integer {k}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of input".to_string(),
            Tok::Length => "`.length`".to_string(),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Input => "input",
            Tok::In => "in",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::For => "for",
            Tok::Assert => "assert",
            Tok::New => "new",
            Tok::IntType => "Int",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Assign => ":=",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::EqSign => "=",
            Tok::Bang => "!",
            _ => "",
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos::new(line, col);
        let advance = |n: usize, i: &mut usize, col: &mut u32| {
            *i += n;
            *col += n as u32;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i, &mut col),
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += (i - start) as u32;
                let k = s.parse::<i64>().map_err(|_| {
                    Error::parse(pos, format!("integer literal `{s}` out of range"))
                })?;
                toks.push((Tok::Int(k), pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                col += (i - start) as u32;
                let tok = match s.as_str() {
                    "input" => Tok::Input,
                    "in" => Tok::In,
                    "if" => Tok::If,
                    "else" => Tok::Else,
                    "while" => Tok::While,
                    "for" => Tok::For,
                    "assert" => Tok::Assert,
                    "new" => Tok::New,
                    "Int" => Tok::IntType,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(s),
                };
                toks.push((tok, pos));
            }
            '.' => {
                let rest: String = chars[i + 1..].iter().take(6).collect();
                let is_length = rest == "length"
                    && !chars
                        .get(i + 7)
                        .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_');
                if !is_length {
                    return Err(Error::parse(
                        pos,
                        "unexpected `.`; only `.length` is allowed",
                    ));
                }
                advance(7, &mut i, &mut col);
                toks.push((Tok::Length, pos));
            }
            _ => {
                let next = chars.get(i + 1).copied();
                let (tok, n) = match (c, next) {
                    (':', Some('=')) => (Tok::Assign, 2),
                    ('<', Some('=')) => (Tok::Le, 2),
                    ('>', Some('=')) => (Tok::Ge, 2),
                    ('<', _) => (Tok::Lt, 1),
                    ('>', _) => (Tok::Gt, 1),
                    ('=', _) => (Tok::EqSign, 1),
                    (';', _) => (Tok::Semi, 1),
                    (',', _) => (Tok::Comma, 1),
                    ('[', _) => (Tok::LBracket, 1),
                    (']', _) => (Tok::RBracket, 1),
                    ('(', _) => (Tok::LParen, 1),
                    (')', _) => (Tok::RParen, 1),
                    ('{', _) => (Tok::LBrace, 1),
                    ('}', _) => (Tok::RBrace, 1),
                    ('+', _) => (Tok::Plus, 1),
                    ('-', _) => (Tok::Minus, 1),
                    ('!', _) => (Tok::Bang, 1),
                    _ => return Err(Error::parse(pos, format!("unexpected character `{c}`"))),
                };
                advance(n, &mut i, &mut col);
                toks.push((tok, pos));
            }
        }
    }
    toks.push((Tok::Eof, Pos::new(line, col)));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.at + n).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T> {
        Err(Error::parse(
            self.pos(),
            format!("expected {wanted}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.unexpected(&format!("`{}`", tok.text()))
        }
    }

    fn ident(&mut self) -> Result<(Var, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.bump().1;
                Ok((Var::new(s), pos))
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn int_literal(&mut self) -> Result<i64> {
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        match *self.peek() {
            Tok::Int(k) => {
                self.bump();
                Ok(if negative { -k } else { k })
            }
            _ => self.unexpected("integer"),
        }
    }

    fn program(&mut self) -> Result<Program> {
        let mut prog = Program::default();
        while *self.peek() == Tok::Input {
            let pos = self.bump().1;
            let (var, _) = self.ident()?;
            self.expect(Tok::In)?;
            self.expect(Tok::LBracket)?;
            let lo = self.int_literal()?;
            self.expect(Tok::Comma)?;
            let hi = self.int_literal()?;
            self.expect(Tok::RBracket)?;
            self.expect(Tok::Semi)?;
            if lo > hi {
                return Err(Error::parse(pos, format!("empty input range [{lo}, {hi}]")));
            }
            prog.decls.push(InputDecl { var, lo, hi, pos });
        }
        while *self.peek() != Tok::Eof {
            prog.body.push(self.stmt()?);
        }
        Ok(prog)
    }

    fn block(&mut self) -> Result<Vec<Stmt>> {
        if *self.peek() == Tok::LBrace {
            self.bump();
            let mut out = Vec::new();
            while *self.peek() != Tok::RBrace {
                if *self.peek() == Tok::Eof {
                    return self.unexpected("`}`");
                }
                out.push(self.stmt()?);
            }
            self.bump();
            Ok(out)
        } else {
            Ok(vec![self.stmt()?])
        }
    }

    fn stmt(&mut self) -> Result<Stmt> {
        let pos = self.pos();
        let kind = match self.peek().clone() {
            Tok::If => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.cond()?;
                self.expect(Tok::RParen)?;
                let then_block = self.block()?;
                let else_block = if *self.peek() == Tok::Else {
                    self.bump();
                    Some(self.block()?)
                } else {
                    None
                };
                StmtKind::If {
                    cond,
                    then_block,
                    else_block,
                }
            }
            Tok::While => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.cond()?;
                self.expect(Tok::RParen)?;
                StmtKind::While {
                    cond,
                    body: self.block()?,
                }
            }
            Tok::For => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (var, _) = self.ident()?;
                self.expect(Tok::Assign)?;
                let init = self.expr()?;
                self.expect(Tok::Semi)?;
                let cond = self.cond()?;
                self.expect(Tok::Semi)?;
                let (step_var, _) = self.ident()?;
                self.expect(Tok::Assign)?;
                let step = self.expr()?;
                self.expect(Tok::RParen)?;
                StmtKind::For {
                    var,
                    init,
                    cond,
                    step_var,
                    step,
                    body: self.block()?,
                }
            }
            Tok::Assert => {
                self.bump();
                self.expect(Tok::LParen)?;
                let cond = self.cond()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::Semi)?;
                StmtKind::Assert(cond)
            }
            Tok::Ident(_) => {
                let (var, _) = self.ident()?;
                if *self.peek() == Tok::LBracket {
                    self.bump();
                    let index = self.expr()?;
                    self.expect(Tok::RBracket)?;
                    self.expect(Tok::Assign)?;
                    let value = self.expr()?;
                    self.expect(Tok::Semi)?;
                    StmtKind::Store {
                        array: var,
                        index,
                        value,
                    }
                } else {
                    self.expect(Tok::Assign)?;
                    let rhs = self.rhs()?;
                    self.expect(Tok::Semi)?;
                    StmtKind::Assign(var, rhs)
                }
            }
            _ => return self.unexpected("statement"),
        };
        Ok(Stmt { kind, pos })
    }

    fn rhs(&mut self) -> Result<Rhs> {
        match self.peek() {
            Tok::LParen => {
                self.bump();
                let c = self.cond()?;
                self.expect(Tok::RParen)?;
                Ok(Rhs::Cond(c))
            }
            Tok::New => {
                self.bump();
                self.expect(Tok::IntType)?;
                self.expect(Tok::LBracket)?;
                let e = self.expr()?;
                self.expect(Tok::RBracket)?;
                Ok(Rhs::NewArray(e))
            }
            Tok::True => {
                self.bump();
                Ok(Rhs::Bool(true))
            }
            Tok::False => {
                self.bump();
                Ok(Rhs::Bool(false))
            }
            _ => Ok(Rhs::Expr(self.expr()?)),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Int(k) => {
                self.bump();
                Ok(Expr::Int(k))
            }
            Tok::Minus if matches!(self.peek_at(1), Tok::Int(_)) => {
                Ok(Expr::Int(self.int_literal()?))
            }
            Tok::Ident(_) => {
                let (v, _) = self.ident()?;
                if *self.peek() == Tok::Length {
                    self.bump();
                    Ok(Expr::Var(Var::length_of(&v)))
                } else {
                    Ok(Expr::Var(v))
                }
            }
            _ => self.unexpected("expression"),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.atom()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    e = e + self.atom()?;
                }
                Tok::Minus => {
                    self.bump();
                    e = e - self.atom()?;
                }
                _ => return Ok(e),
            }
        }
    }

    fn cond(&mut self) -> Result<Cond> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(!self.cond()?);
        }
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Lt => RelOp::Lt,
            Tok::Le => RelOp::Le,
            Tok::Gt => RelOp::Gt,
            Tok::Ge => RelOp::Ge,
            Tok::EqSign => RelOp::Eq,
            _ => {
                return match lhs {
                    Expr::Var(v) => Ok(Cond::BoolVar(v)),
                    _ => self.unexpected("comparison operator"),
                }
            }
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Cond::rel(op, lhs, rhs))
    }
}

/// Parses program text and checks variable kinds and def-before-use.
pub fn parse(text: &str) -> Result<Program> {
    let mut p = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let prog = p.program()?;
    check(&prog)?;
    Ok(prog)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Int,
    Bool,
    Array,
}

/// Variable kinds of a well-formed program, in declaration order of first definition.
pub fn var_kinds(prog: &Program) -> BTreeMap<Var, VarKind> {
    let mut ck = Checker::default();
    // Already validated by `parse`; this re-runs the same scan.
    let _ = ck.program(prog);
    ck.kinds
}

#[derive(Default)]
struct Checker {
    kinds: BTreeMap<Var, VarKind>,
}

impl Checker {
    fn define(&mut self, v: &Var, kind: VarKind, pos: Pos) -> Result<()> {
        match self.kinds.get(v) {
            Some(k) if *k != kind => Err(Error::parse(
                pos,
                format!("`{v}` used as {kind:?} but previously defined as {k:?}"),
            )),
            _ => {
                self.kinds.insert(v.clone(), kind);
                if kind == VarKind::Array {
                    self.kinds.insert(Var::length_of(v), VarKind::Int);
                }
                Ok(())
            }
        }
    }

    fn use_var(&self, v: &Var, kind: VarKind, pos: Pos) -> Result<()> {
        match self.kinds.get(v) {
            None => Err(Error::parse(pos, format!("`{v}` used before definition"))),
            Some(k) if *k != kind => Err(Error::parse(
                pos,
                format!("`{v}` is {k:?}, expected {kind:?}"),
            )),
            Some(_) => Ok(()),
        }
    }

    fn expr(&self, e: &Expr, pos: Pos) -> Result<()> {
        let mut vs = Vec::new();
        e.vars(&mut vs);
        vs.iter()
            .try_for_each(|v| self.use_var(v, VarKind::Int, pos))
    }

    fn cond(&self, c: &Cond, pos: Pos) -> Result<()> {
        match c {
            Cond::Rel(_, a, b) => {
                self.expr(a, pos)?;
                self.expr(b, pos)
            }
            Cond::BoolVar(v) => self.use_var(v, VarKind::Bool, pos),
            Cond::Not(c) => self.cond(c, pos),
        }
    }

    fn program(&mut self, prog: &Program) -> Result<()> {
        for d in &prog.decls {
            if self.kinds.contains_key(&d.var) {
                return Err(Error::parse(
                    d.pos,
                    format!("input `{}` declared twice", d.var),
                ));
            }
            self.define(&d.var, VarKind::Int, d.pos)?;
        }
        self.block(&prog.body)
    }

    fn block(&mut self, block: &[Stmt]) -> Result<()> {
        block.iter().try_for_each(|s| self.stmt(s))
    }

    fn stmt(&mut self, s: &Stmt) -> Result<()> {
        let pos = s.pos;
        match &s.kind {
            StmtKind::Assign(v, rhs) => match rhs {
                Rhs::Expr(e) => {
                    self.expr(e, pos)?;
                    self.define(v, VarKind::Int, pos)
                }
                Rhs::Cond(c) => {
                    self.cond(c, pos)?;
                    self.define(v, VarKind::Bool, pos)
                }
                Rhs::Bool(_) => self.define(v, VarKind::Bool, pos),
                Rhs::NewArray(e) => {
                    self.expr(e, pos)?;
                    self.define(v, VarKind::Array, pos)
                }
            },
            StmtKind::Store {
                array,
                index,
                value,
            } => {
                self.use_var(array, VarKind::Array, pos)?;
                self.expr(index, pos)?;
                self.expr(value, pos)
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                self.cond(cond, pos)?;
                self.block(then_block)?;
                if let Some(e) = else_block {
                    self.block(e)?;
                }
                Ok(())
            }
            StmtKind::While { cond, body } => {
                self.cond(cond, pos)?;
                self.block(body)
            }
            StmtKind::For {
                var,
                init,
                cond,
                step_var,
                step,
                body,
            } => {
                self.expr(init, pos)?;
                self.define(var, VarKind::Int, pos)?;
                self.cond(cond, pos)?;
                self.block(body)?;
                self.expr(step, pos)?;
                self.define(step_var, VarKind::Int, pos)
            }
            StmtKind::Assert(c) => self.cond(c, pos),
        }
    }
}

fn check(prog: &Program) -> Result<()> {
    Checker::default().program(prog)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_empty_program() {
        let p = parse("").unwrap();
        assert!(p.decls.is_empty() && p.body.is_empty());
        assert_eq!(parse("  // only a comment\n").unwrap(), Program::default());
    }

    #[test]
    fn missing_rhs_is_reported_at_semicolon() {
        let err = parse("x := ;").unwrap_err();
        match err {
            Error::Parse { line, col, .. } => assert_eq!((line, col), (1, 6)),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn length_and_negative_literals() {
        let p = parse("A := new Int[3]; A[A.length - 1] := -16;").unwrap();
        match &p.body[1].kind {
            StmtKind::Store { index, value, .. } => {
                assert_eq!(index, &(Expr::Var(Var::new("A.length")) - Expr::Int(1)));
                assert_eq!(value, &Expr::Int(-16));
            }
            k => panic!("unexpected {k:?}"),
        }
    }

    #[test]
    fn bool_conditions_and_negation() {
        let p = parse("x := 1; b := (x > 0); while (!b) { b := true; }").unwrap();
        match &p.body[2].kind {
            StmtKind::While { cond, .. } => {
                assert_eq!(cond, &!Cond::BoolVar(Var::new("b")))
            }
            k => panic!("unexpected {k:?}"),
        }
    }

    #[test]
    fn use_before_definition_is_rejected() {
        assert!(parse("x := y + 1;").is_err());
        assert!(parse("x := 1; x := (x > 0);").is_err());
        assert!(parse("x := 1; x[0] := 1;").is_err());
    }

    #[test]
    fn stray_characters_are_rejected() {
        let err = parse("x := 1 * 2;").unwrap_err();
        assert!(matches!(
            err,
            Error::Parse {
                line: 1,
                col: 8,
                ..
            }
        ));
        assert!(parse("x := 1; y := x.size;").is_err());
    }
}
