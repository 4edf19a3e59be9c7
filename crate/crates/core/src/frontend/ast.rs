//! Abstract syntax of the tiny imperative language.
//!
//! Expressions are integer-valued and built from literals, variables,
//! `arr.length` and binary `+`/`-`. Conditions are a single relation, a
//! boolean variable, or a negation. Every statement keeps its source position.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A program variable. Array lengths are ordinary variables named `arr.length`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: impl AsRef<str>) -> Self {
        Var(Arc::from(name.as_ref()))
    }

    /// The derived length variable of an array.
    pub fn length_of(array: &Var) -> Self {
        Var::new(format!("{}.length", array.0))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var::new(s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Int(i64),
    Var(Var),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
}

impl std::ops::Add for Expr {
    type Output = Expr;

    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;

    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl Expr {
    pub fn var(name: &str) -> Self {
        Expr::Var(Var::new(name))
    }

    pub fn vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Int(_) => {}
            Expr::Var(v) => out.push(v.clone()),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    /// Flattens the expression into `sum(coef * var) + constant`.
    /// Returns `None` on arithmetic overflow.
    pub fn linear(&self) -> Option<Linear> {
        let mut lin = Linear::default();
        self.accumulate(1, &mut lin)?;
        lin.terms.retain(|_, c| *c != 0);
        Some(lin)
    }

    fn accumulate(&self, sign: i64, lin: &mut Linear) -> Option<()> {
        match self {
            Expr::Int(k) => lin.constant = lin.constant.checked_add(sign.checked_mul(*k)?)?,
            Expr::Var(v) => {
                let c = lin.terms.entry(v.clone()).or_insert(0);
                *c = c.checked_add(sign)?;
            }
            Expr::Add(a, b) => {
                a.accumulate(sign, lin)?;
                b.accumulate(sign, lin)?;
            }
            Expr::Sub(a, b) => {
                a.accumulate(sign, lin)?;
                b.accumulate(-sign, lin)?;
            }
        }
        Some(())
    }
}

// Expressions have no parentheses and parse left-associative, so only trees
// whose right operands are atoms render back faithfully. The parser builds no others.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(k) => write!(f, "{k}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Add(a, b) => write!(f, "{a} + {b}"),
            Expr::Sub(a, b) => write!(f, "{a} - {b}"),
        }
    }
}

/// `sum(coef * var) + constant`, with zero coefficients removed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Linear {
    pub terms: BTreeMap<Var, i64>,
    pub constant: i64,
}

impl Linear {
    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    /// If the form is `var + k`, returns `(var, k)`.
    pub fn as_var_offset(&self) -> Option<(&Var, i64)> {
        if self.terms.len() != 1 {
            return None;
        }
        let (v, c) = self.terms.iter().next()?;
        (*c == 1).then_some((v, self.constant))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    /// Only produced by negating `=`; not part of the surface syntax.
    Ne,
}

impl RelOp {
    pub fn negate(self) -> RelOp {
        match self {
            RelOp::Lt => RelOp::Ge,
            RelOp::Le => RelOp::Gt,
            RelOp::Gt => RelOp::Le,
            RelOp::Ge => RelOp::Lt,
            RelOp::Eq => RelOp::Ne,
            RelOp::Ne => RelOp::Eq,
        }
    }

    /// The operator obtained by swapping the operands.
    pub fn flip(self) -> RelOp {
        match self {
            RelOp::Lt => RelOp::Gt,
            RelOp::Le => RelOp::Ge,
            RelOp::Gt => RelOp::Lt,
            RelOp::Ge => RelOp::Le,
            RelOp::Eq => RelOp::Eq,
            RelOp::Ne => RelOp::Ne,
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            RelOp::Lt => a < b,
            RelOp::Le => a <= b,
            RelOp::Gt => a > b,
            RelOp::Ge => a >= b,
            RelOp::Eq => a == b,
            RelOp::Ne => a != b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
            RelOp::Eq => "=",
            RelOp::Ne => "!=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cond {
    Rel(RelOp, Expr, Expr),
    BoolVar(Var),
    Not(Box<Cond>),
}

impl std::ops::Not for Cond {
    type Output = Cond;

    fn not(self) -> Cond {
        Cond::Not(Box::new(self))
    }
}

impl Cond {
    pub fn rel(op: RelOp, lhs: Expr, rhs: Expr) -> Self {
        Cond::Rel(op, lhs, rhs)
    }

    /// Pushes negations into the relation or boolean literal.
    pub fn normalize(&self) -> Atom {
        self.normalize_with(false)
    }

    fn normalize_with(&self, negated: bool) -> Atom {
        match self {
            Cond::Rel(op, a, b) => {
                let op = if negated { op.negate() } else { *op };
                Atom::Rel(op, a.clone(), b.clone())
            }
            Cond::BoolVar(v) => Atom::Bool(v.clone(), !negated),
            Cond::Not(inner) => inner.normalize_with(!negated),
        }
    }

    pub fn vars(&self, out: &mut Vec<Var>) {
        match self {
            Cond::Rel(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Cond::BoolVar(v) => out.push(v.clone()),
            Cond::Not(c) => c.vars(out),
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Rel(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Cond::BoolVar(v) => write!(f, "{v}"),
            Cond::Not(c) => write!(f, "!{c}"),
        }
    }
}

/// A negation-free condition: a relation or a boolean variable with polarity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    Rel(RelOp, Expr, Expr),
    Bool(Var, bool),
}

impl Atom {
    pub fn negate(&self) -> Atom {
        match self {
            Atom::Rel(op, a, b) => Atom::Rel(op.negate(), a.clone(), b.clone()),
            Atom::Bool(v, p) => Atom::Bool(v.clone(), !p),
        }
    }

    /// `lhs - rhs` as a linear form together with the relation against zero.
    pub fn linear(&self) -> Option<(RelOp, Linear)> {
        match self {
            Atom::Rel(op, a, b) => Some((*op, (a.clone() - b.clone()).linear()?)),
            Atom::Bool(..) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputDecl {
    pub var: Var,
    pub lo: i64,
    pub hi: i64,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rhs {
    Expr(Expr),
    Cond(Cond),
    Bool(bool),
    NewArray(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Assign(Var, Rhs),
    Store {
        array: Var,
        index: Expr,
        value: Expr,
    },
    If {
        cond: Cond,
        then_block: Vec<Stmt>,
        else_block: Option<Vec<Stmt>>,
    },
    While {
        cond: Cond,
        body: Vec<Stmt>,
    },
    For {
        var: Var,
        init: Expr,
        cond: Cond,
        step_var: Var,
        step: Expr,
        body: Vec<Stmt>,
    },
    Assert(Cond),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<InputDecl>,
    pub body: Vec<Stmt>,
}

impl Program {
    /// Renders the program back to source text in the grammar accepted by the parser.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for d in &self.decls {
            out.push_str(&format!("input {} in [{}, {}];\n", d.var, d.lo, d.hi));
        }
        render_block(&self.body, 0, &mut out);
        out
    }

    /// Drops source positions, for structural comparisons.
    pub fn without_positions(&self) -> Program {
        let mut p = self.clone();
        for d in &mut p.decls {
            d.pos = Pos::default();
        }
        strip_block(&mut p.body);
        p
    }
}

fn strip_block(block: &mut [Stmt]) {
    for s in block {
        s.pos = Pos::default();
        match &mut s.kind {
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => {
                strip_block(then_block);
                if let Some(e) = else_block {
                    strip_block(e);
                }
            }
            StmtKind::While { body, .. } | StmtKind::For { body, .. } => strip_block(body),
            _ => {}
        }
    }
}

fn render_block(block: &[Stmt], depth: usize, out: &mut String) {
    for s in block {
        render_stmt(s, depth, out);
    }
}

fn render_rhs(rhs: &Rhs) -> String {
    match rhs {
        Rhs::Expr(e) => e.to_string(),
        Rhs::Cond(c) => format!("({c})"),
        Rhs::Bool(b) => b.to_string(),
        Rhs::NewArray(e) => format!("new Int[{e}]"),
    }
}

fn render_stmt(s: &Stmt, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match &s.kind {
        StmtKind::Assign(v, rhs) => out.push_str(&format!("{pad}{v} := {};\n", render_rhs(rhs))),
        StmtKind::Store {
            array,
            index,
            value,
        } => out.push_str(&format!("{pad}{array}[{index}] := {value};\n")),
        StmtKind::If {
            cond,
            then_block,
            else_block,
        } => {
            out.push_str(&format!("{pad}if ({cond}) {{\n"));
            render_block(then_block, depth + 1, out);
            match else_block {
                Some(e) => {
                    out.push_str(&format!("{pad}}} else {{\n"));
                    render_block(e, depth + 1, out);
                    out.push_str(&format!("{pad}}}\n"));
                }
                None => out.push_str(&format!("{pad}}}\n")),
            }
        }
        StmtKind::While { cond, body } => {
            out.push_str(&format!("{pad}while ({cond}) {{\n"));
            render_block(body, depth + 1, out);
            out.push_str(&format!("{pad}}}\n"));
        }
        StmtKind::For {
            var,
            init,
            cond,
            step_var,
            step,
            body,
        } => {
            out.push_str(&format!(
                "{pad}for ({var} := {init}; {cond}; {step_var} := {step}) {{\n"
            ));
            render_block(body, depth + 1, out);
            out.push_str(&format!("{pad}}}\n"));
        }
        StmtKind::Assert(c) => out.push_str(&format!("{pad}assert ({c});\n")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_form_collects_coefficients() {
        let e = Expr::var("i") + Expr::var("i") - Expr::Int(3);
        let lin = e.linear().unwrap();
        assert_eq!(lin.terms.get(&Var::new("i")), Some(&2));
        assert_eq!(lin.constant, -3);
        let cancel = (Expr::var("x") - Expr::var("x")).linear().unwrap();
        assert!(cancel.is_constant());
    }

    #[test]
    fn negation_is_pushed_into_relations() {
        let c = !Cond::rel(RelOp::Le, Expr::var("l"), Expr::Int(0));
        assert_eq!(
            c.normalize(),
            Atom::Rel(RelOp::Gt, Expr::var("l"), Expr::Int(0))
        );
        let b = !!Cond::BoolVar(Var::new("b"));
        assert_eq!(b.normalize(), Atom::Bool(Var::new("b"), true));
    }
}
