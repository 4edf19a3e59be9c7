//! Control-flow graphs. Nodes are program points; edges carry one atomic
//! action, a guard, or nothing. `for` loops are rewritten to `while` first.

use std::collections::BTreeSet;
use std::fmt;

use super::ast::{Cond, Expr, Pos, Program, RelOp, Rhs, Stmt, StmtKind, Var};

pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Assign(Var, Expr),
    BoolAssign(Var, Cond),
    BoolConst(Var, bool),
    Alloc(Var, Expr),
    Store {
        array: Var,
        index: Expr,
        value: Expr,
    },
    Assert(Cond),
}

impl Action {
    /// The variable whose value this action changes, if any.
    pub fn assigned(&self) -> Option<&Var> {
        match self {
            Action::Assign(v, _)
            | Action::BoolAssign(v, _)
            | Action::BoolConst(v, _)
            | Action::Alloc(v, _) => Some(v),
            Action::Store { .. } | Action::Assert(_) => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Assign(v, e) => write!(f, "{v} := {e}"),
            Action::BoolAssign(v, c) => write!(f, "{v} := ({c})"),
            Action::BoolConst(v, b) => write!(f, "{v} := {b}"),
            Action::Alloc(v, e) => write!(f, "{v} := new Int[{e}]"),
            Action::Store {
                array,
                index,
                value,
            } => write!(f, "{array}[{index}] := {value}"),
            Action::Assert(c) => write!(f, "assert ({c})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Label {
    Skip,
    Action(Action, Pos),
    Guard(Cond),
}

impl Label {
    fn without_position(&self) -> Label {
        match self {
            Label::Action(a, _) => Label::Action(a.clone(), Pos::default()),
            other => other.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub label: Label,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ObligationKind {
    Lower,
    Upper,
    Assert,
}

impl ObligationKind {
    pub fn name(self) -> &'static str {
        match self {
            ObligationKind::Lower => "lower",
            ObligationKind::Upper => "upper",
            ObligationKind::Assert => "assert",
        }
    }
}

/// A condition that must hold whenever control reaches `node`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    pub node: NodeId,
    pub pos: Pos,
    pub kind: ObligationKind,
    pub cond: Cond,
}

/// Node count, position-free edges, entry, exit and loop heads.
pub type CfgShape = (
    usize,
    Vec<(NodeId, NodeId, Label)>,
    NodeId,
    NodeId,
    BTreeSet<NodeId>,
);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    pub node_count: usize,
    pub edges: Vec<Edge>,
    pub entry: NodeId,
    pub exit: NodeId,
    pub loop_heads: BTreeSet<NodeId>,
    /// For each node, the position of the statement that leads into it, if any.
    pub origin: Vec<Option<Pos>>,
}

/// Rewrites `for (v := a; c; w := b) body` into `v := a; while (c) { body; w := b; }`.
pub fn desugar(p: &Program) -> Program {
    Program {
        decls: p.decls.clone(),
        body: desugar_block(&p.body),
    }
}

fn desugar_block(block: &[Stmt]) -> Vec<Stmt> {
    let mut out = Vec::new();
    for s in block {
        let pos = s.pos;
        match &s.kind {
            StmtKind::For {
                var,
                init,
                cond,
                step_var,
                step,
                body,
            } => {
                out.push(Stmt {
                    kind: StmtKind::Assign(var.clone(), Rhs::Expr(init.clone())),
                    pos,
                });
                let mut body = desugar_block(body);
                body.push(Stmt {
                    kind: StmtKind::Assign(step_var.clone(), Rhs::Expr(step.clone())),
                    pos,
                });
                out.push(Stmt {
                    kind: StmtKind::While {
                        cond: cond.clone(),
                        body,
                    },
                    pos,
                });
            }
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => out.push(Stmt {
                kind: StmtKind::If {
                    cond: cond.clone(),
                    then_block: desugar_block(then_block),
                    else_block: else_block.as_deref().map(desugar_block),
                },
                pos,
            }),
            StmtKind::While { cond, body } => out.push(Stmt {
                kind: StmtKind::While {
                    cond: cond.clone(),
                    body: desugar_block(body),
                },
                pos,
            }),
            _ => out.push(s.clone()),
        }
    }
    out
}

struct Builder {
    cfg: Cfg,
}

impl Builder {
    fn node(&mut self, origin: Option<Pos>) -> NodeId {
        self.cfg.node_count += 1;
        self.cfg.origin.push(origin);
        self.cfg.node_count - 1
    }

    fn edge(&mut self, from: NodeId, to: NodeId, label: Label) {
        self.cfg.edges.push(Edge { from, to, label });
    }

    fn block(&mut self, block: &[Stmt], mut cur: NodeId) -> NodeId {
        for s in block {
            cur = self.stmt(s, cur);
        }
        cur
    }

    fn action(&mut self, cur: NodeId, a: Action, pos: Pos) -> NodeId {
        let n = self.node(Some(pos));
        self.edge(cur, n, Label::Action(a, pos));
        n
    }

    fn stmt(&mut self, s: &Stmt, cur: NodeId) -> NodeId {
        let pos = s.pos;
        match &s.kind {
            StmtKind::Assign(v, rhs) => {
                let a = match rhs {
                    Rhs::Expr(e) => Action::Assign(v.clone(), e.clone()),
                    Rhs::Cond(c) => Action::BoolAssign(v.clone(), c.clone()),
                    Rhs::Bool(b) => Action::BoolConst(v.clone(), *b),
                    Rhs::NewArray(e) => Action::Alloc(v.clone(), e.clone()),
                };
                self.action(cur, a, pos)
            }
            StmtKind::Store {
                array,
                index,
                value,
            } => {
                let a = Action::Store {
                    array: array.clone(),
                    index: index.clone(),
                    value: value.clone(),
                };
                self.action(cur, a, pos)
            }
            StmtKind::Assert(c) => self.action(cur, Action::Assert(c.clone()), pos),
            StmtKind::If {
                cond,
                then_block,
                else_block,
            } => {
                let t = self.node(None);
                let e = self.node(None);
                self.edge(cur, t, Label::Guard(cond.clone()));
                self.edge(cur, e, Label::Guard(!cond.clone()));
                let t_end = self.block(then_block, t);
                let e_end = self.block(else_block.as_deref().unwrap_or(&[]), e);
                let join = self.node(Some(pos));
                self.edge(t_end, join, Label::Skip);
                self.edge(e_end, join, Label::Skip);
                join
            }
            StmtKind::While { cond, body } => {
                let head = self.node(Some(pos));
                self.cfg.loop_heads.insert(head);
                self.edge(cur, head, Label::Skip);
                let b = self.node(None);
                let out = self.node(Some(pos));
                self.edge(head, b, Label::Guard(cond.clone()));
                self.edge(head, out, Label::Guard(!cond.clone()));
                let b_end = self.block(body, b);
                self.edge(b_end, head, Label::Skip);
                out
            }
            StmtKind::For { .. } => unreachable!("for loops are desugared before building"),
        }
    }
}

impl Cfg {
    pub fn build(p: &Program) -> Cfg {
        let p = desugar(p);
        let mut b = Builder {
            cfg: Cfg {
                node_count: 0,
                edges: Vec::new(),
                entry: 0,
                exit: 0,
                loop_heads: BTreeSet::new(),
                origin: Vec::new(),
            },
        };
        let entry = b.node(None);
        let exit = b.block(&p.body, entry);
        b.cfg.entry = entry;
        b.cfg.exit = exit;
        b.cfg
    }

    pub fn successors(&self, n: NodeId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.from == n)
    }

    pub fn predecessors(&self, n: NodeId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.to == n)
    }

    /// Nodes in reverse post-order of a depth-first walk from the entry,
    /// successors taken in edge order. Unreachable nodes come last.
    pub fn reverse_post_order(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.node_count];
        let mut post = Vec::with_capacity(self.node_count);
        // Iterative DFS: (node, next successor index).
        let succ: Vec<Vec<NodeId>> = (0..self.node_count)
            .map(|n| self.successors(n).map(|e| e.to).collect())
            .collect();
        let mut stack = vec![(self.entry, 0usize)];
        seen[self.entry] = true;
        while let Some((n, i)) = stack.pop() {
            if i < succ[n].len() {
                stack.push((n, i + 1));
                let m = succ[n][i];
                if !seen[m] {
                    seen[m] = true;
                    stack.push((m, 0));
                }
            } else {
                post.push(n);
            }
        }
        post.reverse();
        post.extend((0..self.node_count).filter(|n| !seen[*n]));
        post
    }

    /// Bounds obligations for every store and one obligation per assertion,
    /// attached to the node before the statement.
    pub fn obligations(&self) -> Vec<Obligation> {
        let mut out = Vec::new();
        for e in &self.edges {
            let Label::Action(a, pos) = &e.label else {
                continue;
            };
            match a {
                Action::Store { array, index, .. } => {
                    out.push(Obligation {
                        node: e.from,
                        pos: *pos,
                        kind: ObligationKind::Lower,
                        cond: Cond::rel(RelOp::Ge, index.clone(), Expr::Int(0)),
                    });
                    out.push(Obligation {
                        node: e.from,
                        pos: *pos,
                        kind: ObligationKind::Upper,
                        cond: Cond::rel(RelOp::Lt, index.clone(), Expr::Var(Var::length_of(array))),
                    });
                }
                Action::Assert(c) => out.push(Obligation {
                    node: e.from,
                    pos: *pos,
                    kind: ObligationKind::Assert,
                    cond: c.clone(),
                }),
                _ => {}
            }
        }
        out
    }

    /// The node reached right after the last action written on `line`.
    pub fn node_after_line(&self, line: u32) -> Option<NodeId> {
        self.edges
            .iter()
            .filter_map(|e| match &e.label {
                Label::Action(_, pos) if pos.line == line => Some((*pos, e.to)),
                _ => None,
            })
            .max()
            .map(|(_, n)| n)
    }

    /// The loop head of the loop written on `line`.
    pub fn loop_head_at_line(&self, line: u32) -> Option<NodeId> {
        self.loop_heads
            .iter()
            .copied()
            .find(|n| self.origin[*n].is_some_and(|p| p.line == line))
    }

    /// The graph with positions erased, for structural comparison.
    pub fn shape(&self) -> CfgShape {
        let edges = self
            .edges
            .iter()
            .map(|e| (e.from, e.to, e.label.without_position()))
            .collect();
        (
            self.node_count,
            edges,
            self.entry,
            self.exit,
            self.loop_heads.clone(),
        )
    }

    pub fn node_name(&self, n: NodeId) -> String {
        let mut s = format!("n{n}");
        if n == self.entry {
            s.push_str(" entry");
        }
        if n == self.exit {
            s.push_str(" exit");
        }
        if self.loop_heads.contains(&n) {
            s.push_str(" loop");
        }
        if let Some(p) = self.origin[n] {
            s.push_str(&format!(" @{p}"));
        }
        s
    }
}

pub fn build_cfg(p: &Program) -> Cfg {
    Cfg::build(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    #[test]
    fn straight_line_is_a_chain() {
        let cfg = Cfg::build(&parse("x := 1; y := x + 1; z := y;").unwrap());
        assert!(cfg.loop_heads.is_empty());
        assert_eq!(cfg.edges.len(), 3);
        assert!(cfg
            .edges
            .iter()
            .enumerate()
            .all(|(i, e)| e.from == i && e.to == i + 1));
        assert_eq!(cfg.exit, 3);
    }

    #[test]
    fn for_matches_hand_written_while() {
        let f = parse("input n in [0, 3]; s := 0; for (i := 0; i < n; i := i + 1) s := s + i;")
            .unwrap();
        let w =
            parse("input n in [0, 3]; s := 0; i := 0; while (i < n) { s := s + i; i := i + 1; }")
                .unwrap();
        assert_eq!(Cfg::build(&f).shape(), Cfg::build(&w).shape());
    }

    #[test]
    fn branches_carry_complementary_guards() {
        let cfg =
            Cfg::build(&parse("input l in [0, 1]; if (l <= 0) x := 1; else x := 2;").unwrap());
        let guards: Vec<&Cond> = cfg
            .successors(cfg.entry)
            .filter_map(|e| match &e.label {
                Label::Guard(c) => Some(c),
                _ => None,
            })
            .collect();
        assert_eq!(guards.len(), 2);
        assert_eq!(guards[0].normalize().negate(), guards[1].normalize());
    }

    #[test]
    fn stores_yield_two_obligations() {
        let cfg = Cfg::build(&parse("a := new Int[3]; a[1] := 0; assert (1 < 2);").unwrap());
        let kinds: Vec<ObligationKind> = cfg.obligations().iter().map(|o| o.kind).collect();
        assert_eq!(
            kinds,
            vec![
                ObligationKind::Lower,
                ObligationKind::Upper,
                ObligationKind::Assert
            ]
        );
    }

    #[test]
    fn rpo_puts_loop_head_before_body() {
        let cfg = Cfg::build(&parse("i := 0; while (i < 3) i := i + 1; j := i;").unwrap());
        let rpo = cfg.reverse_post_order();
        assert_eq!(rpo[0], cfg.entry);
        let head = *cfg.loop_heads.iter().next().unwrap();
        let pos = |n| rpo.iter().position(|m| *m == n).unwrap();
        let body = cfg.successors(head).next().unwrap().to;
        assert!(pos(head) < pos(body));
        assert_eq!(rpo.len(), cfg.node_count);
    }
}
