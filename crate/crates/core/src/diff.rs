//! Conjunctions of strict difference constraints `x < y + c` over integers.
//!
//! On integers `x < y + c` is `x - y <= c - 1`, so closure is shortest paths
//! over weights `c - 1` and chaining `x < y + c1`, `y < z + c2` gives
//! `x < z + (c1 + c2 - 1)`. A cycle with negative total weight is infeasible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::frontend::ast::{Atom, Expr, RelOp, Var};
use crate::lattice::{Domain, DomainDescriptor, FiniteUniverse, Lattice};

/// `None` is bottom. Keys are ordered pairs `(x, y)` mapped to the tightest `c`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DiffStore {
    cons: Option<BTreeMap<(Var, Var), i64>>,
}

impl DiffStore {
    pub fn new() -> Self {
        DiffStore {
            cons: Some(BTreeMap::new()),
        }
    }

    pub fn from_constraints<'a>(cs: impl IntoIterator<Item = (&'a str, &'a str, i64)>) -> Self {
        let mut s = DiffStore::new();
        for (x, y, c) in cs {
            s.insert(Var::new(x), Var::new(y), c);
        }
        s.close()
    }

    /// Number of stored constraints; zero for bottom.
    pub fn len(&self) -> usize {
        self.cons.as_ref().map_or(0, BTreeMap::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn constraints(&self) -> impl Iterator<Item = (&Var, &Var, i64)> {
        self.cons
            .iter()
            .flat_map(|m| m.iter().map(|((x, y), c)| (x, y, *c)))
    }

    pub fn get(&self, x: &Var, y: &Var) -> Option<i64> {
        self.cons.as_ref()?.get(&(x.clone(), y.clone())).copied()
    }

    fn insert(&mut self, x: Var, y: Var, c: i64) {
        let Some(m) = &mut self.cons else { return };
        if x == y {
            if c <= 0 {
                self.cons = None;
            }
            return;
        }
        m.entry((x, y))
            .and_modify(|old| *old = (*old).min(c))
            .or_insert(c);
    }

    /// Adds every given constraint, then re-closes once.
    pub fn add_all<'a>(&self, cs: impl IntoIterator<Item = (&'a Var, &'a Var, i64)>) -> Self {
        let mut s = self.clone();
        for (x, y, c) in cs {
            s.insert(x.clone(), y.clone(), c);
        }
        s.close()
    }

    /// Adds `x < y + c` and re-closes.
    pub fn add(&self, x: &Var, y: &Var, c: i64) -> Self {
        let mut s = self.clone();
        s.insert(x.clone(), y.clone(), c);
        s.close()
    }

    /// Shortest-path closure; bottom on an infeasible cycle.
    pub fn close(&self) -> Self {
        let Some(m) = &self.cons else {
            return self.clone();
        };
        let vars: Vec<Var> = m
            .keys()
            .flat_map(|(x, y)| [x.clone(), y.clone()])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let idx: BTreeMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let n = vars.len();
        let mut w: Vec<Vec<Option<i64>>> = vec![vec![None; n]; n];
        for ((x, y), c) in m {
            w[idx[x]][idx[y]] = c.checked_sub(1);
        }
        for k in 0..n {
            let via = w[k].clone();
            for row in w.iter_mut() {
                let Some(ik) = row[k] else { continue };
                for (cell, kj) in row.iter_mut().zip(&via) {
                    let Some(kj) = kj else { continue };
                    // An overflowing path is weaker than anything representable; skip it.
                    let Some(p) = ik.checked_add(*kj) else {
                        continue;
                    };
                    if cell.is_none_or(|cur| p < cur) {
                        *cell = Some(p);
                    }
                }
            }
        }
        let mut out = BTreeMap::new();
        for i in 0..n {
            if w[i][i].is_some_and(|d| d < 0) {
                return DiffStore::bottom();
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                if let Some(c) = w[i][j].and_then(|d| d.checked_add(1)) {
                    out.insert((vars[i].clone(), vars[j].clone()), c);
                }
            }
        }
        DiffStore { cons: Some(out) }
    }

    /// Whether every store satisfying `self` satisfies `x < y + k`.
    pub fn entails(&self, x: &Var, y: &Var, k: i64) -> bool {
        let closed = self.close();
        if closed.cons.is_none() {
            return true;
        }
        if x == y {
            return k > 0;
        }
        closed.get(x, y).is_some_and(|c| c <= k)
    }

    /// Drops every constraint that mentions `v`, keeping consequences through other variables.
    pub fn forget(&self, v: &Var) -> Self {
        let mut s = self.close();
        if let Some(m) = &mut s.cons {
            m.retain(|(x, y), _| x != v && y != v);
        }
        s
    }

    /// Keeps only constraints over variables accepted by `keep`.
    pub fn project(&self, keep: impl Fn(&Var) -> bool) -> Self {
        let mut s = self.close();
        if let Some(m) = &mut s.cons {
            m.retain(|(x, y), _| keep(x) && keep(y));
        }
        s
    }

    /// Checks a concrete store. Constraints on unbound variables are not checked.
    pub fn satisfied_by(&self, value: impl Fn(&Var) -> Option<i64>) -> bool {
        let Some(m) = &self.cons else { return false };
        m.iter().all(|((x, y), c)| match (value(x), value(y)) {
            (Some(a), Some(b)) => (a as i128) < b as i128 + *c as i128,
            _ => true,
        })
    }

    /// Enumerated concretization over `vars`, each ranging over `u`.
    pub fn gamma_enum(&self, vars: &[Var], u: &FiniteUniverse) -> BTreeSet<Vec<i64>> {
        let mut out = BTreeSet::new();
        if self.cons.is_none() {
            return out;
        }
        let mut tuple = vec![u.lo(); vars.len()];
        loop {
            let ok = self.satisfied_by(|v| vars.iter().position(|w| w == v).map(|i| tuple[i]));
            if ok {
                out.insert(tuple.clone());
            }
            let mut i = 0;
            loop {
                if i == tuple.len() {
                    return out;
                }
                if tuple[i] < u.hi() {
                    tuple[i] += 1;
                    break;
                }
                tuple[i] = u.lo();
                i += 1;
            }
        }
    }
}

impl Default for DiffStore {
    fn default() -> Self {
        DiffStore::new()
    }
}

impl Lattice for DiffStore {
    fn bottom() -> Self {
        DiffStore { cons: None }
    }

    fn top() -> Self {
        DiffStore::new()
    }

    fn leq(&self, other: &Self) -> bool {
        if self.close().cons.is_none() {
            return true;
        }
        match &other.cons {
            None => false,
            Some(m) => m.iter().all(|((x, y), c)| self.entails(x, y, *c)),
        }
    }

    fn join(&self, other: &Self) -> Self {
        let (a, b) = (self.close(), other.close());
        match (&a.cons, &b.cons) {
            (None, _) => b,
            (_, None) => a,
            (Some(ma), Some(mb)) => DiffStore {
                cons: Some(
                    ma.iter()
                        .filter_map(|(k, c)| mb.get(k).map(|d| (k.clone(), (*c).max(*d))))
                        .collect(),
                ),
            },
        }
    }

    fn meet(&self, other: &Self) -> Self {
        let mut s = self.clone();
        if s.cons.is_none() || other.cons.is_none() {
            return DiffStore::bottom();
        }
        for (x, y, c) in other.constraints() {
            s.insert(x.clone(), y.clone(), c);
        }
        s.close()
    }

    /// Keeps the constraints of `self` still entailed by `newer`. The result is
    /// deliberately left unclosed: closing could re-derive dropped constraints.
    fn widen(&self, newer: &Self) -> Self {
        match (&self.cons, &newer.close().cons) {
            (None, _) => newer.clone(),
            (_, None) => self.clone(),
            (Some(m), Some(_)) => DiffStore {
                cons: Some(
                    m.iter()
                        .filter(|((x, y), c)| newer.entails(x, y, **c))
                        .map(|(k, c)| (k.clone(), *c))
                        .collect(),
                ),
            },
        }
    }

    fn is_bottom(&self) -> bool {
        self.close().cons.is_none()
    }

    fn is_top(&self) -> bool {
        self.cons.as_ref().is_some_and(BTreeMap::is_empty)
    }
}

impl Domain for DiffStore {
    fn descriptor() -> DomainDescriptor {
        DomainDescriptor {
            name: "diff",
            has_finite_height: false,
            widening_is_join: false,
        }
    }
}

impl fmt::Display for DiffStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(m) = &self.cons else {
            return f.write_str("bot");
        };
        let mut items: Vec<String> = m
            .iter()
            .map(|((x, y), c)| {
                if *c < 0 {
                    format!("{x} < {y} - {}", c.unsigned_abs())
                } else {
                    format!("{x} < {y} + {c}")
                }
            })
            .collect();
        items.sort();
        write!(f, "{{{}}}", items.join(", "))
    }
}

impl fmt::Debug for DiffStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn diff_close(s: &DiffStore) -> DiffStore {
    s.close()
}

pub fn diff_join(a: &DiffStore, b: &DiffStore) -> DiffStore {
    a.join(b)
}

/// Adds the constraints expressed by a guard of the form `x - y + c op 0`.
/// Any other guard is ignored.
pub fn diff_assume(atom: &Atom, s: &DiffStore) -> DiffStore {
    let Some((op, lin)) = atom.linear() else {
        return s.clone();
    };
    if lin.terms.len() != 2 {
        return s.clone();
    }
    let mut it = lin.terms.iter();
    let (Some((v1, c1)), Some((v2, c2))) = (it.next(), it.next()) else {
        return s.clone();
    };
    let (x, y) = match (c1, c2) {
        (1, -1) => (v1, v2),
        (-1, 1) => (v2, v1),
        _ => return s.clone(),
    };
    let c = lin.constant;
    let neg = c.checked_neg();
    let inc = |k: Option<i64>| k.and_then(|k| k.checked_add(1));
    // x - y + c op 0
    let facts: Vec<(&Var, &Var, Option<i64>)> = match op {
        RelOp::Lt => vec![(x, y, neg)],
        RelOp::Le => vec![(x, y, inc(neg))],
        RelOp::Gt => vec![(y, x, Some(c))],
        RelOp::Ge => vec![(y, x, inc(Some(c)))],
        RelOp::Eq => vec![(x, y, inc(neg)), (y, x, inc(Some(c)))],
        RelOp::Ne => vec![],
    };
    let mut out = s.clone();
    for (a, b, k) in facts {
        if let Some(k) = k {
            out.insert(a.clone(), b.clone(), k);
        }
    }
    out.close()
}

/// Transfer for `x := e`.
pub fn diff_assign(x: &Var, e: &Expr, s: &DiffStore) -> DiffStore {
    if s.is_bottom() {
        return DiffStore::bottom();
    }
    let Some(lin) = e.linear() else {
        return s.forget(x);
    };
    match lin.as_var_offset() {
        Some((y, k)) if y == x => {
            // x' = x + k: shift every constraint touching x.
            let closed = s.close();
            let mut out = DiffStore::new();
            for (a, b, c) in closed.constraints() {
                let shifted = if a == x {
                    c.checked_add(k)
                } else if b == x {
                    c.checked_sub(k)
                } else {
                    Some(c)
                };
                if let Some(c) = shifted {
                    out.insert(a.clone(), b.clone(), c);
                }
            }
            out
        }
        Some((y, k)) => {
            let mut out = s.forget(x);
            if let (Some(up), Some(down)) = (k.checked_add(1), 1i64.checked_sub(k)) {
                out.insert(x.clone(), y.clone(), up);
                out.insert(y.clone(), x.clone(), down);
            }
            out.close()
        }
        None => s.forget(x),
    }
}

pub fn diff_entails(s: &DiffStore, x: &Var, y: &Var, k: i64) -> bool {
    s.entails(x, y, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::ast::Cond;

    fn v(n: &str) -> Var {
        Var::new(n)
    }

    fn lt(a: &str, b: &str) -> Atom {
        Cond::rel(RelOp::Lt, Expr::var(a), Expr::var(b)).normalize()
    }

    #[test]
    fn chaining_subtracts_one() {
        let s = DiffStore::from_constraints([("i", "l", 0), ("l", "len", 1)]);
        assert_eq!(s.get(&v("i"), &v("len")), Some(0));
        assert!(s.entails(&v("i"), &v("len"), 0));
        let s = DiffStore::from_constraints([("i", "l", 0), ("l", "len", 2)]);
        assert_eq!(s.get(&v("i"), &v("len")), Some(1));
        assert!(!s.entails(&v("i"), &v("len"), 0));
    }

    #[test]
    fn infeasible_cycle_is_bottom() {
        assert!(DiffStore::from_constraints([("i", "l", 0), ("l", "i", 0)]).is_bottom());
        assert!(!DiffStore::from_constraints([("i", "l", 1), ("l", "i", 1)]).is_bottom());
    }

    #[test]
    fn join_keeps_common_pairs_at_max() {
        let a = DiffStore::from_constraints([("l", "len", 2)]);
        let b = DiffStore::from_constraints([("l", "len", 1), ("len", "l", 1)]);
        assert_eq!(a.join(&b), DiffStore::from_constraints([("l", "len", 2)]));
        assert_eq!(a.join(&DiffStore::bottom()), a);
        let x = DiffStore::from_constraints([("x", "y", 0)]);
        let y = DiffStore::from_constraints([("y", "x", 0)]);
        assert!(x.join(&y).is_top());
    }

    #[test]
    fn guards() {
        let s = diff_assume(&lt("i", "l"), &DiffStore::new());
        assert_eq!(s, DiffStore::from_constraints([("i", "l", 0)]));
        let s = diff_assume(&lt("len", "l").negate(), &DiffStore::new());
        assert_eq!(s, DiffStore::from_constraints([("l", "len", 1)]));
        let s = DiffStore::from_constraints([("l", "i", 0)]);
        assert!(diff_assume(&lt("i", "l"), &s).is_bottom());
        let k = Cond::rel(RelOp::Lt, Expr::var("i"), Expr::Int(3)).normalize();
        assert_eq!(diff_assume(&k, &s), s);
    }

    #[test]
    fn assignments() {
        let s = DiffStore::from_constraints([("i", "l", 0)]);
        let inc = Expr::var("i") + Expr::Int(1);
        assert_eq!(
            diff_assign(&v("i"), &inc, &s),
            DiffStore::from_constraints([("i", "l", 1)])
        );
        let copy = diff_assign(&v("len"), &Expr::var("l"), &DiffStore::new());
        assert_eq!(
            copy,
            DiffStore::from_constraints([("len", "l", 1), ("l", "len", 1)])
        );
        let s = DiffStore::from_constraints([("x", "y", 0)]);
        assert!(diff_assign(&v("x"), &Expr::Int(5), &s).is_top());
    }

    #[test]
    fn widening_drops_unstable_constraints() {
        let a = DiffStore::from_constraints([("i", "n", 0), ("j", "n", 3)]);
        let b = DiffStore::from_constraints([("i", "n", 1), ("j", "n", 2)]);
        assert_eq!(a.widen(&b), DiffStore::from_constraints([("j", "n", 3)]));
    }

    #[test]
    fn bottom_entails_everything() {
        assert!(DiffStore::bottom().entails(&v("a"), &v("b"), -100));
    }

    #[test]
    fn rendering_is_sorted() {
        let s = DiffStore::from_constraints([("l", "len", 1), ("len", "l", 1)]);
        assert_eq!(s.to_string(), "{l < len + 1, len < l + 1}");
    }
}
