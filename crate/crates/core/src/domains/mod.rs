//! Non-relational value domains and the per-variable environments built on them.
//!
//! Expressions are evaluated through their linear form, so every domain only
//! needs constants, addition and scaling. Guards `L op 0` refine each variable
//! with a unit coefficient against the evaluation of the remaining terms.

mod boolean;
mod congruence;
mod interval;
mod parity;
mod sign;

use std::collections::BTreeMap;
use std::fmt;

pub use boolean::BoolAbs;
pub use congruence::{gcd, lcm, CongruenceMod};
pub use interval::Interval;
pub use parity::Parity;
pub use sign::Sign;

use crate::error::{Error, Result};
use crate::frontend::ast::{Atom, Cond, Expr, Linear, RelOp, Var};
use crate::lattice::Lattice;

/// Arithmetic and guard refinement for a numeric domain.
pub trait ValueDomain: Lattice + Copy {
    fn constant(k: i64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, k: i64) -> Self;

    fn add_const(&self, k: i64) -> Self {
        self.add(&Self::constant(k))
    }

    /// Over-approximates `{x in self | exists y in other. x op y}`.
    fn refine(&self, op: RelOp, other: &Self) -> Self;
}

/// A map from variables to abstract values, or bottom when unreachable.
///
/// A variable that is bound to bottom makes the whole environment bottom.
/// Lattice operations read a missing variable as top.
#[derive(Clone, PartialEq, Eq)]
pub struct Env<D> {
    vars: Option<BTreeMap<Var, D>>,
}

impl<D: Lattice> Env<D> {
    pub fn new() -> Self {
        Env {
            vars: Some(BTreeMap::new()),
        }
    }

    pub fn from_bindings(bindings: impl IntoIterator<Item = (Var, D)>) -> Self {
        let mut env = Env::new();
        for (v, d) in bindings {
            env.set(v, d);
        }
        env
    }

    pub fn get(&self, v: &Var) -> Option<&D> {
        self.vars.as_ref()?.get(v)
    }

    /// The value of `v`; bottom when the environment is bottom.
    pub fn value(&self, v: &Var) -> Result<D> {
        match &self.vars {
            None => Ok(D::bottom()),
            Some(m) => m
                .get(v)
                .cloned()
                .ok_or_else(|| Error::Unbound(v.to_string())),
        }
    }

    pub fn set(&mut self, v: Var, d: D) {
        if d.is_bottom() {
            self.vars = None;
        } else if let Some(m) = &mut self.vars {
            m.insert(v, d);
        }
    }

    pub fn with(mut self, v: Var, d: D) -> Self {
        self.set(v, d);
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &D)> {
        self.vars.iter().flat_map(|m| m.iter())
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.iter().map(|(v, _)| v)
    }

    fn pointwise(&self, other: &Self, keep_missing: bool, f: impl Fn(&D, &D) -> D) -> Self {
        let (Some(a), Some(b)) = (&self.vars, &other.vars) else {
            unreachable!()
        };
        let mut out = Env::new();
        for (v, x) in a {
            match b.get(v) {
                Some(y) => out.set(v.clone(), f(x, y)),
                None if keep_missing => out.set(v.clone(), x.clone()),
                None => {}
            }
        }
        if keep_missing {
            for (v, y) in b {
                if !a.contains_key(v) {
                    out.set(v.clone(), y.clone());
                }
            }
        }
        out
    }
}

impl<D: Lattice> Default for Env<D> {
    fn default() -> Self {
        Env::new()
    }
}

impl<D: Lattice> Lattice for Env<D> {
    fn bottom() -> Self {
        Env { vars: None }
    }

    fn top() -> Self {
        Env::new()
    }

    fn leq(&self, other: &Self) -> bool {
        match (&self.vars, &other.vars) {
            (None, _) => true,
            (_, None) => false,
            (Some(a), Some(b)) => b.iter().all(|(v, y)| a.get(v).unwrap_or(&D::top()).leq(y)),
        }
    }

    fn join(&self, other: &Self) -> Self {
        match (&self.vars, &other.vars) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            _ => self.pointwise(other, false, D::join),
        }
    }

    fn meet(&self, other: &Self) -> Self {
        if self.vars.is_none() || other.vars.is_none() {
            return Env::bottom();
        }
        self.pointwise(other, true, D::meet)
    }

    fn widen(&self, newer: &Self) -> Self {
        match (&self.vars, &newer.vars) {
            (None, _) => newer.clone(),
            (_, None) => self.clone(),
            _ => self.pointwise(newer, false, D::widen),
        }
    }

    fn is_bottom(&self) -> bool {
        self.vars.is_none()
    }

    // Missing variables read as top, so the canonical top is "no non-top binding".
    fn is_top(&self) -> bool {
        self.iter().all(|(_, d)| d.is_top()) && self.vars.is_some()
    }
}

impl<D: fmt::Display> fmt::Display for Env<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(m) = &self.vars else {
            return f.write_str("bot");
        };
        f.write_str("{")?;
        for (i, (v, d)) in m.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}: {d}")?;
        }
        f.write_str("}")
    }
}

impl<D: fmt::Debug> fmt::Debug for Env<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.vars {
            None => f.write_str("bot"),
            Some(m) => f.debug_map().entries(m.iter()).finish(),
        }
    }
}

fn eval_linear<D: ValueDomain>(
    lin: &Linear,
    env: &Env<D>,
    skip: Option<&Var>,
    negate: bool,
) -> Result<D> {
    let sign = if negate { -1 } else { 1 };
    let mut acc: Option<D> = None;
    for (v, c) in &lin.terms {
        if Some(v) == skip {
            continue;
        }
        let Some(coef) = c.checked_mul(sign) else {
            return Ok(D::top());
        };
        let term = env.value(v)?.scale(coef);
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term),
        });
    }
    let Some(k) = lin.constant.checked_mul(sign) else {
        return Ok(D::top());
    };
    Ok(match acc {
        None => D::constant(k),
        Some(a) if k == 0 => a,
        Some(a) => a.add_const(k),
    })
}

/// Abstract value of an integer expression.
pub fn eval<D: ValueDomain>(e: &Expr, env: &Env<D>) -> Result<D> {
    if env.is_bottom() {
        return Ok(D::bottom());
    }
    match e.linear() {
        Some(lin) => eval_linear(&lin, env, None, false),
        None => Ok(D::top()),
    }
}

/// Refines `env` by a negation-free condition. Boolean atoms leave numeric
/// environments unchanged.
pub fn assume<D: ValueDomain>(atom: &Atom, env: &Env<D>) -> Result<Env<D>> {
    if env.is_bottom() {
        return Ok(Env::bottom());
    }
    let Some((op, lin)) = atom.linear() else {
        return Ok(env.clone());
    };
    // Feasibility of `L op 0` as a whole.
    let whole = eval_linear(&lin, env, None, false)?;
    if whole.refine(op, &D::constant(0)).is_bottom() {
        return Ok(Env::bottom());
    }
    let mut out = env.clone();
    for (v, c) in &lin.terms {
        let (rel, rhs) = match c {
            // x + R op 0  <=>  x op -R
            1 => (op, eval_linear(&lin, &out, Some(v), true)?),
            // -x + R op 0  <=>  x flip(op) R
            -1 => (op.flip(), eval_linear(&lin, &out, Some(v), false)?),
            _ => continue,
        };
        let refined = out.value(v)?.refine(rel, &rhs);
        out.set(v.clone(), refined);
        if out.is_bottom() {
            break;
        }
    }
    Ok(out)
}

pub fn assume_cond<D: ValueDomain>(c: &Cond, env: &Env<D>) -> Result<Env<D>> {
    assume(&c.normalize(), env)
}

/// Whether the condition is definitely true, definitely false, or unknown under `env`.
pub fn bool_eval_cond<D: ValueDomain>(c: &Cond, env: &Env<D>) -> Result<BoolAbs> {
    if env.is_bottom() {
        return Ok(BoolAbs::Bottom);
    }
    let atom = c.normalize();
    let may_hold = !assume(&atom, env)?.is_bottom();
    let may_fail = !assume(&atom.negate(), env)?.is_bottom();
    Ok(match (may_hold, may_fail) {
        (true, true) => BoolAbs::Top,
        (true, false) => BoolAbs::True,
        (false, true) => BoolAbs::False,
        (false, false) => BoolAbs::Bottom,
    })
}

/// Refines a boolean environment by a boolean-variable atom. Relations are ignored.
pub fn bool_assume(atom: &Atom, env: &Env<BoolAbs>) -> Env<BoolAbs> {
    match atom {
        Atom::Bool(v, polarity) => {
            let cur = env.get(v).copied().unwrap_or(BoolAbs::Top);
            env.clone()
                .with(v.clone(), cur.meet(&BoolAbs::of(*polarity)))
        }
        Atom::Rel(..) => env.clone(),
    }
}

pub fn interval_eval(e: &Expr, env: &Env<Interval>) -> Result<Interval> {
    eval(e, env)
}

pub fn interval_assume(c: &Cond, env: &Env<Interval>) -> Result<Env<Interval>> {
    assume_cond(c, env)
}

pub fn parity_eval(e: &Expr, env: &Env<Parity>) -> Result<Parity> {
    eval(e, env)
}

pub fn sign_eval(e: &Expr, env: &Env<Sign>) -> Result<Sign> {
    eval(e, env)
}

pub fn sign_assume(c: &Cond, env: &Env<Sign>) -> Result<Env<Sign>> {
    assume_cond(c, env)
}

pub fn congruence_eval(e: &Expr, env: &Env<CongruenceMod>) -> Result<CongruenceMod> {
    eval(e, env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::ast::Expr;

    fn v(name: &str) -> Var {
        Var::new(name)
    }

    fn gt0(x: &str) -> Cond {
        Cond::rel(RelOp::Gt, Expr::var(x), Expr::Int(0))
    }

    #[test]
    fn interval_evaluation() {
        let env = Env::new().with(v("i"), Interval::singleton(0));
        assert_eq!(
            interval_eval(&(Expr::var("i") + Expr::Int(1)), &env).unwrap(),
            Interval::singleton(1)
        );
        let env = Env::new().with(v("x"), Interval::singleton(100));
        assert_eq!(
            interval_eval(&(Expr::var("x") - Expr::Int(1)), &env).unwrap(),
            Interval::singleton(99)
        );
        let env = Env::new().with(v("l"), Interval::at_most(2));
        assert_eq!(
            interval_eval(&Expr::var("l"), &env).unwrap(),
            Interval::at_most(2)
        );
    }

    #[test]
    fn unbound_variables_are_errors() {
        let env: Env<Interval> = Env::new();
        assert_eq!(
            interval_eval(&Expr::var("q"), &env),
            Err(Error::Unbound("q".into()))
        );
    }

    #[test]
    fn interval_guards() {
        let env = Env::new()
            .with(v("i"), Interval::at_least(0))
            .with(v("len"), Interval::at_least(1));
        let c = Cond::rel(RelOp::Lt, Expr::var("i"), Expr::var("len"));
        assert_eq!(interval_assume(&c, &env).unwrap(), env);

        let env = Env::new().with(v("l"), Interval::top());
        let c = Cond::rel(RelOp::Le, Expr::var("l"), Expr::Int(2));
        assert_eq!(
            interval_assume(&c, &env).unwrap().get(&v("l")),
            Some(&Interval::at_most(2))
        );

        let env = Env::new().with(v("x"), Interval::singleton(0));
        assert!(interval_assume(&gt0("x"), &env).unwrap().is_bottom());
    }

    #[test]
    fn parity_evaluation() {
        let env = Env::new().with(v("i"), Parity::Even);
        assert_eq!(
            parity_eval(&(Expr::var("i") + Expr::Int(1)), &env).unwrap(),
            Parity::Odd
        );
        assert_eq!(
            parity_eval(&Expr::Int(0), &Env::new()).unwrap(),
            Parity::Even
        );
        let env = Env::new().with(v("i"), Parity::Top);
        assert_eq!(
            parity_eval(&(Expr::var("i") + Expr::var("i")), &env).unwrap(),
            Parity::Even
        );
    }

    #[test]
    fn sign_decrement_and_guards() {
        let env = Env::new().with(v("x"), Sign::POS);
        assert_eq!(
            sign_eval(&(Expr::var("x") - Expr::Int(1)), &env).unwrap(),
            Sign::NON_NEG
        );
        let env = Env::new().with(v("x"), Sign::NON_NEG);
        assert_eq!(
            sign_assume(&gt0("x"), &env).unwrap().get(&v("x")),
            Some(&Sign::POS)
        );
        assert_eq!(
            sign_assume(&!gt0("x"), &env).unwrap().get(&v("x")),
            Some(&Sign::ZERO)
        );
    }

    #[test]
    fn congruence_evaluation() {
        assert_eq!(
            congruence_eval(&Expr::Int(4), &Env::new()).unwrap(),
            CongruenceMod::Mod(4)
        );
        let env = Env::new()
            .with(v("x"), CongruenceMod::Mod(4))
            .with(v("y"), CongruenceMod::Mod(6));
        assert_eq!(
            congruence_eval(&(Expr::var("x") + Expr::var("y")), &env).unwrap(),
            CongruenceMod::Mod(2)
        );
        let env: Env<CongruenceMod> = Env::new().with(v("x"), CongruenceMod::Bottom);
        assert_eq!(
            congruence_eval(&Expr::var("x"), &env).unwrap(),
            CongruenceMod::Bottom
        );
    }

    #[test]
    fn boolean_condition_evaluation() {
        let env = Env::new().with(v("x"), Sign::POS);
        assert_eq!(bool_eval_cond(&gt0("x"), &env).unwrap(), BoolAbs::True);
        let env = Env::new().with(v("x"), Sign::NON_NEG);
        assert_eq!(bool_eval_cond(&gt0("x"), &env).unwrap(), BoolAbs::Top);
        let env: Env<Sign> = Env::bottom();
        assert_eq!(bool_eval_cond(&gt0("x"), &env).unwrap(), BoolAbs::Bottom);
    }

    #[test]
    fn env_join_drops_one_sided_bindings() {
        let a = Env::new()
            .with(v("x"), Interval::singleton(1))
            .with(v("y"), Interval::singleton(0));
        let b = Env::new().with(v("x"), Interval::singleton(3));
        let j = a.join(&b);
        assert_eq!(j.get(&v("x")), Some(&Interval::finite(1, 3)));
        assert_eq!(j.get(&v("y")), None);
        assert!(a.leq(&j) && b.leq(&j));
    }
}
