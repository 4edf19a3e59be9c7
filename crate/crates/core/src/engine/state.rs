//! The product state tracked at every program point and its transfer functions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::config::{AnalysisConfig, ArrayMode, DomainName, Fault, ReduceMode, ReductionName};
use super::counters::{Counters, Op};
use crate::combinators::{
    diff_to_intervals, reduce_fixpoint, reduce_sequential, rho_intervals_to_diff,
    IntervalCongruence, IntervalParity, PairValue, PowerValue, ReductionRule,
};
use crate::diff::{diff_assign, diff_assume, DiffStore};
use crate::domains::{
    self, bool_assume, bool_eval_cond, BoolAbs, CongruenceMod, Env, Interval, Parity, Sign,
    ValueDomain,
};
use crate::error::Result;
use crate::frontend::ast::{Atom, Cond, Expr, RelOp, Var};
use crate::frontend::cfg::{Action, Label};
use crate::frontend::VarKind;
use crate::lattice::Lattice;

/// One configured non-relational numeric component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NumEnv {
    Interval(Env<Interval>),
    Parity(Env<Parity>),
    Sign(Env<Sign>),
    Congruence(Env<CongruenceMod>),
}

macro_rules! each_num {
    ($e:expr, $x:ident => $body:expr) => {
        match $e {
            NumEnv::Interval($x) => $body,
            NumEnv::Parity($x) => $body,
            NumEnv::Sign($x) => $body,
            NumEnv::Congruence($x) => $body,
        }
    };
}

macro_rules! map_num {
    ($e:expr, $x:ident => $body:expr) => {
        match $e {
            NumEnv::Interval($x) => NumEnv::Interval($body),
            NumEnv::Parity($x) => NumEnv::Parity($body),
            NumEnv::Sign($x) => NumEnv::Sign($body),
            NumEnv::Congruence($x) => NumEnv::Congruence($body),
        }
    };
}

macro_rules! zip_num {
    ($a:expr, $b:expr, $x:ident, $y:ident => $body:expr) => {
        match ($a, $b) {
            (NumEnv::Interval($x), NumEnv::Interval($y)) => NumEnv::Interval($body),
            (NumEnv::Parity($x), NumEnv::Parity($y)) => NumEnv::Parity($body),
            (NumEnv::Sign($x), NumEnv::Sign($y)) => NumEnv::Sign($body),
            (NumEnv::Congruence($x), NumEnv::Congruence($y)) => NumEnv::Congruence($body),
            _ => unreachable!("components are listed in the same order in every state"),
        }
    };
}

impl NumEnv {
    pub fn name(&self) -> &'static str {
        self.domain().keyword()
    }

    pub fn domain(&self) -> DomainName {
        match self {
            NumEnv::Interval(_) => DomainName::Interval,
            NumEnv::Parity(_) => DomainName::Parity,
            NumEnv::Sign(_) => DomainName::Sign,
            NumEnv::Congruence(_) => DomainName::Congruence,
        }
    }

    fn top_over(d: DomainName, vars: &[Var]) -> Option<NumEnv> {
        fn all<D: Lattice>(vars: &[Var]) -> Env<D> {
            Env::from_bindings(vars.iter().map(|v| (v.clone(), D::top())))
        }
        Some(match d {
            DomainName::Interval => NumEnv::Interval(all(vars)),
            DomainName::Parity => NumEnv::Parity(all(vars)),
            DomainName::Sign => NumEnv::Sign(all(vars)),
            DomainName::Congruence => NumEnv::Congruence(all(vars)),
            DomainName::Bool | DomainName::Diff => return None,
        })
    }

    pub fn is_bottom(&self) -> bool {
        each_num!(self, e => e.is_bottom())
    }

    fn to_bottom(&self) -> NumEnv {
        map_num!(self, _e => Env::bottom())
    }

    /// Whether the variable's value in this component admits `v`.
    /// Unbound variables are unconstrained.
    pub fn admits(&self, var: &Var, v: i64) -> bool {
        use crate::lattice::Concretize;
        each_num!(self, e => e.get(var).is_none_or(|d| d.contains(v)) && !e.is_bottom())
    }

    /// Whether assuming `atom` here yields bottom.
    fn refutes(&self, atom: &Atom) -> Result<bool> {
        Ok(each_num!(self, e => domains::assume(atom, e)?.is_bottom()))
    }

    fn truth(&self, cond: &Cond) -> Result<BoolAbs> {
        each_num!(self, e => bool_eval_cond(cond, e))
    }
}

impl fmt::Display for NumEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        each_num!(self, e => write!(f, "{e}"))
    }
}

/// Abstract contents of one array.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cells {
    /// One interval for every element.
    Summary(Interval),
    /// Elements split by the parity of their value or of their index.
    Partitioned(PowerValue<Parity, Interval>),
}

impl Cells {
    pub fn empty(mode: ArrayMode) -> Cells {
        match mode {
            ArrayMode::Summary => Cells::Summary(Interval::Bottom),
            ArrayMode::ValueParity | ArrayMode::IndexParity => Cells::Partitioned(
                PowerValue::bottom_over(vec![Parity::Odd, Parity::Even])
                    .expect("odd and even are disjoint"),
            ),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Cells::Summary(i) => i.is_bottom(),
            Cells::Partitioned(p) => p.is_bottom(),
        }
    }

    fn zip(&self, other: &Cells, f: impl Fn(&Interval, &Interval) -> Interval) -> Cells {
        match (self, other) {
            (Cells::Summary(a), Cells::Summary(b)) => Cells::Summary(f(a, b)),
            (Cells::Partitioned(a), Cells::Partitioned(b)) => {
                let mut out = a.clone();
                for (i, (_, y)) in b.entries().enumerate() {
                    let x = out.entry_mut(i);
                    *x = f(x, y);
                }
                Cells::Partitioned(out)
            }
            _ => unreachable!("one array mode per analysis"),
        }
    }

    pub fn join(&self, other: &Cells) -> Cells {
        self.zip(other, Interval::join)
    }

    pub fn widen(&self, newer: &Cells) -> Cells {
        self.zip(newer, Interval::widen)
    }

    pub fn leq(&self, other: &Cells) -> bool {
        match (self, other) {
            (Cells::Summary(a), Cells::Summary(b)) => a.leq(b),
            (Cells::Partitioned(a), Cells::Partitioned(b)) => a.leq(b).unwrap_or(false),
            _ => false,
        }
    }

    /// The cell for elements whose partition key has parity `p`.
    pub fn partition(&self, p: Parity) -> Option<Interval> {
        match self {
            Cells::Summary(_) => None,
            Cells::Partitioned(t) => t.get(&p).copied(),
        }
    }

    /// Whether the element `value` stored at `index` is described.
    pub fn admits(&self, mode: ArrayMode, index: i64, value: i64) -> bool {
        use crate::lattice::Concretize;
        match (self, mode) {
            (Cells::Summary(i), _) => i.contains(value),
            (Cells::Partitioned(t), ArrayMode::ValueParity) => {
                t.get(&Parity::of(value)).is_some_and(|i| i.contains(value))
            }
            (Cells::Partitioned(t), _) => {
                t.get(&Parity::of(index)).is_some_and(|i| i.contains(value))
            }
        }
    }
}

impl fmt::Display for Cells {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cells::Summary(i) => write!(f, "{i}"),
            Cells::Partitioned(p) => write!(f, "{p}"),
        }
    }
}

/// The configured components at one program point. Bottom in any component
/// collapses the whole state to bottom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractState {
    nums: Vec<NumEnv>,
    bools: Option<Env<BoolAbs>>,
    diff: Option<DiffStore>,
    arrays: BTreeMap<Var, Cells>,
}

impl AbstractState {
    pub fn is_bottom(&self) -> bool {
        self.nums.iter().any(NumEnv::is_bottom)
            || self.bools.as_ref().is_some_and(Env::is_bottom)
            || self.diff.as_ref().is_some_and(DiffStore::is_bottom)
    }

    fn to_bottom(&self) -> AbstractState {
        AbstractState {
            nums: self.nums.iter().map(NumEnv::to_bottom).collect(),
            bools: self.bools.as_ref().map(|_| Env::bottom()),
            diff: self.diff.as_ref().map(|_| DiffStore::bottom()),
            arrays: BTreeMap::new(),
        }
    }

    fn normalized(self) -> AbstractState {
        if self.is_bottom() {
            self.to_bottom()
        } else {
            self
        }
    }

    pub fn numeric(&self) -> &[NumEnv] {
        &self.nums
    }

    pub fn interval(&self) -> Option<&Env<Interval>> {
        self.nums.iter().find_map(|n| match n {
            NumEnv::Interval(e) => Some(e),
            _ => None,
        })
    }

    pub fn parity(&self) -> Option<&Env<Parity>> {
        self.nums.iter().find_map(|n| match n {
            NumEnv::Parity(e) => Some(e),
            _ => None,
        })
    }

    pub fn sign(&self) -> Option<&Env<Sign>> {
        self.nums.iter().find_map(|n| match n {
            NumEnv::Sign(e) => Some(e),
            _ => None,
        })
    }

    pub fn congruence(&self) -> Option<&Env<CongruenceMod>> {
        self.nums.iter().find_map(|n| match n {
            NumEnv::Congruence(e) => Some(e),
            _ => None,
        })
    }

    pub fn bools(&self) -> Option<&Env<BoolAbs>> {
        self.bools.as_ref()
    }

    pub fn diff(&self) -> Option<&DiffStore> {
        self.diff.as_ref()
    }

    pub fn arrays(&self) -> &BTreeMap<Var, Cells> {
        &self.arrays
    }

    pub fn cells(&self, array: &str) -> Option<&Cells> {
        self.arrays.get(&Var::new(array))
    }

    fn interval_mut(&mut self) -> Option<&mut Env<Interval>> {
        self.nums.iter_mut().find_map(|n| match n {
            NumEnv::Interval(e) => Some(e),
            _ => None,
        })
    }

    fn parity_mut(&mut self) -> Option<&mut Env<Parity>> {
        self.nums.iter_mut().find_map(|n| match n {
            NumEnv::Parity(e) => Some(e),
            _ => None,
        })
    }

    fn congruence_mut(&mut self) -> Option<&mut Env<CongruenceMod>> {
        self.nums.iter_mut().find_map(|n| match n {
            NumEnv::Congruence(e) => Some(e),
            _ => None,
        })
    }

    /// Interval of an integer expression; top without an interval component.
    pub fn interval_of(&self, e: &Expr) -> Result<Interval> {
        match self.interval() {
            Some(env) => domains::eval(e, env),
            None => Ok(Interval::top()),
        }
    }

    /// Parity of an integer expression from the parity component, sharpened
    /// by the interval component when it pins a single value.
    pub fn parity_of(&self, e: &Expr) -> Result<Parity> {
        let p = match self.parity() {
            Some(env) => domains::eval(e, env)?,
            None => Parity::Top,
        };
        let iv = self.interval_of(e)?;
        Ok(match iv.as_singleton() {
            Some(v) => p.meet(&Parity::of(v)),
            None if iv.is_bottom() => Parity::Bottom,
            None => p,
        })
    }
}

impl fmt::Display for AbstractState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_bottom() {
            return f.write_str("bot");
        }
        let mut parts = Vec::new();
        for n in &self.nums {
            parts.push(format!("{}: {n}", n.name()));
        }
        if let Some(b) = &self.bools {
            parts.push(format!("bool: {b}"));
        }
        if let Some(d) = &self.diff {
            parts.push(format!("diff: {d}"));
        }
        for (a, c) in &self.arrays {
            parts.push(format!("{a}[]: {c}"));
        }
        f.write_str(&parts.join("; "))
    }
}

/// Transfer functions, lattice operations and reductions for one configuration.
#[derive(Clone, Debug)]
pub struct Semantics {
    config: AnalysisConfig,
    int_vars: Vec<Var>,
    bool_vars: Vec<Var>,
    mode: ReduceMode,
}

fn truth_of(may_hold: bool, may_fail: bool) -> BoolAbs {
    match (may_hold, may_fail) {
        (true, true) => BoolAbs::Top,
        (true, false) => BoolAbs::True,
        (false, true) => BoolAbs::False,
        (false, false) => BoolAbs::Bottom,
    }
}

impl Semantics {
    pub fn new(config: &AnalysisConfig, kinds: &BTreeMap<Var, VarKind>) -> Self {
        let of_kind = |k: VarKind| {
            kinds
                .iter()
                .filter(|(_, kk)| **kk == k)
                .map(|(v, _)| v.clone())
                .collect()
        };
        Semantics {
            config: config.clone(),
            int_vars: of_kind(VarKind::Int),
            bool_vars: of_kind(VarKind::Bool),
            mode: config.reduce_mode(),
        }
    }

    pub fn config(&self) -> &AnalysisConfig {
        &self.config
    }

    fn components(&self) -> BTreeSet<DomainName> {
        self.config.base_domains()
    }

    fn each_component(&self, c: &mut Counters, op: Op) {
        for d in self.components() {
            c.bump(d.keyword(), op);
        }
    }

    /// Entry state: every integer and boolean variable is unconstrained.
    pub fn init(&self) -> AbstractState {
        let ds = self.components();
        AbstractState {
            nums: ds
                .iter()
                .filter_map(|d| NumEnv::top_over(*d, &self.int_vars))
                .collect(),
            bools: ds.contains(&DomainName::Bool).then(|| {
                Env::from_bindings(self.bool_vars.iter().map(|v| (v.clone(), BoolAbs::Top)))
            }),
            diff: ds.contains(&DomainName::Diff).then(DiffStore::new),
            arrays: BTreeMap::new(),
        }
    }

    pub fn bottom(&self) -> AbstractState {
        self.init().to_bottom()
    }

    pub fn transfer(
        &self,
        label: &Label,
        s: &AbstractState,
        c: &mut Counters,
    ) -> Result<AbstractState> {
        match label {
            Label::Skip => Ok(s.clone()),
            Label::Guard(cond) => self.assume(cond, s, c),
            Label::Action(a, _) => {
                if s.is_bottom() {
                    return Ok(s.clone());
                }
                self.each_component(c, Op::Transfer);
                let out = self.act(a, s, c)?.normalized();
                Ok(self.reduce(&out, c))
            }
        }
    }

    fn act(&self, a: &Action, s: &AbstractState, c: &mut Counters) -> Result<AbstractState> {
        let mut out = s.clone();
        match a {
            Action::Assign(v, e) => {
                out.nums = s
                    .nums
                    .iter()
                    .map(|n| self.assign_num(n, v, e))
                    .collect::<Result<_>>()?;
                out.diff = s.diff.as_ref().map(|d| diff_assign(v, e, d));
            }
            Action::BoolConst(v, b) => {
                if let Some(env) = &mut out.bools {
                    env.set(v.clone(), BoolAbs::of(*b));
                }
            }
            Action::BoolAssign(v, cond) => {
                let val = self.truth(cond, s)?;
                if let Some(env) = &mut out.bools {
                    env.set(v.clone(), val);
                }
            }
            Action::Alloc(arr, e) => {
                let len = Var::length_of(arr);
                let nonneg = Atom::Rel(RelOp::Ge, Expr::Var(len.clone()), Expr::Int(0));
                out.nums = s
                    .nums
                    .iter()
                    .map(|n| {
                        let assigned = self.assign_num(n, &len, e)?;
                        Ok(map_num!(&assigned, env => domains::assume(&nonneg, env)?))
                    })
                    .collect::<Result<_>>()?;
                out.diff = s
                    .diff
                    .as_ref()
                    .map(|d| diff_assume(&nonneg, &diff_assign(&len, e, d)));
                out.arrays
                    .insert(arr.clone(), Cells::empty(self.config.array_mode));
            }
            Action::Store {
                array,
                index,
                value,
            } => {
                c.cell_updates += 1;
                let written = self.written_cells(s, index, value)?;
                let cells = out
                    .arrays
                    .entry(array.clone())
                    .or_insert_with(|| Cells::empty(self.config.array_mode));
                *cells = cells.join(&written);
            }
            Action::Assert(cond) => return self.assume_raw(cond, s),
        }
        Ok(out)
    }

    fn assign_num(&self, n: &NumEnv, v: &Var, e: &Expr) -> Result<NumEnv> {
        let faulty =
            self.config.fault == Some(Fault::IntervalAddOffByOne) && matches!(e, Expr::Add(..));
        Ok(match n {
            NumEnv::Interval(env) => {
                let mut val = domains::eval(e, env)?;
                if faulty {
                    val = val.add_const(1);
                }
                NumEnv::Interval(env.clone().with(v.clone(), val))
            }
            other => map_num!(other, env => env.clone().with(v.clone(), domains::eval(e, env)?)),
        })
    }

    /// Cells describing the single element written by `array[index] := value`.
    fn written_cells(&self, s: &AbstractState, index: &Expr, value: &Expr) -> Result<Cells> {
        let mode = self.config.array_mode;
        let iv = s.interval_of(value)?;
        let mut cells = Cells::empty(mode);
        match &mut cells {
            Cells::Summary(i) => *i = iv,
            Cells::Partitioned(t) => {
                let (key, by_value) = match mode {
                    ArrayMode::ValueParity => (s.parity_of(value)?, true),
                    _ => (s.parity_of(index)?, false),
                };
                for (i, atom) in [Parity::Odd, Parity::Even].into_iter().enumerate() {
                    let p = key.meet(&atom);
                    if p.is_bottom() {
                        continue;
                    }
                    *t.entry_mut(i) = if by_value {
                        IntervalParity.rho1(&iv, &p)
                    } else {
                        iv
                    };
                }
            }
        }
        Ok(cells)
    }

    /// What the components together know about the truth of `cond`.
    pub fn truth(&self, cond: &Cond, s: &AbstractState) -> Result<BoolAbs> {
        if s.is_bottom() {
            return Ok(BoolAbs::Bottom);
        }
        let atom = cond.normalize();
        let mut val = BoolAbs::Top;
        match &atom {
            Atom::Bool(v, polarity) => {
                if let Some(b) = s.bools.as_ref().and_then(|env| env.get(v)) {
                    val = if *polarity { *b } else { b.not() };
                }
            }
            Atom::Rel(..) => {
                for n in &s.nums {
                    val = val.meet(&n.truth(cond)?);
                }
                if let Some(d) = &s.diff {
                    let may_hold = !diff_assume(&atom, d).is_bottom();
                    let may_fail = !diff_assume(&atom.negate(), d).is_bottom();
                    val = val.meet(&truth_of(may_hold, may_fail));
                }
            }
        }
        Ok(val)
    }

    fn assume_raw(&self, cond: &Cond, s: &AbstractState) -> Result<AbstractState> {
        let atom = cond.normalize();
        let mut out = s.clone();
        out.nums = s
            .nums
            .iter()
            .map(|n| Ok(map_num!(n, env => domains::assume(&atom, env)?)))
            .collect::<Result<_>>()?;
        out.bools = s.bools.as_ref().map(|b| bool_assume(&atom, b));
        out.diff = s.diff.as_ref().map(|d| diff_assume(&atom, d));
        Ok(out)
    }

    pub fn assume(
        &self,
        cond: &Cond,
        s: &AbstractState,
        c: &mut Counters,
    ) -> Result<AbstractState> {
        if s.is_bottom() {
            return Ok(s.clone());
        }
        self.each_component(c, Op::Assume);
        let out = self.assume_raw(cond, s)?.normalized();
        Ok(self.reduce(&out, c))
    }

    /// Meets one integer variable with an interval in every component.
    pub fn restrict_interval(
        &self,
        v: &Var,
        iv: Interval,
        s: &AbstractState,
        c: &mut Counters,
    ) -> Result<AbstractState> {
        let mut out = s.clone();
        for (bound, op) in [(iv.lo(), RelOp::Ge), (iv.hi(), RelOp::Le)] {
            if let Some(k) = bound {
                out = self.assume(&Cond::rel(op, Expr::Var(v.clone()), Expr::Int(k)), &out, c)?;
            }
        }
        Ok(out)
    }

    /// Meets one integer variable with a parity in the parity component.
    pub fn restrict_parity(
        &self,
        v: &Var,
        p: Parity,
        s: &AbstractState,
        c: &mut Counters,
    ) -> AbstractState {
        let mut out = s.clone();
        if let Some(env) = out.parity_mut() {
            let cur = env.get(v).copied().unwrap_or(Parity::Top);
            env.set(v.clone(), cur.meet(&p));
        }
        self.reduce(&out.normalized(), c)
    }

    /// Meets one boolean variable with a truth value in the boolean component.
    pub fn restrict_bool(
        &self,
        v: &Var,
        b: BoolAbs,
        s: &AbstractState,
        c: &mut Counters,
    ) -> AbstractState {
        let mut out = s.clone();
        if let Some(env) = &mut out.bools {
            let cur = env.get(v).copied().unwrap_or(BoolAbs::Top);
            env.set(v.clone(), cur.meet(&b));
        }
        self.reduce(&out.normalized(), c)
    }

    pub fn join(&self, a: &AbstractState, b: &AbstractState, c: &mut Counters) -> AbstractState {
        self.each_component(c, Op::Join);
        if a.is_bottom() {
            return b.clone();
        }
        if b.is_bottom() {
            return a.clone();
        }
        let out = self.combine(a, b, false);
        self.reduce(&out.normalized(), c)
    }

    /// Widening; the result is not reduced so the iteration still terminates.
    pub fn widen(
        &self,
        old: &AbstractState,
        newer: &AbstractState,
        c: &mut Counters,
    ) -> AbstractState {
        self.each_component(c, Op::Widen);
        if old.is_bottom() {
            return newer.clone();
        }
        if newer.is_bottom() {
            return old.clone();
        }
        self.combine(old, newer, true).normalized()
    }

    fn combine(&self, a: &AbstractState, b: &AbstractState, widening: bool) -> AbstractState {
        let nums = a
            .nums
            .iter()
            .zip(&b.nums)
            .map(|(x, y)| {
                if widening {
                    zip_num!(x, y, p, q => p.widen(q))
                } else {
                    zip_num!(x, y, p, q => p.join(q))
                }
            })
            .collect();
        let cells = if widening { Cells::widen } else { Cells::join };
        let mut arrays = a.arrays.clone();
        for (k, v) in &b.arrays {
            arrays
                .entry(k.clone())
                .and_modify(|cur| *cur = cells(cur, v))
                .or_insert_with(|| v.clone());
        }
        let pick = |x: &DiffStore, y: &DiffStore| if widening { x.widen(y) } else { x.join(y) };
        AbstractState {
            nums,
            bools: a.bools.as_ref().zip(b.bools.as_ref()).map(|(x, y)| {
                if widening {
                    x.widen(y)
                } else {
                    x.join(y)
                }
            }),
            diff: a
                .diff
                .as_ref()
                .zip(b.diff.as_ref())
                .map(|(x, y)| pick(x, y)),
            arrays,
        }
    }

    pub fn leq(&self, a: &AbstractState, b: &AbstractState, c: &mut Counters) -> bool {
        self.each_component(c, Op::Leq);
        if a.is_bottom() {
            return true;
        }
        if b.is_bottom() {
            return false;
        }
        let nums = a.nums.iter().zip(&b.nums).all(|(x, y)| match (x, y) {
            (NumEnv::Interval(p), NumEnv::Interval(q)) => p.leq(q),
            (NumEnv::Parity(p), NumEnv::Parity(q)) => p.leq(q),
            (NumEnv::Sign(p), NumEnv::Sign(q)) => p.leq(q),
            (NumEnv::Congruence(p), NumEnv::Congruence(q)) => p.leq(q),
            _ => false,
        });
        let bools = a
            .bools
            .as_ref()
            .zip(b.bools.as_ref())
            .is_none_or(|(x, y)| x.leq(y));
        let diff = a
            .diff
            .as_ref()
            .zip(b.diff.as_ref())
            .is_none_or(|(x, y)| x.leq(y));
        // A missing array has no written elements.
        let arrays = a.arrays.iter().all(|(k, v)| match b.arrays.get(k) {
            Some(w) => v.leq(w),
            None => v.is_empty(),
        });
        nums && bools && diff && arrays
    }

    /// Applies the configured reductions.
    pub fn reduce(&self, s: &AbstractState, c: &mut Counters) -> AbstractState {
        if s.is_bottom() || self.mode == ReduceMode::Off {
            return s.clone();
        }
        let simultaneous = self.mode == ReduceMode::Simultaneous;
        let rounds = if simultaneous {
            self.config.reduction_cap
        } else {
            1
        };
        let mut cur = s.clone();
        for _ in 0..rounds {
            let before = cur.clone();
            for r in &self.config.reductions {
                c.reductions += 1;
                cur = self.apply_rule(*r, &cur, simultaneous).normalized();
                if cur.is_bottom() {
                    return cur;
                }
            }
            if cur == before {
                break;
            }
        }
        cur
    }

    fn pair_reduce<B: Lattice + Copy, R: ReductionRule<Interval, B>>(
        &self,
        rule: &R,
        ienv: &mut Env<Interval>,
        other: &mut Env<B>,
        simultaneous: bool,
    ) {
        let vars: Vec<Var> = ienv
            .vars()
            .filter(|v| other.get(v).is_some())
            .cloned()
            .collect();
        for v in vars {
            let (Some(a), Some(b)) = (ienv.get(&v).copied(), other.get(&v).copied()) else {
                return;
            };
            let p = PairValue::new(a, b);
            let cap = self.config.reduction_cap;
            let r = if simultaneous {
                reduce_fixpoint(rule, &p, cap)
            } else {
                reduce_sequential(rule, &p, cap)
            };
            ienv.set(v.clone(), r.left);
            other.set(v, r.right);
        }
    }

    fn apply_rule(&self, r: ReductionName, s: &AbstractState, simultaneous: bool) -> AbstractState {
        let mut out = s.clone();
        let Some(mut ienv) = out.interval().cloned() else {
            return out;
        };
        match r {
            ReductionName::IntervalParity => {
                if let Some(penv) = out.parity_mut() {
                    self.pair_reduce(&IntervalParity, &mut ienv, penv, simultaneous);
                }
            }
            ReductionName::IntervalCongruence => {
                if let Some(cenv) = out.congruence_mut() {
                    self.pair_reduce(&IntervalCongruence, &mut ienv, cenv, simultaneous);
                }
            }
            ReductionName::IntervalsToDiff => {
                if let Some(d) = &out.diff {
                    out.diff = Some(rho_intervals_to_diff(&ienv, d));
                }
            }
            ReductionName::DiffToIntervals => {
                if let Some(d) = &out.diff {
                    ienv = diff_to_intervals(d, &ienv);
                }
            }
        }
        if let Some(slot) = out.interval_mut() {
            *slot = ienv;
        }
        out
    }

    /// The first component that refutes the negation of `cond`, if any.
    /// An unreachable state proves everything.
    pub fn prover(&self, s: &AbstractState, cond: &Cond) -> Result<Option<&'static str>> {
        if s.is_bottom() {
            return Ok(Some("unreachable"));
        }
        let neg = cond.normalize().negate();
        for n in &s.nums {
            if n.refutes(&neg)? {
                return Ok(Some(n.name()));
            }
        }
        if s.bools
            .as_ref()
            .is_some_and(|b| bool_assume(&neg, b).is_bottom())
        {
            return Ok(Some("bool"));
        }
        if s.diff
            .as_ref()
            .is_some_and(|d| diff_assume(&neg, d).is_bottom())
        {
            return Ok(Some("diff"));
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::config::ProductKind;
    use crate::frontend::{parse, var_kinds};

    fn setup(src: &str, cfg: AnalysisConfig) -> (Semantics, AbstractState) {
        let p = parse(src).unwrap();
        let sem = Semantics::new(&cfg, &var_kinds(&p));
        let init = sem.init();
        (sem, init)
    }

    fn act(a: Action) -> Label {
        Label::Action(a, Default::default())
    }

    #[test]
    fn init_binds_every_integer_to_top() {
        let (_, s) = setup("arr := new Int[3]; b := true;", AnalysisConfig::default());
        let env = s.interval().unwrap();
        assert_eq!(env.get(&Var::new("arr.length")), Some(&Interval::top()));
        assert!(s.bools().is_none());
    }

    #[test]
    fn alloc_bounds_the_length() {
        let (sem, s) = setup("n := 0; arr := new Int[n];", AnalysisConfig::default());
        let mut c = Counters::default();
        let s = sem
            .transfer(
                &act(Action::Alloc(Var::new("arr"), Expr::var("n"))),
                &s,
                &mut c,
            )
            .unwrap();
        assert_eq!(
            s.interval().unwrap().get(&Var::new("arr.length")),
            Some(&Interval::at_least(0))
        );
        assert!(s.cells("arr").unwrap().is_empty());
    }

    #[test]
    fn cartesian_counts_one_op_per_component() {
        let cfg = AnalysisConfig::new(
            &[DomainName::Interval, DomainName::Sign],
            ProductKind::Cartesian,
        );
        let (sem, s) = setup("x := 1;", cfg);
        let mut c = Counters::default();
        let t = sem
            .transfer(
                &act(Action::Assign(Var::new("x"), Expr::Int(1))),
                &s,
                &mut c,
            )
            .unwrap();
        sem.join(&s, &t, &mut c);
        sem.leq(&s, &t, &mut c);
        assert_eq!(c.get("interval"), c.get("sign"));
        assert_eq!(c.get("interval").transfer, 1);
        assert_eq!(c.get("interval").join, 1);
    }

    #[test]
    fn reduced_product_tightens_bounds() {
        let cfg = AnalysisConfig::new(
            &[DomainName::Interval, DomainName::Parity],
            ProductKind::Reduced,
        )
        .with_reductions(&[ReductionName::IntervalParity]);
        let (sem, s) = setup("x := 1;", cfg);
        let mut c = Counters::default();
        let x = Var::new("x");
        let s = sem
            .restrict_interval(&x, Interval::finite(2, 4), &s, &mut c)
            .unwrap();
        let s = sem.restrict_parity(&x, Parity::Odd, &s, &mut c);
        assert_eq!(s.interval().unwrap().get(&x), Some(&Interval::singleton(3)));
        assert!(c.reductions > 0);
    }

    #[test]
    fn truth_uses_every_component() {
        let cfg = AnalysisConfig::new(
            &[DomainName::Interval, DomainName::Diff],
            ProductKind::Cartesian,
        );
        let (sem, s) = setup("i := 0; n := 0;", cfg);
        let mut c = Counters::default();
        let lt = Cond::rel(RelOp::Lt, Expr::var("i"), Expr::var("n"));
        let s = sem.assume(&lt, &s, &mut c).unwrap();
        assert_eq!(sem.truth(&lt, &s).unwrap(), BoolAbs::True);
        assert_eq!(sem.prover(&s, &lt).unwrap(), Some("diff"));
    }

    #[test]
    fn bottom_collapses_every_component() {
        let cfg = AnalysisConfig::new(
            &[DomainName::Interval, DomainName::Diff],
            ProductKind::Cartesian,
        );
        let (sem, s) = setup("i := 0;", cfg);
        let mut c = Counters::default();
        let s = sem
            .restrict_interval(&Var::new("i"), Interval::finite(0, 0), &s, &mut c)
            .unwrap();
        let s = sem
            .assume(
                &Cond::rel(RelOp::Gt, Expr::var("i"), Expr::Int(0)),
                &s,
                &mut c,
            )
            .unwrap();
        assert!(s.is_bottom());
        assert!(s.diff().unwrap().is_bottom());
        assert_eq!(s.to_string(), "bot");
    }
}
