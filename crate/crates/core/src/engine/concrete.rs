//! A concrete interpreter that collects every reachable store per program
//! point, and a checker that holds analysis results against it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::analyze::{Analysis, PointState, Verdict};
use super::config::ArrayMode;
use super::power::{atom_admits, PowerState};
use super::state::AbstractState;
use crate::frontend::ast::{Cond, Expr, InputDecl, Program, Var};
use crate::frontend::cfg::{Action, Cfg, Label, NodeId};
use crate::lattice::Concretize;

pub const DEFAULT_STEP_BOUND: usize = 10_000;

/// One concrete program state. Unwritten array cells are `None`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConcreteStore {
    pub ints: BTreeMap<Var, i64>,
    pub bools: BTreeMap<Var, bool>,
    pub arrays: BTreeMap<Var, Vec<Option<i64>>>,
}

impl ConcreteStore {
    pub fn int(&self, name: &str) -> Option<i64> {
        self.ints.get(&Var::new(name)).copied()
    }
}

impl fmt::Display for ConcreteStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.ints.iter().map(|(v, x)| format!("{v}={x}")).collect();
        parts.extend(self.bools.iter().map(|(v, b)| format!("{v}={b}")));
        for (a, cells) in &self.arrays {
            let shown: Vec<String> = cells
                .iter()
                .map(|c| c.map_or("_".into(), |x| x.to_string()))
                .collect();
            parts.push(format!("{a}=[{}]", shown.join(",")));
        }
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Why a single execution stopped before reaching the exit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Halt {
    OutOfBounds,
    AssertFailed,
    NegativeLength,
    Uninitialized(Var),
    Overflow,
}

#[derive(Clone, Debug, Default)]
pub struct Collected {
    pub per_node: Vec<BTreeSet<ConcreteStore>>,
    pub runs: usize,
    pub halts: Vec<Halt>,
    /// Set when the step bound cut some execution short.
    pub truncated: bool,
}

impl Collected {
    pub fn at(&self, n: NodeId) -> &BTreeSet<ConcreteStore> {
        &self.per_node[n]
    }
}

fn eval(e: &Expr, s: &ConcreteStore) -> Result<i64, Halt> {
    match e {
        Expr::Int(k) => Ok(*k),
        Expr::Var(v) => s
            .ints
            .get(v)
            .copied()
            .ok_or_else(|| Halt::Uninitialized(v.clone())),
        Expr::Add(a, b) => eval(a, s)?.checked_add(eval(b, s)?).ok_or(Halt::Overflow),
        Expr::Sub(a, b) => eval(a, s)?.checked_sub(eval(b, s)?).ok_or(Halt::Overflow),
    }
}

pub fn eval_cond(c: &Cond, s: &ConcreteStore) -> Result<bool, Halt> {
    match c {
        Cond::Rel(op, a, b) => Ok(op.holds(eval(a, s)?, eval(b, s)?)),
        Cond::BoolVar(v) => s
            .bools
            .get(v)
            .copied()
            .ok_or_else(|| Halt::Uninitialized(v.clone())),
        Cond::Not(inner) => Ok(!eval_cond(inner, s)?),
    }
}

fn exec(a: &Action, s: &mut ConcreteStore) -> Result<(), Halt> {
    match a {
        Action::Assign(v, e) => {
            let x = eval(e, s)?;
            s.ints.insert(v.clone(), x);
        }
        Action::BoolAssign(v, c) => {
            let b = eval_cond(c, s)?;
            s.bools.insert(v.clone(), b);
        }
        Action::BoolConst(v, b) => {
            s.bools.insert(v.clone(), *b);
        }
        Action::Alloc(v, e) => {
            let n = eval(e, s)?;
            let len = usize::try_from(n).map_err(|_| Halt::NegativeLength)?;
            s.ints.insert(Var::length_of(v), n);
            s.arrays.insert(v.clone(), vec![None; len]);
        }
        Action::Store {
            array,
            index,
            value,
        } => {
            let i = eval(index, s)?;
            let x = eval(value, s)?;
            let cells = s
                .arrays
                .get_mut(array)
                .ok_or_else(|| Halt::Uninitialized(array.clone()))?;
            let slot = usize::try_from(i)
                .ok()
                .and_then(|i| cells.get_mut(i))
                .ok_or(Halt::OutOfBounds)?;
            *slot = Some(x);
        }
        Action::Assert(c) => {
            if !eval_cond(c, s)? {
                return Err(Halt::AssertFailed);
            }
        }
    }
    Ok(())
}

/// Every input tuple over the declared ranges, in lexicographic order.
fn input_tuples(decls: &[InputDecl]) -> Vec<Vec<(Var, i64)>> {
    let mut out = vec![Vec::new()];
    for d in decls {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (d.lo..=d.hi).map(move |v| {
                    let mut t = prefix.clone();
                    t.push((d.var.clone(), v));
                    t
                })
            })
            .collect();
    }
    out
}

/// Runs the program on every input tuple and records the store at each
/// program point. `step_bound` limits the total number of edges taken.
pub fn collect_concrete(p: &Program, step_bound: usize) -> Collected {
    let cfg = Cfg::build(p);
    collect_on(&cfg, p, step_bound)
}

fn collect_on(cfg: &Cfg, p: &Program, step_bound: usize) -> Collected {
    let mut out = Collected {
        per_node: vec![BTreeSet::new(); cfg.node_count],
        ..Default::default()
    };
    let succs: Vec<Vec<&crate::frontend::cfg::Edge>> = (0..cfg.node_count)
        .map(|n| cfg.successors(n).collect())
        .collect();
    let mut steps = 0usize;
    for tuple in input_tuples(&p.decls) {
        out.runs += 1;
        let mut s = ConcreteStore {
            ints: tuple.into_iter().collect(),
            ..Default::default()
        };
        let mut n = cfg.entry;
        'run: loop {
            out.per_node[n].insert(s.clone());
            let mut next = None;
            for e in &succs[n] {
                match &e.label {
                    Label::Skip => next = Some(e.to),
                    Label::Guard(c) => match eval_cond(c, &s) {
                        Ok(true) => next = Some(e.to),
                        Ok(false) => continue,
                        Err(h) => {
                            out.halts.push(h);
                            break 'run;
                        }
                    },
                    Label::Action(a, _) => {
                        if let Err(h) = exec(a, &mut s) {
                            out.halts.push(h);
                            break 'run;
                        }
                        next = Some(e.to);
                    }
                }
                if next.is_some() {
                    break;
                }
            }
            let Some(m) = next else { break };
            steps += 1;
            if steps > step_bound {
                out.truncated = true;
                return out;
            }
            n = m;
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub node: NodeId,
    pub store: ConcreteStore,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}: {} at {}", self.node, self.reason, self.store)
    }
}

#[derive(Clone, Debug, Default)]
pub struct SoundnessReport {
    pub stores_checked: usize,
    pub obligations_checked: usize,
    pub violations: Vec<Violation>,
    pub truncated: bool,
}

impl SoundnessReport {
    pub fn is_sound(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Why `store` is outside the concretization of `s`, if it is.
pub fn plain_rejects(s: &AbstractState, mode: ArrayMode, store: &ConcreteStore) -> Option<String> {
    if s.is_bottom() {
        return Some("reachable store at a bottom state".into());
    }
    for n in s.numeric() {
        if let Some((v, x)) = store.ints.iter().find(|(v, x)| !n.admits(v, **x)) {
            return Some(format!("{} component excludes {v}={x}", n.name()));
        }
    }
    if let Some(env) = s.bools() {
        if let Some((v, b)) = store
            .bools
            .iter()
            .find(|(v, b)| env.get(v).is_some_and(|d| !d.contains(**b as i64)))
        {
            return Some(format!("bool component excludes {v}={b}"));
        }
    }
    if let Some(d) = s.diff() {
        if !d.satisfied_by(|v| store.ints.get(v).copied()) {
            return Some(format!("constraints {d} are violated"));
        }
    }
    for (a, cells) in &store.arrays {
        for (i, x) in cells.iter().enumerate() {
            let Some(x) = x else { continue };
            let ok = s
                .arrays()
                .get(a)
                .is_some_and(|c| c.admits(mode, i as i64, *x));
            if !ok {
                return Some(format!("cells of {a} exclude {a}[{i}]={x}"));
            }
        }
    }
    None
}

fn power_rejects(
    ps: &PowerState,
    pivot: &Var,
    mode: ArrayMode,
    store: &ConcreteStore,
) -> Option<String> {
    let value = store
        .ints
        .get(pivot)
        .copied()
        .or_else(|| store.bools.get(pivot).map(|b| *b as i64));
    let mut reasons = Vec::new();
    for (atom, s) in ps.entries() {
        if value.is_some_and(|v| !atom_admits(atom, v)) {
            continue;
        }
        let r = plain_rejects(s, mode, store)?;
        reasons.push(format!("{atom}: {r}"));
    }
    Some(format!("no atom admits the store ({})", reasons.join("; ")))
}

/// Checks every collected store against the abstract state at its point, and
/// every proved obligation against every store reaching it.
pub fn check_soundness(r: &Analysis, collected: &Collected) -> SoundnessReport {
    let mut report = SoundnessReport {
        truncated: collected.truncated,
        ..Default::default()
    };
    let mode = r.config.array_mode;
    for (n, stores) in collected.per_node.iter().enumerate() {
        for store in stores {
            report.stores_checked += 1;
            let reason = match &r.states[n] {
                PointState::Plain(s) => plain_rejects(s, mode, store),
                PointState::Power(ps) => {
                    let pivot = &r
                        .config
                        .power
                        .as_ref()
                        .expect("power state without power settings")
                        .pivot;
                    power_rejects(ps, pivot, mode, store)
                }
            };
            if let Some(reason) = reason {
                report.violations.push(Violation {
                    node: n,
                    store: store.clone(),
                    reason,
                });
            }
        }
    }
    for ob in r
        .obligations
        .iter()
        .filter(|o| o.verdict == Verdict::Proved)
    {
        for store in collected.at(ob.obligation.node) {
            report.obligations_checked += 1;
            if eval_cond(&ob.obligation.cond, store) != Ok(true) {
                report.violations.push(Violation {
                    node: ob.obligation.node,
                    store: store.clone(),
                    reason: format!(
                        "proved {} obligation `{}` fails",
                        ob.obligation.kind.name(),
                        ob.obligation.cond
                    ),
                });
            }
        }
    }
    report
}

/// Collects and checks in one call.
pub fn oracle_check(r: &Analysis) -> SoundnessReport {
    let collected = collect_on(&r.cfg, &r.program, DEFAULT_STEP_BOUND);
    check_soundness(r, &collected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::analyze::analyze_source;
    use crate::engine::config::{AnalysisConfig, Fault};
    use crate::frontend::parse;

    #[test]
    fn counting_loop_stores() {
        let p = parse("input n in [0, 3]; i := 0; while (i < n) { i := i + 1; }").unwrap();
        let c = collect_concrete(&p, DEFAULT_STEP_BOUND);
        assert_eq!(c.runs, 4);
        assert!(!c.truncated);
        let cfg = Cfg::build(&p);
        let exit: BTreeSet<(i64, i64)> = c
            .at(cfg.exit)
            .iter()
            .map(|s| (s.int("n").unwrap(), s.int("i").unwrap()))
            .collect();
        assert_eq!(exit, (0..=3).map(|k| (k, k)).collect());
    }

    #[test]
    fn halting_runs_are_recorded() {
        let p = parse("input k in [0, 2]; a := new Int[2]; a[k] := 1; assert (k > 5);").unwrap();
        let c = collect_concrete(&p, DEFAULT_STEP_BOUND);
        assert!(c.halts.contains(&Halt::OutOfBounds));
        assert!(c.halts.contains(&Halt::AssertFailed));
    }

    #[test]
    fn step_bound_truncates() {
        let p = parse("b := true; while (b) { b := true; }").unwrap();
        assert!(collect_concrete(&p, 50).truncated);
    }

    #[test]
    fn unreachable_points_collect_nothing() {
        let p = parse("x := 1; if (x > 5) { x := 2; }").unwrap();
        let cfg = Cfg::build(&p);
        let c = collect_concrete(&p, DEFAULT_STEP_BOUND);
        let empty = (0..cfg.node_count).filter(|n| c.at(*n).is_empty()).count();
        assert!(empty >= 1);
        let a =
            analyze_source("x := 1; if (x > 5) { x := 2; }", &AnalysisConfig::default()).unwrap();
        assert!(check_soundness(&a, &c).is_sound());
    }

    #[test]
    fn injected_fault_is_caught() {
        let src = "input n in [0, 4]; i := 0; while (i < n) { i := i + 1; }";
        let mut cfg = AnalysisConfig::default().with_widening_delay(10);
        assert!(oracle_check(&analyze_source(src, &cfg).unwrap()).is_sound());
        cfg.fault = Some(Fault::IntervalAddOffByOne);
        assert!(!oracle_check(&analyze_source(src, &cfg).unwrap()).is_sound());
    }
}
