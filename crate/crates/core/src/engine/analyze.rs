//! Worklist fixpoint over a control-flow graph, then obligation checking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::config::{AnalysisConfig, ArrayMode, ExponentKind, ProductKind};
use super::counters::Counters;
use super::power::{PowerSemantics, PowerState};
use super::state::{AbstractState, Semantics};
use crate::error::{Error, Result};
use crate::frontend::ast::{Cond, Program, Var};
use crate::frontend::cfg::{Cfg, Label, NodeId, Obligation, ObligationKind};
use crate::frontend::{parse, var_kinds, VarKind};

/// The abstract state at one program point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PointState {
    Plain(AbstractState),
    Power(PowerState),
}

impl PointState {
    pub fn is_bottom(&self) -> bool {
        match self {
            PointState::Plain(s) => s.is_bottom(),
            PointState::Power(p) => p.is_bottom(),
        }
    }

    pub fn plain(&self) -> Option<&AbstractState> {
        match self {
            PointState::Plain(s) => Some(s),
            PointState::Power(_) => None,
        }
    }

    pub fn power(&self) -> Option<&PowerState> {
        match self {
            PointState::Power(p) => Some(p),
            PointState::Plain(_) => None,
        }
    }
}

impl fmt::Display for PointState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointState::Plain(s) => write!(f, "{s}"),
            PointState::Power(p) => write!(f, "{p}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Proved,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Proved => "PROVED",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObligationResult {
    pub obligation: Obligation,
    pub verdict: Verdict,
    /// The component that settled it, or `unreachable`.
    pub prover: Option<&'static str>,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub program: Program,
    pub cfg: Cfg,
    pub config: AnalysisConfig,
    pub states: Vec<PointState>,
    pub obligations: Vec<ObligationResult>,
    pub counters: Counters,
    /// Edges whose transfer is not below the target state; empty on success.
    pub unstable_edges: Vec<usize>,
}

impl Analysis {
    pub fn state(&self, n: NodeId) -> &PointState {
        &self.states[n]
    }

    pub fn exit_state(&self) -> &PointState {
        &self.states[self.cfg.exit]
    }

    /// The state right after the last statement written on `line`.
    pub fn after_line(&self, line: u32) -> Option<&PointState> {
        self.cfg.node_after_line(line).map(|n| &self.states[n])
    }

    pub fn loop_head(&self, line: u32) -> Option<&PointState> {
        self.cfg.loop_head_at_line(line).map(|n| &self.states[n])
    }

    pub fn verdict(&self, line: u32, kind: ObligationKind) -> Option<Verdict> {
        self.obligations
            .iter()
            .find(|o| o.obligation.pos.line == line && o.obligation.kind == kind)
            .map(|o| o.verdict)
    }

    /// Verdicts of every obligation of `kind`, in program order.
    pub fn verdicts(&self, kind: ObligationKind) -> Vec<Verdict> {
        self.obligations
            .iter()
            .filter(|o| o.obligation.kind == kind)
            .map(|o| o.verdict)
            .collect()
    }

    pub fn all_proved(&self) -> bool {
        self.obligations
            .iter()
            .all(|o| o.verdict == Verdict::Proved)
    }
}

/// The operations the worklist needs from a state space.
trait Flow {
    type State: Clone + PartialEq;
    fn init(&self, c: &mut Counters) -> Result<Self::State>;
    fn bottom(&self) -> Self::State;
    fn transfer(&self, label: &Label, s: &Self::State, c: &mut Counters) -> Result<Self::State>;
    fn join(&self, a: &Self::State, b: &Self::State, c: &mut Counters) -> Self::State;
    fn widen(&self, a: &Self::State, b: &Self::State, c: &mut Counters) -> Self::State;
    fn leq(&self, a: &Self::State, b: &Self::State, c: &mut Counters) -> bool;
    fn prover(&self, s: &Self::State, cond: &Cond) -> Result<Option<&'static str>>;
    fn wrap(s: Self::State) -> PointState;
}

impl Flow for Semantics {
    type State = AbstractState;
    fn init(&self, _: &mut Counters) -> Result<AbstractState> {
        Ok(Semantics::init(self))
    }
    fn bottom(&self) -> AbstractState {
        Semantics::bottom(self)
    }
    fn transfer(
        &self,
        label: &Label,
        s: &AbstractState,
        c: &mut Counters,
    ) -> Result<AbstractState> {
        Semantics::transfer(self, label, s, c)
    }
    fn join(&self, a: &AbstractState, b: &AbstractState, c: &mut Counters) -> AbstractState {
        Semantics::join(self, a, b, c)
    }
    fn widen(&self, a: &AbstractState, b: &AbstractState, c: &mut Counters) -> AbstractState {
        Semantics::widen(self, a, b, c)
    }
    fn leq(&self, a: &AbstractState, b: &AbstractState, c: &mut Counters) -> bool {
        Semantics::leq(self, a, b, c)
    }
    fn prover(&self, s: &AbstractState, cond: &Cond) -> Result<Option<&'static str>> {
        Semantics::prover(self, s, cond)
    }
    fn wrap(s: AbstractState) -> PointState {
        PointState::Plain(s)
    }
}

impl Flow for PowerSemantics {
    type State = PowerState;
    fn init(&self, c: &mut Counters) -> Result<PowerState> {
        PowerSemantics::init(self, c)
    }
    fn bottom(&self) -> PowerState {
        PowerSemantics::bottom(self)
    }
    fn transfer(&self, label: &Label, s: &PowerState, c: &mut Counters) -> Result<PowerState> {
        PowerSemantics::transfer(self, label, s, c)
    }
    fn join(&self, a: &PowerState, b: &PowerState, c: &mut Counters) -> PowerState {
        PowerSemantics::join(self, a, b, c)
    }
    fn widen(&self, a: &PowerState, b: &PowerState, c: &mut Counters) -> PowerState {
        PowerSemantics::widen(self, a, b, c)
    }
    fn leq(&self, a: &PowerState, b: &PowerState, c: &mut Counters) -> bool {
        PowerSemantics::leq(self, a, b, c)
    }
    fn prover(&self, s: &PowerState, cond: &Cond) -> Result<Option<&'static str>> {
        PowerSemantics::prover(self, s, cond)
    }
    fn wrap(s: PowerState) -> PointState {
        PointState::Power(s)
    }
}

struct Outcome {
    states: Vec<PointState>,
    obligations: Vec<ObligationResult>,
    unstable_edges: Vec<usize>,
}

fn solve<F: Flow>(
    flow: &F,
    cfg: &Cfg,
    config: &AnalysisConfig,
    c: &mut Counters,
) -> Result<Outcome> {
    let init = flow.init(c)?;
    let mut states = vec![flow.bottom(); cfg.node_count];
    let order = cfg.reverse_post_order();
    let mut rank = vec![0usize; cfg.node_count];
    for (i, n) in order.iter().enumerate() {
        rank[*n] = i;
    }
    let preds: Vec<Vec<usize>> = (0..cfg.node_count)
        .map(|n| {
            cfg.edges
                .iter()
                .enumerate()
                .filter(|(_, e)| e.to == n)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let succs: Vec<Vec<NodeId>> = (0..cfg.node_count)
        .map(|n| cfg.successors(n).map(|e| e.to).collect())
        .collect();
    let mut head_visits = vec![0usize; cfg.node_count];
    let mut work: BTreeSet<(usize, NodeId)> = order.iter().map(|n| (rank[*n], *n)).collect();
    let mut visits = 0usize;

    while let Some((_, n)) = work.pop_first() {
        visits += 1;
        c.node_visits += 1;
        if visits > config.visit_cap {
            return Err(Error::VisitCap(config.visit_cap));
        }
        let mut incoming = if n == cfg.entry {
            init.clone()
        } else {
            flow.bottom()
        };
        for &ei in &preds[n] {
            let e = &cfg.edges[ei];
            let t = flow.transfer(&e.label, &states[e.from], c)?;
            incoming = flow.join(&incoming, &t, c);
        }
        let old = &states[n];
        let new = if cfg.loop_heads.contains(&n) {
            let joined = flow.join(old, &incoming, c);
            head_visits[n] += 1;
            if head_visits[n] <= config.widening_delay {
                joined
            } else {
                flow.widen(old, &joined, c)
            }
        } else {
            incoming
        };
        if flow.leq(&new, old, c) && (cfg.loop_heads.contains(&n) || new == *old) {
            continue;
        }
        states[n] = new;
        for &m in &succs[n] {
            work.insert((rank[m], m));
        }
    }

    // Every edge must be stable under the final states.
    let mut unstable_edges = Vec::new();
    for (i, e) in cfg.edges.iter().enumerate() {
        let t = flow.transfer(&e.label, &states[e.from], c)?;
        if !flow.leq(&t, &states[e.to], c) {
            unstable_edges.push(i);
        }
    }
    if !flow.leq(&init, &states[cfg.entry], c) {
        unstable_edges.push(usize::MAX);
    }

    let mut obligations = Vec::new();
    for ob in cfg.obligations() {
        let prover = flow.prover(&states[ob.node], &ob.cond)?;
        let verdict = if prover.is_some() {
            Verdict::Proved
        } else {
            Verdict::Unknown
        };
        obligations.push(ObligationResult {
            obligation: ob,
            verdict,
            prover,
        });
    }
    Ok(Outcome {
        states: states.into_iter().map(F::wrap).collect(),
        obligations,
        unstable_edges,
    })
}

fn check_pivot(config: &AnalysisConfig, kinds: &BTreeMap<Var, VarKind>) -> Result<()> {
    let Some(p) = &config.power else {
        return Ok(());
    };
    let want = match p.exponent {
        ExponentKind::Bool => VarKind::Bool,
        ExponentKind::Parity | ExponentKind::IntervalAtoms => VarKind::Int,
    };
    match kinds.get(&p.pivot) {
        Some(k) if *k == want => Ok(()),
        Some(k) => Err(Error::Config(format!(
            "pivot `{}` is {k:?}, exponent `{}` needs {want:?}",
            p.pivot, p.exponent
        ))),
        None => Err(Error::Config(format!(
            "pivot `{}` does not occur in the program",
            p.pivot
        ))),
    }
}

pub fn analyze(program: &Program, config: &AnalysisConfig) -> Result<Analysis> {
    config.validate()?;
    let kinds = var_kinds(program);
    check_pivot(config, &kinds)?;
    let cfg = Cfg::build(program);
    let base = Semantics::new(config, &kinds);
    let mut counters = Counters::default();
    let out = match (&config.power, config.product) {
        (Some(p), ProductKind::Power) => {
            solve(&PowerSemantics::new(base, p), &cfg, config, &mut counters)?
        }
        _ => solve(&base, &cfg, config, &mut counters)?,
    };
    Ok(Analysis {
        program: program.clone(),
        cfg,
        config: config.clone(),
        states: out.states,
        obligations: out.obligations,
        counters,
        unstable_edges: out.unstable_edges,
    })
}

pub fn analyze_source(text: &str, config: &AnalysisConfig) -> Result<Analysis> {
    analyze(&parse(text)?, config)
}

/// Runs the analysis with the given array abstraction.
pub fn analyze_array_power(
    program: &Program,
    mode: ArrayMode,
    config: &AnalysisConfig,
) -> Result<Analysis> {
    analyze(program, &config.clone().with_array_mode(mode))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Interval;
    use crate::engine::config::DomainName;

    #[test]
    fn counting_loop_reaches_a_stable_state() {
        let a = analyze_source(
            "i := 0; while (i < 10) { i := i + 1; }",
            &AnalysisConfig::default(),
        )
        .unwrap();
        assert!(a.unstable_edges.is_empty());
        let exit = a.exit_state().plain().unwrap();
        assert_eq!(
            exit.interval().unwrap().get(&Var::new("i")),
            Some(&Interval::at_least(10))
        );
    }

    #[test]
    fn widening_delay_keeps_bounds() {
        let cfg = AnalysisConfig::default().with_widening_delay(20);
        let a = analyze_source("i := 0; while (i < 10) { i := i + 1; }", &cfg).unwrap();
        let exit = a.exit_state().plain().unwrap();
        assert_eq!(
            exit.interval().unwrap().get(&Var::new("i")),
            Some(&Interval::singleton(10))
        );
    }

    #[test]
    fn visit_cap_is_enforced() {
        let mut cfg = AnalysisConfig::default().with_widening_delay(1000);
        cfg.visit_cap = 20;
        let err = analyze_source("i := 0; while (i < 100) { i := i + 1; }", &cfg).unwrap_err();
        assert_eq!(err, Error::VisitCap(20));
    }

    #[test]
    fn pivot_kind_is_checked() {
        let cfg = AnalysisConfig::new(&[DomainName::Sign], ProductKind::Power).with_power(
            "x",
            ExponentKind::Bool,
            crate::engine::config::default_atoms(ExponentKind::Bool).unwrap(),
        );
        assert!(matches!(
            analyze_source("x := 1;", &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn unreachable_obligations_are_proved() {
        let a = analyze_source(
            "a := new Int[1]; i := 5; if (i < 0) { a[i] := 1; }",
            &AnalysisConfig::default(),
        )
        .unwrap();
        assert!(a.all_proved());
        assert_eq!(a.obligations[0].prover, Some("unreachable"));
    }
}
