//! States split by the value of one pivot variable: one base state per atom.

use std::fmt;

use super::config::{ExpAtom, PowerConfig};
use super::counters::Counters;
use super::state::{AbstractState, Semantics};
use crate::domains::BoolAbs;
use crate::error::Result;
use crate::frontend::ast::{Cond, Var};
use crate::frontend::cfg::{Action, Label};
use crate::lattice::Concretize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerState {
    atoms: Vec<ExpAtom>,
    table: Vec<AbstractState>,
}

impl PowerState {
    pub fn atoms(&self) -> &[ExpAtom] {
        &self.atoms
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ExpAtom, &AbstractState)> {
        self.atoms.iter().zip(&self.table)
    }

    pub fn get(&self, atom: &ExpAtom) -> Option<&AbstractState> {
        self.atoms
            .iter()
            .position(|a| a == atom)
            .map(|i| &self.table[i])
    }

    pub fn is_bottom(&self) -> bool {
        self.table.iter().all(AbstractState::is_bottom)
    }
}

impl fmt::Display for PowerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, s)) in self.entries().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{a} -> {s}")?;
        }
        f.write_str("}")
    }
}

/// Whether a concrete pivot value lies in an atom. Booleans are 0 and 1.
pub fn atom_admits(atom: &ExpAtom, v: i64) -> bool {
    match atom {
        ExpAtom::Parity(p) => p.contains(v),
        ExpAtom::Bool(b) => b.contains(v),
        ExpAtom::Interval(i) => i.contains(v),
    }
}

#[derive(Clone, Debug)]
pub struct PowerSemantics {
    base: Semantics,
    pivot: Var,
    atoms: Vec<ExpAtom>,
}

impl PowerSemantics {
    pub fn new(base: Semantics, power: &PowerConfig) -> Self {
        PowerSemantics {
            base,
            pivot: power.pivot.clone(),
            atoms: power.atoms.clone(),
        }
    }

    pub fn base(&self) -> &Semantics {
        &self.base
    }

    /// Restricts a base state to the pivot values in `atom`.
    fn restrict(
        &self,
        s: &AbstractState,
        atom: &ExpAtom,
        c: &mut Counters,
    ) -> Result<AbstractState> {
        Ok(match atom {
            ExpAtom::Parity(p) => self.base.restrict_parity(&self.pivot, *p, s, c),
            ExpAtom::Bool(b) => self.base.restrict_bool(&self.pivot, *b, s, c),
            ExpAtom::Interval(i) => self.base.restrict_interval(&self.pivot, *i, s, c)?,
        })
    }

    fn split(&self, s: &AbstractState, c: &mut Counters) -> Result<PowerState> {
        let table = self
            .atoms
            .iter()
            .map(|a| self.restrict(s, a, c))
            .collect::<Result<_>>()?;
        Ok(PowerState {
            atoms: self.atoms.clone(),
            table,
        })
    }

    pub fn init(&self, c: &mut Counters) -> Result<PowerState> {
        self.split(&self.base.init(), c)
    }

    pub fn bottom(&self) -> PowerState {
        PowerState {
            atoms: self.atoms.clone(),
            table: vec![self.base.bottom(); self.atoms.len()],
        }
    }

    fn join_all(
        &self,
        states: impl IntoIterator<Item = AbstractState>,
        c: &mut Counters,
    ) -> AbstractState {
        states
            .into_iter()
            .fold(self.base.bottom(), |acc, s| self.base.join(&acc, &s, c))
    }

    pub fn transfer(&self, label: &Label, ps: &PowerState, c: &mut Counters) -> Result<PowerState> {
        if matches!(label, Label::Skip) {
            return Ok(ps.clone());
        }
        c.power_transfers += 1;
        c.base_transfers += self.atoms.len();
        let Label::Action(action, _) = label else {
            return self.pointwise(label, ps, c);
        };
        if action.assigned() != Some(&self.pivot) {
            return self.pointwise(label, ps, c);
        }
        if let Action::BoolAssign(b, cond) = action {
            // Split on the condition itself so each atom keeps the facts that decided it.
            let mut table = Vec::with_capacity(self.atoms.len());
            for atom in &self.atoms {
                let ExpAtom::Bool(val) = atom else {
                    unreachable!("a boolean pivot has boolean atoms")
                };
                let branch = match val {
                    BoolAbs::True => cond.clone(),
                    _ => !cond.clone(),
                };
                let mut parts = Vec::new();
                for s in &ps.table {
                    let taken = self.base.assume(&branch, s, c)?;
                    let set = Label::Action(
                        Action::BoolConst(b.clone(), *val == BoolAbs::True),
                        Default::default(),
                    );
                    parts.push(self.base.transfer(&set, &taken, c)?);
                }
                table.push(self.join_all(parts, c));
            }
            return Ok(PowerState {
                atoms: self.atoms.clone(),
                table,
            });
        }
        let posts = ps
            .table
            .iter()
            .map(|s| self.base.transfer(label, s, c))
            .collect::<Result<Vec<_>>>()?;
        let mut table = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            let parts = posts
                .iter()
                .map(|s| self.restrict(s, atom, c))
                .collect::<Result<Vec<_>>>()?;
            table.push(self.join_all(parts, c));
        }
        Ok(PowerState {
            atoms: self.atoms.clone(),
            table,
        })
    }

    fn pointwise(&self, label: &Label, ps: &PowerState, c: &mut Counters) -> Result<PowerState> {
        let table = ps
            .table
            .iter()
            .map(|s| self.base.transfer(label, s, c))
            .collect::<Result<_>>()?;
        Ok(PowerState {
            atoms: ps.atoms.clone(),
            table,
        })
    }

    pub fn join(&self, a: &PowerState, b: &PowerState, c: &mut Counters) -> PowerState {
        c.base_ops += self.atoms.len();
        let table = a
            .table
            .iter()
            .zip(&b.table)
            .map(|(x, y)| self.base.join(x, y, c))
            .collect();
        PowerState {
            atoms: a.atoms.clone(),
            table,
        }
    }

    pub fn widen(&self, a: &PowerState, b: &PowerState, c: &mut Counters) -> PowerState {
        c.base_ops += self.atoms.len();
        let table = a
            .table
            .iter()
            .zip(&b.table)
            .map(|(x, y)| self.base.widen(x, y, c))
            .collect();
        PowerState {
            atoms: a.atoms.clone(),
            table,
        }
    }

    pub fn leq(&self, a: &PowerState, b: &PowerState, c: &mut Counters) -> bool {
        c.base_ops += self.atoms.len();
        let flags: Vec<bool> = a
            .table
            .iter()
            .zip(&b.table)
            .map(|(x, y)| self.base.leq(x, y, c))
            .collect();
        flags.into_iter().all(|f| f)
    }

    /// Proved when every reachable atom proves the condition.
    pub fn prover(&self, ps: &PowerState, cond: &Cond) -> Result<Option<&'static str>> {
        if ps.is_bottom() {
            return Ok(Some("unreachable"));
        }
        let mut by = None;
        for s in ps.table.iter().filter(|s| !s.is_bottom()) {
            match self.base.prover(s, cond)? {
                Some(p) => by = by.or(Some(p)),
                None => return Ok(None),
            }
        }
        Ok(by.or(Some("power")))
    }
}
