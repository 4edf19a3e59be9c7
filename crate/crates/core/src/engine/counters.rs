use std::collections::BTreeMap;

use serde::Serialize;

/// Per-component operation tallies of one analysis run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ComponentCounts {
    pub leq: usize,
    pub join: usize,
    pub meet: usize,
    pub widen: usize,
    pub transfer: usize,
    pub assume: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Leq,
    Join,
    Meet,
    Widen,
    Transfer,
    Assume,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub components: BTreeMap<&'static str, ComponentCounts>,
    /// Rule applications of the installed reductions.
    pub reductions: usize,
    /// Statement or guard applications on whole power states.
    pub power_transfers: usize,
    /// Statement or guard applications on single base states inside a power state.
    pub base_transfers: usize,
    /// Lattice operations on single base states inside a power state.
    pub base_ops: usize,
    /// Weak updates of array cells.
    pub cell_updates: usize,
    pub node_visits: usize,
}

impl Counters {
    pub fn bump(&mut self, component: &'static str, op: Op) {
        let c = self.components.entry(component).or_default();
        match op {
            Op::Leq => c.leq += 1,
            Op::Join => c.join += 1,
            Op::Meet => c.meet += 1,
            Op::Widen => c.widen += 1,
            Op::Transfer => c.transfer += 1,
            Op::Assume => c.assume += 1,
        }
    }

    pub fn get(&self, component: &str) -> ComponentCounts {
        self.components.get(component).copied().unwrap_or_default()
    }
}
