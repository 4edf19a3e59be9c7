//! Operation counting. `Counted<D>` behaves exactly like `D` but tallies every
//! lattice operation into a thread-local table, so a combinator's real call
//! pattern can be observed from the outside.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::lattice::{Concretize, Domain, DomainDescriptor, Lattice};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Leq,
    Join,
    Meet,
    Widen,
}

impl OpKind {
    pub const ALL: [OpKind; 4] = [OpKind::Leq, OpKind::Join, OpKind::Meet, OpKind::Widen];
}

/// Operation tallies keyed by domain name and operation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OpCounts {
    counts: BTreeMap<(&'static str, OpKind), usize>,
}

impl OpCounts {
    pub fn get(&self, domain: &str, kind: OpKind) -> usize {
        self.counts
            .iter()
            .filter(|((d, k), _)| *d == domain && *k == kind)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn total(&self, domain: &str) -> usize {
        OpKind::ALL.iter().map(|k| self.get(domain, *k)).sum()
    }

    pub fn bump(&mut self, domain: &'static str, kind: OpKind) {
        *self.counts.entry((domain, kind)).or_default() += 1;
    }
}

thread_local! {
    static COUNTS: RefCell<OpCounts> = RefCell::new(OpCounts::default());
}

/// Runs `f` with fresh counters and returns its result with the operations it performed.
pub fn instrument<T>(f: impl FnOnce() -> T) -> (T, OpCounts) {
    let saved = COUNTS.with(|c| std::mem::take(&mut *c.borrow_mut()));
    let out = f();
    let counts = COUNTS.with(|c| std::mem::replace(&mut *c.borrow_mut(), saved));
    (out, counts)
}

fn bump<D: Domain>(kind: OpKind) {
    COUNTS.with(|c| c.borrow_mut().bump(D::descriptor().name, kind));
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Counted<D>(pub D);

impl<D: Domain> Lattice for Counted<D> {
    fn bottom() -> Self {
        Counted(D::bottom())
    }

    fn top() -> Self {
        Counted(D::top())
    }

    fn leq(&self, other: &Self) -> bool {
        bump::<D>(OpKind::Leq);
        self.0.leq(&other.0)
    }

    fn join(&self, other: &Self) -> Self {
        bump::<D>(OpKind::Join);
        Counted(self.0.join(&other.0))
    }

    fn meet(&self, other: &Self) -> Self {
        bump::<D>(OpKind::Meet);
        Counted(self.0.meet(&other.0))
    }

    fn widen(&self, newer: &Self) -> Self {
        bump::<D>(OpKind::Widen);
        Counted(self.0.widen(&newer.0))
    }

    fn is_bottom(&self) -> bool {
        self.0.is_bottom()
    }

    fn is_top(&self) -> bool {
        self.0.is_top()
    }
}

impl<D: Domain> Domain for Counted<D> {
    fn descriptor() -> DomainDescriptor {
        D::descriptor()
    }
}

impl<D: Concretize> Concretize for Counted<D> {
    fn contains(&self, v: i64) -> bool {
        self.0.contains(v)
    }
}

impl<D: fmt::Debug> fmt::Debug for Counted<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::Parity;

    #[test]
    fn instrument_isolates_counts() {
        let (_, outer) = instrument(|| {
            Counted(Parity::Odd).join(&Counted(Parity::Even));
            let (_, inner) = instrument(|| Counted(Parity::Odd).leq(&Counted(Parity::Top)));
            assert_eq!(inner.get("parity", OpKind::Leq), 1);
            assert_eq!(inner.get("parity", OpKind::Join), 0);
        });
        assert_eq!(outer.get("parity", OpKind::Join), 1);
        assert_eq!(outer.get("parity", OpKind::Leq), 0);
    }
}
