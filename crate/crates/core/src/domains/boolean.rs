use std::collections::BTreeSet;
use std::fmt;

use crate::lattice::{Abstraction, Concretize, Domain, DomainDescriptor, FiniteLattice, Lattice};

/// Flat lattice of booleans. Concretizes over `{0, 1}` with 1 for true.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoolAbs {
    Bottom,
    True,
    False,
    Top,
}

impl BoolAbs {
    pub fn of(b: bool) -> Self {
        if b {
            BoolAbs::True
        } else {
            BoolAbs::False
        }
    }

    pub fn may_be(&self, b: bool) -> bool {
        BoolAbs::of(b).leq(self)
    }

    pub fn not(&self) -> Self {
        match self {
            BoolAbs::True => BoolAbs::False,
            BoolAbs::False => BoolAbs::True,
            x => *x,
        }
    }
}

impl Lattice for BoolAbs {
    fn bottom() -> Self {
        BoolAbs::Bottom
    }

    fn top() -> Self {
        BoolAbs::Top
    }

    fn leq(&self, other: &Self) -> bool {
        matches!((self, other), (BoolAbs::Bottom, _) | (_, BoolAbs::Top)) || self == other
    }

    fn join(&self, other: &Self) -> Self {
        match (self, other) {
            (BoolAbs::Bottom, x) | (x, BoolAbs::Bottom) => *x,
            (a, b) if a == b => *a,
            _ => BoolAbs::Top,
        }
    }

    fn meet(&self, other: &Self) -> Self {
        match (self, other) {
            (BoolAbs::Top, x) | (x, BoolAbs::Top) => *x,
            (a, b) if a == b => *a,
            _ => BoolAbs::Bottom,
        }
    }
}

impl Domain for BoolAbs {
    fn descriptor() -> DomainDescriptor {
        DomainDescriptor {
            name: "bool",
            has_finite_height: true,
            widening_is_join: true,
        }
    }
}

impl FiniteLattice for BoolAbs {
    fn elements() -> Vec<Self> {
        vec![BoolAbs::Bottom, BoolAbs::True, BoolAbs::False, BoolAbs::Top]
    }
}

impl Concretize for BoolAbs {
    fn contains(&self, v: i64) -> bool {
        match v {
            0 => self.may_be(false),
            1 => self.may_be(true),
            _ => false,
        }
    }
}

impl Abstraction for BoolAbs {
    fn alpha(values: &BTreeSet<i64>) -> Self {
        values
            .iter()
            .filter(|v| **v == 0 || **v == 1)
            .fold(BoolAbs::Bottom, |acc, v| acc.join(&BoolAbs::of(*v == 1)))
    }
}

impl fmt::Display for BoolAbs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoolAbs::Bottom => "bot",
            BoolAbs::True => "tt",
            BoolAbs::False => "ff",
            BoolAbs::Top => "top",
        })
    }
}

impl fmt::Debug for BoolAbs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_order() {
        assert!(BoolAbs::True.leq(&BoolAbs::Top));
        assert!(!BoolAbs::True.leq(&BoolAbs::False));
        assert_eq!(BoolAbs::True.join(&BoolAbs::False), BoolAbs::Top);
        assert_eq!(BoolAbs::True.meet(&BoolAbs::False), BoolAbs::Bottom);
        assert_eq!(BoolAbs::Top.not(), BoolAbs::Top);
    }
}
