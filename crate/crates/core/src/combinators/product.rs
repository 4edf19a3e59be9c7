use std::collections::BTreeSet;
use std::fmt;

use super::OpKind;
use crate::lattice::{
    Concretize, Domain, DomainDescriptor, FiniteLattice, FiniteUniverse, Lattice,
};

/// An element of the product of two domains. Without a reduction the pair
/// need not be minimal: `([1..1], E)` denotes the empty set but is not bottom.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairValue<A, B> {
    pub left: A,
    pub right: B,
}

impl<A, B> PairValue<A, B> {
    pub fn new(left: A, right: B) -> Self {
        PairValue { left, right }
    }
}

impl<A: Lattice, B: Lattice> Lattice for PairValue<A, B> {
    fn bottom() -> Self {
        PairValue::new(A::bottom(), B::bottom())
    }

    fn top() -> Self {
        PairValue::new(A::top(), B::top())
    }

    // Both components are always evaluated: one operation per domain.
    fn leq(&self, other: &Self) -> bool {
        let l = self.left.leq(&other.left);
        let r = self.right.leq(&other.right);
        l && r
    }

    fn join(&self, other: &Self) -> Self {
        PairValue::new(self.left.join(&other.left), self.right.join(&other.right))
    }

    fn meet(&self, other: &Self) -> Self {
        PairValue::new(self.left.meet(&other.left), self.right.meet(&other.right))
    }

    fn widen(&self, newer: &Self) -> Self {
        PairValue::new(self.left.widen(&newer.left), self.right.widen(&newer.right))
    }
}

impl<A: Domain, B: Domain> Domain for PairValue<A, B> {
    fn descriptor() -> DomainDescriptor {
        let (a, b) = (A::descriptor(), B::descriptor());
        DomainDescriptor {
            name: "product",
            has_finite_height: a.has_finite_height && b.has_finite_height,
            widening_is_join: a.widening_is_join && b.widening_is_join,
        }
    }
}

impl<A: FiniteLattice, B: FiniteLattice> FiniteLattice for PairValue<A, B> {
    fn elements() -> Vec<Self> {
        let bs = B::elements();
        A::elements()
            .into_iter()
            .flat_map(|a| bs.iter().map(move |b| PairValue::new(a.clone(), b.clone())))
            .collect()
    }
}

/// The concretization of a pair is the intersection of its components'.
impl<A: Concretize, B: Concretize> Concretize for PairValue<A, B> {
    fn contains(&self, v: i64) -> bool {
        self.left.contains(v) && self.right.contains(v)
    }
}

pub fn pair_gamma<A: Concretize, B: Concretize>(
    p: &PairValue<A, B>,
    u: &FiniteUniverse,
) -> BTreeSet<i64> {
    p.gamma_enum(u)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Applied<T> {
    Flag(bool),
    Value(T),
}

impl<T> Applied<T> {
    pub fn flag(self) -> Option<bool> {
        match self {
            Applied::Flag(b) => Some(b),
            Applied::Value(_) => None,
        }
    }

    pub fn value(self) -> Option<T> {
        match self {
            Applied::Value(v) => Some(v),
            Applied::Flag(_) => None,
        }
    }
}

/// Applies a lattice operation component-wise.
pub fn cartesian_apply<A: Lattice, B: Lattice>(
    kind: OpKind,
    p: &PairValue<A, B>,
    q: &PairValue<A, B>,
) -> Applied<PairValue<A, B>> {
    match kind {
        OpKind::Leq => Applied::Flag(p.leq(q)),
        OpKind::Join => Applied::Value(p.join(q)),
        OpKind::Meet => Applied::Value(p.meet(q)),
        OpKind::Widen => Applied::Value(p.widen(q)),
    }
}

impl<A: fmt::Display, B: fmt::Display> fmt::Display for PairValue<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.left, self.right)
    }
}

impl<A: fmt::Debug, B: fmt::Debug> fmt::Debug for PairValue<A, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.left, self.right)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinators::{instrument, Counted};
    use crate::domains::{Interval, Parity};

    type IP = PairValue<Interval, Parity>;

    #[test]
    fn component_wise_operations() {
        let p = IP::new(Interval::finite(1, 2), Parity::Odd);
        let q = IP::new(Interval::finite(3, 4), Parity::Odd);
        assert_eq!(
            cartesian_apply(OpKind::Join, &p, &q).value(),
            Some(IP::new(Interval::finite(1, 4), Parity::Odd))
        );
        let a = IP::new(Interval::finite(2, 3), Parity::Odd);
        let b = IP::new(Interval::finite(2, 4), Parity::Top);
        assert_eq!(cartesian_apply(OpKind::Leq, &a, &b).flag(), Some(true));
        let w0 = IP::new(Interval::finite(0, 1), Parity::Even);
        let w1 = IP::new(Interval::finite(0, 2), Parity::Top);
        assert_eq!(
            cartesian_apply(OpKind::Widen, &w0, &w1).value(),
            Some(IP::new(Interval::at_least(0), Parity::Top))
        );
    }

    #[test]
    fn concretization_is_intersection() {
        let u = FiniteUniverse::new(-8, 8).unwrap();
        assert_eq!(
            pair_gamma(&IP::new(Interval::finite(2, 4), Parity::Odd), &u),
            BTreeSet::from([3])
        );
        assert!(pair_gamma(&IP::new(Interval::singleton(1), Parity::Even), &u).is_empty());
        assert_eq!(pair_gamma(&IP::top(), &u), u.all());
    }

    #[test]
    fn one_operation_per_component() {
        type C = PairValue<Counted<Interval>, Counted<Parity>>;
        let p = C::new(Counted(Interval::finite(0, 1)), Counted(Parity::Odd));
        let q = C::new(Counted(Interval::finite(5, 9)), Counted(Parity::Even));
        for kind in OpKind::ALL {
            let (_, counts) = instrument(|| cartesian_apply(kind, &p, &q));
            assert_eq!(counts.get("interval", kind), 1, "{kind:?}");
            assert_eq!(counts.get("parity", kind), 1, "{kind:?}");
            assert_eq!(counts.total("interval") + counts.total("parity"), 2);
        }
    }
}
