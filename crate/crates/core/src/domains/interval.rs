use std::collections::BTreeSet;
use std::fmt;

use super::ValueDomain;
use crate::frontend::ast::RelOp;
use crate::lattice::{Abstraction, Concretize, Domain, DomainDescriptor, Lattice};

/// Integer intervals with infinite bounds. `None` bounds are infinite.
///
/// Empty ranges never exist: constructors collapse them to [`Interval::Bottom`].
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interval {
    Bottom,
    Range { lo: Option<i64>, hi: Option<i64> },
}

impl Interval {
    pub fn new(lo: Option<i64>, hi: Option<i64>) -> Self {
        match (lo, hi) {
            (Some(l), Some(h)) if l > h => Interval::Bottom,
            _ => Interval::Range { lo, hi },
        }
    }

    pub fn finite(lo: i64, hi: i64) -> Self {
        Interval::new(Some(lo), Some(hi))
    }

    pub fn singleton(k: i64) -> Self {
        Interval::finite(k, k)
    }

    pub fn at_least(lo: i64) -> Self {
        Interval::new(Some(lo), None)
    }

    pub fn at_most(hi: i64) -> Self {
        Interval::new(None, Some(hi))
    }

    /// Lower bound, `None` for -inf. Meaningless on bottom.
    pub fn lo(&self) -> Option<i64> {
        match self {
            Interval::Range { lo, .. } => *lo,
            Interval::Bottom => None,
        }
    }

    pub fn hi(&self) -> Option<i64> {
        match self {
            Interval::Range { hi, .. } => *hi,
            Interval::Bottom => None,
        }
    }

    pub fn as_singleton(&self) -> Option<i64> {
        match self {
            Interval::Range {
                lo: Some(l),
                hi: Some(h),
            } if l == h => Some(*l),
            _ => None,
        }
    }

    fn map_bounds(
        &self,
        f: impl Fn(Option<i64>, Option<i64>) -> (Option<i64>, Option<i64>),
    ) -> Self {
        match self {
            Interval::Bottom => Interval::Bottom,
            Interval::Range { lo, hi } => {
                let (l, h) = f(*lo, *hi);
                Interval::new(l, h)
            }
        }
    }
}

fn lo_min(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    a.zip(b).map(|(a, b)| a.min(b))
}

fn lo_max(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (x, None) | (None, x) => x,
    }
}

fn hi_max(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    a.zip(b).map(|(a, b)| a.max(b))
}

fn hi_min(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (x, None) | (None, x) => x,
    }
}

// Bound arithmetic saturates to the corresponding infinity on overflow.
fn add_bound(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    a.zip(b).and_then(|(a, b)| a.checked_add(b))
}

fn le_lo(a: Option<i64>, b: Option<i64>) -> bool {
    match (a, b) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(a), Some(b)) => a <= b,
    }
}

fn ge_hi(a: Option<i64>, b: Option<i64>) -> bool {
    match (a, b) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(a), Some(b)) => a >= b,
    }
}

impl Lattice for Interval {
    fn bottom() -> Self {
        Interval::Bottom
    }

    fn top() -> Self {
        Interval::Range { lo: None, hi: None }
    }

    fn leq(&self, other: &Self) -> bool {
        match (self, other) {
            (Interval::Bottom, _) => true,
            (_, Interval::Bottom) => false,
            (a, b) => le_lo(b.lo(), a.lo()) && ge_hi(b.hi(), a.hi()),
        }
    }

    fn join(&self, other: &Self) -> Self {
        match (self, other) {
            (Interval::Bottom, x) | (x, Interval::Bottom) => *x,
            (a, b) => Interval::new(lo_min(a.lo(), b.lo()), hi_max(a.hi(), b.hi())),
        }
    }

    fn meet(&self, other: &Self) -> Self {
        match (self, other) {
            (Interval::Bottom, _) | (_, Interval::Bottom) => Interval::Bottom,
            (a, b) => Interval::new(lo_max(a.lo(), b.lo()), hi_min(a.hi(), b.hi())),
        }
    }

    fn widen(&self, newer: &Self) -> Self {
        match (self, newer) {
            (Interval::Bottom, x) => *x,
            (x, Interval::Bottom) => *x,
            (a, b) => {
                let lo = if le_lo(a.lo(), b.lo()) { a.lo() } else { None };
                let hi = if ge_hi(a.hi(), b.hi()) { a.hi() } else { None };
                Interval::new(lo, hi)
            }
        }
    }
}

impl Domain for Interval {
    fn descriptor() -> DomainDescriptor {
        DomainDescriptor {
            name: "interval",
            has_finite_height: false,
            widening_is_join: false,
        }
    }
}

impl Concretize for Interval {
    fn contains(&self, v: i64) -> bool {
        match self {
            Interval::Bottom => false,
            Interval::Range { lo, hi } => lo.is_none_or(|l| l <= v) && hi.is_none_or(|h| v <= h),
        }
    }
}

impl Abstraction for Interval {
    fn alpha(values: &BTreeSet<i64>) -> Self {
        match (values.first(), values.last()) {
            (Some(l), Some(h)) => Interval::finite(*l, *h),
            _ => Interval::Bottom,
        }
    }
}

impl ValueDomain for Interval {
    fn constant(k: i64) -> Self {
        Interval::singleton(k)
    }

    fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Interval::Bottom, _) | (_, Interval::Bottom) => Interval::Bottom,
            (a, b) => Interval::new(add_bound(a.lo(), b.lo()), add_bound(a.hi(), b.hi())),
        }
    }

    fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return if self.is_bottom() {
                Interval::Bottom
            } else {
                Interval::singleton(0)
            };
        }
        let mul = |b: Option<i64>| b.and_then(|b| b.checked_mul(k));
        self.map_bounds(|lo, hi| {
            if k > 0 {
                (mul(lo), mul(hi))
            } else {
                (mul(hi), mul(lo))
            }
        })
    }

    fn refine(&self, op: RelOp, other: &Self) -> Self {
        if self.is_bottom() || other.is_bottom() {
            return Interval::Bottom;
        }
        let dec = |b: Option<i64>| b.and_then(|b| b.checked_sub(1));
        let inc = |b: Option<i64>| b.and_then(|b| b.checked_add(1));
        let bound = match op {
            RelOp::Lt => Interval::new(None, dec(other.hi())),
            RelOp::Le => Interval::new(None, other.hi()),
            RelOp::Gt => Interval::new(inc(other.lo()), None),
            RelOp::Ge => Interval::new(other.lo(), None),
            RelOp::Eq => *other,
            RelOp::Ne => match other.as_singleton() {
                Some(k) => {
                    return self.map_bounds(|lo, hi| {
                        let lo = if lo == Some(k) { k.checked_add(1) } else { lo };
                        let hi = if hi == Some(k) { k.checked_sub(1) } else { hi };
                        (lo, hi)
                    })
                }
                None => Interval::top(),
            },
        };
        self.meet(&bound)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Interval::Bottom => write!(f, "bot"),
            Interval::Range { lo, hi } => {
                match lo {
                    Some(l) => write!(f, "[{l}..")?,
                    None => write!(f, "[-inf..")?,
                }
                match hi {
                    Some(h) => write!(f, "{h}]"),
                    None => write!(f, "+inf]"),
                }
            }
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::FiniteUniverse;

    #[test]
    fn order_and_hull() {
        assert!(Interval::finite(2, 3).leq(&Interval::finite(2, 4)));
        assert!(!Interval::finite(2, 4).leq(&Interval::finite(3, 4)));
        assert_eq!(
            Interval::finite(1, 2).join(&Interval::finite(4, 5)),
            Interval::finite(1, 5)
        );
        assert_eq!(
            Interval::finite(1, 2).meet(&Interval::finite(4, 5)),
            Interval::Bottom
        );
    }

    #[test]
    fn empty_ranges_collapse_to_bottom() {
        assert_eq!(Interval::finite(3, 1), Interval::Bottom);
        assert_eq!(
            Interval::finite(0, 0).refine(RelOp::Gt, &Interval::singleton(0)),
            Interval::Bottom
        );
    }

    #[test]
    fn widening_escalates_unstable_bounds() {
        assert_eq!(
            Interval::finite(0, 1).widen(&Interval::finite(0, 2)),
            Interval::at_least(0)
        );
        assert_eq!(
            Interval::finite(0, 5).widen(&Interval::finite(0, 5)),
            Interval::finite(0, 5)
        );
        assert_eq!(
            Interval::finite(0, 5).widen(&Interval::finite(-1, 5)),
            Interval::at_most(5)
        );
    }

    #[test]
    fn enumerated_concretization() {
        let u = FiniteUniverse::new(-4, 4).unwrap();
        assert_eq!(
            Interval::finite(2, 4).gamma_enum(&u),
            BTreeSet::from([2, 3, 4])
        );
        assert!(Interval::Bottom.gamma_enum(&u).is_empty());
        assert_eq!(Interval::top().gamma_enum(&u), u.all());
    }

    #[test]
    fn overflow_saturates_to_infinity() {
        let big = Interval::singleton(i64::MAX);
        assert_eq!(big.add_const(1), Interval::Range { lo: None, hi: None });
        assert_eq!(Interval::singleton(i64::MIN).scale(-1), Interval::top());
    }

    #[test]
    fn rendering() {
        assert_eq!(Interval::at_most(2).to_string(), "[-inf..2]");
        assert_eq!(Interval::at_least(3).to_string(), "[3..+inf]");
        assert_eq!(Interval::Bottom.to_string(), "bot");
    }
}
