use std::collections::BTreeSet;
use std::fmt;

use super::ValueDomain;
use crate::frontend::ast::RelOp;
use crate::lattice::{Abstraction, Concretize, Domain, DomainDescriptor, Lattice};

/// Modulus-only congruences `mZ`, ordered by divisibility.
///
/// `Mod(0)` is `{0}` and `Mod(1)` is every integer.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum CongruenceMod {
    Bottom,
    Mod(u64),
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Least common multiple, `None` on overflow. `lcm(0, x) = 0`.
pub fn lcm(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

impl CongruenceMod {
    pub const TOP: CongruenceMod = CongruenceMod::Mod(1);

    pub fn modulus(&self) -> Option<u64> {
        match self {
            CongruenceMod::Bottom => None,
            CongruenceMod::Mod(m) => Some(*m),
        }
    }
}

impl Lattice for CongruenceMod {
    fn bottom() -> Self {
        CongruenceMod::Bottom
    }

    fn top() -> Self {
        CongruenceMod::TOP
    }

    fn leq(&self, other: &Self) -> bool {
        match (self, other) {
            (CongruenceMod::Bottom, _) => true,
            (_, CongruenceMod::Bottom) => false,
            (CongruenceMod::Mod(m), CongruenceMod::Mod(0)) => *m == 0,
            (CongruenceMod::Mod(m), CongruenceMod::Mod(n)) => m % n == 0,
        }
    }

    fn join(&self, other: &Self) -> Self {
        match (self, other) {
            (CongruenceMod::Bottom, x) | (x, CongruenceMod::Bottom) => *x,
            (CongruenceMod::Mod(m), CongruenceMod::Mod(n)) => CongruenceMod::Mod(gcd(*m, *n)),
        }
    }

    fn meet(&self, other: &Self) -> Self {
        match (self, other) {
            (CongruenceMod::Bottom, _) | (_, CongruenceMod::Bottom) => CongruenceMod::Bottom,
            // An unrepresentable lcm still lies below both; `{0}` is a member of every mZ.
            (CongruenceMod::Mod(m), CongruenceMod::Mod(n)) => {
                CongruenceMod::Mod(lcm(*m, *n).unwrap_or(0))
            }
        }
    }
}

impl Domain for CongruenceMod {
    fn descriptor() -> DomainDescriptor {
        DomainDescriptor {
            name: "congruence",
            has_finite_height: false,
            widening_is_join: true,
        }
    }
}

impl Concretize for CongruenceMod {
    fn contains(&self, v: i64) -> bool {
        match self {
            CongruenceMod::Bottom => false,
            CongruenceMod::Mod(0) => v == 0,
            CongruenceMod::Mod(m) => v.unsigned_abs().is_multiple_of(*m),
        }
    }
}

impl Abstraction for CongruenceMod {
    fn alpha(values: &BTreeSet<i64>) -> Self {
        values.iter().fold(CongruenceMod::Bottom, |acc, v| {
            acc.join(&CongruenceMod::constant(*v))
        })
    }
}

impl ValueDomain for CongruenceMod {
    fn constant(k: i64) -> Self {
        CongruenceMod::Mod(k.unsigned_abs())
    }

    fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (CongruenceMod::Bottom, _) | (_, CongruenceMod::Bottom) => CongruenceMod::Bottom,
            (a, b) => a.join(b),
        }
    }

    fn scale(&self, k: i64) -> Self {
        match self {
            CongruenceMod::Bottom => CongruenceMod::Bottom,
            // k * mZ is inside mZ, so keeping m is a sound fallback on overflow.
            CongruenceMod::Mod(m) => {
                CongruenceMod::Mod(m.checked_mul(k.unsigned_abs()).unwrap_or(*m))
            }
        }
    }

    fn refine(&self, op: RelOp, other: &Self) -> Self {
        if other.is_bottom() {
            return CongruenceMod::Bottom;
        }
        match op {
            RelOp::Eq => self.meet(other),
            _ => *self,
        }
    }
}

impl fmt::Display for CongruenceMod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CongruenceMod::Bottom => write!(f, "bot"),
            CongruenceMod::Mod(m) => write!(f, "{m}Z"),
        }
    }
}

impl fmt::Debug for CongruenceMod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::FiniteUniverse;

    // Smallest modulus whose multiples in [-64..64] cover both inputs' members.
    fn join_oracle(m: u64, n: u64) -> u64 {
        let u = FiniteUniverse::new(-64, 64).unwrap();
        let members: BTreeSet<i64> = CongruenceMod::Mod(m)
            .gamma_enum(&u)
            .union(&CongruenceMod::Mod(n).gamma_enum(&u))
            .copied()
            .collect();
        (1..=64u64)
            .rev()
            .find(|d| members.iter().all(|v| v.unsigned_abs() % d == 0))
            .unwrap_or(0)
    }

    #[test]
    fn join_matches_enumeration() {
        assert_eq!(
            CongruenceMod::Mod(4).join(&CongruenceMod::Mod(6)),
            CongruenceMod::Mod(join_oracle(4, 6))
        );
        assert_eq!(join_oracle(4, 6), 2);
    }

    #[test]
    fn order_is_divisibility() {
        assert!(CongruenceMod::Mod(4).leq(&CongruenceMod::Mod(2)));
        assert!(!CongruenceMod::Mod(2).leq(&CongruenceMod::Mod(4)));
        assert!(CongruenceMod::Mod(0).leq(&CongruenceMod::Mod(7)));
        assert!(!CongruenceMod::Mod(7).leq(&CongruenceMod::Mod(0)));
        assert_eq!(
            CongruenceMod::Mod(4).meet(&CongruenceMod::Mod(6)),
            CongruenceMod::Mod(12)
        );
    }

    #[test]
    fn multiples_of_three() {
        let u = FiniteUniverse::new(-4, 4).unwrap();
        assert_eq!(
            CongruenceMod::Mod(3).gamma_enum(&u),
            BTreeSet::from([-3, 0, 3])
        );
        assert_eq!(CongruenceMod::Mod(0).gamma_enum(&u), BTreeSet::from([0]));
    }

    #[test]
    fn constants_take_their_absolute_value() {
        assert_eq!(CongruenceMod::constant(4), CongruenceMod::Mod(4));
        assert_eq!(CongruenceMod::constant(-6), CongruenceMod::Mod(6));
        assert_eq!(
            CongruenceMod::Mod(4).add(&CongruenceMod::Mod(6)),
            CongruenceMod::Mod(2)
        );
        assert_eq!(
            CongruenceMod::Bottom.add(&CongruenceMod::Mod(6)),
            CongruenceMod::Bottom
        );
    }
}
