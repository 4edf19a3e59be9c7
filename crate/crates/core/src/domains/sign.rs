use std::collections::BTreeSet;
use std::fmt;

use super::{Interval, ValueDomain};
use crate::frontend::ast::RelOp;
use crate::lattice::{Abstraction, Concretize, Domain, DomainDescriptor, FiniteLattice, Lattice};

const NEG: u8 = 0b100;
const ZERO: u8 = 0b010;
const POS: u8 = 0b001;

/// The eight-element sign lattice, represented as a subset of {-, 0, +}.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sign(u8);

impl Sign {
    pub const BOTTOM: Sign = Sign(0);
    pub const NEG: Sign = Sign(NEG);
    pub const ZERO: Sign = Sign(ZERO);
    pub const POS: Sign = Sign(POS);
    /// `<= 0`
    pub const NON_POS: Sign = Sign(NEG | ZERO);
    /// `>= 0`
    pub const NON_NEG: Sign = Sign(ZERO | POS);
    pub const NON_ZERO: Sign = Sign(NEG | POS);
    pub const TOP: Sign = Sign(NEG | ZERO | POS);

    pub fn of(v: i64) -> Sign {
        match v.signum() {
            -1 => Sign::NEG,
            0 => Sign::ZERO,
            _ => Sign::POS,
        }
    }

    fn atoms(self) -> impl Iterator<Item = Sign> {
        [NEG, ZERO, POS]
            .into_iter()
            .filter(move |b| self.0 & b != 0)
            .map(Sign)
    }

    /// The interval hull of a single sign atom.
    fn atom_range(self) -> Interval {
        match self.0 {
            NEG => Interval::at_most(-1),
            ZERO => Interval::singleton(0),
            _ => Interval::at_least(1),
        }
    }

    fn from_range(i: &Interval) -> Sign {
        [NEG, ZERO, POS]
            .into_iter()
            .map(Sign)
            .filter(|a| !a.atom_range().meet(i).is_bottom())
            .fold(Sign::BOTTOM, |acc, a| acc.join(&a))
    }

    pub fn negate(self) -> Sign {
        let mut out = self.0 & ZERO;
        if self.0 & NEG != 0 {
            out |= POS;
        }
        if self.0 & POS != 0 {
            out |= NEG;
        }
        Sign(out)
    }
}

impl Lattice for Sign {
    fn bottom() -> Self {
        Sign::BOTTOM
    }

    fn top() -> Self {
        Sign::TOP
    }

    fn leq(&self, other: &Self) -> bool {
        self.0 & !other.0 == 0
    }

    fn join(&self, other: &Self) -> Self {
        Sign(self.0 | other.0)
    }

    fn meet(&self, other: &Self) -> Self {
        Sign(self.0 & other.0)
    }
}

impl Domain for Sign {
    fn descriptor() -> DomainDescriptor {
        DomainDescriptor {
            name: "sign",
            has_finite_height: true,
            widening_is_join: true,
        }
    }
}

impl FiniteLattice for Sign {
    fn elements() -> Vec<Self> {
        (0..8).map(Sign).collect()
    }
}

impl Concretize for Sign {
    fn contains(&self, v: i64) -> bool {
        Sign::of(v).leq(self)
    }
}

impl Abstraction for Sign {
    fn alpha(values: &BTreeSet<i64>) -> Self {
        values
            .iter()
            .fold(Sign::BOTTOM, |acc, v| acc.join(&Sign::of(*v)))
    }
}

impl ValueDomain for Sign {
    fn constant(k: i64) -> Self {
        Sign::of(k)
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = Sign::BOTTOM;
        for a in self.atoms() {
            for b in other.atoms() {
                out = out.join(&Sign::from_range(&a.atom_range().add(&b.atom_range())));
            }
        }
        out
    }

    // Exact image: each atom is shifted as an interval, then re-abstracted.
    fn add_const(&self, k: i64) -> Self {
        self.atoms().fold(Sign::BOTTOM, |acc, a| {
            acc.join(&Sign::from_range(&a.atom_range().add_const(k)))
        })
    }

    fn scale(&self, k: i64) -> Self {
        match k.signum() {
            0 if self.is_bottom() => Sign::BOTTOM,
            0 => Sign::ZERO,
            1 => *self,
            _ => self.negate(),
        }
    }

    /// Keeps the atoms of `self` that can stand in relation `op` to some atom of `other`.
    fn refine(&self, op: RelOp, other: &Self) -> Self {
        self.atoms()
            .filter(|a| {
                other
                    .atoms()
                    .any(|b| !a.atom_range().refine(op, &b.atom_range()).is_bottom())
            })
            .fold(Sign::BOTTOM, |acc, a| acc.join(&a))
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "bot",
            NEG => "-",
            ZERO => "0",
            POS => "+",
            0b110 => "0-",
            0b011 => "0+",
            0b101 => "!=0",
            _ => "top",
        })
    }
}

impl fmt::Debug for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
