use std::collections::BTreeSet;
use std::fmt;

use super::ValueDomain;
use crate::frontend::ast::RelOp;
use crate::lattice::{Abstraction, Concretize, Domain, DomainDescriptor, FiniteLattice, Lattice};

/// The four-element parity lattice: bottom, odd, even, top.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Bottom,
    Odd,
    Even,
    Top,
}

impl Parity {
    const fn bits(self) -> u8 {
        match self {
            Parity::Bottom => 0b00,
            Parity::Odd => 0b01,
            Parity::Even => 0b10,
            Parity::Top => 0b11,
        }
    }

    const fn from_bits(b: u8) -> Self {
        match b & 0b11 {
            0b00 => Parity::Bottom,
            0b01 => Parity::Odd,
            0b10 => Parity::Even,
            _ => Parity::Top,
        }
    }

    pub fn of(v: i64) -> Self {
        if v.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl Lattice for Parity {
    fn bottom() -> Self {
        Parity::Bottom
    }

    fn top() -> Self {
        Parity::Top
    }

    fn leq(&self, other: &Self) -> bool {
        self.bits() & !other.bits() == 0
    }

    fn join(&self, other: &Self) -> Self {
        Parity::from_bits(self.bits() | other.bits())
    }

    fn meet(&self, other: &Self) -> Self {
        Parity::from_bits(self.bits() & other.bits())
    }
}

impl Domain for Parity {
    fn descriptor() -> DomainDescriptor {
        DomainDescriptor {
            name: "parity",
            has_finite_height: true,
            widening_is_join: true,
        }
    }
}

impl FiniteLattice for Parity {
    fn elements() -> Vec<Self> {
        vec![Parity::Bottom, Parity::Odd, Parity::Even, Parity::Top]
    }
}

impl Concretize for Parity {
    fn contains(&self, v: i64) -> bool {
        Parity::of(v).leq(self)
    }
}

impl Abstraction for Parity {
    fn alpha(values: &BTreeSet<i64>) -> Self {
        values
            .iter()
            .fold(Parity::Bottom, |acc, v| acc.join(&Parity::of(*v)))
    }
}

impl ValueDomain for Parity {
    fn constant(k: i64) -> Self {
        Parity::of(k)
    }

    fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Parity::Bottom, _) | (_, Parity::Bottom) => Parity::Bottom,
            (Parity::Top, _) | (_, Parity::Top) => Parity::Top,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }

    fn scale(&self, k: i64) -> Self {
        match self {
            Parity::Bottom => Parity::Bottom,
            _ if k % 2 == 0 => Parity::Even,
            p => *p,
        }
    }

    fn refine(&self, op: RelOp, other: &Self) -> Self {
        if other.is_bottom() {
            return Parity::Bottom;
        }
        match op {
            RelOp::Eq => self.meet(other),
            _ => *self,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Bottom => "bot",
            Parity::Odd => "o",
            Parity::Even => "e",
            Parity::Top => "top",
        })
    }
}

impl fmt::Debug for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
