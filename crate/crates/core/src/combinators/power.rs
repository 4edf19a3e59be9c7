use std::collections::BTreeSet;
use std::fmt;

use super::{Applied, OpKind};
use crate::error::{Error, Result};
use crate::lattice::{Abstraction, Concretize, FiniteUniverse, Lattice};

/// A finite map from pairwise-disjoint exponent atoms to base values.
/// The value at any other exponent element is induced by joining the
/// entries of the atoms it overlaps, which makes the full map isotone.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PowerValue<E, B> {
    atoms: Vec<E>,
    table: Vec<B>,
}

impl<E: Lattice, B: Lattice> PowerValue<E, B> {
    pub fn new(atoms: Vec<E>, table: Vec<B>) -> Result<Self> {
        if atoms.len() != table.len() {
            return Err(Error::AtomMismatch);
        }
        check_disjoint(&atoms)?;
        Ok(PowerValue { atoms, table })
    }

    pub fn uniform(atoms: Vec<E>, value: B) -> Result<Self> {
        let table = vec![value; atoms.len()];
        PowerValue::new(atoms, table)
    }

    pub fn bottom_over(atoms: Vec<E>) -> Result<Self> {
        PowerValue::uniform(atoms, B::bottom())
    }

    pub fn atoms(&self) -> &[E] {
        &self.atoms
    }

    pub fn entries(&self) -> impl Iterator<Item = (&E, &B)> {
        self.atoms.iter().zip(&self.table)
    }

    pub fn get(&self, atom: &E) -> Option<&B> {
        self.atoms
            .iter()
            .position(|a| a == atom)
            .map(|i| &self.table[i])
    }

    pub fn entry_mut(&mut self, i: usize) -> &mut B {
        &mut self.table[i]
    }

    pub fn is_bottom(&self) -> bool {
        self.table.iter().all(Lattice::is_bottom)
    }

    /// Value of the induced map at `x`: the join of the entries of every atom
    /// that `x` overlaps.
    pub fn induced(&self, x: &E) -> B {
        self.entries()
            .filter(|(a, _)| !a.meet(x).is_bottom())
            .fold(B::bottom(), |acc, (_, b)| acc.join(b))
    }

    /// Every join of a subset of the atoms, bottom included.
    pub fn completion(&self) -> Vec<E> {
        let mut out = vec![E::bottom()];
        for a in &self.atoms {
            let extended: Vec<E> = out.iter().map(|x| x.join(a)).collect();
            out.extend(extended);
        }
        out
    }

    /// Whether the induced map is isotone over `samples`.
    pub fn is_isotone_on(&self, samples: &[E]) -> bool {
        samples.iter().all(|x| {
            samples
                .iter()
                .all(|y| !x.leq(y) || self.induced(x).leq(&self.induced(y)))
        })
    }

    fn same_atoms(&self, other: &Self) -> Result<()> {
        if self.atoms == other.atoms {
            Ok(())
        } else {
            Err(Error::AtomMismatch)
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&B, &B) -> B) -> Result<Self> {
        self.same_atoms(other)?;
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(PowerValue {
            atoms: self.atoms.clone(),
            table,
        })
    }

    pub fn leq(&self, other: &Self) -> Result<bool> {
        self.same_atoms(other)?;
        // No short-circuit: one base comparison per atom.
        let flags: Vec<bool> = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| a.leq(b))
            .collect();
        Ok(flags.into_iter().all(|f| f))
    }

    pub fn join(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, B::join)
    }

    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, B::meet)
    }

    pub fn widen(&self, newer: &Self) -> Result<Self> {
        self.zip_with(newer, B::widen)
    }
}

fn check_disjoint<E: Lattice>(atoms: &[E]) -> Result<()> {
    for (i, a) in atoms.iter().enumerate() {
        for b in &atoms[i + 1..] {
            if !a.meet(b).is_bottom() {
                return Err(Error::Config(format!(
                    "exponent atoms {a:?} and {b:?} overlap"
                )));
            }
        }
    }
    Ok(())
}

/// Applies a lattice operation atom by atom.
pub fn power_pointwise<E: Lattice, B: Lattice>(
    kind: OpKind,
    f: &PowerValue<E, B>,
    g: &PowerValue<E, B>,
) -> Result<Applied<PowerValue<E, B>>> {
    Ok(match kind {
        OpKind::Leq => Applied::Flag(f.leq(g)?),
        OpKind::Join => Applied::Value(f.join(g)?),
        OpKind::Meet => Applied::Value(f.meet(g)?),
        OpKind::Widen => Applied::Value(f.widen(g)?),
    })
}

/// The best abstraction of a finite concrete set: each atom maps to the
/// abstraction of the members it contains.
pub fn power_abstract<E, B>(
    c: &BTreeSet<i64>,
    atoms: &[E],
    u: &FiniteUniverse,
) -> Result<PowerValue<E, B>>
where
    E: Lattice + Concretize,
    B: Lattice + Abstraction,
{
    for (i, a) in atoms.iter().enumerate() {
        let ga = a.gamma_enum(u);
        if atoms[i + 1..]
            .iter()
            .any(|b| !ga.is_disjoint(&b.gamma_enum(u)))
        {
            return Err(Error::Config(format!(
                "exponent atom {a:?} overlaps another atom"
            )));
        }
    }
    let table = atoms
        .iter()
        .map(|a| {
            let ga = a.gamma_enum(u);
            B::alpha(&c.intersection(&ga).copied().collect())
        })
        .collect();
    Ok(PowerValue {
        atoms: atoms.to_vec(),
        table,
    })
}

impl<E: fmt::Display, B: fmt::Display> fmt::Display for PowerValue<E, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, b)) in self.atoms.iter().zip(&self.table).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a} -> {b}")?;
        }
        f.write_str("}")
    }
}

impl<E: fmt::Debug, B: fmt::Debug> fmt::Debug for PowerValue<E, B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.atoms.iter().zip(&self.table))
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinators::{instrument, Counted};
    use crate::domains::{BoolAbs, Interval, Parity, Sign};

    fn parity_atoms() -> Vec<Parity> {
        vec![Parity::Odd, Parity::Even]
    }

    #[test]
    fn pointwise_join_leq_widen() {
        let f = PowerValue::new(
            parity_atoms(),
            vec![Interval::Bottom, Interval::finite(-16, 0)],
        )
        .unwrap();
        let g = PowerValue::new(
            parity_atoms(),
            vec![Interval::singleton(-16), Interval::Bottom],
        )
        .unwrap();
        let j = f.join(&g).unwrap();
        assert_eq!(j.get(&Parity::Odd), Some(&Interval::singleton(-16)));
        assert_eq!(j.get(&Parity::Even), Some(&Interval::finite(-16, 0)));

        let bools = vec![BoolAbs::True, BoolAbs::False];
        let p = PowerValue::new(bools.clone(), vec![Sign::BOTTOM, Sign::ZERO]).unwrap();
        let q = PowerValue::new(bools, vec![Sign::POS, Sign::NON_POS]).unwrap();
        assert!(p.leq(&q).unwrap());

        let w0 = PowerValue::new(vec![Parity::Odd], vec![Interval::singleton(0)]).unwrap();
        let w1 = PowerValue::new(vec![Parity::Odd], vec![Interval::finite(0, 1)]).unwrap();
        assert_eq!(
            w0.widen(&w1).unwrap().get(&Parity::Odd),
            Some(&Interval::at_least(0))
        );
    }

    #[test]
    fn mismatched_atoms_are_rejected() {
        let f = PowerValue::new(parity_atoms(), vec![Interval::Bottom; 2]).unwrap();
        let g =
            PowerValue::new(vec![Parity::Even, Parity::Odd], vec![Interval::Bottom; 2]).unwrap();
        assert_eq!(f.join(&g), Err(Error::AtomMismatch));
        assert!(PowerValue::<Parity, Interval>::new(
            vec![Parity::Odd, Parity::Top],
            vec![Interval::Bottom; 2]
        )
        .is_err());
    }

    #[test]
    fn abstraction_splits_by_atom() {
        let u = FiniteUniverse::new(-16, 16).unwrap();
        let f: PowerValue<Parity, Interval> =
            power_abstract(&BTreeSet::from([3]), &parity_atoms(), &u).unwrap();
        assert_eq!(f.get(&Parity::Odd), Some(&Interval::singleton(3)));
        assert_eq!(f.get(&Parity::Even), Some(&Interval::Bottom));
        let f: PowerValue<Parity, Interval> =
            power_abstract(&BTreeSet::new(), &parity_atoms(), &u).unwrap();
        assert!(f.is_bottom());
        let f: PowerValue<Parity, Interval> =
            power_abstract(&BTreeSet::from([-16, 0]), &parity_atoms(), &u).unwrap();
        assert_eq!(f.get(&Parity::Odd), Some(&Interval::Bottom));
        assert_eq!(f.get(&Parity::Even), Some(&Interval::finite(-16, 0)));
    }

    #[test]
    fn induced_map_is_isotone() {
        let f = PowerValue::new(
            parity_atoms(),
            vec![Interval::singleton(3), Interval::finite(-2, 0)],
        )
        .unwrap();
        assert!(f.is_isotone_on(&f.completion()));
        assert_eq!(f.induced(&Parity::Top), Interval::finite(-2, 3));
        assert_eq!(f.induced(&Parity::Bottom), Interval::Bottom);
    }

    #[test]
    fn one_base_operation_per_atom() {
        let atoms = vec![
            Interval::at_most(-1),
            Interval::singleton(0),
            Interval::finite(1, 5),
            Interval::at_least(6),
        ];
        let f = PowerValue::uniform(atoms.clone(), Counted(Parity::Odd)).unwrap();
        let g = PowerValue::uniform(atoms, Counted(Parity::Even)).unwrap();
        for kind in OpKind::ALL {
            let (_, counts) = instrument(|| power_pointwise(kind, &f, &g).unwrap());
            assert_eq!(counts.get("parity", kind), 4, "{kind:?}");
            assert_eq!(counts.total("parity"), 4);
        }
    }
}
