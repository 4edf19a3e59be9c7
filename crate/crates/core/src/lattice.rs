//! The abstract-domain contract shared by every domain and combinator, plus
//! an exhaustive/sampled law checker over an enumerable test universe.

use std::collections::BTreeSet;
use std::fmt::Debug;

use crate::error::{Error, Result};

/// Per-domain operation set metadata.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DomainDescriptor {
    pub name: &'static str,
    pub has_finite_height: bool,
    /// True when widening is plain join (finite-height or ACC domains).
    pub widening_is_join: bool,
}

/// A complete lattice with widening. Values are kept in a canonical form so
/// that structural equality coincides with semantic equality.
pub trait Lattice: Clone + PartialEq + Debug {
    fn bottom() -> Self;
    fn top() -> Self;
    fn leq(&self, other: &Self) -> bool;
    fn join(&self, other: &Self) -> Self;
    fn meet(&self, other: &Self) -> Self;

    /// `self` is the previous iterate, `newer` the next one.
    fn widen(&self, newer: &Self) -> Self {
        self.join(newer)
    }

    fn is_bottom(&self) -> bool {
        *self == Self::bottom()
    }

    fn is_top(&self) -> bool {
        *self == Self::top()
    }
}

pub trait Domain: Lattice {
    fn descriptor() -> DomainDescriptor;
}

/// Domains whose elements can be listed exhaustively.
pub trait FiniteLattice: Lattice {
    fn elements() -> Vec<Self>;
}

/// The bounded integer universe `{lo..hi}` used for test-only concretization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiniteUniverse {
    lo: i64,
    hi: i64,
}

impl FiniteUniverse {
    pub const MAX_WIDTH: i64 = 256;

    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi || hi - lo > Self::MAX_WIDTH {
            return Err(Error::Universe { lo, hi });
        }
        Ok(FiniteUniverse { lo, hi })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn values(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn all(&self) -> BTreeSet<i64> {
        self.values().collect()
    }
}

/// Enumerated concretization of a single-variable abstract value.
pub trait Concretize {
    fn contains(&self, v: i64) -> bool;

    fn gamma_enum(&self, u: &FiniteUniverse) -> BTreeSet<i64> {
        u.values().filter(|v| self.contains(*v)).collect()
    }
}

/// Best abstraction of a finite set of integers.
pub trait Abstraction: Sized {
    fn alpha(values: &BTreeSet<i64>) -> Self;
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LawReport {
    pub checked: usize,
    pub violations: Vec<(String, String)>,
}

impl LawReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn check(&mut self, law: &str, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        // Keep reports readable when a broken operator fails everywhere.
        if !ok && self.violations.len() < 32 {
            self.violations.push((law.to_string(), witness()));
        }
    }

    pub fn merge(&mut self, other: LawReport) {
        self.checked += other.checked;
        self.violations.extend(other.violations);
    }
}

/// Maximum number of strict increases a widened sequence may take.
pub const WIDENING_ESCALATION_BOUND: usize = 64;

/// Checks lattice, Galois and widening laws over all pairs/triples of `samples`
/// for a single-variable domain.
pub fn check_laws<D: Domain + Concretize>(samples: &[D], u: &FiniteUniverse) -> LawReport {
    check_laws_with(&D::descriptor(), samples, |d| d.gamma_enum(u))
}

/// As [`check_laws`], with the concretization supplied by the caller.
pub fn check_laws_with<D, P, G>(desc: &DomainDescriptor, samples: &[D], gamma: G) -> LawReport
where
    D: Lattice,
    P: Ord + Clone,
    G: Fn(&D) -> BTreeSet<P>,
{
    let mut r = LawReport::default();
    assert!(!samples.is_empty(), "law checking needs samples");
    let gammas: Vec<BTreeSet<P>> = samples.iter().map(&gamma).collect();
    let bot = D::bottom();
    let top = D::top();
    r.check("gamma-bottom-empty", gamma(&bot).is_empty(), || {
        format!("{bot:?}")
    });

    for (i, a) in samples.iter().enumerate() {
        r.check("join-idempotent", a.join(a) == *a, || format!("{a:?}"));
        r.check("meet-idempotent", a.meet(a) == *a, || format!("{a:?}"));
        r.check("leq-reflexive", a.leq(a), || format!("{a:?}"));
        r.check("bottom-least", bot.leq(a), || format!("{a:?}"));
        r.check("top-greatest", a.leq(&top), || format!("{a:?}"));
        r.check("widen-stable", a.widen(a).leq(a), || format!("{a:?}"));
        check_widening_chain(desc, samples, i, &mut r);

        for (j, b) in samples.iter().enumerate() {
            let ab = a.join(b);
            let mab = a.meet(b);
            let w = || format!("{a:?}, {b:?}");
            r.check("join-commutative", ab == b.join(a), w);
            r.check("meet-commutative", mab == b.meet(a), w);
            r.check("absorption-join", a.join(&mab) == *a, w);
            r.check("absorption-meet", a.meet(&ab) == *a, w);
            r.check("join-upper-bound", a.leq(&ab) && b.leq(&ab), w);
            r.check("meet-lower-bound", mab.leq(a) && mab.leq(b), w);
            r.check("leq-join-consistent", a.leq(b) == (ab == *b), w);
            r.check("leq-antisymmetric", !(a.leq(b) && b.leq(a)) || a == b, w);
            r.check("widen-covers-join", ab.leq(&a.widen(b)), w);

            let (ga, gb) = (&gammas[i], &gammas[j]);
            r.check("gamma-monotone", !a.leq(b) || ga.is_subset(gb), w);
            let gab = gamma(&ab);
            r.check("gamma-join-sound", ga.union(gb).all(|p| gab.contains(p)), w);
            let gmab = gamma(&mab);
            r.check(
                "gamma-meet-sound",
                ga.intersection(gb).all(|p| gmab.contains(p)),
                w,
            );

            for c in samples {
                let w = || format!("{a:?}, {b:?}, {c:?}");
                r.check("join-associative", ab.join(c) == a.join(&b.join(c)), w);
                r.check("meet-associative", mab.meet(c) == a.meet(&b.meet(c)), w);
                r.check("leq-transitive", !(a.leq(b) && b.leq(c)) || a.leq(c), w);
            }
        }
    }
    r
}

/// Feeds the samples (twice over, starting at `start`) through `x := x ∇ (x ⊔ y)`
/// and requires at most [`WIDENING_ESCALATION_BOUND`] strict increases.
fn check_widening_chain<D: Lattice>(
    desc: &DomainDescriptor,
    samples: &[D],
    start: usize,
    r: &mut LawReport,
) {
    let mut x = samples[start].clone();
    let mut escalations = 0;
    let n = samples.len();
    for k in 0..2 * n {
        let y = &samples[(start + k) % n];
        let next = x.widen(&x.join(y));
        if !next.leq(&x) {
            escalations += 1;
        }
        x = next;
    }
    r.check(
        "widen-terminates",
        escalations <= WIDENING_ESCALATION_BOUND,
        || {
            format!(
                "{}: {escalations} escalations from {:?}",
                desc.name, samples[start]
            )
        },
    );
}

/// Every domain and combinator descriptor known to the crate.
pub fn registry() -> Vec<DomainDescriptor> {
    use crate::diff::DiffStore;
    use crate::domains::*;
    vec![
        Interval::descriptor(),
        Parity::descriptor(),
        Sign::descriptor(),
        CongruenceMod::descriptor(),
        BoolAbs::descriptor(),
        DiffStore::descriptor(),
    ]
}

/// Length (in edges) of the longest strictly increasing chain among `elements`.
pub fn longest_chain<T, F>(elements: &[T], leq: F) -> usize
where
    F: Fn(&T, &T) -> bool,
{
    let n = elements.len();
    let lt =
        |i: usize, j: usize| leq(&elements[i], &elements[j]) && !leq(&elements[j], &elements[i]);
    // Sort by number of strict predecessors, a linear extension of the order.
    let mut order: Vec<usize> = (0..n).collect();
    let below: Vec<usize> = (0..n)
        .map(|j| (0..n).filter(|&i| lt(i, j)).count())
        .collect();
    order.sort_by_key(|&i| below[i]);
    let mut depth = vec![0usize; n];
    for (pos, &j) in order.iter().enumerate() {
        for &i in &order[..pos] {
            if lt(i, j) {
                depth[j] = depth[j].max(depth[i] + 1);
            }
        }
    }
    depth.into_iter().max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universe_bounds() {
        assert!(FiniteUniverse::new(-4, 4).is_ok());
        assert!(FiniteUniverse::new(4, -4).is_err());
        assert!(FiniteUniverse::new(0, 257).is_err());
        assert_eq!(FiniteUniverse::new(-1, 1).unwrap().all().len(), 3);
    }

    #[test]
    fn registry_names_are_unique() {
        let reg = registry();
        let names: BTreeSet<_> = reg.iter().map(|d| d.name).collect();
        assert_eq!(names.len(), reg.len());
    }

    #[test]
    fn chain_of_a_total_order() {
        let xs = [3, 1, 2, 0];
        assert_eq!(longest_chain(&xs, |a, b| a <= b), 3);
        assert_eq!(longest_chain(&xs, |a, b| a == b), 0);
    }
}
