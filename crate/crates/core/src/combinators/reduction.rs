use super::PairValue;
use crate::diff::DiffStore;
use crate::domains::{CongruenceMod, Env, Interval, Parity};
use crate::lattice::Lattice;

/// A pair of one-sided refinements. Each must be reductive and keep the
/// concretization of the pair unchanged.
pub trait ReductionRule<A, B> {
    /// Refines the left component using the right one.
    fn rho1(&self, a: &A, b: &B) -> A;
    /// Refines the right component using the left one.
    fn rho2(&self, a: &A, b: &B) -> B;
}

pub const DEFAULT_REDUCTION_CAP: usize = 100;

fn normalize<A: Lattice, B: Lattice>(p: PairValue<A, B>) -> PairValue<A, B> {
    if p.left.is_bottom() || p.right.is_bottom() {
        PairValue::bottom()
    } else {
        p
    }
}

/// Iterates both refinements simultaneously until stable or `cap` rounds.
/// Every iterate is already a valid reduction, so stopping at the cap is sound.
pub fn reduce_fixpoint<A, B, R>(rule: &R, p: &PairValue<A, B>, cap: usize) -> PairValue<A, B>
where
    A: Lattice,
    B: Lattice,
    R: ReductionRule<A, B> + ?Sized,
{
    reduce_counting(rule, p, cap).0
}

/// As [`reduce_fixpoint`], also returning the number of rounds that changed the pair.
pub fn reduce_counting<A, B, R>(
    rule: &R,
    p: &PairValue<A, B>,
    cap: usize,
) -> (PairValue<A, B>, usize)
where
    A: Lattice,
    B: Lattice,
    R: ReductionRule<A, B> + ?Sized,
{
    let mut cur = normalize(p.clone());
    for round in 0..cap.max(1) {
        let next = normalize(PairValue::new(
            rule.rho1(&cur.left, &cur.right),
            rule.rho2(&cur.left, &cur.right),
        ));
        if next == cur {
            return (cur, round);
        }
        cur = next;
    }
    (cur, cap.max(1))
}

/// Alternates the refinements, feeding the refined left value into `rho2`.
pub fn reduce_sequential<A, B, R>(rule: &R, p: &PairValue<A, B>, cap: usize) -> PairValue<A, B>
where
    A: Lattice,
    B: Lattice,
    R: ReductionRule<A, B> + ?Sized,
{
    let mut cur = normalize(p.clone());
    for _ in 0..cap.max(1) {
        let left = rule.rho1(&cur.left, &cur.right);
        let right = rule.rho2(&left, &cur.right);
        let next = normalize(PairValue::new(left, right));
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Intervals against parity: bounds of the wrong parity move inward by one,
/// and singletons fix the parity.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntervalParity;

impl ReductionRule<Interval, Parity> for IntervalParity {
    fn rho1(&self, a: &Interval, b: &Parity) -> Interval {
        let want = match b {
            Parity::Bottom => return Interval::Bottom,
            Parity::Top => return *a,
            p => *p,
        };
        if a.is_bottom() {
            return *a;
        }
        let fix = |bound: Option<i64>, step: i64| match bound {
            Some(v) if Parity::of(v) != want => v.checked_add(step),
            other => other,
        };
        Interval::new(fix(a.lo(), 1), fix(a.hi(), -1))
    }

    fn rho2(&self, a: &Interval, b: &Parity) -> Parity {
        match a {
            Interval::Bottom => Parity::Bottom,
            _ => match a.as_singleton() {
                Some(v) => b.meet(&Parity::of(v)),
                None => *b,
            },
        }
    }
}

/// Intervals against modulus-only congruences: bounds snap inward to the
/// nearest multiples, and singletons fix the modulus.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntervalCongruence;

impl ReductionRule<Interval, CongruenceMod> for IntervalCongruence {
    fn rho1(&self, a: &Interval, b: &CongruenceMod) -> Interval {
        let m = match b {
            CongruenceMod::Bottom => return Interval::Bottom,
            CongruenceMod::Mod(m) => *m,
        };
        if a.is_bottom() {
            return *a;
        }
        if m == 0 {
            return a.meet(&Interval::singleton(0));
        }
        let Ok(m) = i64::try_from(m) else {
            // Only 0 is a multiple of such a large modulus in range.
            return a.meet(&Interval::singleton(0));
        };
        let up = |v: i64| {
            let r = v.rem_euclid(m);
            if r == 0 {
                Some(v)
            } else {
                v.checked_add(m - r)
            }
        };
        let down = |v: i64| v.checked_sub(v.rem_euclid(m));
        // On overflow the bound is kept as is, which stays sound.
        let lo = a.lo().map(|v| up(v).unwrap_or(v));
        let hi = a.hi().map(|v| down(v).unwrap_or(v));
        Interval::new(lo, hi)
    }

    fn rho2(&self, a: &Interval, b: &CongruenceMod) -> CongruenceMod {
        match a {
            Interval::Bottom => CongruenceMod::Bottom,
            _ => match a.as_singleton() {
                Some(v) => b.meet(&CongruenceMod::Mod(v.unsigned_abs())),
                None => *b,
            },
        }
    }
}

/// Adds `x < y + (hi(x) - lo(y) + 1)` for every ordered pair with a finite
/// upper bound on `x` and a finite lower bound on `y`, then re-closes.
pub fn rho_intervals_to_diff(ienv: &Env<Interval>, s: &DiffStore) -> DiffStore {
    if ienv.is_bottom() {
        return DiffStore::bottom();
    }
    let mut added = Vec::new();
    for (x, ix) in ienv.iter() {
        let Some(b) = ix.hi() else { continue };
        for (y, iy) in ienv.iter() {
            if x == y {
                continue;
            }
            let Some(c) = iy.lo() else { continue };
            if let Some(k) = b.checked_sub(c).and_then(|d| d.checked_add(1)) {
                added.push((x, y, k));
            }
        }
    }
    s.add_all(added)
}

/// Tightens intervals from constraints: `x < y + c` bounds `x` above by
/// `hi(y) + c - 1` and `y` below by `lo(x) - c + 1`. One pass.
pub fn diff_to_intervals(s: &DiffStore, ienv: &Env<Interval>) -> Env<Interval> {
    if s.is_bottom() {
        return Env::bottom();
    }
    let mut out = ienv.clone();
    for (x, y, c) in s.close().constraints() {
        let (Some(ix), Some(iy)) = (out.get(x).copied(), out.get(y).copied()) else {
            continue;
        };
        if let Some(h) = iy
            .hi()
            .and_then(|h| h.checked_add(c))
            .and_then(|h| h.checked_sub(1))
        {
            out.set(x.clone(), ix.meet(&Interval::at_most(h)));
        }
        let ix = out.get(x).copied().unwrap_or(Interval::Bottom);
        if let Some(l) = ix
            .lo()
            .and_then(|l| l.checked_sub(c))
            .and_then(|l| l.checked_add(1))
        {
            out.set(y.clone(), iy.meet(&Interval::at_least(l)));
        }
        if out.is_bottom() {
            break;
        }
    }
    out
}
