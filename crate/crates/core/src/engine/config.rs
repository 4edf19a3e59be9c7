use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::domains::{BoolAbs, Interval, Parity};
use crate::error::{Error, Result};
use crate::frontend::ast::Var;
use crate::lattice::Lattice;

pub const DEFAULT_VISIT_CAP: usize = 10_000;
pub const VISIT_CAP_ENV: &str = "PRODINT_CAP";

macro_rules! keyword_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $kw:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn keyword(self) -> &'static str {
                match self { $($name::$variant => $kw),+ }
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($kw => Ok($name::$variant),)+
                    other => Err(Error::Config(format!(
                        "unknown {} `{other}` (expected one of: {})",
                        stringify!($name),
                        [$($kw),+].join(", ")
                    ))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.keyword())
            }
        }
    };
}

keyword_enum!(DomainName {
    Interval => "interval",
    Parity => "parity",
    Sign => "sign",
    Congruence => "congruence",
    Bool => "bool",
    Diff => "diff",
});

keyword_enum!(ProductKind {
    None => "none",
    Cartesian => "cartesian",
    Reduced => "reduced",
    Granger => "granger",
    Power => "power",
});

keyword_enum!(ReductionName {
    IntervalParity => "interval-parity",
    IntervalCongruence => "interval-congruence",
    IntervalsToDiff => "intervals-to-diff",
    DiffToIntervals => "diff-to-intervals",
});

keyword_enum!(ExponentKind {
    Parity => "parity",
    Bool => "bool",
    IntervalAtoms => "interval-atoms",
});

keyword_enum!(
    /// How array contents are abstracted.
    ArrayMode {
        Summary => "summary",
        ValueParity => "value-parity",
        IndexParity => "index-parity",
    }
);

impl ReductionName {
    /// The two domains the rule connects.
    pub fn domains(self) -> (DomainName, DomainName) {
        match self {
            ReductionName::IntervalParity => (DomainName::Interval, DomainName::Parity),
            ReductionName::IntervalCongruence => (DomainName::Interval, DomainName::Congruence),
            ReductionName::IntervalsToDiff | ReductionName::DiffToIntervals => {
                (DomainName::Interval, DomainName::Diff)
            }
        }
    }
}

impl ExponentKind {
    pub fn domain(self) -> DomainName {
        match self {
            ExponentKind::Parity => DomainName::Parity,
            ExponentKind::Bool => DomainName::Bool,
            ExponentKind::IntervalAtoms => DomainName::Interval,
        }
    }
}

/// One exponent atom of a power configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExpAtom {
    Parity(Parity),
    Bool(BoolAbs),
    Interval(Interval),
}

impl ExpAtom {
    pub fn kind(&self) -> ExponentKind {
        match self {
            ExpAtom::Parity(_) => ExponentKind::Parity,
            ExpAtom::Bool(_) => ExponentKind::Bool,
            ExpAtom::Interval(_) => ExponentKind::IntervalAtoms,
        }
    }

    fn overlaps(&self, other: &ExpAtom) -> bool {
        match (self, other) {
            (ExpAtom::Parity(a), ExpAtom::Parity(b)) => !a.meet(b).is_bottom(),
            (ExpAtom::Bool(a), ExpAtom::Bool(b)) => !a.meet(b).is_bottom(),
            (ExpAtom::Interval(a), ExpAtom::Interval(b)) => !a.meet(b).is_bottom(),
            _ => true,
        }
    }
}

impl fmt::Display for ExpAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpAtom::Parity(p) => write!(f, "{p}"),
            ExpAtom::Bool(b) => write!(f, "{b}"),
            ExpAtom::Interval(i) => write!(f, "{i}"),
        }
    }
}

impl Serialize for ExpAtom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn parse_bound(s: &str) -> Result<Option<i64>> {
    match s.trim() {
        "-inf" | "+inf" | "inf" => Ok(None),
        t => t
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("bad atom bound `{t}`"))),
    }
}

fn parse_interval_atom(s: &str) -> Result<Interval> {
    let s = s.trim();
    let bad = || Error::Config(format!("malformed interval atom `{s}`"));
    let open = s.chars().next().ok_or_else(bad)?;
    let close = s.chars().last().ok_or_else(bad)?;
    if !matches!(open, '(' | '[') || !matches!(close, ')' | ']') || s.len() < 2 {
        return Err(bad());
    }
    let (lo, hi) = s[1..s.len() - 1].split_once(',').ok_or_else(bad)?;
    let (lo_txt, hi_txt) = (lo.trim(), hi.trim());
    if lo_txt.ends_with("inf") && lo_txt != "-inf" || hi_txt.ends_with("inf") && hi_txt == "-inf" {
        return Err(bad());
    }
    let mut lo = parse_bound(lo_txt)?;
    let mut hi = parse_bound(hi_txt)?;
    // Open finite bounds exclude the endpoint.
    if open == '(' {
        lo = match lo {
            Some(v) => Some(v.checked_add(1).ok_or_else(bad)?),
            None => None,
        };
    }
    if close == ')' {
        hi = match hi {
            Some(v) => Some(v.checked_sub(1).ok_or_else(bad)?),
            None => None,
        };
    }
    let i = Interval::new(lo, hi);
    if i.is_bottom() {
        return Err(Error::Config(format!("empty interval atom `{s}`")));
    }
    Ok(i)
}

/// Parses `odd;even`, `true;false`, or semicolon-separated interval literals
/// such as `(-inf,2];[3,+inf)`.
pub fn parse_atoms(kind: ExponentKind, text: &str) -> Result<Vec<ExpAtom>> {
    let parts: Vec<&str> = text
        .split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .collect();
    if parts.is_empty() {
        return Err(Error::Config("no exponent atoms given".into()));
    }
    parts
        .into_iter()
        .map(|p| match (kind, p) {
            (ExponentKind::Parity, "odd" | "o") => Ok(ExpAtom::Parity(Parity::Odd)),
            (ExponentKind::Parity, "even" | "e") => Ok(ExpAtom::Parity(Parity::Even)),
            (ExponentKind::Bool, "true" | "tt") => Ok(ExpAtom::Bool(BoolAbs::True)),
            (ExponentKind::Bool, "false" | "ff") => Ok(ExpAtom::Bool(BoolAbs::False)),
            (ExponentKind::IntervalAtoms, p) => parse_interval_atom(p).map(ExpAtom::Interval),
            (k, p) => Err(Error::Config(format!(
                "atom `{p}` does not fit exponent `{k}`"
            ))),
        })
        .collect()
}

pub fn default_atoms(kind: ExponentKind) -> Option<Vec<ExpAtom>> {
    match kind {
        ExponentKind::Parity => Some(vec![
            ExpAtom::Parity(Parity::Odd),
            ExpAtom::Parity(Parity::Even),
        ]),
        ExponentKind::Bool => Some(vec![
            ExpAtom::Bool(BoolAbs::True),
            ExpAtom::Bool(BoolAbs::False),
        ]),
        ExponentKind::IntervalAtoms => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PowerConfig {
    #[serde(serialize_with = "serialize_var")]
    pub pivot: Var,
    pub exponent: ExponentKind,
    pub atoms: Vec<ExpAtom>,
}

fn serialize_var<S: serde::Serializer>(v: &Var, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(v.name())
}

impl PowerConfig {
    /// Atoms must be pairwise disjoint and together cover every value of the pivot.
    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::Config("power needs at least one atom".into()));
        }
        if let Some(a) = self.atoms.iter().find(|a| a.kind() != self.exponent) {
            return Err(Error::Config(format!(
                "atom `{a}` does not fit exponent `{}`",
                self.exponent
            )));
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if let Some(b) = self.atoms[i + 1..].iter().find(|b| a.overlaps(b)) {
                return Err(Error::Config(format!(
                    "exponent atoms `{a}` and `{b}` overlap"
                )));
            }
        }
        let covers = match self.exponent {
            ExponentKind::Parity | ExponentKind::Bool => self.atoms.len() == 2,
            ExponentKind::IntervalAtoms => {
                let mut ivs: Vec<Interval> = self
                    .atoms
                    .iter()
                    .filter_map(|a| match a {
                        ExpAtom::Interval(i) => Some(*i),
                        _ => None,
                    })
                    .collect();
                ivs.sort_by_key(|i| i.lo().map_or(i128::MIN, i128::from));
                ivs.first().is_some_and(|i| i.lo().is_none())
                    && ivs.last().is_some_and(|i| i.hi().is_none())
                    && ivs.windows(2).all(|w| {
                        matches!((w[0].hi(), w[1].lo()), (Some(h), Some(l)) if h.checked_add(1) == Some(l))
                    })
            }
        };
        if !covers {
            return Err(Error::Config(
                "exponent atoms must cover every value of the pivot".into(),
            ));
        }
        Ok(())
    }
}

/// Deliberate transfer-function bugs, used only to check that the soundness
/// oracle notices them.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Fault {
    IntervalAddOffByOne,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnalysisConfig {
    pub domains: BTreeSet<DomainName>,
    pub product: ProductKind,
    pub reductions: Vec<ReductionName>,
    pub power: Option<PowerConfig>,
    pub array_mode: ArrayMode,
    pub widening_delay: usize,
    pub visit_cap: usize,
    pub reduction_cap: usize,
    #[doc(hidden)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<Fault>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            domains: BTreeSet::from([DomainName::Interval]),
            product: ProductKind::None,
            reductions: Vec::new(),
            power: None,
            array_mode: ArrayMode::Summary,
            widening_delay: 1,
            visit_cap: DEFAULT_VISIT_CAP,
            reduction_cap: crate::combinators::DEFAULT_REDUCTION_CAP,
            fault: None,
        }
    }
}

/// How reductions are applied within one state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReduceMode {
    Off,
    /// Each rule once, in order, each pair refined left then right.
    Sequential,
    /// All rules together, both sides refined simultaneously, until stable.
    Simultaneous,
}

impl AnalysisConfig {
    pub fn new(domains: &[DomainName], product: ProductKind) -> Self {
        AnalysisConfig {
            domains: domains.iter().copied().collect(),
            product,
            ..Default::default()
        }
    }

    pub fn with_reductions(mut self, rs: &[ReductionName]) -> Self {
        self.reductions = rs.to_vec();
        self
    }

    pub fn with_power(mut self, pivot: &str, exponent: ExponentKind, atoms: Vec<ExpAtom>) -> Self {
        self.power = Some(PowerConfig {
            pivot: Var::new(pivot),
            exponent,
            atoms,
        });
        self
    }

    pub fn with_array_mode(mut self, mode: ArrayMode) -> Self {
        self.array_mode = mode;
        self
    }

    pub fn with_widening_delay(mut self, delay: usize) -> Self {
        self.widening_delay = delay;
        self
    }

    /// The node-visit cap, overridden by the environment when set.
    pub fn visit_cap_from_env(mut self) -> Result<Self> {
        if let Ok(v) = std::env::var(VISIT_CAP_ENV) {
            self.visit_cap = v.trim().parse().map_err(|_| {
                Error::Config(format!("{VISIT_CAP_ENV} must be a count, got `{v}`"))
            })?;
        }
        Ok(self)
    }

    /// Domains tracked in every state: the configured ones plus the exponent's.
    pub fn base_domains(&self) -> BTreeSet<DomainName> {
        let mut d = self.domains.clone();
        if let Some(p) = &self.power {
            d.insert(p.exponent.domain());
        }
        d
    }

    pub fn has(&self, d: DomainName) -> bool {
        self.base_domains().contains(&d)
    }

    pub fn reduce_mode(&self) -> ReduceMode {
        match self.product {
            ProductKind::Reduced => ReduceMode::Sequential,
            ProductKind::Granger => ReduceMode::Simultaneous,
            ProductKind::Power if !self.reductions.is_empty() => ReduceMode::Sequential,
            _ => ReduceMode::Off,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Config(m));
        if self.domains.is_empty() {
            return err("at least one domain is required".into());
        }
        match self.product {
            ProductKind::None if self.domains.len() != 1 => {
                return err(format!(
                    "product `none` takes exactly one domain, got {}",
                    self.domains.len()
                ))
            }
            ProductKind::Cartesian | ProductKind::Reduced | ProductKind::Granger
                if self.domains.len() < 2 =>
            {
                return err(format!(
                    "product `{}` needs at least two domains",
                    self.product
                ))
            }
            ProductKind::Reduced | ProductKind::Granger if self.reductions.is_empty() => {
                return err(format!(
                    "product `{}` needs at least one reduction",
                    self.product
                ))
            }
            ProductKind::None | ProductKind::Cartesian if !self.reductions.is_empty() => {
                return err(format!("product `{}` takes no reductions", self.product))
            }
            _ => {}
        }
        for r in &self.reductions {
            let (a, b) = r.domains();
            if !self.has(a) || !self.has(b) {
                return err(format!("reduction `{r}` needs domains `{a}` and `{b}`"));
            }
        }
        match (&self.power, self.product) {
            (Some(p), ProductKind::Power) => p.validate()?,
            (None, ProductKind::Power) => {
                return err("product `power` needs a pivot and atoms".into())
            }
            (Some(_), _) => return err("power settings given without `--product power`".into()),
            (None, _) => {}
        }
        if self.widening_delay == 0 {
            return err("widening delay must be at least 1".into());
        }
        if self.visit_cap == 0 || self.reduction_cap == 0 {
            return err("caps must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_atoms_parse_with_open_ends() {
        let atoms = parse_atoms(ExponentKind::IntervalAtoms, "(-inf,2];[3,+inf)").unwrap();
        assert_eq!(
            atoms,
            vec![
                ExpAtom::Interval(Interval::at_most(2)),
                ExpAtom::Interval(Interval::at_least(3))
            ]
        );
        let atoms = parse_atoms(ExponentKind::IntervalAtoms, "(0,4)").unwrap();
        assert_eq!(atoms, vec![ExpAtom::Interval(Interval::finite(1, 3))]);
        assert!(parse_atoms(ExponentKind::IntervalAtoms, "[3,2]").is_err());
        assert!(parse_atoms(ExponentKind::IntervalAtoms, "3,4").is_err());
        assert!(parse_atoms(ExponentKind::IntervalAtoms, "[+inf,4]").is_err());
        assert!(parse_atoms(ExponentKind::Bool, "odd;even").is_err());
    }

    #[test]
    fn atoms_must_partition_the_pivot() {
        let cfg = |text: &str| PowerConfig {
            pivot: Var::new("l"),
            exponent: ExponentKind::IntervalAtoms,
            atoms: parse_atoms(ExponentKind::IntervalAtoms, text).unwrap(),
        };
        assert!(cfg("(-inf,2];[3,+inf)").validate().is_ok());
        assert!(cfg("(-inf,2];[2,+inf)").validate().is_err());
        assert!(cfg("(-inf,2];[4,+inf)").validate().is_err());
        assert!(cfg("[0,+inf)").validate().is_err());
    }

    #[test]
    fn product_shapes_are_checked() {
        assert!(
            AnalysisConfig::new(&[DomainName::Interval], ProductKind::None)
                .validate()
                .is_ok()
        );
        assert!(
            AnalysisConfig::new(&[DomainName::Interval, DomainName::Diff], ProductKind::None)
                .validate()
                .is_err()
        );
        let reduced = AnalysisConfig::new(
            &[DomainName::Interval, DomainName::Diff],
            ProductKind::Reduced,
        );
        assert!(reduced.clone().validate().is_err());
        assert!(reduced
            .clone()
            .with_reductions(&[ReductionName::IntervalsToDiff])
            .validate()
            .is_ok());
        assert!(reduced
            .with_reductions(&[ReductionName::IntervalParity])
            .validate()
            .is_err());
    }

    #[test]
    fn keywords_round_trip() {
        for d in DomainName::ALL {
            assert_eq!(d.keyword().parse::<DomainName>().unwrap(), *d);
        }
        assert!("octagon".parse::<DomainName>().is_err());
    }
}
