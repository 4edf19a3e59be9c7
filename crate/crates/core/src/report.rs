//! Text and JSON renderings of an analysis run, and the exit-code policy.

use std::fmt::Write as _;

use serde::Serialize;

use crate::engine::{Analysis, AnalysisConfig, Counters, SoundnessReport, Verdict};

pub const EXIT_PROVED: i32 = 0;
pub const EXIT_UNKNOWN: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_UNSOUND: i32 = 3;

#[derive(Clone, Debug, Serialize)]
pub struct PointReport {
    pub node: usize,
    pub name: String,
    pub state: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObligationReport {
    pub line: u32,
    pub col: u32,
    pub kind: &'static str,
    pub cond: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub by: Option<&'static str>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub stores_checked: usize,
    pub obligations_checked: usize,
    pub truncated: bool,
    pub violations: Vec<String>,
}

impl From<&SoundnessReport> for OracleReport {
    fn from(r: &SoundnessReport) -> Self {
        OracleReport {
            stores_checked: r.stores_checked,
            obligations_checked: r.obligations_checked,
            truncated: r.truncated,
            violations: r.violations.iter().map(ToString::to_string).collect(),
        }
    }
}

/// Everything printed for one run, in both formats.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub program: String,
    pub config: AnalysisConfig,
    pub points: Vec<PointReport>,
    pub obligations: Vec<ObligationReport>,
    pub counters: Counters,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
}

impl Report {
    pub fn new(program: &str, a: &Analysis, oracle: Option<&SoundnessReport>) -> Report {
        Report {
            program: program.to_string(),
            config: a.config.clone(),
            points: (0..a.cfg.node_count)
                .map(|n| PointReport {
                    node: n,
                    name: a.cfg.node_name(n),
                    state: a.states[n].to_string(),
                })
                .collect(),
            obligations: a
                .obligations
                .iter()
                .map(|o| ObligationReport {
                    line: o.obligation.pos.line,
                    col: o.obligation.pos.col,
                    kind: o.obligation.kind.name(),
                    cond: o.obligation.cond.to_string(),
                    verdict: o.verdict,
                    by: o.prover,
                })
                .collect(),
            counters: a.counters.clone(),
            oracle: oracle.map(OracleReport::from),
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self
            .oracle
            .as_ref()
            .is_some_and(|o| !o.violations.is_empty())
        {
            EXIT_UNSOUND
        } else if self
            .obligations
            .iter()
            .all(|o| o.verdict == Verdict::Proved)
        {
            EXIT_PROVED
        } else {
            EXIT_UNKNOWN
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let c = &self.config;
        let join = |xs: Vec<String>| {
            if xs.is_empty() {
                "-".to_string()
            } else {
                xs.join(",")
            }
        };
        let _ = writeln!(out, "program: {}", self.program);
        let _ = writeln!(
            out,
            "config: domains={} product={} reductions={} array-mode={} widening-delay={}",
            join(c.domains.iter().map(ToString::to_string).collect()),
            c.product,
            join(c.reductions.iter().map(ToString::to_string).collect()),
            c.array_mode,
            c.widening_delay
        );
        if let Some(p) = &c.power {
            let atoms: Vec<String> = p.atoms.iter().map(ToString::to_string).collect();
            let _ = writeln!(
                out,
                "power: pivot={} exponent={} atoms={}",
                p.pivot,
                p.exponent,
                atoms.join(";")
            );
        }
        let _ = writeln!(out, "points:");
        for p in &self.points {
            let _ = writeln!(out, "  {}: {}", p.name, p.state);
        }
        let _ = writeln!(out, "obligations:");
        for o in &self.obligations {
            let by = o.by.map(|b| format!(" ({b})")).unwrap_or_default();
            let _ = writeln!(
                out,
                "  {}:{} {} {}: {}{}",
                o.line, o.col, o.kind, o.cond, o.verdict, by
            );
        }
        if let Some(o) = &self.oracle {
            let _ = writeln!(
                out,
                "oracle: {} stores, {} obligation checks, {} violations{}",
                o.stores_checked,
                o.obligations_checked,
                o.violations.len(),
                if o.truncated { " (truncated)" } else { "" }
            );
            for v in &o.violations {
                let _ = writeln!(out, "  {v}");
            }
        }
        let proved = self
            .obligations
            .iter()
            .filter(|o| o.verdict == Verdict::Proved)
            .count();
        let _ = writeln!(
            out,
            "summary: {proved} proved, {} unknown",
            self.obligations.len() - proved
        );
        out
    }
}
