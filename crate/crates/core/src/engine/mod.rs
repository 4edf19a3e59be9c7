//! Fixpoint analysis of control-flow graphs over configurable domain products.

pub mod analyze;
pub mod concrete;
pub mod config;
pub mod counters;
pub mod power;
pub mod state;

pub use analyze::{
    analyze, analyze_array_power, analyze_source, Analysis, ObligationResult, PointState, Verdict,
};
pub use concrete::{
    check_soundness, collect_concrete, oracle_check, Collected, ConcreteStore, SoundnessReport,
};
pub use config::{
    default_atoms, parse_atoms, AnalysisConfig, ArrayMode, DomainName, ExpAtom, ExponentKind,
    PowerConfig, ProductKind, ReduceMode, ReductionName,
};
pub use counters::{ComponentCounts, Counters};
pub use power::{PowerSemantics, PowerState};
pub use state::{AbstractState, Cells, NumEnv, Semantics};
