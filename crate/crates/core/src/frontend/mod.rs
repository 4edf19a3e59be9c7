//! Source language: syntax tree, parser and control-flow graph.

pub mod ast;
pub mod cfg;
pub mod parser;

pub use cfg::{build_cfg, Cfg};
pub use parser::{parse, var_kinds, VarKind};
