//! The `prodint` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::engine::{
    analyze, default_atoms, oracle_check, parse_atoms, AnalysisConfig, ArrayMode, DomainName,
    ExponentKind, PowerConfig, ProductKind, ReductionName,
};
use crate::error::{Error, Result};
use crate::frontend::ast::Var;
use crate::frontend::parse;
use crate::report::{Report, EXIT_ERROR};

#[derive(Debug, Parser)]
#[command(
    name = "prodint",
    version,
    about = "Abstract interpretation with configurable domain products"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a program and report the state at every point and every obligation.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Program source file.
    pub file: PathBuf,
    /// Comma-separated domains: interval, parity, sign, congruence, bool, diff.
    #[arg(long, default_value = "interval")]
    pub domains: String,
    /// none, cartesian, reduced, granger, or power.
    #[arg(long, default_value = "none")]
    pub product: String,
    /// Comma-separated reduction rules.
    #[arg(long, default_value = "")]
    pub reductions: String,
    #[arg(long)]
    pub power_pivot: Option<String>,
    /// parity, bool, or interval-atoms.
    #[arg(long)]
    pub power_exponent: Option<String>,
    /// Semicolon-separated atoms, e.g. "(-inf,2];[3,+inf)" or "odd;even".
    #[arg(long)]
    pub power_atoms: Option<String>,
    /// summary, value-parity, or index-parity.
    #[arg(long, default_value = "summary")]
    pub array_mode: String,
    /// Loop-head visits that join before widening starts.
    #[arg(long, default_value_t = 1)]
    pub widening_delay: usize,
    /// Also run the concrete interpreter and check the result against it.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Also write the JSON report to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Analysis settings given as keyword strings, shared by the CLI and the C API.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub domains: String,
    pub product: String,
    pub reductions: String,
    pub power_pivot: Option<String>,
    pub power_exponent: Option<String>,
    pub power_atoms: Option<String>,
    pub array_mode: String,
    pub widening_delay: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            domains: "interval".into(),
            product: "none".into(),
            reductions: String::new(),
            power_pivot: None,
            power_exponent: None,
            power_atoms: None,
            array_mode: "summary".into(),
            widening_delay: 1,
        }
    }
}

fn list<T: std::str::FromStr<Err = Error>>(text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

impl RunOptions {
    /// Sets one option by its flag name without the leading dashes.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let some = |v: &str| (!v.trim().is_empty()).then(|| v.trim().to_string());
        match key {
            "domains" => self.domains = value.into(),
            "product" => self.product = value.into(),
            "reductions" => self.reductions = value.into(),
            "power-pivot" => self.power_pivot = some(value),
            "power-exponent" => self.power_exponent = some(value),
            "power-atoms" => self.power_atoms = some(value),
            "array-mode" => self.array_mode = value.into(),
            "widening-delay" => {
                self.widening_delay = value.trim().parse().map_err(|_| {
                    Error::Config(format!("widening delay must be a count, got `{value}`"))
                })?
            }
            other => return Err(Error::Config(format!("unknown option `{other}`"))),
        }
        Ok(())
    }

    pub fn to_config(&self) -> Result<AnalysisConfig> {
        let domains: Vec<DomainName> = list(&self.domains)?;
        let product: ProductKind = self.product.parse()?;
        let reductions: Vec<ReductionName> = list(&self.reductions)?;
        let mut cfg = AnalysisConfig::new(&domains, product)
            .with_reductions(&reductions)
            .with_array_mode(self.array_mode.parse::<ArrayMode>()?)
            .with_widening_delay(self.widening_delay)
            .visit_cap_from_env()?;
        let any_power = self.power_pivot.is_some()
            || self.power_exponent.is_some()
            || self.power_atoms.is_some();
        if product == ProductKind::Power || any_power {
            let pivot = self
                .power_pivot
                .as_deref()
                .ok_or_else(|| Error::Config("missing --power-pivot".into()))?;
            let exponent: ExponentKind = self
                .power_exponent
                .as_deref()
                .ok_or_else(|| Error::Config("missing --power-exponent".into()))?
                .parse()?;
            let atoms = match &self.power_atoms {
                Some(text) => parse_atoms(exponent, text)?,
                None => default_atoms(exponent).ok_or_else(|| {
                    Error::Config(format!("exponent `{exponent}` needs --power-atoms"))
                })?,
            };
            cfg.power = Some(PowerConfig {
                pivot: Var::new(pivot),
                exponent,
                atoms,
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl From<&AnalyzeArgs> for RunOptions {
    fn from(a: &AnalyzeArgs) -> Self {
        RunOptions {
            domains: a.domains.clone(),
            product: a.product.clone(),
            reductions: a.reductions.clone(),
            power_pivot: a.power_pivot.clone(),
            power_exponent: a.power_exponent.clone(),
            power_atoms: a.power_atoms.clone(),
            array_mode: a.array_mode.clone(),
            widening_delay: a.widening_delay,
        }
    }
}

/// Parses and analyzes `source`, optionally checking the result against the oracle.
pub fn run_analysis(name: &str, source: &str, opts: &RunOptions, oracle: bool) -> Result<Report> {
    let cfg = opts.to_config()?;
    let program = parse(source)?;
    let analysis = analyze(&program, &cfg)?;
    let soundness = oracle.then(|| oracle_check(&analysis));
    Ok(Report::new(name, &analysis, soundness.as_ref()))
}

fn analyze_command(args: &AnalyzeArgs, out: &mut dyn Write) -> std::result::Result<i32, String> {
    let name = args.file.display().to_string();
    let source =
        std::fs::read_to_string(&args.file).map_err(|e| format!("cannot read {name}: {e}"))?;
    let report = run_analysis(&name, &source, &RunOptions::from(args), args.oracle)
        .map_err(|e| format!("{name}: {e}"))?;
    if let Some(path) = &args.out {
        std::fs::write(path, report.to_json())
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    let text = match args.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    out.write_all(text.as_bytes()).map_err(|e| e.to_string())?;
    Ok(report.exit_code())
}

/// Runs the command line with explicit output streams; returns the exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let target: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(target, "{}", e.render());
            return if code == 0 { 0 } else { EXIT_ERROR };
        }
    };
    match &cli.command {
        Command::Analyze(args) => match analyze_command(args, out) {
            Ok(code) => code,
            Err(msg) => {
                let _ = writeln!(err, "error: {msg}");
                EXIT_ERROR
            }
        },
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(
        argv,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn options_build_a_power_config() {
        let mut o = RunOptions::default();
        o.set("domains", "interval,diff").unwrap();
        o.set("product", "power").unwrap();
        o.set("reductions", "intervals-to-diff").unwrap();
        o.set("power-pivot", "l").unwrap();
        o.set("power-exponent", "interval-atoms").unwrap();
        o.set("power-atoms", "(-inf,2];[3,+inf)").unwrap();
        let cfg = o.to_config().unwrap();
        assert_eq!(cfg.power.unwrap().atoms.len(), 2);
    }

    #[test]
    fn bad_options_are_config_errors() {
        let mut o = RunOptions::default();
        assert!(o.set("colour", "red").is_err());
        o.set("product", "power").unwrap();
        assert!(matches!(o.to_config(), Err(Error::Config(_))));
        let mut o = RunOptions::default();
        o.set("domains", "interval,octagon").unwrap();
        assert!(o.to_config().is_err());
    }

    #[test]
    fn boolean_exponent_defaults_its_atoms() {
        let mut o = RunOptions::default();
        o.set("domains", "sign").unwrap();
        o.set("product", "power").unwrap();
        o.set("power-pivot", "b").unwrap();
        o.set("power-exponent", "bool").unwrap();
        assert_eq!(o.to_config().unwrap().power.unwrap().atoms.len(), 2);
    }

    #[test]
    fn usage_errors_exit_two() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            run_with(["prodint", "analyze"], &mut out, &mut err),
            EXIT_ERROR
        );
        assert_eq!(
            run_with(
                ["prodint", "analyze", "/nonexistent.tiny"],
                &mut out,
                &mut err
            ),
            EXIT_ERROR
        );
        assert_eq!(run_with(["prodint", "--help"], &mut out, &mut err), 0);
    }
}
