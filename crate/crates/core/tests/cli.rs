//! The command-line contract: exit codes, output formats and determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use prodint::engine::config::Fault;
use prodint::engine::{analyze, oracle_check, AnalysisConfig};
use prodint::frontend::parse;
use prodint::report::{Report, EXIT_ERROR, EXIT_PROVED, EXIT_UNKNOWN, EXIT_UNSOUND};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(format!("{name}.tiny"))
}

fn prodint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prodint"))
        .args(args)
        .output()
        .expect("the binary runs")
}

fn analyze_cli(file: &Path, flags: &[&str]) -> Output {
    let mut args = vec!["analyze", file.to_str().unwrap()];
    args.extend_from_slice(flags);
    prodint(&args)
}

const REDUCED: &[&str] = &[
    "--domains",
    "interval,diff",
    "--product",
    "reduced",
    "--reductions",
    "intervals-to-diff",
];
const CARTESIAN: &[&str] = &["--domains", "interval,diff", "--product", "cartesian"];
const POWER_L: &[&str] = &[
    "--domains",
    "interval,diff",
    "--product",
    "power",
    "--reductions",
    "intervals-to-diff",
    "--power-pivot",
    "l",
    "--power-exponent",
    "interval-atoms",
    "--power-atoms",
    "(-inf,2];[3,+inf)",
];
const BOOL_POWER: &[&str] = &[
    "--domains",
    "sign",
    "--product",
    "power",
    "--power-pivot",
    "b",
    "--power-exponent",
    "bool",
];
const PARITY_ARRAYS: &[&str] = &[
    "--domains",
    "interval,parity",
    "--product",
    "reduced",
    "--reductions",
    "interval-parity",
    "--array-mode",
    "index-parity",
    "--widening-delay",
    "10",
];

/// Program and flag combinations covering every product kind.
fn matrix() -> Vec<(&'static str, Vec<&'static str>)> {
    let mut out = Vec::new();
    for name in [
        "p31_init",
        "p32_guarded",
        "p33_offset3",
        "ccl11_packets",
        "cc79_boolsign",
    ] {
        out.push((name, vec![]));
        out.push((name, CARTESIAN.to_vec()));
        out.push((name, REDUCED.to_vec()));
    }
    out.push(("p32_guarded", POWER_L.to_vec()));
    out.push(("p33_offset3", POWER_L.to_vec()));
    out.push(("cc79_boolsign", BOOL_POWER.to_vec()));
    out.push(("ccl11_packets", PARITY_ARRAYS.to_vec()));
    out
}

/// (line, col, kind, verdict) for each obligation in a JSON report.
fn json_verdicts(v: &Value) -> Vec<(u64, u64, String, String)> {
    v["obligations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| {
            (
                o["line"].as_u64().unwrap(),
                o["col"].as_u64().unwrap(),
                o["kind"].as_str().unwrap().to_string(),
                o["verdict"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

/// The same tuples, read from the obligations section of a text report.
fn text_verdicts(text: &str) -> Vec<(u64, u64, String, String)> {
    text.lines()
        .skip_while(|l| *l != "obligations:")
        .skip(1)
        .take_while(|l| l.starts_with("  "))
        .map(|l| {
            let mut words = l.split_whitespace();
            let (line, col) = words.next().unwrap().split_once(':').unwrap();
            let kind = words.next().unwrap().to_string();
            let verdict = l
                .rsplit_once(": ")
                .unwrap()
                .1
                .split_whitespace()
                .next()
                .unwrap()
                .to_string();
            (line.parse().unwrap(), col.parse().unwrap(), kind, verdict)
        })
        .collect()
}

fn expected_exit(verdicts: &[(u64, u64, String, String)]) -> i32 {
    if verdicts.iter().all(|v| v.3 == "PROVED") {
        EXIT_PROVED
    } else {
        EXIT_UNKNOWN
    }
}

#[test]
fn verdicts_decide_the_exit_code() {
    assert_eq!(
        analyze_cli(&corpus("p32_guarded"), REDUCED).status.code(),
        Some(EXIT_PROVED)
    );
    assert_eq!(
        analyze_cli(&corpus("p32_guarded"), CARTESIAN).status.code(),
        Some(EXIT_UNKNOWN)
    );
    assert_eq!(
        analyze_cli(&corpus("p33_offset3"), REDUCED).status.code(),
        Some(EXIT_UNKNOWN)
    );
    assert_eq!(
        analyze_cli(&corpus("p33_offset3"), POWER_L).status.code(),
        Some(EXIT_PROVED)
    );
    // No obligations at all counts as everything proved.
    assert_eq!(
        analyze_cli(&corpus("cc79_boolsign"), BOOL_POWER)
            .status
            .code(),
        Some(EXIT_PROVED)
    );
}

#[test]
fn usage_and_input_errors_exit_two() {
    let missing = analyze_cli(Path::new("/nonexistent/prog.tiny"), &[]);
    assert_eq!(missing.status.code(), Some(EXIT_ERROR));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("cannot read"));

    let p = corpus("p31_init");
    for flags in [
        &["--domains", "interval,octagon"][..],
        &["--domains", "interval,diff", "--product", "reduced"],
        &["--product", "power"],
        &[
            "--domains",
            "interval",
            "--product",
            "power",
            "--power-pivot",
            "zz",
            "--power-exponent",
            "parity",
        ],
        &["--widening-delay", "0"],
        &["--format", "yaml"],
    ] {
        let out = analyze_cli(&p, flags);
        assert_eq!(out.status.code(), Some(EXIT_ERROR), "{flags:?}");
        assert!(out.stdout.is_empty(), "{flags:?} wrote a report");
        assert!(!out.stderr.is_empty(), "{flags:?} gave no message");
    }

    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let bad = dir.join("bad_syntax.tiny");
    std::fs::write(&bad, "x := 1;\ny := ;\n").unwrap();
    let out = analyze_cli(&bad, &[]);
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("2:"),
        "parse errors carry a position"
    );
}

#[test]
fn formats_agree_and_output_is_deterministic() {
    for (name, flags) in matrix() {
        let file = corpus(name);
        let mut text_flags = flags.clone();
        text_flags.extend(["--format", "text"]);
        let mut json_flags = flags.clone();
        json_flags.extend(["--format", "json"]);

        let text = analyze_cli(&file, &text_flags);
        let json = analyze_cli(&file, &json_flags);
        assert_eq!(
            text,
            analyze_cli(&file, &text_flags),
            "{name} {flags:?}: text output differs between runs"
        );
        assert_eq!(
            json,
            analyze_cli(&file, &json_flags),
            "{name} {flags:?}: JSON output differs between runs"
        );

        let v: Value = serde_json::from_slice(&json.stdout).unwrap();
        let from_json = json_verdicts(&v);
        let from_text = text_verdicts(&String::from_utf8(text.stdout).unwrap());
        assert_eq!(from_json, from_text, "{name} {flags:?}");
        let code = expected_exit(&from_json);
        assert_eq!(json.status.code(), Some(code), "{name} {flags:?}");
        assert_eq!(text.status.code(), Some(code), "{name} {flags:?}");
        assert!(json.stderr.is_empty() && text.stderr.is_empty());
    }
}

#[test]
fn out_file_holds_the_json_report() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join("p33_report.json");
    let mut flags = POWER_L.to_vec();
    flags.extend(["--out", path.to_str().unwrap()]);
    let text = analyze_cli(&corpus("p33_offset3"), &flags);
    let mut json_flags = POWER_L.to_vec();
    json_flags.extend(["--format", "json"]);
    let json = analyze_cli(&corpus("p33_offset3"), &json_flags);
    assert_eq!(std::fs::read(&path).unwrap(), json.stdout);
    assert!(String::from_utf8(text.stdout)
        .unwrap()
        .starts_with("program: "));
}

#[test]
fn oracle_reports_are_attached_without_changing_verdicts() {
    for (name, flags) in matrix() {
        let mut plain = flags.clone();
        plain.extend(["--format", "json"]);
        let mut checked = plain.clone();
        checked.push("--oracle");
        let a = analyze_cli(&corpus(name), &plain);
        let b = analyze_cli(&corpus(name), &checked);
        assert_eq!(a.status.code(), b.status.code(), "{name} {flags:?}");
        let (va, vb): (Value, Value) = (
            serde_json::from_slice(&a.stdout).unwrap(),
            serde_json::from_slice(&b.stdout).unwrap(),
        );
        assert_eq!(json_verdicts(&va), json_verdicts(&vb));
        assert!(va.get("oracle").is_none());
        assert_eq!(
            vb["oracle"]["violations"].as_array().unwrap().len(),
            0,
            "{name} {flags:?}"
        );
        assert!(vb["oracle"]["stores_checked"].as_u64().unwrap() > 0);
    }
}

#[test]
fn oracle_violations_exit_three() {
    let text = std::fs::read_to_string(corpus("p31_init")).unwrap();
    let cfg = AnalysisConfig {
        fault: Some(Fault::IntervalAddOffByOne),
        ..AnalysisConfig::default()
    };
    let a = analyze(&parse(&text).unwrap(), &cfg).unwrap();
    let soundness = oracle_check(&a);
    assert!(!soundness.is_sound());
    let report = Report::new("p31_init", &a, Some(&soundness));
    assert_eq!(report.exit_code(), EXIT_UNSOUND);
    assert!(report.to_text().contains("violations"));
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let out = prodint(&[flag]);
        assert_eq!(out.status.code(), Some(0), "{flag}");
        assert!(!out.stdout.is_empty());
    }
    let out = prodint(&[]);
    assert_eq!(out.status.code(), Some(EXIT_ERROR));
}
