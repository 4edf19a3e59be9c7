use std::ffi::{CStr, CString};
use std::ptr;

use prodint_ffi::*;

const P32: &str = include_str!("../../../corpus/p32_guarded.tiny");

fn last_error() -> String {
    let p = prodint_last_error_message();
    assert!(!p.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn parse(src: &str) -> *mut ProdintProgram {
    let text = CString::new(src).unwrap();
    let mut prog = ptr::null_mut();
    assert_eq!(
        unsafe { prodint_program_parse(text.as_ptr(), &mut prog) },
        ProdintStatus::Ok
    );
    prog
}

fn set(cfg: *mut ProdintConfig, key: &str, value: &str) -> ProdintStatus {
    let (k, v) = (CString::new(key).unwrap(), CString::new(value).unwrap());
    unsafe { prodint_config_set(cfg, k.as_ptr(), v.as_ptr()) }
}

fn obligations(r: *const ProdintResult) -> Vec<ProdintObligation> {
    let n = unsafe { prodint_result_obligation_count(r) };
    (0..n)
        .map(|i| {
            let mut o = ProdintObligation {
                line: 0,
                col: 0,
                kind: ProdintObligationKind::Assert,
                verdict: ProdintVerdict::Unknown,
            };
            assert_eq!(
                unsafe { prodint_result_obligation(r, i, &mut o) },
                ProdintStatus::Ok
            );
            o
        })
        .collect()
}

#[test]
fn reduced_product_proves_the_guarded_loop() {
    let prog = parse(P32);
    let cfg = prodint_config_new();
    assert_eq!(set(cfg, "domains", "interval,diff"), ProdintStatus::Ok);
    assert_eq!(set(cfg, "product", "reduced"), ProdintStatus::Ok);
    assert_eq!(
        set(cfg, "reductions", "intervals-to-diff"),
        ProdintStatus::Ok
    );
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { prodint_analyze(prog, cfg, true, &mut res) },
        ProdintStatus::Ok
    );
    let obs = obligations(res);
    assert_eq!(obs.len(), 2);
    assert!(obs
        .iter()
        .all(|o| o.line == 7 && o.verdict == ProdintVerdict::Proved));
    assert_eq!(obs[0].kind, ProdintObligationKind::Lower);
    assert_eq!(obs[1].kind, ProdintObligationKind::Upper);
    assert_eq!(unsafe { prodint_result_exit_code(res) }, 0);

    let json = unsafe { prodint_result_to_json(res) };
    assert!(!json.is_null());
    let text = unsafe { CStr::from_ptr(json) }
        .to_str()
        .unwrap()
        .to_string();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["obligations"][1]["verdict"], "PROVED");
    assert_eq!(v["oracle"]["violations"].as_array().unwrap().len(), 0);

    unsafe {
        prodint_string_free(json);
        prodint_result_free(res);
        prodint_config_free(cfg);
        prodint_program_free(prog);
    }
}

#[test]
fn cartesian_product_leaves_the_upper_bound_unknown() {
    let prog = parse(P32);
    let cfg = prodint_config_new();
    assert_eq!(set(cfg, "domains", "interval,diff"), ProdintStatus::Ok);
    assert_eq!(set(cfg, "product", "cartesian"), ProdintStatus::Ok);
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { prodint_analyze(prog, cfg, false, &mut res) },
        ProdintStatus::Ok
    );
    let obs = obligations(res);
    assert_eq!(obs[0].verdict, ProdintVerdict::Proved);
    assert_eq!(obs[1].verdict, ProdintVerdict::Unknown);
    assert_eq!(unsafe { prodint_result_exit_code(res) }, 1);
    unsafe {
        prodint_result_free(res);
        prodint_config_free(cfg);
        prodint_program_free(prog);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let bad = CString::new("x := ;").unwrap();
    let mut prog = ptr::null_mut();
    assert_eq!(
        unsafe { prodint_program_parse(bad.as_ptr(), &mut prog) },
        ProdintStatus::ParseError
    );
    assert!(prog.is_null());
    assert!(last_error().contains("1:"));

    assert_eq!(
        unsafe { prodint_program_parse(ptr::null(), &mut prog) },
        ProdintStatus::NullPointer
    );
    let invalid = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { prodint_program_parse(invalid.as_ptr().cast(), &mut prog) },
        ProdintStatus::InvalidUtf8
    );

    let cfg = prodint_config_new();
    assert_eq!(set(cfg, "colour", "red"), ProdintStatus::ConfigError);
    assert!(last_error().contains("colour"));
    assert_eq!(set(cfg, "product", "power"), ProdintStatus::Ok);
    let prog = parse(P32);
    let mut res = ptr::null_mut();
    assert_eq!(
        unsafe { prodint_analyze(prog, cfg, false, &mut res) },
        ProdintStatus::ConfigError
    );
    assert!(res.is_null());
    assert!(last_error().contains("pivot"));

    let ok = prodint_config_new();
    assert_eq!(
        unsafe { prodint_analyze(prog, ok, false, &mut res) },
        ProdintStatus::Ok
    );
    assert!(prodint_last_error_message().is_null());
    let mut o = ProdintObligation {
        line: 0,
        col: 0,
        kind: ProdintObligationKind::Assert,
        verdict: ProdintVerdict::Unknown,
    };
    assert_eq!(
        unsafe { prodint_result_obligation(res, 99, &mut o) },
        ProdintStatus::AnalysisError
    );

    unsafe {
        assert_eq!(prodint_result_exit_code(ptr::null()), 2);
        assert_eq!(prodint_result_obligation_count(ptr::null()), 0);
        assert!(prodint_result_to_json(ptr::null()).is_null());
        prodint_result_free(res);
        prodint_config_free(ok);
        prodint_config_free(cfg);
        prodint_program_free(prog);
        prodint_program_free(ptr::null_mut());
        prodint_string_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/prodint.h")).unwrap();
    for name in [
        "prodint_program_parse",
        "prodint_program_free",
        "prodint_config_new",
        "prodint_config_set",
        "prodint_config_free",
        "prodint_analyze",
        "prodint_result_obligation_count",
        "prodint_result_obligation",
        "prodint_result_exit_code",
        "prodint_result_to_json",
        "prodint_result_free",
        "prodint_string_free",
        "prodint_last_error_message",
        "PRODINT_STATUS_PARSE_ERROR",
        "typedef struct ProdintResult ProdintResult",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
