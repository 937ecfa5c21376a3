use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use claimwise_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_str().unwrap().to_string();
    cw_string_free(p);
    s
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/fixture20.jsonl")
}

#[test]
fn prompts_and_templates() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(cw_build_copa_prompt(cstr(" C0 ").as_ptr(), cstr("R0").as_ptr(), &mut out), CwStatus::CwOk);
        assert_eq!(take(out), "copa choice1: Supports choice2: Refutes premise: R0 question: C0");
        assert_eq!(cw_compose_nle(CwVerdict::CwSupports, cstr("R0").as_ptr(), &mut out), CwStatus::CwOk);
        assert_eq!(take(out), "The evidence supports the claim because R0");
        assert_eq!(cw_build_copa_prompt(cstr("").as_ptr(), cstr("R0").as_ptr(), &mut out), CwStatus::CwValidation);
        assert!(!cw_last_error().is_null());
    }
}

#[test]
fn null_and_invalid_inputs_are_reported() {
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(cw_build_copa_prompt(ptr::null(), cstr("R").as_ptr(), &mut out), CwStatus::CwNullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(cw_build_copa_prompt(bad.as_ptr().cast(), cstr("R").as_ptr(), &mut out), CwStatus::CwInvalidUtf8);
        let mut f = 0.0;
        let codes = [0u8, 2];
        assert_eq!(cw_macro_f1(codes.as_ptr(), codes.as_ptr(), 2, &mut f), CwStatus::CwInvalidArgument);
        assert_eq!(cw_macro_f1(codes.as_ptr(), codes.as_ptr(), 0, &mut f), CwStatus::CwValidation);
        assert_eq!(cw_one_decimal_percentage(3, 2, &mut f), CwStatus::CwInvalidArgument);
        let table = [0.0; 2];
        let mut phi = [0.0; 1];
        assert_eq!(cw_sampled_shapley(table.as_ptr(), 1, 0, 1, phi.as_mut_ptr()), CwStatus::CwInvalidArgument);
        // A successful call clears the previous message.
        assert_eq!(cw_one_decimal_percentage(1, 2, &mut f), CwStatus::CwOk);
        assert!(cw_last_error().is_null());
        cw_string_free(ptr::null_mut());
        cw_corpus_free(ptr::null_mut());
        assert_eq!(cw_corpus_len(ptr::null()), 0);
    }
}

#[test]
fn corpus_handle_lifecycle() {
    unsafe {
        let mut c = ptr::null_mut();
        let path = cstr(fixture().to_str().unwrap());
        assert_eq!(cw_corpus_load(path.as_ptr(), CwCorpusFormat::CwJsonLines, &mut c), CwStatus::CwOk);
        assert_eq!(cw_corpus_len(c), 20);
        let mut dropped = 7;
        assert_eq!(cw_corpus_clean(c, ptr::null(), &mut dropped), CwStatus::CwOk);
        assert_eq!(dropped, 0);
        let mut st = CwCorpusStats::default();
        assert_eq!(cw_corpus_get_stats(c, &mut st), CwStatus::CwOk);
        assert_eq!((st.total, st.supports, st.refutes), (20, 10, 10));
        let mut sizes = [0usize; 3];
        let ratios = [0.7, 0.15, 0.15];
        assert_eq!(cw_corpus_split_sizes(c, ratios.as_ptr(), 3, sizes.as_mut_ptr()), CwStatus::CwOk);
        assert_eq!(sizes, [14, 3, 3]);
        let bad = [0.9, 0.9, 0.9];
        assert_eq!(cw_corpus_split_sizes(c, bad.as_ptr(), 3, sizes.as_mut_ptr()), CwStatus::CwInvalidArgument);
        cw_corpus_free(c);

        let missing = cstr("/nonexistent/corpus.jsonl");
        assert_eq!(cw_corpus_load(missing.as_ptr(), CwCorpusFormat::CwJsonLines, &mut c), CwStatus::CwIo);
    }
}

#[test]
fn shapley_over_value_tables() {
    unsafe {
        // v(S) = |S|^2 over three players: symmetric, each gets 9/3.
        let table: Vec<f64> = (0..8u32).map(|m| (m.count_ones() * m.count_ones()) as f64).collect();
        let mut phi = [0.0; 3];
        assert_eq!(cw_exact_shapley(table.as_ptr(), 3, phi.as_mut_ptr()), CwStatus::CwOk);
        for p in phi {
            assert!((p - 3.0).abs() < 1e-12);
        }
        assert_eq!(cw_exact_shapley(table.as_ptr(), 0, phi.as_mut_ptr()), CwStatus::CwInvalidArgument);
    }
}

#[test]
fn summarizer_bounds() {
    unsafe {
        let ev: Vec<String> = (0..200).map(|i| format!("w{i}")).collect();
        let ev = cstr(&(ev.join(" ") + "."));
        let mut out = ptr::null_mut();
        assert_eq!(cw_stub_summarize(ev.as_ptr(), 75, 120, &mut out), CwStatus::CwOk);
        let n = take(out).split_whitespace().count();
        assert!((75..=120).contains(&n), "{n}");
        assert_eq!(cw_stub_summarize(ev.as_ptr(), 130, 120, &mut out), CwStatus::CwInvalidArgument);
    }
}

/// Compile the C smoke program against the generated header and the
/// static library. Skipped when no C compiler is on PATH.
#[test]
fn c_smoke_program() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler ({cc}); skipping");
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    // `cargo test` does not refresh the staticlib, so build a current one
    // in a private target directory.
    let target = manifest.join("../../target/ffi-smoke");
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let build = Command::new(cargo)
        .args(["build", "--quiet", "--locked", "-p", "claimwise-ffi", "--lib"])
        .env("CARGO_TARGET_DIR", &target)
        .current_dir(manifest)
        .output()
        .unwrap();
    assert!(build.status.success(), "building the static library failed: {}", String::from_utf8_lossy(&build.stderr));
    let lib = target.join("debug/libclaimwise_ffi.a");
    assert!(lib.is_file(), "static library not found at {}", lib.display());
    let tmp = tempdir();
    let bin = tmp.join("smoke");
    let status = Command::new(&cc)
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).arg(fixture()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
    let _ = std::fs::remove_dir_all(tmp);
}

fn tempdir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("claimwise-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
