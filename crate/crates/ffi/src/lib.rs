//! C ABI over the claimwise core library.
//!
//! Conventions:
//! - every fallible function returns a [`CwStatus`]; `CW_OK` is zero;
//! - on failure a message is available from [`cw_last_error`] on the same
//!   thread until the next call into the library;
//! - strings returned through `char **out` are owned by the caller and
//!   must be released with [`cw_string_free`];
//! - a corpus is an opaque [`CwCorpus`] handle released with
//!   [`cw_corpus_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use claimwise::corpus::{self, ClaimRecord, CorpusFormat, SourceBlocklist, VerdictLabel};
use claimwise::evaluation;
use claimwise::explain::{self, ExplainError, Feature, Granularity, TableGame};
use claimwise::nle::{self, NleText};
use claimwise::rationale::{self, Rationale, SummaryConfig};
use claimwise::verdict::{self, VerdictPrediction};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwStatus {
    CwOk = 0,
    CwNullPointer = 1,
    CwInvalidUtf8 = 2,
    CwInvalidArgument = 3,
    CwValidation = 4,
    CwBackend = 5,
    CwIo = 6,
    CwPanic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwVerdict {
    CwSupports = 0,
    CwRefutes = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CwCorpusFormat {
    CwJsonLines = 0,
    CwDelimited = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CwCorpusStats {
    pub total: usize,
    pub supports: usize,
    pub refutes: usize,
    pub mean_claim_tokens: f64,
    pub mean_evidence_tokens: f64,
}

/// Opaque corpus handle.
pub struct CwCorpus {
    records: Vec<ClaimRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(CwStatus, String);

impl Failure {
    fn validation(e: impl std::fmt::Display) -> Self {
        Failure(CwStatus::CwValidation, e.to_string())
    }
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CwStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CwStatus::CwOk,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CwStatus::CwPanic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(CwStatus::CwNullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CwStatus::CwInvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(CwStatus::CwNullPointer, "output pointer is null".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(CwStatus::CwInvalidArgument, "result contains a NUL byte".into()))?;
    write_out(out, c.into_raw())
}

fn to_label(v: CwVerdict) -> VerdictLabel {
    match v {
        CwVerdict::CwSupports => VerdictLabel::Supports,
        CwVerdict::CwRefutes => VerdictLabel::Refutes,
    }
}

fn from_label(l: VerdictLabel) -> CwVerdict {
    match l {
        VerdictLabel::Supports => CwVerdict::CwSupports,
        VerdictLabel::Refutes => CwVerdict::CwRefutes,
    }
}

fn label_code(code: u8) -> Result<VerdictLabel, Failure> {
    match code {
        0 => Ok(VerdictLabel::Supports),
        1 => Ok(VerdictLabel::Refutes),
        other => Err(Failure(CwStatus::CwInvalidArgument, format!("label code {other} is not 0 or 1"))),
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn cw_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. NULL is accepted.
///
/// # Safety
/// `s` must come from this library and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Verdict prompt for a claim and its rationale.
///
/// # Safety
/// `claim` and `rationale` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_build_copa_prompt(claim: *const c_char, rationale: *const c_char, out: *mut *mut c_char) -> CwStatus {
    guard(|| {
        let claim = read_str(claim, "claim")?;
        let rationale = read_str(rationale, "rationale")?;
        let p = verdict::build_copa_prompt(claim, rationale).map_err(Failure::validation)?;
        write_string(out, p.text)
    })
}

/// Explanation text for a verdict and rationale.
///
/// # Safety
/// `rationale` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_compose_nle(verdict: CwVerdict, rationale: *const c_char, out: *mut *mut c_char) -> CwStatus {
    guard(|| {
        let text = read_str(rationale, "rationale")?;
        let pred = VerdictPrediction {
            record_id: String::new(),
            label: to_label(verdict),
            raw_generation: String::new(),
            prompt_hash: String::new(),
        };
        let rat = Rationale { record_id: String::new(), text: text.to_string(), token_length: 0, backend_id: String::new() };
        let n = nle::compose_nle(&pred, &rat).map_err(Failure::validation)?;
        write_string(out, n.text)
    })
}

/// Entailment prompt for a claim and an explanation text.
///
/// # Safety
/// `claim` and `nle` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_build_nli_prompt(claim: *const c_char, nle: *const c_char, out: *mut *mut c_char) -> CwStatus {
    guard(|| {
        let claim = read_str(claim, "claim")?;
        let text = read_str(nle, "nle")?;
        let (word, rationale_text) = nle::parse_nle(text).unwrap_or_default();
        let n = NleText { record_id: String::new(), text: text.to_string(), verdict_word: word, rationale_text };
        let p = evaluation::build_nli_prompt(claim, &n).map_err(Failure::validation)?;
        write_string(out, p)
    })
}

/// Decode a text-to-text generation into a verdict.
///
/// # Safety
/// `raw` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_decode_verdict(raw: *const c_char, out: *mut CwVerdict) -> CwStatus {
    guard(|| {
        let raw = read_str(raw, "generation")?;
        let l = verdict::decode_verdict(raw).map_err(|e| Failure(CwStatus::CwBackend, e.to_string()))?;
        write_out(out, from_label(l))
    })
}

/// Map a raw corpus label (`True` / `False`) onto a verdict.
///
/// # Safety
/// `raw` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_map_verdict_label(raw: *const c_char, out: *mut CwVerdict) -> CwStatus {
    guard(|| {
        let raw = read_str(raw, "label")?;
        let l = corpus::map_verdict_label(raw).map_err(Failure::validation)?;
        write_out(out, from_label(l))
    })
}

/// Macro-F1 over `n` label codes (0 = Supports, 1 = Refutes).
///
/// # Safety
/// `predicted` and `gold` must each point to `n` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn cw_macro_f1(predicted: *const u8, gold: *const u8, n: usize, out: *mut f64) -> CwStatus {
    guard(|| {
        if predicted.is_null() || gold.is_null() {
            return Err(Failure(CwStatus::CwNullPointer, "label array is null".into()));
        }
        let p = std::slice::from_raw_parts(predicted, n).iter().map(|c| label_code(*c)).collect::<Result<Vec<_>, _>>()?;
        let g = std::slice::from_raw_parts(gold, n).iter().map(|c| label_code(*c)).collect::<Result<Vec<_>, _>>()?;
        let f = evaluation::macro_f1(&p, &g).map_err(Failure::validation)?;
        write_out(out, f)
    })
}

/// `100 * count / total`, cut to one decimal.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_one_decimal_percentage(count: usize, total: usize, out: *mut f64) -> CwStatus {
    guard(|| {
        if count > total {
            return Err(Failure(CwStatus::CwInvalidArgument, "count exceeds total".into()));
        }
        write_out(out, evaluation::one_decimal_percentage(count, total))
    })
}

/// Deterministic lead-sentence summary bounded to `[min_tokens, max_tokens]`.
///
/// # Safety
/// `evidence` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_stub_summarize(
    evidence: *const c_char,
    min_tokens: usize,
    max_tokens: usize,
    out: *mut *mut c_char,
) -> CwStatus {
    guard(|| {
        let evidence = read_str(evidence, "evidence")?;
        let cfg = SummaryConfig { min_tokens, max_tokens, ..SummaryConfig::default() };
        cfg.validate().map_err(|e| Failure(CwStatus::CwInvalidArgument, e.to_string()))?;
        write_string(out, rationale::stub_summarize(evidence, &cfg))
    })
}

/// Parse a corpus file into a new handle.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_corpus_load(path: *const c_char, format: CwCorpusFormat, out: *mut *mut CwCorpus) -> CwStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        let format = match format {
            CwCorpusFormat::CwJsonLines => CorpusFormat::JsonLines,
            CwCorpusFormat::CwDelimited => CorpusFormat::Delimited,
        };
        let records = corpus::parse_corpus(Path::new(path), format).map_err(|e| match e {
            corpus::CorpusError::UnreadableFile { .. } => Failure(CwStatus::CwIo, e.to_string()),
            other => Failure::validation(other),
        })?;
        write_out(out, Box::into_raw(Box::new(CwCorpus { records })))
    })
}

/// Drop evidence paragraphs citing a blocklisted outlet, and records left
/// with no evidence. `blocklist_path` may be NULL for the built-in list.
/// Writes the number of dropped records to `dropped` when it is not NULL.
///
/// # Safety
/// `corpus` must be a live handle; `blocklist_path` NULL or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn cw_corpus_clean(corpus: *mut CwCorpus, blocklist_path: *const c_char, dropped: *mut usize) -> CwStatus {
    guard(|| {
        let c = corpus.as_mut().ok_or_else(|| Failure(CwStatus::CwNullPointer, "corpus is null".into()))?;
        let bl = if blocklist_path.is_null() {
            SourceBlocklist::builtin()
        } else {
            let p = read_str(blocklist_path, "blocklist path")?;
            SourceBlocklist::load(Path::new(p)).map_err(|e| Failure(CwStatus::CwIo, e.to_string()))?
        };
        let cleaned = corpus::clean_corpus(&c.records, &bl);
        c.records = cleaned.records;
        if !dropped.is_null() {
            dropped.write(cleaned.dropped.len());
        }
        Ok(())
    })
}

/// Number of records held; 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cw_corpus_len(corpus: *const CwCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.records.len())
}

/// # Safety
/// `corpus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cw_corpus_get_stats(corpus: *const CwCorpus, out: *mut CwCorpusStats) -> CwStatus {
    guard(|| {
        let c = corpus.as_ref().ok_or_else(|| Failure(CwStatus::CwNullPointer, "corpus is null".into()))?;
        let s = corpus::compute_stats(&c.records).map_err(Failure::validation)?;
        write_out(
            out,
            CwCorpusStats {
                total: s.total,
                supports: s.label_count(VerdictLabel::Supports),
                refutes: s.label_count(VerdictLabel::Refutes),
                mean_claim_tokens: s.mean_claim_tokens,
                mean_evidence_tokens: s.mean_evidence_tokens,
            },
        )
    })
}

/// Train / validation / test sizes for a seeded split of the corpus.
///
/// # Safety
/// `corpus` must be a live handle; `ratios` must point to three doubles;
/// `sizes_out` must point to three writable `size_t`.
#[no_mangle]
pub unsafe extern "C" fn cw_corpus_split_sizes(
    corpus: *const CwCorpus,
    ratios: *const f64,
    seed: u64,
    sizes_out: *mut usize,
) -> CwStatus {
    guard(|| {
        let c = corpus.as_ref().ok_or_else(|| Failure(CwStatus::CwNullPointer, "corpus is null".into()))?;
        if ratios.is_null() || sizes_out.is_null() {
            return Err(Failure(CwStatus::CwNullPointer, "ratios or output is null".into()));
        }
        let r = std::slice::from_raw_parts(ratios, 3);
        let s = corpus::split_corpus(&c.records, [r[0], r[1], r[2]], seed)
            .map_err(|e| Failure(CwStatus::CwInvalidArgument, e.to_string()))?;
        let (a, b, t) = s.sizes();
        std::slice::from_raw_parts_mut(sizes_out, 3).copy_from_slice(&[a, b, t]);
        Ok(())
    })
}

/// Release a corpus handle. NULL is accepted.
///
/// # Safety
/// `corpus` must come from [`cw_corpus_load`] and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn cw_corpus_free(corpus: *mut CwCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Largest game accepted as a value table (2^20 doubles).
pub const CW_MAX_TABLE_PLAYERS: usize = 20;

unsafe fn table_game(values: *const f64, n_players: usize) -> Result<(Vec<Feature>, TableGame), Failure> {
    if values.is_null() {
        return Err(Failure(CwStatus::CwNullPointer, "value table is null".into()));
    }
    if n_players == 0 || n_players > CW_MAX_TABLE_PLAYERS {
        return Err(Failure(CwStatus::CwInvalidArgument, format!("unsupported player count {n_players}")));
    }
    let table = std::slice::from_raw_parts(values, 1usize << n_players).to_vec();
    let game = TableGame::new(table).expect("length is a power of two");
    let features = (0..n_players)
        .map(|index| Feature { index, text: format!("x{index}"), granularity: Granularity::Token })
        .collect();
    Ok((features, game))
}

fn explain_failure(e: ExplainError) -> Failure {
    match e {
        ExplainError::Backend(_) => Failure(CwStatus::CwBackend, e.to_string()),
        other => Failure(CwStatus::CwInvalidArgument, other.to_string()),
    }
}

/// Exact Shapley values of a game given as `2^n_players` coalition values
/// indexed by membership bitmask (bit `i` set when player `i` is present).
///
/// # Safety
/// `values` must hold `2^n_players` doubles; `phi_out` must hold `n_players`.
#[no_mangle]
pub unsafe extern "C" fn cw_exact_shapley(values: *const f64, n_players: usize, phi_out: *mut f64) -> CwStatus {
    guard(|| {
        let (features, game) = table_game(values, n_players)?;
        let r = explain::exact_shapley(&features, &game).map_err(explain_failure)?;
        if phi_out.is_null() {
            return Err(Failure(CwStatus::CwNullPointer, "phi output is null".into()));
        }
        std::slice::from_raw_parts_mut(phi_out, n_players).copy_from_slice(&r.phi);
        Ok(())
    })
}

/// Permutation-sampling Shapley estimate over the same table layout.
///
/// # Safety
/// `values` must hold `2^n_players` doubles; `phi_out` must hold `n_players`.
#[no_mangle]
pub unsafe extern "C" fn cw_sampled_shapley(
    values: *const f64,
    n_players: usize,
    num_permutations: usize,
    seed: u64,
    phi_out: *mut f64,
) -> CwStatus {
    guard(|| {
        let (features, game) = table_game(values, n_players)?;
        let r = explain::sampled_shapley(&features, &game, num_permutations, seed).map_err(explain_failure)?;
        if phi_out.is_null() {
            return Err(Failure(CwStatus::CwNullPointer, "phi output is null".into()));
        }
        std::slice::from_raw_parts_mut(phi_out, n_players).copy_from_slice(&r.phi);
        Ok(())
    })
}
