//! C ABI for the tokevolve toolkit.
//!
//! All functions use opaque handles and status codes. A handle returned
//! through an out-parameter is owned by the caller and must be released
//! with the matching `_free` function. On any non-zero status,
//! `tokevolve_last_error` returns a human-readable message for the
//! current thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use tokevolve::corpus::pack_corpus;
use tokevolve::evolve::merge_tokenizers;
use tokevolve::io::{load, save};
use tokevolve::trainer::{train, TrainConfig};
use tokevolve::{SpecialPolicy, Tokenizer};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokevolveStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    InvalidData = 4,
    IdOutOfRange = 5,
    MergeConflict = 6,
    InvalidConfig = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &tokevolve::Error) -> TokevolveStatus {
    use tokevolve::Error::*;
    match err {
        IdOutOfRange(..) => TokevolveStatus::IdOutOfRange,
        Io { .. } => TokevolveStatus::Io,
        Malformed { .. } | Invalid(_) | UnknownMergeToken { .. } | CorpusDocument { .. } => {
            TokevolveStatus::InvalidData
        }
        MergeMismatch(_) | UnreachableRule { .. } => TokevolveStatus::MergeConflict,
        RowCountMismatch { .. } | UnknownStrategy(_) | InvalidConfig(_) | EmptyInput(_) => {
            TokevolveStatus::InvalidConfig
        }
    }
}

fn fail(err: tokevolve::Error) -> TokevolveStatus {
    let status = status_of(&err);
    set_error(err.to_string());
    status
}

/// Opaque tokenizer handle.
pub struct TokevolveTokenizer(Tokenizer);

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, TokevolveStatus> {
    if ptr.is_null() {
        set_error("null string argument".into());
        return Err(TokevolveStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        TokevolveStatus::InvalidUtf8
    })
}

/// Message for the last error on this thread, or NULL if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tokevolve_last_error() -> *const c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null(), |c| c.as_ptr())
    })
}

/// Load a tokenizer from a directory holding `vocab.json` and `merges.txt`.
///
/// # Safety
/// `dir` must be a valid NUL-terminated string; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn tokevolve_tokenizer_load(
    dir: *const c_char,
    out: *mut *mut TokevolveTokenizer,
) -> TokevolveStatus {
    if out.is_null() {
        set_error("null out pointer".into());
        return TokevolveStatus::NullArgument;
    }
    let dir = match cstr_arg(dir) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match load(Path::new(dir)) {
        Ok(t) => {
            *out = Box::into_raw(Box::new(TokevolveTokenizer(t)));
            TokevolveStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Train a tokenizer on newline-separated plain-text documents.
///
/// # Safety
/// `corpus` must be a valid NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tokevolve_tokenizer_train(
    corpus: *const c_char,
    vocab_size: usize,
    min_pair_frequency: u64,
    out: *mut *mut TokevolveTokenizer,
) -> TokevolveStatus {
    if out.is_null() {
        set_error("null out pointer".into());
        return TokevolveStatus::NullArgument;
    }
    let corpus = match cstr_arg(corpus) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let docs: Vec<&str> = corpus.lines().collect();
    let config = TrainConfig {
        target_vocab_size: vocab_size,
        min_pair_frequency,
        ..TrainConfig::default()
    };
    match train(&docs, &config) {
        Ok(outcome) => {
            *out = Box::into_raw(Box::new(TokevolveTokenizer(outcome.tokenizer)));
            TokevolveStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Write `vocab.json`, `merges.txt` and `special_tokens.json` to `dir`.
///
/// # Safety
/// `tokenizer` must be a live handle; `dir` a valid string.
#[no_mangle]
pub unsafe extern "C" fn tokevolve_tokenizer_save(
    tokenizer: *const TokevolveTokenizer,
    dir: *const c_char,
) -> TokevolveStatus {
    let Some(t) = tokenizer.as_ref() else {
        set_error("null tokenizer handle".into());
        return TokevolveStatus::NullArgument;
    };
    let dir = match cstr_arg(dir) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match save(&t.0, Path::new(dir)) {
        Ok(()) => TokevolveStatus::Ok,
        Err(e) => fail(e),
    }
}

/// # Safety
/// `tokenizer` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tokevolve_tokenizer_free(tokenizer: *mut TokevolveTokenizer) {
    if !tokenizer.is_null() {
        drop(Box::from_raw(tokenizer));
    }
}

/// # Safety
/// `tokenizer` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tokevolve_vocab_size(tokenizer: *const TokevolveTokenizer) -> usize {
    tokenizer.as_ref().map_or(0, |t| t.0.vocab_size())
}

/// Number of invariant violations (0 means the tokenizer is well formed).
///
/// # Safety
/// `tokenizer` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tokevolve_validate(tokenizer: *const TokevolveTokenizer) -> usize {
    tokenizer.as_ref().map_or(0, |t| t.0.validate().len())
}

/// Encode UTF-8 text to token ids. `*out_ids` receives a caller-owned
/// buffer of `*out_len` ids; release it with `tokevolve_ids_free`.
///
/// # Safety
/// All pointers must be valid; `text` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn tokevolve_encode(
    tokenizer: *const TokevolveTokenizer,
    text: *const c_char,
    out_ids: *mut *mut u32,
    out_len: *mut usize,
) -> TokevolveStatus {
    let Some(t) = tokenizer.as_ref() else {
        set_error("null tokenizer handle".into());
        return TokevolveStatus::NullArgument;
    };
    if out_ids.is_null() || out_len.is_null() {
        set_error("null out pointer".into());
        return TokevolveStatus::NullArgument;
    }
    let text = match cstr_arg(text) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let ids = t.0.encode(text).into_boxed_slice();
    *out_len = ids.len();
    *out_ids = Box::into_raw(ids) as *mut u32;
    TokevolveStatus::Ok
}

/// # Safety
/// `ids`/`len` must be exactly as returned by `tokevolve_encode`.
#[no_mangle]
pub unsafe extern "C" fn tokevolve_ids_free(ids: *mut u32, len: usize) {
    if !ids.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(ids, len)));
    }
}

/// Decode token ids to text (special tokens skipped). `*out_text`
/// receives a caller-owned NUL-terminated string; release it with
/// `tokevolve_string_free`.
///
/// # Safety
/// `ids` must point to `len` valid ids; out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tokevolve_decode(
    tokenizer: *const TokevolveTokenizer,
    ids: *const u32,
    len: usize,
    out_text: *mut *mut c_char,
) -> TokevolveStatus {
    let Some(t) = tokenizer.as_ref() else {
        set_error("null tokenizer handle".into());
        return TokevolveStatus::NullArgument;
    };
    if out_text.is_null() || (ids.is_null() && len > 0) {
        set_error("null out pointer".into());
        return TokevolveStatus::NullArgument;
    }
    let ids = std::slice::from_raw_parts(ids, len);
    match t.0.decode(ids, SpecialPolicy::Skip) {
        Ok(text) => match CString::new(text) {
            Ok(c) => {
                *out_text = c.into_raw();
                TokevolveStatus::Ok
            }
            Err(_) => {
                set_error("decoded text contains an interior NUL byte".into());
                TokevolveStatus::InvalidData
            }
        },
        Err(e) => fail(e),
    }
}

/// # Safety
/// `text` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tokevolve_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Merge `new` into `old`; the result keeps every old token id and adds
/// the genuinely new tokens at the end. `*out_added` (optional) receives
/// the number of added tokens.
///
/// # Safety
/// `old` and `new` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tokevolve_merge(
    old: *const TokevolveTokenizer,
    new: *const TokevolveTokenizer,
    out: *mut *mut TokevolveTokenizer,
    out_added: *mut usize,
) -> TokevolveStatus {
    let (Some(old), Some(new)) = (old.as_ref(), new.as_ref()) else {
        set_error("null tokenizer handle".into());
        return TokevolveStatus::NullArgument;
    };
    if out.is_null() {
        set_error("null out pointer".into());
        return TokevolveStatus::NullArgument;
    }
    match merge_tokenizers(&old.0, &new.0) {
        Ok(outcome) => {
            if !out_added.is_null() {
                *out_added = outcome.added_tokens.len();
            }
            *out = Box::into_raw(Box::new(TokevolveTokenizer(outcome.merged)));
            TokevolveStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Split newline-separated documents into sentences and pack them into
/// chunks of at most `max_tokens` tokens, returned as JSONL (one chunk
/// object per line). Release the string with `tokevolve_string_free`.
///
/// # Safety
/// `tokenizer` must be a live handle; `corpus` a valid string; `out_jsonl`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tokevolve_pack(
    tokenizer: *const TokevolveTokenizer,
    corpus: *const c_char,
    max_tokens: usize,
    out_jsonl: *mut *mut c_char,
) -> TokevolveStatus {
    let Some(t) = tokenizer.as_ref() else {
        set_error("null tokenizer handle".into());
        return TokevolveStatus::NullArgument;
    };
    if out_jsonl.is_null() {
        set_error("null out pointer".into());
        return TokevolveStatus::NullArgument;
    }
    if max_tokens == 0 {
        set_error("max_tokens must be at least 1".into());
        return TokevolveStatus::InvalidConfig;
    }
    let corpus = match cstr_arg(corpus) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let docs: Vec<&str> = corpus.lines().collect();
    let packed = pack_corpus(&docs, &t.0, max_tokens);
    let mut body = String::new();
    for chunk in &packed.chunks {
        body.push_str(&chunk.to_json());
        body.push('\n');
    }
    match CString::new(body) {
        Ok(c) => {
            *out_jsonl = c.into_raw();
            TokevolveStatus::Ok
        }
        Err(_) => {
            set_error("packed output contains an interior NUL byte".into());
            TokevolveStatus::InvalidData
        }
    }
}
