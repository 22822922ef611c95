//! C ABI over the pure specforge operations, for bindings from other
//! languages: clause counting, annotation stripping, anonymization,
//! code-token equivalence, answer validation, and symbolic report parsing.
//!
//! Conventions:
//! - Every function returns an [`SfStatus`]; results come back through out
//!   parameters.
//! - Returned strings are NUL-terminated, allocated by this library, and
//!   must be released with [`sf_string_free`].
//! - Structured results (rename maps, validation, parsed reports) are
//!   returned as JSON strings, the same shapes the CLI emits.
//! - On any status other than `SF_STATUS_OK`, [`sf_last_error`] returns a
//!   message for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use specforge::acsl;
use specforge::corpus::{anonymize, AnonymizeOptions};
use specforge::ctokens;
use specforge::pipeline::validate;
use specforge::symbolic::{parse_eva_report, parse_pathcrawler_csv, RaggedRowPolicy};

/// Status codes for every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    LexError = 3,
    ParseError = 4,
    InternalError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let cstring = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Most recent error message on this thread, or NULL when the last call
/// succeeded. The pointer is owned by the library and valid until the next
/// FFI call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn sf_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned through an out parameter of a
/// specforge function, not yet freed, or NULL.
#[no_mangle]
pub unsafe extern "C" fn sf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn input_str<'a>(ptr: *const c_char) -> Result<&'a str, SfStatus> {
    if ptr.is_null() {
        set_last_error("null input pointer".into());
        return Err(SfStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|e| {
        set_last_error(format!("input is not valid UTF-8: {e}"));
        SfStatus::InvalidUtf8
    })
}

fn output_string(out: *mut *mut c_char, value: String) -> SfStatus {
    if out.is_null() {
        set_last_error("null output pointer".into());
        return SfStatus::NullPointer;
    }
    match CString::new(value) {
        Ok(cstring) => {
            unsafe { *out = cstring.into_raw() };
            SfStatus::Ok
        }
        Err(_) => {
            set_last_error("result contained an interior NUL byte".into());
            SfStatus::InternalError
        }
    }
}

/// Count ACSL clauses in a C file. `out_csv` receives two lines: the fixed
/// CSV header and one data row with empty context columns.
///
/// # Safety
/// `source` must point to a NUL-terminated string; `out_csv` must be a
/// valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_count_csv(
    source: *const c_char,
    out_csv: *mut *mut c_char,
) -> SfStatus {
    clear_last_error();
    let source = match input_str(source) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match acsl::count(source) {
        Ok(row) => output_string(
            out_csv,
            format!(
                "{}\n{}\n",
                acsl::CountRow::csv_header(),
                row.csv_row("", "", "", "")
            ),
        ),
        Err(e) => {
            set_last_error(e.to_string());
            SfStatus::LexError
        }
    }
}

/// Remove every ACSL annotation, preserving code and plain comments.
///
/// # Safety
/// `source` must point to a NUL-terminated string; `out_source` must be a
/// valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_strip_annotations(
    source: *const c_char,
    out_source: *mut *mut c_char,
) -> SfStatus {
    clear_last_error();
    let source = match input_str(source) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match acsl::strip_annotations(source) {
        Ok(stripped) => output_string(out_source, stripped),
        Err(e) => {
            set_last_error(e.to_string());
            SfStatus::LexError
        }
    }
}

/// Rename user-defined functions to f1, f2, … in definition order.
/// `out_source` receives the renamed program; `out_rename_map_json` a JSON
/// array of [original, placeholder] pairs.
///
/// # Safety
/// `source` must point to a NUL-terminated string; both out parameters
/// must be valid writable pointers.
#[no_mangle]
pub unsafe extern "C" fn sf_anonymize(
    source: *const c_char,
    strip_comments: bool,
    out_source: *mut *mut c_char,
    out_rename_map_json: *mut *mut c_char,
) -> SfStatus {
    clear_last_error();
    let source = match input_str(source) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match anonymize(source, &AnonymizeOptions { strip_comments }) {
        Ok((renamed, map)) => {
            let map_json = serde_json::to_string(&map).expect("rename map serializes");
            let status = output_string(out_source, renamed);
            if status != SfStatus::Ok {
                return status;
            }
            output_string(out_rename_map_json, map_json)
        }
        Err(e) => {
            set_last_error(e.to_string());
            SfStatus::LexError
        }
    }
}

/// Compare two files on code tokens only. `out_equal` receives the verdict;
/// `out_divergence_json` receives the first differing token pair as JSON,
/// or NULL when the files are equivalent.
///
/// # Safety
/// `left` and `right` must point to NUL-terminated strings; `out_equal`
/// and `out_divergence_json` must be valid writable pointers.
#[no_mangle]
pub unsafe extern "C" fn sf_code_token_equivalent(
    left: *const c_char,
    right: *const c_char,
    out_equal: *mut bool,
    out_divergence_json: *mut *mut c_char,
) -> SfStatus {
    clear_last_error();
    let left = match input_str(left) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let right = match input_str(right) {
        Ok(s) => s,
        Err(status) => return status,
    };
    if out_equal.is_null() || out_divergence_json.is_null() {
        set_last_error("null output pointer".into());
        return SfStatus::NullPointer;
    }
    match ctokens::code_token_equivalent(left, right) {
        Ok(eq) => {
            *out_equal = eq.equal;
            match eq.first_divergence {
                Some(divergence) => {
                    let json = serde_json::to_string(&divergence).expect("divergence serializes");
                    output_string(out_divergence_json, json)
                }
                None => {
                    *out_divergence_json = std::ptr::null_mut();
                    SfStatus::Ok
                }
            }
        }
        Err(e) => {
            set_last_error(e.to_string());
            SfStatus::LexError
        }
    }
}

/// Validate that `annotated` only adds annotations to `original`. The
/// result is the JSON form of the validation record: `{ok, failures}`.
///
/// # Safety
/// `original` and `annotated` must point to NUL-terminated strings;
/// `out_json` must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_validate(
    original: *const c_char,
    annotated: *const c_char,
    out_json: *mut *mut c_char,
) -> SfStatus {
    clear_last_error();
    let original = match input_str(original) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let annotated = match input_str(annotated) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let result = validate(original, annotated);
    output_string(
        out_json,
        serde_json::to_string(&result).expect("validation serializes"),
    )
}

/// Parse an EVA report into JSON: alarms, final states, non-termination,
/// summary.
///
/// # Safety
/// `text` must point to a NUL-terminated string; `out_json` must be a
/// valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_parse_eva_report(
    text: *const c_char,
    out_json: *mut *mut c_char,
) -> SfStatus {
    clear_last_error();
    let text = match input_str(text) {
        Ok(s) => s,
        Err(status) => return status,
    };
    match parse_eva_report(text) {
        Ok(report) => output_string(
            out_json,
            serde_json::to_string(&report).expect("report serializes"),
        ),
        Err(e) => {
            set_last_error(e.to_string());
            SfStatus::ParseError
        }
    }
}

/// Parse a PathCrawler CSV table into JSON. `pad_ragged_rows` selects the
/// lenient ragged-row policy; the default behavior is to reject.
///
/// # Safety
/// `text` must point to a NUL-terminated string; `out_json` must be a
/// valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_parse_pathcrawler_csv(
    text: *const c_char,
    pad_ragged_rows: bool,
    out_json: *mut *mut c_char,
) -> SfStatus {
    clear_last_error();
    let text = match input_str(text) {
        Ok(s) => s,
        Err(status) => return status,
    };
    let policy = if pad_ragged_rows {
        RaggedRowPolicy::Pad
    } else {
        RaggedRowPolicy::Reject
    };
    match parse_pathcrawler_csv(text, policy) {
        Ok(table) => output_string(
            out_json,
            serde_json::to_string(&table).expect("table serializes"),
        ),
        Err(e) => {
            set_last_error(e.to_string());
            SfStatus::ParseError
        }
    }
}

/// Opaque list of extracted annotations.
pub struct SfAnnotations {
    annotations: Vec<acsl::Annotation>,
}

/// Extract every ACSL clause from annotated C. On success `out` receives an
/// owned handle to release with [`sf_annotations_free`].
///
/// # Safety
/// `source` must point to a NUL-terminated string; `out` must be a valid
/// writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_annotations_parse(
    source: *const c_char,
    out: *mut *mut SfAnnotations,
) -> SfStatus {
    clear_last_error();
    let source = match input_str(source) {
        Ok(s) => s,
        Err(status) => return status,
    };
    if out.is_null() {
        set_last_error("null output pointer".into());
        return SfStatus::NullPointer;
    }
    match acsl::extract_annotations(source) {
        Ok(annotations) => {
            *out = Box::into_raw(Box::new(SfAnnotations { annotations }));
            SfStatus::Ok
        }
        Err(e) => {
            set_last_error(e.to_string());
            SfStatus::LexError
        }
    }
}

/// Number of clauses behind the handle. Returns 0 for NULL.
///
/// # Safety
/// `handle` must be NULL or a live handle from [`sf_annotations_parse`].
#[no_mangle]
pub unsafe extern "C" fn sf_annotations_len(handle: *const SfAnnotations) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).annotations.len()
}

/// One clause as JSON: `{kind, clause_text, enclosing_function, span}`.
///
/// # Safety
/// `handle` must be a live handle from [`sf_annotations_parse`]; `out_json`
/// must be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_annotations_get(
    handle: *const SfAnnotations,
    index: usize,
    out_json: *mut *mut c_char,
) -> SfStatus {
    clear_last_error();
    if handle.is_null() {
        set_last_error("null handle".into());
        return SfStatus::NullPointer;
    }
    let annotations = &(*handle).annotations;
    match annotations.get(index) {
        Some(annotation) => output_string(
            out_json,
            serde_json::to_string(annotation).expect("annotation serializes"),
        ),
        None => {
            set_last_error(format!(
                "index {index} out of range ({} clauses)",
                annotations.len()
            ));
            SfStatus::ParseError
        }
    }
}

/// Release a handle from [`sf_annotations_parse`].
///
/// # Safety
/// `handle` must be NULL or a live handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sf_annotations_free(handle: *mut SfAnnotations) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}
