//! C ABI for the ndpgrid routing library: opaque handles, integer error
//! codes, and UTF-8 text exchange in the library's own formats.
//!
//! The matching header lives in `include/ndpgrid.h` and is maintained by
//! hand; keep the two in sync when the surface changes.
//!
//! Ownership rules: every `*_new`/`*_parse`/`*_solve` result must be released
//! with the matching `*_free`; strings returned by `ndp_*_emit` are released
//! with `ndp_string_free`. Handles are not thread-safe; the error message
//! slot is thread-local.

use ndpgrid::farroute::FarConfig;
use ndpgrid::grid::{verify_routing, GridInstance, ParamOverrides, PolylogOverrides, Verdict};
use ndpgrid::instances::{gen_hard, gen_random, gen_spaced};
use ndpgrid::io::{emit_instance, emit_routing, parse_instance, parse_routing, GraphKind};
use ndpgrid::reduction::{solve_restricted, SolveConfig};
use ndpgrid::Routing;
use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::ptr;

pub const NDP_OK: c_int = 0;
pub const NDP_ERR_INVALID_ARGUMENT: c_int = 1;
pub const NDP_ERR_PARSE: c_int = 2;
pub const NDP_ERR_SOLVE: c_int = 3;
pub const NDP_ERR_VERIFY: c_int = 4;
pub const NDP_ERR_BUDGET: c_int = 5;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

/// Opaque instance handle.
pub struct NdpInstance {
    inner: GridInstance,
    kind: GraphKind,
}

/// Opaque routing handle.
pub struct NdpRouting {
    inner: Routing,
}

/// Last error message for this thread; valid until the next failing call.
#[no_mangle]
pub extern "C" fn ndp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, c_int> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(NDP_ERR_INVALID_ARGUMENT);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        NDP_ERR_INVALID_ARGUMENT
    })
}

/// Parse an instance in the `ndpgrid v1` text format.
///
/// # Safety
/// `text` must be a valid NUL-terminated C string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ndp_instance_parse(
    text: *const c_char,
    out: *mut *mut NdpInstance,
) -> c_int {
    if out.is_null() {
        set_error("null output pointer");
        return NDP_ERR_INVALID_ARGUMENT;
    }
    let text = match unsafe { str_arg(text) } {
        Ok(t) => t,
        Err(code) => return code,
    };
    match parse_instance(text) {
        Ok(parsed) => {
            let handle = Box::new(NdpInstance {
                inner: parsed.instance,
                kind: parsed.kind,
            });
            unsafe { *out = Box::into_raw(handle) };
            NDP_OK
        }
        Err(e) => {
            set_error(&e.to_string());
            unsafe { *out = ptr::null_mut() };
            NDP_ERR_PARSE
        }
    }
}

/// Generate an instance. `kind`: 0 random, 1 spaced, 2 hard (level = k).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ndp_instance_generate(
    kind: c_int,
    side: u32,
    k: u64,
    far_margin: u64,
    seed: u64,
    out: *mut *mut NdpInstance,
) -> c_int {
    if out.is_null() {
        set_error("null output pointer");
        return NDP_ERR_INVALID_ARGUMENT;
    }
    let made = match kind {
        0 => gen_random(side, k as usize, far_margin, seed).map_err(|e| e.to_string()),
        1 => gen_spaced(side, k as usize, seed).map_err(|e| e.to_string()),
        2 => gen_hard(k as u32)
            .map(|(i, _)| i)
            .map_err(|e| e.to_string()),
        _ => Err(format!("unknown generator kind {kind}")),
    };
    match made {
        Ok(inner) => {
            unsafe {
                *out = Box::into_raw(Box::new(NdpInstance {
                    inner,
                    kind: GraphKind::Grid,
                }))
            };
            NDP_OK
        }
        Err(msg) => {
            set_error(&msg);
            unsafe { *out = ptr::null_mut() };
            NDP_ERR_INVALID_ARGUMENT
        }
    }
}

/// # Safety
/// `inst` must be a live handle from this library (or null).
#[no_mangle]
pub unsafe extern "C" fn ndp_instance_free(inst: *mut NdpInstance) {
    if !inst.is_null() {
        drop(unsafe { Box::from_raw(inst) });
    }
}

/// # Safety
/// `inst` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ndp_instance_side(inst: *const NdpInstance) -> u32 {
    unsafe { inst.as_ref() }.map_or(0, |i| i.inner.side)
}

/// # Safety
/// `inst` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ndp_instance_pair_count(inst: *const NdpInstance) -> u64 {
    unsafe { inst.as_ref() }.map_or(0, |i| i.inner.pairs.len() as u64)
}

/// Emit the instance text; free with `ndp_string_free`.
///
/// # Safety
/// `inst` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ndp_instance_emit(inst: *const NdpInstance) -> *mut c_char {
    match unsafe { inst.as_ref() } {
        Some(i) => CString::new(emit_instance(i.kind, &i.inner))
            .map(|s| s.into_raw())
            .unwrap_or(ptr::null_mut()),
        None => ptr::null_mut(),
    }
}

/// Solve with the default desk configuration.
///
/// # Safety
/// `inst` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ndp_solve(
    inst: *const NdpInstance,
    seed: u64,
    trials: u64,
    out: *mut *mut NdpRouting,
) -> c_int {
    let Some(handle) = (unsafe { inst.as_ref() }) else {
        set_error("null instance");
        return NDP_ERR_INVALID_ARGUMENT;
    };
    if out.is_null() {
        set_error("null output pointer");
        return NDP_ERR_INVALID_ARGUMENT;
    }
    let overrides = ParamOverrides {
        eta: None,
        rho: None,
        polylog: PolylogOverrides {
            stage2_cap_factor: Some(u64::MAX / 4),
            stage3_modulus: Some(1),
            trial_factor: None,
            subsample_modulus: Some(1),
        },
    };
    let config = SolveConfig {
        overrides,
        far: FarConfig {
            trials: Some(trials.max(1)),
            max_branches: Some(24),
            wall_mode: false,
        },
        ..SolveConfig::default()
    };
    match solve_restricted(&handle.inner, seed, &config) {
        Ok(routing) => {
            if !matches!(verify_routing(&handle.inner, &routing), Verdict::Valid) {
                set_error("solver produced an invalid routing");
                unsafe { *out = ptr::null_mut() };
                return NDP_ERR_VERIFY;
            }
            unsafe { *out = Box::into_raw(Box::new(NdpRouting { inner: routing })) };
            NDP_OK
        }
        Err(e) => {
            set_error(&e.to_string());
            unsafe { *out = ptr::null_mut() };
            NDP_ERR_SOLVE
        }
    }
}

/// # Safety
/// `routing` must be a live handle (or null).
#[no_mangle]
pub unsafe extern "C" fn ndp_routing_free(routing: *mut NdpRouting) {
    if !routing.is_null() {
        drop(unsafe { Box::from_raw(routing) });
    }
}

/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn ndp_routing_verify(
    inst: *const NdpInstance,
    routing: *const NdpRouting,
) -> c_int {
    let (Some(i), Some(r)) = (unsafe { inst.as_ref() }, unsafe { routing.as_ref() }) else {
        set_error("null handle");
        return NDP_ERR_INVALID_ARGUMENT;
    };
    match verify_routing(&i.inner, &r.inner) {
        Verdict::Valid => NDP_OK,
        Verdict::Violation(v) => {
            set_error(&v.to_string());
            NDP_ERR_VERIFY
        }
    }
}

/// # Safety
/// `routing` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ndp_routing_len(routing: *const NdpRouting) -> u64 {
    unsafe { routing.as_ref() }.map_or(0, |r| r.inner.entries.len() as u64)
}

/// Pair index served by the i-th routed path, or u64::MAX out of range.
///
/// # Safety
/// `routing` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ndp_routing_pair_index(routing: *const NdpRouting, i: u64) -> u64 {
    unsafe { routing.as_ref() }
        .and_then(|r| r.inner.entries.get(i as usize))
        .map_or(u64::MAX, |(p, _)| *p as u64)
}

/// # Safety
/// `routing` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ndp_routing_path_len(routing: *const NdpRouting, i: u64) -> u64 {
    unsafe { routing.as_ref() }
        .and_then(|r| r.inner.entries.get(i as usize))
        .map_or(0, |(_, p)| p.len() as u64)
}

/// Fetch one vertex of one path. Returns NDP_OK and writes row/col.
///
/// # Safety
/// `routing` must be live; `row` and `col` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn ndp_routing_path_vertex(
    routing: *const NdpRouting,
    i: u64,
    j: u64,
    row: *mut u32,
    col: *mut u32,
) -> c_int {
    if row.is_null() || col.is_null() {
        set_error("null output pointer");
        return NDP_ERR_INVALID_ARGUMENT;
    }
    let v = unsafe { routing.as_ref() }
        .and_then(|r| r.inner.entries.get(i as usize))
        .and_then(|(_, p)| p.vertices.get(j as usize));
    match v {
        Some(v) => {
            unsafe {
                *row = v.row;
                *col = v.col;
            }
            NDP_OK
        }
        None => {
            set_error("index out of range");
            NDP_ERR_INVALID_ARGUMENT
        }
    }
}

/// Emit the routing text; free with `ndp_string_free`.
///
/// # Safety
/// `routing` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ndp_routing_emit(routing: *const NdpRouting) -> *mut c_char {
    match unsafe { routing.as_ref() } {
        Some(r) => CString::new(emit_routing(&r.inner))
            .map(|s| s.into_raw())
            .unwrap_or(ptr::null_mut()),
        None => ptr::null_mut(),
    }
}

/// Parse a routing in the `routing v1` format.
///
/// # Safety
/// `text` must be a valid C string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ndp_routing_parse(
    text: *const c_char,
    out: *mut *mut NdpRouting,
) -> c_int {
    if out.is_null() {
        set_error("null output pointer");
        return NDP_ERR_INVALID_ARGUMENT;
    }
    let text = match unsafe { str_arg(text) } {
        Ok(t) => t,
        Err(code) => return code,
    };
    match parse_routing(text) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(NdpRouting { inner })) };
            NDP_OK
        }
        Err(e) => {
            set_error(&e.to_string());
            unsafe { *out = ptr::null_mut() };
            NDP_ERR_PARSE
        }
    }
}

/// Release a string returned by an emit call.
///
/// # Safety
/// `s` must come from this library (or be null).
#[no_mangle]
pub unsafe extern "C" fn ndp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_solve_verify_roundtrip() {
        let text = CString::new("ndpgrid v1\nside 8\npairs 2\n1 2 5 5\n1 6 7 3\n").unwrap();
        let mut inst: *mut NdpInstance = ptr::null_mut();
        assert_eq!(
            unsafe { ndp_instance_parse(text.as_ptr(), &mut inst) },
            NDP_OK
        );
        assert_eq!(unsafe { ndp_instance_side(inst) }, 8);
        assert_eq!(unsafe { ndp_instance_pair_count(inst) }, 2);
        let mut routing: *mut NdpRouting = ptr::null_mut();
        assert_eq!(unsafe { ndp_solve(inst, 7, 4, &mut routing) }, NDP_OK);
        assert_eq!(unsafe { ndp_routing_verify(inst, routing) }, NDP_OK);
        assert!(unsafe { ndp_routing_len(routing) } >= 1);
        let emitted = unsafe { ndp_routing_emit(routing) };
        assert!(!emitted.is_null());
        let text = unsafe { CStr::from_ptr(emitted) }
            .to_str()
            .unwrap()
            .to_owned();
        assert!(text.starts_with("routing v1\n"));
        let mut reparsed: *mut NdpRouting = ptr::null_mut();
        let ctext = CString::new(text).unwrap();
        assert_eq!(
            unsafe { ndp_routing_parse(ctext.as_ptr(), &mut reparsed) },
            NDP_OK
        );
        assert_eq!(unsafe { ndp_routing_verify(inst, reparsed) }, NDP_OK);
        unsafe {
            ndp_string_free(emitted);
            ndp_routing_free(reparsed);
            ndp_routing_free(routing);
            ndp_instance_free(inst);
        }
    }

    #[test]
    fn parse_error_sets_message() {
        let text = CString::new("bogus").unwrap();
        let mut inst: *mut NdpInstance = ptr::null_mut();
        assert_eq!(
            unsafe { ndp_instance_parse(text.as_ptr(), &mut inst) },
            NDP_ERR_PARSE
        );
        assert!(inst.is_null());
        let msg = unsafe { CStr::from_ptr(ndp_last_error_message()) };
        assert!(!msg.to_bytes().is_empty());
    }
}
