//! C ABI over `graphprobe`.
//!
//! Every fallible function returns a [`GpStatus`]; on failure the message is
//! available from [`gp_last_error_message`] on the same thread until the next
//! call. Objects cross the boundary as opaque handles that the caller owns
//! and releases with the matching `*_free` function. Panics never unwind
//! into the caller: they are reported as [`GpStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use graphprobe::cli::{cmd_all, RunConfig};
use graphprobe::graph::{generate_grid_house, load_dataset, save_dataset, Dataset, Graph, GridHouseParams, Split};
use graphprobe::probe::{read_probes_csv, ProbesFile};
use graphprobe::props::{corpus_properties, GlobalProperty, PropsConfig};
use graphprobe::Error;

/// Result of every fallible call. The numeric values match the command-line
/// exit codes where the two overlap.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid parameter or configuration.
    InvalidArgument = 2,
    /// An input file is missing; the message names the command producing it.
    MissingInput = 3,
    /// Any other failure (I/O, parse, numerical, ...).
    Runtime = 4,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 5,
    /// An index or name did not match anything.
    NotFound = 6,
    /// A bug inside the library; the handle arguments should be discarded.
    Panic = 7,
}

/// A graph.
pub struct GpGraph(Graph);

/// A labelled graph corpus with its train/test split.
pub struct GpDataset(Dataset);

/// A probe table read from `probes.csv`.
pub struct GpProbes(ProbesFile);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|e| {
        let mut bytes = e.into_vec();
        bytes.retain(|&b| b != 0);
        CString::new(bytes).expect("nul bytes removed")
    });
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GpStatus {
    match e {
        Error::Param(_) | Error::Config(_) | Error::Contract(_) => GpStatus::InvalidArgument,
        Error::MissingInput { .. } => GpStatus::MissingInput,
        _ => GpStatus::Runtime,
    }
}

/// An error raised on the FFI side before reaching the library.
struct Fail(GpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GpStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            GpStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(GpStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(GpStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or null if it succeeded.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Number of graph-level properties computed by [`gp_graph_properties`].
#[no_mangle]
pub extern "C" fn gp_property_count() -> usize {
    GlobalProperty::ALL.len()
}

/// Static name of property `index`, or null when out of range.
#[no_mangle]
pub extern "C" fn gp_property_name(index: usize) -> *const c_char {
    static NAMES: std::sync::OnceLock<Vec<CString>> = std::sync::OnceLock::new();
    let names = NAMES.get_or_init(|| {
        GlobalProperty::ALL
            .iter()
            .map(|p| CString::new(p.name()).expect("property names have no nul"))
            .collect()
    });
    names.get(index).map_or(std::ptr::null(), |c| c.as_ptr())
}

/// Builds a graph on `n` nodes from `edge_count` pairs stored flat in
/// `edges` (`u0, v0, u1, v1, ...`). `edges` may be null when `edge_count` is 0.
///
/// # Safety
/// `edges` must point to `2 * edge_count` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_new(n: usize, edges: *const u32, edge_count: usize, out: *mut *mut GpGraph) -> GpStatus {
    guard(|| {
        let pairs: Vec<(usize, usize)> = if edge_count == 0 {
            Vec::new()
        } else {
            if edges.is_null() {
                return Err(null("edges"));
            }
            std::slice::from_raw_parts(edges, 2 * edge_count)
                .chunks_exact(2)
                .map(|e| (e[0] as usize, e[1] as usize))
                .collect()
        };
        let g = Graph::new("graph", n, &pairs)?;
        write_out(out, Box::into_raw(Box::new(GpGraph(g))), "out")
    })
}

/// # Safety
/// `graph` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_free(graph: *mut GpGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle; `out_nodes` and `out_edges` writable.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_size(graph: *const GpGraph, out_nodes: *mut usize, out_edges: *mut usize) -> GpStatus {
    guard(|| {
        let g = &reference(graph, "graph")?.0;
        write_out(out_nodes, g.n(), "out_nodes")?;
        write_out(out_edges, g.m(), "out_edges")
    })
}

/// Label of the graph: 0 or 1, or -1 when unlabelled.
///
/// # Safety
/// `graph` must be a live handle; `out_label` writable.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_label(graph: *const GpGraph, out_label: *mut i32) -> GpStatus {
    guard(|| {
        let g = &reference(graph, "graph")?.0;
        write_out(out_label, g.label.map_or(-1, i32::from), "out_label")
    })
}

/// Computes every graph-level property in the order of [`gp_property_name`].
/// `values` and `defined` must each hold `len` entries, `len` at least
/// [`gp_property_count`]; `defined[i]` is 0 when property `i` is undefined for
/// this graph (its value is then meaningless). Stochastic properties draw from
/// `seed`.
///
/// # Safety
/// `graph` must be a live handle; `values` and `defined` writable for `len` entries.
#[no_mangle]
pub unsafe extern "C" fn gp_graph_properties(
    graph: *const GpGraph,
    seed: u64,
    values: *mut f64,
    defined: *mut u8,
    len: usize,
) -> GpStatus {
    guard(|| {
        let g = &reference(graph, "graph")?.0;
        if values.is_null() {
            return Err(null("values"));
        }
        if defined.is_null() {
            return Err(null("defined"));
        }
        let count = GlobalProperty::ALL.len();
        if len < count {
            return Err(Fail(
                GpStatus::InvalidArgument,
                format!("buffers hold {len} entries but {count} are needed"),
            ));
        }
        let (props, _) = corpus_properties(std::slice::from_ref(g), &PropsConfig::default(), seed)
            .pop()
            .expect("one graph in, one row out");
        let values = std::slice::from_raw_parts_mut(values, count);
        let defined = std::slice::from_raw_parts_mut(defined, count);
        for (i, (_, v)) in props.iter().enumerate() {
            values[i] = v.value;
            defined[i] = u8::from(v.defined);
        }
        Ok(())
    })
}

/// Generates a Grid-House corpus of `count` graphs with default parameters.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gp_dataset_generate(count: usize, seed: u64, out: *mut *mut GpDataset) -> GpStatus {
    guard(|| {
        let data = generate_grid_house(&GridHouseParams::with_count(count), seed)?;
        write_out(out, Box::into_raw(Box::new(GpDataset(data))), "out")
    })
}

/// Reads a corpus written by `graphprobe generate` or [`gp_dataset_save`].
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gp_dataset_load(path: *const c_char, out: *mut *mut GpDataset) -> GpStatus {
    guard(|| {
        let path = string(path, "path")?;
        let data = load_dataset(&PathBuf::from(path))?;
        write_out(out, Box::into_raw(Box::new(GpDataset(data))), "out")
    })
}

/// # Safety
/// `dataset` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn gp_dataset_save(dataset: *const GpDataset, path: *const c_char) -> GpStatus {
    guard(|| {
        let data = &reference(dataset, "dataset")?.0;
        let path = string(path, "path")?;
        save_dataset(data, &PathBuf::from(path))?;
        Ok(())
    })
}

/// # Safety
/// `dataset` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gp_dataset_free(dataset: *mut GpDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// # Safety
/// `dataset` must be a live handle; `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn gp_dataset_len(dataset: *const GpDataset, out_len: *mut usize) -> GpStatus {
    guard(|| {
        let data = &reference(dataset, "dataset")?.0;
        write_out(out_len, data.len(), "out_len")
    })
}

/// A copy of graph `index`, owned by the caller. `out_is_test` (optional)
/// receives 1 for test-split graphs, 0 for training graphs.
///
/// # Safety
/// `dataset` must be a live handle; `out` writable; `out_is_test` null or writable.
#[no_mangle]
pub unsafe extern "C" fn gp_dataset_graph(
    dataset: *const GpDataset,
    index: usize,
    out: *mut *mut GpGraph,
    out_is_test: *mut u8,
) -> GpStatus {
    guard(|| {
        let data = &reference(dataset, "dataset")?.0;
        let g = data.graphs.get(index).ok_or_else(|| {
            Fail(
                GpStatus::NotFound,
                format!("graph index {index} out of range for {} graphs", data.len()),
            )
        })?;
        if !out_is_test.is_null() {
            out_is_test.write(u8::from(data.split[index] == Split::Test));
        }
        write_out(out, Box::into_raw(Box::new(GpGraph(g.clone()))), "out")
    })
}

/// Runs the whole experiment (generate, properties, train, probe, report)
/// into `out_dir`. `config_path` may be null for the defaults.
///
/// # Safety
/// `config_path` must be null or NUL-terminated; `out_dir` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn gp_run_all(config_path: *const c_char, out_dir: *const c_char) -> GpStatus {
    guard(|| {
        let config = if config_path.is_null() {
            RunConfig::default()
        } else {
            RunConfig::load(&PathBuf::from(string(config_path, "config_path")?))?
        };
        let out = PathBuf::from(string(out_dir, "out_dir")?);
        cmd_all(&config, &out)?;
        Ok(())
    })
}

/// Reads a probe table written by `graphprobe probe`.
///
/// # Safety
/// `path` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gp_probes_load(path: *const c_char, out: *mut *mut GpProbes) -> GpStatus {
    guard(|| {
        let path = string(path, "path")?;
        let probes = read_probes_csv(&PathBuf::from(path))?;
        write_out(out, Box::into_raw(Box::new(GpProbes(probes))), "out")
    })
}

/// # Safety
/// `probes` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gp_probes_free(probes: *mut GpProbes) {
    if !probes.is_null() {
        drop(Box::from_raw(probes));
    }
}

/// Test accuracy of the probed model.
///
/// # Safety
/// `probes` must be a live handle; `out_accuracy` writable.
#[no_mangle]
pub unsafe extern "C" fn gp_probes_test_accuracy(probes: *const GpProbes, out_accuracy: *mut f64) -> GpStatus {
    guard(|| {
        let p = &reference(probes, "probes")?.0;
        write_out(out_accuracy, p.meta.test_accuracy, "out_accuracy")
    })
}

/// Held-out R² of the probe of `property` on `layer`. Returns
/// [`GpStatus::NotFound`] when no such probe exists or its R² is undefined.
///
/// # Safety
/// `probes` must be a live handle; `layer` and `property` NUL-terminated; `out_r2` writable.
#[no_mangle]
pub unsafe extern "C" fn gp_probes_r2_test(
    probes: *const GpProbes,
    layer: *const c_char,
    property: *const c_char,
    out_r2: *mut f64,
) -> GpStatus {
    guard(|| {
        let p = &reference(probes, "probes")?.0;
        let (layer, property) = (string(layer, "layer")?, string(property, "property")?);
        let r2 = p
            .get(layer, property)
            .ok_or_else(|| Fail(GpStatus::NotFound, format!("no probe of `{property}` on layer `{layer}`")))?
            .r2_test
            .ok_or_else(|| {
                Fail(
                    GpStatus::NotFound,
                    format!("probe of `{property}` on layer `{layer}` has no defined R²"),
                )
            })?;
        write_out(out_r2, r2, "out_r2")
    })
}

/// Largest held-out R² over the graph-level layers, or NotFound if none is defined.
///
/// # Safety
/// `probes` must be a live handle; `out_r2` writable.
#[no_mangle]
pub unsafe extern "C" fn gp_probes_max_graph_r2(probes: *const GpProbes, out_r2: *mut f64) -> GpStatus {
    guard(|| {
        let p = &reference(probes, "probes")?.0;
        let r2 = p
            .max_graph_r2()
            .ok_or_else(|| Fail(GpStatus::NotFound, "no graph-level probe has a defined R²".into()))?;
        write_out(out_r2, r2, "out_r2")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses_match_exit_codes() {
        use graphprobe::cli::exit_code;
        for e in [
            Error::Config("x".into()),
            Error::MissingInput {
                path: "a".into(),
                producer: "b".into(),
            },
            Error::Runtime("x".into()),
        ] {
            assert_eq!(status_of(&e) as i32, exit_code(&e));
        }
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, GpStatus::Panic);
        let msg = unsafe { CStr::from_ptr(gp_last_error_message()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
        assert_eq!(guard(|| Ok(())), GpStatus::Ok);
        assert!(gp_last_error_message().is_null());
    }
}
