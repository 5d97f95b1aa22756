use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use graphprobe_ffi::*;

fn last_error() -> String {
    let p = gp_last_error_message();
    assert!(!p.is_null(), "a failed call must leave a message");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn property_index(name: &str) -> usize {
    (0..gp_property_count())
        .find(|&i| unsafe { CStr::from_ptr(gp_property_name(i)) }.to_str().unwrap() == name)
        .unwrap()
}

#[test]
fn graph_properties_through_the_abi() {
    // K4: 4 triangles, 3 squares, spectral radius 3
    let edges: [u32; 12] = [0, 1, 0, 2, 0, 3, 1, 2, 1, 3, 2, 3];
    let mut g = ptr::null_mut();
    unsafe {
        assert_eq!(gp_graph_new(4, edges.as_ptr(), 6, &mut g), GpStatus::Ok);
        let (mut n, mut m) = (0, 0);
        assert_eq!(gp_graph_size(g, &mut n, &mut m), GpStatus::Ok);
        assert_eq!((n, m), (4, 6));
        let mut label = 0;
        assert_eq!(gp_graph_label(g, &mut label), GpStatus::Ok);
        assert_eq!(label, -1);

        let count = gp_property_count();
        let mut values = vec![0.0; count];
        let mut defined = vec![0u8; count];
        assert_eq!(
            gp_graph_properties(g, 0, values.as_mut_ptr(), defined.as_mut_ptr(), count),
            GpStatus::Ok
        );
        let get = |name: &str| {
            let i = property_index(name);
            assert_eq!(defined[i], 1, "{name}");
            values[i]
        };
        assert_eq!(get("n_triangles"), 4.0);
        assert_eq!(get("n_squares"), 3.0);
        assert!((get("spectral_radius") - 3.0).abs() < 1e-8);

        assert_eq!(
            gp_graph_properties(g, 0, values.as_mut_ptr(), defined.as_mut_ptr(), count - 1),
            GpStatus::InvalidArgument
        );
        assert!(last_error().contains("needed"));
        gp_graph_free(g);
    }
    assert!(gp_property_name(gp_property_count()).is_null());
}

#[test]
fn invalid_arguments_report_status_and_message() {
    let mut g = ptr::null_mut();
    unsafe {
        let self_loop: [u32; 2] = [1, 1];
        assert_eq!(gp_graph_new(3, self_loop.as_ptr(), 1, &mut g), GpStatus::InvalidArgument);
        assert!(last_error().contains("self-loop"));
        assert!(g.is_null());
        assert_eq!(gp_graph_new(3, ptr::null(), 2, &mut g), GpStatus::NullPointer);
        assert_eq!(gp_graph_new(3, ptr::null(), 0, ptr::null_mut()), GpStatus::NullPointer);
        assert!(last_error().contains("out"));
        let (mut n, mut m) = (0, 0);
        assert_eq!(gp_graph_size(ptr::null(), &mut n, &mut m), GpStatus::NullPointer);

        let bad = [0xffu8, 0];
        let mut d = ptr::null_mut();
        assert_eq!(gp_dataset_load(bad.as_ptr().cast(), &mut d), GpStatus::InvalidUtf8);

        // freeing null is a no-op
        gp_graph_free(ptr::null_mut());
        gp_dataset_free(ptr::null_mut());
        gp_probes_free(ptr::null_mut());
    }
}

#[test]
fn dataset_round_trip_and_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = cstr(dir.path().join("d.jsonl").to_str().unwrap());
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(gp_dataset_generate(40, 5, &mut d), GpStatus::Ok);
        let mut len = 0;
        assert_eq!(gp_dataset_len(d, &mut len), GpStatus::Ok);
        assert_eq!(len, 40);
        assert_eq!(gp_dataset_save(d, path.as_ptr()), GpStatus::Ok);

        let mut loaded = ptr::null_mut();
        assert_eq!(gp_dataset_load(path.as_ptr(), &mut loaded), GpStatus::Ok);
        let mut tests = 0;
        for i in 0..len {
            let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
            let (mut ta, mut tb) = (9u8, 9u8);
            assert_eq!(gp_dataset_graph(d, i, &mut a, &mut ta), GpStatus::Ok);
            assert_eq!(gp_dataset_graph(loaded, i, &mut b, &mut tb), GpStatus::Ok);
            let (mut na, mut ma, mut nb, mut mb) = (0, 0, 0, 0);
            gp_graph_size(a, &mut na, &mut ma);
            gp_graph_size(b, &mut nb, &mut mb);
            let (mut la, mut lb) = (7, 7);
            gp_graph_label(a, &mut la);
            gp_graph_label(b, &mut lb);
            assert_eq!((na, ma, la, ta), (nb, mb, lb, tb));
            assert!(la == 0 || la == 1);
            tests += usize::from(ta);
            gp_graph_free(a);
            gp_graph_free(b);
        }
        assert_eq!(tests, 8);
        let mut g = ptr::null_mut();
        assert_eq!(gp_dataset_graph(d, len, &mut g, ptr::null_mut()), GpStatus::NotFound);
        gp_dataset_free(d);
        gp_dataset_free(loaded);

        let missing = cstr(dir.path().join("nope.jsonl").to_str().unwrap());
        let mut m = ptr::null_mut();
        assert_eq!(gp_dataset_load(missing.as_ptr(), &mut m), GpStatus::MissingInput);
        assert!(last_error().contains("graphprobe generate"));

        let probes = cstr(dir.path().join("probes.csv").to_str().unwrap());
        let mut p = ptr::null_mut();
        assert_eq!(gp_probes_load(probes.as_ptr(), &mut p), GpStatus::MissingInput);
        assert!(last_error().contains("graphprobe probe"));
    }
}

#[test]
fn pipeline_through_the_abi() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "seed = 2\n[dataset]\ncount = 120\n[model]\nepochs = 3\nrestarts = 1\n[[roster]]\narch = \"gin\"\n[output]\nnode_probes = false\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let (c, o) = (cstr(config.to_str().unwrap()), cstr(out.to_str().unwrap()));
    unsafe {
        assert_eq!(gp_run_all(c.as_ptr(), o.as_ptr()), GpStatus::Ok, "{}", {
            let p = gp_last_error_message();
            if p.is_null() { String::new() } else { CStr::from_ptr(p).to_string_lossy().into_owned() }
        });
        let probes = cstr(out.join("probes").join("gin_control.csv").to_str().unwrap());
        let mut p = ptr::null_mut();
        assert_eq!(gp_probes_load(probes.as_ptr(), &mut p), GpStatus::Ok);
        let mut acc = -1.0;
        assert_eq!(gp_probes_test_accuracy(p, &mut acc), GpStatus::Ok);
        assert!((0.0..=1.0).contains(&acc));
        let mut r2 = f64::NAN;
        let (layer, prop) = (cstr("x_global"), cstr("n_nodes"));
        assert_eq!(gp_probes_r2_test(p, layer.as_ptr(), prop.as_ptr(), &mut r2), GpStatus::Ok);
        assert!(r2.is_finite());
        let mut max = f64::NAN;
        assert_eq!(gp_probes_max_graph_r2(p, &mut max), GpStatus::Ok);
        assert!(max >= r2);
        let unknown = cstr("no_such_property");
        assert_eq!(gp_probes_r2_test(p, layer.as_ptr(), unknown.as_ptr(), &mut r2), GpStatus::NotFound);
        gp_probes_free(p);

        let bad = dir.path().join("bad.toml");
        std::fs::write(&bad, "[model]\nepoch = 3\n").unwrap();
        let b = cstr(bad.to_str().unwrap());
        assert_eq!(gp_run_all(b.as_ptr(), o.as_ptr()), GpStatus::InvalidArgument);
        assert!(last_error().contains("epoch"));
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(gp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn compiles(compiler: &str, lang: &str, source: &str) -> Option<bool> {
    let header_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join(format!("use.{lang}"));
    std::fs::write(&src, source).unwrap();
    let status = Command::new(compiler)
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .status()
        .ok()?;
    Some(status.success())
}

#[test]
fn generated_header_compiles_as_c_and_cpp() {
    let source = r#"
#include "graphprobe.h"
int main(void) {
    GpGraph *g = 0;
    const uint32_t edges[] = {0, 1, 1, 2};
    GpStatus s = gp_graph_new(3, edges, 2, &g);
    if (s != GP_STATUS_OK) { return (int)s; }
    size_t n = 0, m = 0;
    s = gp_graph_size(g, &n, &m);
    gp_graph_free(g);
    return s == GP_STATUS_OK && gp_last_error_message() == 0 ? 0 : 1;
}
"#;
    let mut checked = 0;
    for (compiler, lang) in [("cc", "c"), ("c++", "cpp")] {
        match compiles(compiler, lang, source) {
            Some(ok) => {
                assert!(ok, "{compiler} rejected graphprobe.h");
                checked += 1;
            }
            None => eprintln!("{compiler} not found; skipping"),
        }
    }
    if checked == 0 {
        eprintln!("no C compiler available; header syntax unchecked");
    }
}
