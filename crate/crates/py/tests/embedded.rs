use pyo3::prelude::*;
use pyo3::types::PyDict;
use ringbench::ringbench as ringbench_module;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    pyo3::append_to_inittab!(ringbench_module);
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals.set_item("rb", py.import("ringbench").unwrap()).unwrap();
        f(py, &globals);
    });
}

fn run(py: Python<'_>, globals: &Bound<'_, PyDict>, code: &str) {
    let code = std::ffi::CString::new(code).unwrap();
    if let Err(e) = py.run(&code, Some(globals), None) {
        e.print(py);
        panic!("python snippet failed");
    }
}

#[test]
fn module_round_trip() {
    with_module(|py, g| {
        run(
            py,
            g,
            r#"
import tempfile
graph = rb.generate(scale="toy", seed=3)
assert graph.node_count("user") == 500
assert graph.n_rings == 6
assert graph.isolation_breaches() == 0
with tempfile.TemporaryDirectory() as d:
    digest = graph.export(d)
    back = rb.load(d)
    assert back.manifest["digest"] == digest
    assert back.edges("uses_ip") == graph.edges("uses_ip")
    assert back.rings() == graph.rings()
assert rb.auc_roc([0.2, 0.8], [False, True]) == 1.0
lo, hi = rb.wilson_interval(1, 6, 0.95)
assert abs(lo - 0.0301) < 1e-3 and abs(hi - 0.5635) < 1e-3
try:
    graph.drop_feature("shoe_size")
    raise AssertionError("accepted unknown feature")
except ValueError:
    pass
try:
    rb.load("/nonexistent/bundle")
    raise AssertionError("loaded a missing bundle")
except OSError:
    pass
"#,
        );
    });
}
