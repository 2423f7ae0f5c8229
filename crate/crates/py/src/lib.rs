//! Python bindings: generate, load and export bundles, run the analytics
//! and score detectors.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use ringbench_core::baselines::{run_baseline, FeatureSet};
use ringbench_core::config::{GeneratorConfig, PresetName, Scale};
use ringbench_core::error::Error;
use ringbench_core::export::{export_bundle, load_bundle, Manifest};
use ringbench_core::generate::generate as core_generate;
use ringbench_core::graph::GraphData;
use ringbench_core::metrics::{self, ScoreSet};
use ringbench_core::rings::RingRecord;
use ringbench_core::rng::make_rng;
use ringbench_core::schema::{NodeType, Relation};
use ringbench_core::split::{split, verify_no_leakage, Partition, SplitAssignment, DEFAULT_FRACTIONS};
use ringbench_core::stats;
use ringbench_core::sweep::{run_sweep, RING_SIZE_AXIS};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Config(_) | Error::Data(_) | Error::Undefined(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.into_pyobject(py)?.into_any(),
            (None, Some(i)) => i.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &v)
}

fn node_type(name: &str) -> PyResult<NodeType> {
    name.parse().map_err(py_err)
}

fn relation(name: &str) -> PyResult<Relation> {
    name.parse().map_err(py_err)
}

/// A generated or loaded graph together with its rings and split.
#[pyclass(module = "ringbench", frozen)]
pub struct Graph {
    graph: GraphData,
    rings: Vec<RingRecord>,
    assignment: SplitAssignment,
    config: Option<GeneratorConfig>,
    manifest: Option<Manifest>,
}

#[pymethods]
impl Graph {
    fn __repr__(&self) -> String {
        format!(
            "Graph(users={}, rings={}, fraud_rate={:.4})",
            self.graph.count(NodeType::User),
            self.rings.len(),
            self.graph.user_fraud_rate()
        )
    }

    #[getter]
    fn fraud_rate(&self) -> f64 {
        self.graph.user_fraud_rate()
    }

    #[getter]
    fn n_rings(&self) -> usize {
        self.rings.len()
    }

    /// Generator config as a dict, when known.
    #[getter]
    fn config<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &self.config)
    }

    /// Manifest of the bundle this graph was loaded from, if any.
    #[getter]
    fn manifest<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &self.manifest)
    }

    fn node_count(&self, node_type_name: &str) -> PyResult<usize> {
        Ok(self.graph.count(node_type(node_type_name)?))
    }

    fn edge_count(&self, relation_name: &str) -> PyResult<usize> {
        Ok(self.graph.edge_count(relation(relation_name)?))
    }

    fn counts(&self) -> Vec<(String, usize)> {
        NodeType::ALL
            .iter()
            .map(|t| (t.as_str().to_string(), self.graph.count(*t)))
            .chain(Relation::ALL.iter().map(|r| (r.as_str().to_string(), self.graph.edge_count(*r))))
            .collect()
    }

    fn columns(&self, node_type_name: &str) -> PyResult<Vec<String>> {
        Ok(self.graph.table(node_type(node_type_name)?).columns.clone())
    }

    /// Feature rows of one node type, as a list of lists.
    fn features(&self, node_type_name: &str) -> PyResult<Vec<Vec<f64>>> {
        let t = self.graph.table(node_type(node_type_name)?);
        Ok((0..t.len()).map(|i| t.row(i).to_vec()).collect())
    }

    fn labels(&self, node_type_name: &str) -> PyResult<Vec<u8>> {
        Ok(self.graph.table(node_type(node_type_name)?).label.clone())
    }

    fn ring_ids(&self, node_type_name: &str) -> PyResult<Vec<i64>> {
        Ok(self.graph.table(node_type(node_type_name)?).ring_id.clone())
    }

    fn edges(&self, relation_name: &str) -> PyResult<Vec<(usize, usize)>> {
        Ok(self.graph.edges(relation(relation_name)?).to_vec())
    }

    fn rings<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &self.rings)
    }

    /// Partition name per user.
    fn partitions(&self) -> Vec<&'static str> {
        self.assignment.users.iter().map(|p| p.as_str()).collect()
    }

    fn users_in(&self, partition: &str) -> PyResult<Vec<usize>> {
        let p: Partition = partition.parse().map_err(py_err)?;
        Ok(self.assignment.users_in(p).collect())
    }

    /// Re-splits rings and users with the given fractions.
    #[pyo3(signature = (fractions = DEFAULT_FRACTIONS.to_vec(), seed = 42))]
    fn resplit(&self, fractions: Vec<f64>, seed: u64) -> PyResult<Graph> {
        let f: [f64; 3] = fractions
            .try_into()
            .map_err(|_| PyValueError::new_err("fractions takes exactly three values"))?;
        let assignment = split(&self.graph, &self.rings, f, &mut make_rng(seed, "split")).map_err(py_err)?;
        Ok(Graph {
            graph: self.graph.clone(),
            rings: self.rings.clone(),
            assignment,
            config: self.config.clone(),
            manifest: None,
        })
    }

    fn drop_relation(&self, name: &str) -> PyResult<Graph> {
        Ok(self.with_graph(self.graph.drop_relation(name).map_err(py_err)?))
    }

    fn drop_feature(&self, name: &str) -> PyResult<Graph> {
        Ok(self.with_graph(self.graph.drop_user_feature(name).map_err(py_err)?))
    }

    /// Writes a bundle and returns its manifest digest.
    fn export(&self, dir: PathBuf) -> PyResult<String> {
        let bundle = export_bundle(&self.graph, &self.rings, &self.assignment, self.config.as_ref(), &dir)
            .map_err(py_err)?;
        Ok(bundle.manifest.digest)
    }

    fn homophily<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &stats::homophily(&self.graph))
    }

    fn motifs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &stats::motif_fingerprints(&self.graph, &self.rings))
    }

    fn calibration<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize(py, &stats::cohens_d(&self.graph).map_err(py_err)?)
    }

    fn isolation_breaches(&self) -> usize {
        stats::isolation_breaches(&self.graph).len()
    }

    /// `(devices, ips)` shared between train and test fraud users.
    fn leakage(&self) -> (usize, usize) {
        let l = verify_no_leakage(&self.graph, &self.assignment);
        (l.devices, l.ips)
    }

    /// Test-partition metrics for `{user_id: score}`.
    fn evaluate<'py>(&self, py: Python<'py>, scores: Vec<(usize, f64)>) -> PyResult<Bound<'py, PyAny>> {
        let scores = ScoreSet::from_pairs(scores).map_err(py_err)?;
        let report = metrics::evaluate(self.graph.user_labels(), &self.rings, &self.assignment, &scores)
            .map_err(py_err)?;
        serialize(py, &report)
    }

    /// Trains a native baseline and returns `(report, scores)`.
    #[pyo3(signature = (model = "graph_aggregate", seed = 42))]
    fn baseline<'py>(&self, py: Python<'py>, model: &str, seed: u64) -> PyResult<(Bound<'py, PyAny>, Vec<f64>)> {
        let set: FeatureSet = model.parse().map_err(py_err)?;
        let run = run_baseline(&self.graph, &self.rings, &self.assignment, set, &mut make_rng(seed, "baseline"))
            .map_err(py_err)?;
        let scores = run.scores.scores.values().copied().collect();
        Ok((serialize(py, &run.report)?, scores))
    }
}

impl Graph {
    fn with_graph(&self, graph: GraphData) -> Graph {
        Graph {
            graph,
            rings: self.rings.clone(),
            assignment: self.assignment.clone(),
            config: self.config.clone(),
            manifest: None,
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn build_config(
    scale: Option<&str>,
    users: Option<usize>,
    seed: u64,
    rings: Option<(usize, usize, usize)>,
    fraud_rate: Option<f64>,
    drop_relations: Vec<String>,
    drop_features: Vec<String>,
) -> PyResult<GeneratorConfig> {
    let scale = match (scale, users) {
        (Some(_), Some(_)) => return Err(PyValueError::new_err("pass either scale or users, not both")),
        (Some(name), None) => Scale::Preset(name.parse().map_err(py_err)?),
        (None, Some(n)) => Scale::Users(n),
        (None, None) => Scale::Preset(PresetName::Medium),
    };
    let mut c = GeneratorConfig::new(scale, seed);
    if let Some((t, g, a)) = rings {
        c = c.with_rings(t, g, a);
    }
    c.fraud_rate_target = fraud_rate;
    c.relation_exclusions.extend(drop_relations);
    c.feature_exclusions.extend(drop_features);
    c.validate().map_err(py_err)?;
    Ok(c)
}

/// Generates a graph and splits it with the default fractions.
#[pyfunction]
#[pyo3(signature = (scale = None, users = None, seed = 42, rings = None, fraud_rate = None, drop_relations = vec![], drop_features = vec![]))]
#[allow(clippy::too_many_arguments)]
fn generate(
    py: Python<'_>,
    scale: Option<&str>,
    users: Option<usize>,
    seed: u64,
    rings: Option<(usize, usize, usize)>,
    fraud_rate: Option<f64>,
    drop_relations: Vec<String>,
    drop_features: Vec<String>,
) -> PyResult<Graph> {
    let config = build_config(scale, users, seed, rings, fraud_rate, drop_relations, drop_features)?;
    py.detach(|| {
        let out = core_generate(&config)?;
        let assignment = split(&out.graph, &out.rings, DEFAULT_FRACTIONS, &mut make_rng(seed, "split"))?;
        Ok(Graph {
            graph: out.graph,
            rings: out.rings,
            assignment,
            config: Some(out.config),
            manifest: None,
        })
    })
    .map_err(py_err)
}

/// Loads a bundle directory, checking its digest.
#[pyfunction]
fn load(dir: PathBuf) -> PyResult<Graph> {
    let b = load_bundle(&dir).map_err(py_err)?;
    Ok(Graph {
        graph: b.graph,
        rings: b.rings,
        assignment: b.assignment,
        config: b.manifest.config.clone(),
        manifest: Some(b.manifest),
    })
}

/// Ring-size sweep rows as dicts.
#[pyfunction]
#[pyo3(signature = (scale = "small", seed = 42, sizes = RING_SIZE_AXIS.to_vec()))]
fn sweep<'py>(py: Python<'py>, scale: &str, seed: u64, sizes: Vec<usize>) -> PyResult<Bound<'py, PyAny>> {
    let config = build_config(Some(scale), None, seed, None, None, vec![], vec![])?;
    let report = py.detach(|| run_sweep(&config, &sizes)).map_err(py_err)?;
    serialize(py, &report)
}

#[pyfunction]
fn auc_roc(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    metrics::auc_roc(&scores, &labels).map_err(py_err)
}

#[pyfunction]
fn average_precision(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    metrics::average_precision(&scores, &labels).map_err(py_err)
}

#[pyfunction]
fn macro_f1(scores: Vec<f64>, labels: Vec<bool>, threshold: f64) -> f64 {
    metrics::macro_f1(&scores, &labels, threshold)
}

#[pyfunction]
#[pyo3(signature = (successes, trials, confidence = metrics::WILSON_CONFIDENCE))]
fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> PyResult<(f64, f64)> {
    metrics::wilson_interval(successes, trials, confidence).map_err(py_err)
}

#[pyfunction]
fn ring_recovered(member_scores: Vec<f64>) -> bool {
    metrics::ring_recovered(&member_scores)
}

#[pymodule]
pub fn ringbench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Graph>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(load, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(auc_roc, m)?)?;
    m.add_function(wrap_pyfunction!(average_precision, m)?)?;
    m.add_function(wrap_pyfunction!(macro_f1, m)?)?;
    m.add_function(wrap_pyfunction!(wilson_interval, m)?)?;
    m.add_function(wrap_pyfunction!(ring_recovered, m)?)?;
    Ok(())
}
