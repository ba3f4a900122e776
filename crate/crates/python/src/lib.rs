//! Python bindings: predictors, single-topology simulations, experiment runs
//! and the analytical chain. Structured results come back as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde::Serialize;

use interlace::engine::{run_all, TopologyRun};
use interlace::overlay::{generate_topology, NodeAddr};
use interlace::predictors::{PredErrorMode, PredictorKind, SlotContext};
use interlace::runner::{parse_config_str, JsonReport, Overrides};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn config_from(text: &str) -> PyResult<interlace::runner::RunSpec> {
    parse_config_str(text, &Overrides::default()).map_err(err)
}

/// One availability predictor fed a node's per-slot status.
#[pyclass(module = "interlace_py")]
struct Predictor {
    inner: interlace::predictors::Predictor,
    slot: u64,
}

#[pymethods]
impl Predictor {
    #[new]
    #[pyo3(signature = (kind, max_state_size = 8, mode = "window"))]
    fn new(kind: &str, max_state_size: usize, mode: &str) -> PyResult<Self> {
        let kind: PredictorKind = kind.parse().map_err(err)?;
        let mode: PredErrorMode = mode.parse().map_err(err)?;
        if !(3..=interlace::predictors::HARD_MAX_STATE_SIZE).contains(&max_state_size) {
            return Err(err("max_state_size out of range"));
        }
        Ok(Predictor {
            inner: interlace::predictors::Predictor::new(kind, max_state_size, mode),
            slot: 0,
        })
    }

    /// Feeds one slot's status and returns the new availability probability.
    #[pyo3(signature = (online, incoming_total = 0, capacity = 1024))]
    fn update(&mut self, online: bool, incoming_total: u64, capacity: u64) -> f64 {
        let ctx = SlotContext {
            slot: self.slot,
            incoming_total,
            capacity,
        };
        self.slot += 1;
        self.inner.update(online, ctx)
    }

    fn current(&self) -> f64 {
        self.inner.current()
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind().to_string()
    }

    /// State size of the right DBG of a sliding window, `None` otherwise.
    fn right_state_size(&self) -> Option<usize> {
        self.inner.right_state_size()
    }
}

/// One topology under churn, advanced slot by slot from Python.
#[pyclass(module = "interlace_py")]
struct Simulation {
    run: TopologyRun,
}

#[pymethods]
impl Simulation {
    /// `config` is TOML text with the same keys as the command-line config file.
    #[new]
    #[pyo3(signature = (config = "", topology_index = 0))]
    fn new(config: &str, topology_index: u32) -> PyResult<Self> {
        let spec = config_from(config)?;
        Ok(Simulation {
            run: TopologyRun::new(&spec.base, topology_index).map_err(err)?,
        })
    }

    fn run_slot<'py>(&mut self, py: Python<'py>, slot: u32) -> PyResult<Bound<'py, PyAny>> {
        let m = self.run.run_slot(slot);
        to_py(py, &m)
    }

    /// Routes one search; `initiator` is a node address, `target` a numerical ID.
    fn run_search<'py>(&mut self, py: Python<'py>, initiator: u32, target: u64) -> PyResult<Bound<'py, PyAny>> {
        if initiator as usize >= self.run.topology().len() {
            return Err(err("initiator address out of range"));
        }
        if !self.run.is_online(NodeAddr(initiator)) {
            return Err(err("initiator is offline"));
        }
        let out = self.run.run_search(NodeAddr(initiator), target);
        to_py(py, &out)
    }

    fn online_nodes(&self) -> Vec<u32> {
        self.run.online_nodes().into_iter().map(|a| a.0).collect()
    }

    fn online_ids(&self) -> Vec<u64> {
        self.run.online_sorted_ids()
    }

    fn node<'py>(&self, py: Python<'py>, address: u32) -> PyResult<Bound<'py, PyAny>> {
        let nodes = &self.run.topology().nodes;
        let node = nodes.get(address as usize).ok_or_else(|| err("address out of range"))?;
        to_py(py, node)
    }

    fn is_online(&self, address: u32) -> bool {
        self.run.online_nodes().contains(&NodeAddr(address))
    }

    /// Silently takes a node offline.
    fn depart(&mut self, address: u32) -> PyResult<()> {
        if address as usize >= self.run.topology().len() {
            return Err(err("address out of range"));
        }
        self.run.depart(NodeAddr(address));
        Ok(())
    }

    fn sop(&self, address: u32) -> PyResult<f64> {
        if address as usize >= self.run.topology().len() {
            return Err(err("address out of range"));
        }
        Ok(self.run.predictor(NodeAddr(address)).current())
    }
}

/// Runs every topology of the config and returns the aggregated metrics.
#[pyfunction]
#[pyo3(signature = (config = ""))]
fn simulate<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let spec = config_from(config)?;
    let m = py.detach(|| run_all(&spec.base)).map_err(err)?;
    to_py(py, &m)
}

/// Runs the full sweep of the config and returns one report per combination.
#[pyfunction]
#[pyo3(signature = (config = ""))]
fn run_experiments<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyAny>> {
    let spec = config_from(config)?;
    let reports = py.detach(|| interlace::runner::run_experiments(&spec)).map_err(err)?;
    let json: Vec<JsonReport> = reports.iter().map(JsonReport::from).collect();
    to_py(py, &json)
}

#[pyfunction]
fn generate<'py>(py: Python<'py>, capacity: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let topo = generate_topology(capacity, seed).map_err(err)?;
    to_py(py, &topo.nodes)
}

#[pyfunction]
fn candidate_probability(n: u64) -> f64 {
    interlace::analytics::candidate_probability(n)
}

#[pyfunction]
fn expected_online(n: u64, q: f64) -> f64 {
    interlace::analytics::expected_online(n, q)
}

#[pyfunction]
fn estimate_backup_size(n: u64, q: f64, target_path: f64) -> PyResult<u32> {
    interlace::analytics::estimate_backup_size(n, q, target_path).map_err(err)
}

#[pyfunction]
fn estimate_search_path_bound(online: u64) -> u32 {
    interlace::analytics::estimate_search_path_bound(online)
}

#[pyfunction]
#[pyo3(signature = (n, q, b, target_path = None))]
fn analyze<'py>(py: Python<'py>, n: u64, q: f64, b: u32, target_path: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let report = interlace::analytics::analyze(n, q, b, target_path).map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn interlace_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Predictor>()?;
    m.add_class::<Simulation>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiments, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(candidate_probability, m)?)?;
    m.add_function(wrap_pyfunction!(expected_online, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_backup_size, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_search_path_bound, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    Ok(())
}
