//! Python bindings: `import tdaguard`.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;
use tdaguard_core::detection::{detect_global, run_local_pipeline, DetectionReport};
use tdaguard_core::metrics::{self, OverheadMode, OverheadModel};
use tdaguard_core::scenario::{self, Preset};
use tdaguard_core::simulator::{self, PacketTrace};
use tdaguard_core::twig::{self, TwigVertex};
use tdaguard_core::{report, AttackConfig, Error, Time};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn secs(t: Time) -> f64 {
    t.as_micros() as f64 / 1e6
}

fn time(s: f64) -> PyResult<Time> {
    Time::from_secs_f64(s).ok_or_else(|| PyValueError::new_err(format!("bad time {s}")))
}

/// A network scenario: nodes, contact windows, source, destination and the
/// attack configuration.
#[pyclass(frozen, module = "tdaguard")]
pub struct Scenario {
    inner: tdaguard_core::Scenario,
}

#[pymethods]
impl Scenario {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        scenario::load(path).map(|inner| Scenario { inner }).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        scenario::from_json(text)
            .map(|inner| Scenario { inner })
            .map_err(py_err)
    }

    /// Random scenario from a preset name such as `"table2-row1"`.
    #[staticmethod]
    #[pyo3(signature = (preset, seed))]
    fn generate(preset: &str, seed: u64) -> PyResult<Self> {
        let preset: Preset = preset.parse().map_err(py_err)?;
        scenario::generate(&preset.params(seed))
            .map(|inner| Scenario { inner })
            .map_err(py_err)
    }

    fn to_json(&self) -> String {
        scenario::to_json(&self.inner)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        scenario::save(&self.inner, path).map_err(py_err)
    }

    #[getter]
    fn nodes(&self) -> Vec<String> {
        self.inner.nodes.iter().map(|n| n.name()).collect()
    }

    #[getter]
    fn source(&self) -> String {
        self.inner.name_of(self.inner.source)
    }

    #[getter]
    fn destination(&self) -> String {
        self.inner.name_of(self.inner.destination)
    }

    #[getter]
    fn t_tr(&self) -> f64 {
        secs(self.inner.t_tr)
    }

    /// Nodes configured with a positive delay.
    #[getter]
    fn malicious(&self) -> Vec<String> {
        self.inner
            .ground_truth()
            .into_iter()
            .map(|n| self.inner.name_of(n))
            .collect()
    }

    fn without_attack(&self) -> Self {
        Scenario {
            inner: self.inner.without_attack(),
        }
    }

    /// Same network with delays (seconds) keyed by node label.
    fn with_attack(&self, delays: BTreeMap<String, f64>) -> PyResult<Self> {
        let mut attack = AttackConfig::new();
        for (name, d) in delays {
            let id = self
                .inner
                .node_by_name(&name)
                .ok_or_else(|| PyKeyError::new_err(name.clone()))?;
            attack = attack.with(id, time(d)?);
        }
        let inner = self.inner.with_attack(attack);
        inner.validate_structure().map_err(py_err)?;
        Ok(Scenario { inner })
    }

    fn build(&self) -> Twig {
        Twig::new(self)
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(nodes={}, windows={}, source={:?}, destination={:?})",
            self.inner.nodes.len(),
            self.inner.windows.len(),
            self.source(),
            self.destination()
        )
    }
}

/// Time-window graph of a scenario.
#[pyclass(frozen, module = "tdaguard")]
pub struct Twig {
    scenario: tdaguard_core::Scenario,
    inner: twig::Twig,
}

#[pymethods]
impl Twig {
    #[new]
    fn new(scenario: &Scenario) -> Self {
        let s = scenario.inner.clone();
        Twig {
            inner: twig::Twig::build(&s.windows, s.t_tr),
            scenario: s,
        }
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertices().len()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    /// Vertices as `"A^3.1"` labels.
    fn vertices(&self) -> Vec<String> {
        self.inner.vertices().iter().map(|v| self.label(v)).collect()
    }

    /// Cheapest path from a vertex label to any vertex of `node`, as
    /// `(weight_seconds, [labels])`, or `None` if unreachable.
    fn shortest_path(&self, vertex: &str, node: &str) -> PyResult<Option<(f64, Vec<String>)>> {
        let (n, w) = vertex
            .split_once('^')
            .ok_or_else(|| PyValueError::new_err(format!("expected NODE^WINDOW, got {vertex:?}")))?;
        let from = TwigVertex {
            node: self.node(n)?,
            window: w.parse().map_err(|e: Error| PyValueError::new_err(e.to_string()))?,
        };
        let path = self.inner.shortest_path(&from, self.node(node)?).map_err(py_err)?;
        Ok(path.map(|p| (secs(p.total_weight), p.vertices.iter().map(|v| self.label(v)).collect())))
    }

    fn to_json(&self) -> String {
        report::to_pretty(&report::twig_view(&self.scenario, &self.inner))
    }

    fn to_dot(&self) -> String {
        report::twig_dot(&self.scenario, &self.inner)
    }

    fn simulate(&self) -> Trace {
        let trace = simulator::simulate(&self.scenario, &self.inner);
        let json = report::to_pretty(&report::trace_view(&self.scenario, &self.inner, &trace));
        Trace { trace, json }
    }
}

impl Twig {
    fn label(&self, v: &TwigVertex) -> String {
        format!("{}^{}", self.scenario.name_of(v.node), v.window)
    }

    fn node(&self, name: &str) -> PyResult<tdaguard_core::NodeId> {
        self.scenario
            .node_by_name(name)
            .ok_or_else(|| PyKeyError::new_err(name.to_string()))
    }
}

/// One replayed packet.
#[pyclass(frozen, module = "tdaguard")]
pub struct Trace {
    trace: PacketTrace,
    json: String,
}

#[pymethods]
impl Trace {
    #[getter]
    fn delivered(&self) -> bool {
        self.trace.delivered
    }

    /// `(node_id, reception_seconds)` per hop, source first.
    fn receptions(&self) -> Vec<(u32, f64)> {
        self.trace
            .hops
            .iter()
            .map(|h| (h.node.0, secs(h.reception_time)))
            .collect()
    }

    fn to_json(&self) -> String {
        self.json.clone()
    }
}

/// Detection result with node labels.
#[pyclass(frozen, module = "tdaguard")]
pub struct Report {
    #[pyo3(get)]
    mode: String,
    #[pyo3(get)]
    flagged: Vec<String>,
    json: String,
}

#[pymethods]
impl Report {
    fn to_json(&self) -> String {
        self.json.clone()
    }

    fn __repr__(&self) -> String {
        format!("Report(mode={:?}, flagged={:?})", self.mode, self.flagged)
    }
}

fn labels(s: &tdaguard_core::Scenario, r: &DetectionReport) -> Vec<String> {
    r.flagged.iter().map(|&n| s.name_of(n)).collect()
}

/// Runs global or local detection on a trace of `twig`'s scenario.
#[pyfunction]
#[pyo3(signature = (twig, trace, mode = "global"))]
fn detect(twig: &Twig, trace: &Trace, mode: &str) -> PyResult<Report> {
    let s = &twig.scenario;
    match mode {
        "global" => {
            let r = detect_global(&twig.inner, &trace.trace).map_err(py_err)?;
            Ok(Report {
                mode: mode.into(),
                flagged: labels(s, &r),
                json: report::to_pretty(&report::global_view(s, &r)),
            })
        }
        "local" => {
            let out = run_local_pipeline(s, &twig.inner, &trace.trace).map_err(py_err)?;
            Ok(Report {
                mode: mode.into(),
                flagged: labels(s, &out.merged()),
                json: report::to_pretty(&report::local_view(s, &out)),
            })
        }
        _ => Err(PyValueError::new_err(format!(
            "mode must be \"global\" or \"local\", got {mode:?}"
        ))),
    }
}

/// Extra overhead ratio for messages with the given hop counts.
#[pyfunction]
fn eor(mode: &str, hops: Vec<u32>) -> PyResult<f64> {
    let mode = match mode {
        "global" => OverheadMode::Global,
        "local" => OverheadMode::Local,
        "hotd" => OverheadMode::Hotd,
        _ => return Err(PyValueError::new_err(format!("unknown mode {mode:?}"))),
    };
    metrics::eor(&OverheadModel::default(), mode, &hops).map_err(py_err)
}

#[pymodule]
fn tdaguard(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<Twig>()?;
    m.add_class::<Trace>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(eor, m)?)?;
    Ok(())
}
