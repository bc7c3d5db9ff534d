//! Python bindings for the pattern formation simulator.

use std::path::PathBuf;

use apf_core::cli::verify_report;
use apf_core::geom::{format_rational, parse_rational, RPoint};
use apf_core::model::Mode;
use apf_core::render::render_trace;
use apf_core::scenario::{parse_pattern, Scenario};
use apf_core::sim::{self, Outcome, SchedulerKind, SchedulerPolicy, Simulation, DEFAULT_MAX_EVENTS};
use apf_core::verify::{check_points_solvable, classify, Solvability};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn point_pair(p: &RPoint) -> (String, String) {
    (format_rational(&p.x), format_rational(&p.y))
}

fn parse_point((x, y): &(String, String)) -> PyResult<RPoint> {
    Ok(RPoint::new(parse_rational(x).map_err(value_error)?, parse_rational(y).map_err(value_error)?))
}

/// A validated scenario: mode, robots and the target pattern.
#[pyclass(name = "Scenario", module = "apf_py", frozen)]
struct PyScenario {
    inner: Scenario,
}

#[pymethods]
impl PyScenario {
    /// Parses scenario JSON; `pattern` (pattern JSON) replaces the embedded pattern.
    #[staticmethod]
    #[pyo3(signature = (text, pattern = None))]
    fn parse(text: &str, pattern: Option<&str>) -> PyResult<Self> {
        let pattern = pattern.map(parse_pattern).transpose().map_err(value_error)?;
        let inner = Scenario::parse_with_pattern(text, pattern).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
        Self::parse(&text, None)
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode.as_str()
    }

    fn __len__(&self) -> usize {
        self.inner.robots.len()
    }

    /// Robot positions as `(x, y)` rational strings.
    fn positions(&self) -> Vec<(String, String)> {
        self.inner.robots.iter().map(|r| point_pair(&r.position())).collect()
    }

    fn pattern(&self) -> Vec<(String, String)> {
        self.inner.pattern.points().iter().map(point_pair).collect()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!("Scenario(mode={:?}, robots={})", self.inner.mode.as_str(), self.inner.robots.len())
    }
}

/// A recorded run: metadata, events and outcome, as JSONL.
#[pyclass(name = "Trace", module = "apf_py", frozen)]
struct PyTrace {
    inner: sim::Trace,
}

#[pymethods]
impl PyTrace {
    #[staticmethod]
    fn from_jsonl(text: &str) -> PyResult<Self> {
        Ok(Self { inner: sim::Trace::parse_jsonl(text).map_err(value_error)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: sim::Trace::read_jsonl(&path).map_err(value_error)? })
    }

    fn to_jsonl(&self) -> String {
        self.inner.to_jsonl()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.write_jsonl(&path).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    fn __len__(&self) -> usize {
        self.inner.events.len()
    }

    fn colors_used(&self) -> Vec<&'static str> {
        self.inner.colors_used().into_iter().map(|l| l.as_str()).collect()
    }

    /// `(event index, class)` for every event after which all robots were idle.
    fn stable_classes(&self) -> Vec<(usize, &'static str)> {
        self.inner.stable_classes().map(|(i, c)| (i, c.as_str())).collect()
    }

    /// Replays the events, checking every digest; returns the final positions.
    fn replay(&self) -> PyResult<Vec<(String, String)>> {
        let world = sim::replay(&self.inner).map_err(value_error)?;
        Ok(world.robots.iter().map(|r| point_pair(&r.pos)).collect())
    }

    /// Writes SVG frames and returns their paths.
    #[pyo3(signature = (out_dir, every = 1, observer = None))]
    fn render(&self, out_dir: PathBuf, every: usize, observer: Option<usize>) -> PyResult<Vec<PathBuf>> {
        render_trace(&self.inner, &out_dir, every, observer).map_err(value_error)
    }
}

/// Outcome of [`run`].
#[pyclass(name = "RunResult", module = "apf_py", frozen)]
struct PyRunResult {
    #[pyo3(get)]
    status: &'static str,
    #[pyo3(get)]
    event_count: usize,
    #[pyo3(get)]
    final_class: Option<&'static str>,
    #[pyo3(get)]
    final_positions: Vec<(String, String)>,
    #[pyo3(get)]
    final_lights: Vec<&'static str>,
    #[pyo3(get)]
    trace: Py<PyTrace>,
}

#[pymethods]
impl PyRunResult {
    fn __repr__(&self) -> String {
        format!("RunResult(status={:?}, event_count={})", self.status, self.event_count)
    }
}

/// Simulates a scenario to completion.
#[pyfunction]
#[pyo3(signature = (scenario, scheduler = "fsync", seed = 0, max_events = DEFAULT_MAX_EVENTS, max_phase_delay = None))]
fn run(
    py: Python<'_>,
    scenario: &PyScenario,
    scheduler: &str,
    seed: u64,
    max_events: usize,
    max_phase_delay: Option<&str>,
) -> PyResult<PyRunResult> {
    let kind: SchedulerKind = scheduler.parse().map_err(value_error)?;
    let mut policy = SchedulerPolicy::new(kind, seed);
    if let Some(m) = max_phase_delay {
        policy = policy.with_max_phase_delay(parse_rational(m).map_err(value_error)?);
    }
    let world = scenario.inner.to_world();
    let (trace, outcome): (sim::Trace, Outcome) = py
        .detach(|| Simulation::new(world, policy, max_events).map(Simulation::finish))
        .map_err(value_error)?;
    Ok(PyRunResult {
        status: outcome.status.as_str(),
        event_count: outcome.event_count,
        final_class: outcome.final_class.map(|c| c.as_str()),
        final_positions: outcome.final_world.robots.iter().map(|r| point_pair(&r.pos)).collect(),
        final_lights: outcome.final_world.robots.iter().map(|r| r.light.as_str()).collect(),
        trace: Py::new(py, PyTrace { inner: trace })?,
    })
}

/// Class and solvability of the initial configuration, as a dict.
#[pyfunction]
fn verify<'py>(py: Python<'py>, scenario: &PyScenario) -> PyResult<Bound<'py, PyDict>> {
    let report = verify_report(&scenario.inner);
    let d = PyDict::new(py);
    d.set_item("class", report["class"].as_str())?;
    d.set_item("solvable", report["solvable"].as_bool())?;
    if let Some(axis) = report.get("axis_y").and_then(|a| a.as_str()) {
        d.set_item("axis_y", axis)?;
    }
    Ok(d)
}

#[pyfunction]
fn classify_scenario(scenario: &PyScenario) -> PyResult<&'static str> {
    let s = &scenario.inner;
    classify(&s.to_world(), &s.pattern, s.mode).map(|c| c.as_str()).map_err(value_error)
}

/// Mirror axis `y` that makes the points unsolvable, or None.
#[pyfunction]
#[pyo3(signature = (points, mode = "one-axis"))]
fn unsolvable_axis(points: Vec<(String, String)>, mode: &str) -> PyResult<Option<String>> {
    let mode: Mode = mode.parse().map_err(value_error)?;
    let pts = points.iter().map(parse_point).collect::<PyResult<Vec<_>>>()?;
    Ok(match check_points_solvable(&pts, mode) {
        Solvability::Solvable => None,
        Solvability::Unsolvable { axis_y } => Some(format_rational(&axis_y)),
    })
}

#[pymodule]
fn apf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(classify_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(unsolvable_axis, m)?)?;
    Ok(())
}
