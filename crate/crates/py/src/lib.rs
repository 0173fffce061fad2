//! Python bindings: increment specs, walks, direction-set estimates,
//! s-hull queries, hull radii, Pruitt sequences and the example reports.

use angwalk::criteria::{run_criterion, Overrides};
use angwalk::direction_estimator::{CapVisitAccumulator, DirectionSetEstimate, EstimatorConfig};
use angwalk::examples::{reproduce_example, ExampleOverrides};
use angwalk::experiment::{run_experiment as run_exp, ExperimentConfig};
use angwalk::hull_tracker::{hull_of, inscribed_radius as radius};
use angwalk::pruitt::{pruitt_diagnostic, u_sequence, TailFunction};
use angwalk::samplers::{make_increment_sampler, IncrementSpec};
use angwalk::sphere_geom::{hat, s_hull, s_hull_contains as contains, UnitVec};
use angwalk::walk_engine::{run_walk_stream, RunOptions, TrajectoryRecord};
use angwalk::Error;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn units(vectors: Vec<Vec<f64>>) -> PyResult<Vec<UnitVec>> {
    vectors
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let u = hat(&v);
            if u.is_zero() {
                Err(PyValueError::new_err(format!("vector {i} has no direction")))
            } else {
                Ok(u)
            }
        })
        .collect()
}

#[pyclass(name = "IncrementSpec", module = "angwalk_py", frozen)]
#[derive(Clone)]
struct PySpec {
    inner: IncrementSpec,
}

#[pymethods]
impl PySpec {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = IncrementSpec::from_json(text).map_err(err)?;
        inner.validate().map_err(err)?;
        Ok(PySpec { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension
    }

    #[getter]
    fn position_mode(&self) -> String {
        format!("{:?}", self.inner.position_mode()).to_lowercase()
    }

    fn __repr__(&self) -> String {
        format!("IncrementSpec({})", self.inner.to_json())
    }
}

#[pyclass(name = "Trajectory", module = "angwalk_py", frozen)]
struct PyTrajectory {
    inner: TrajectoryRecord,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn n_steps(&self) -> u64 {
        self.inner.n_steps
    }

    #[getter]
    fn seed(&self) -> String {
        self.inner.seed.clone()
    }

    #[getter]
    fn overflowed(&self) -> bool {
        self.inner.overflowed
    }

    /// `(n, unit direction, ln ||S_n||)` at each checkpoint.
    fn checkpoints(&self) -> Vec<(u64, Vec<f64>, f64)> {
        self.inner
            .checkpoints
            .iter()
            .map(|r| (r.n, r.unit.clone(), r.ln_norm))
            .collect()
    }

    fn final_direction(&self) -> Option<Vec<f64>> {
        self.inner.final_row().map(|r| r.unit.clone())
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }
}

#[pyclass(name = "DirectionSetEstimate", module = "angwalk_py", frozen)]
struct PyEstimate {
    inner: DirectionSetEstimate,
}

#[pymethods]
impl PyEstimate {
    fn grid(&self) -> Vec<Vec<f64>> {
        self.inner.grid.iter().map(|u| u.as_slice().to_vec()).collect()
    }

    fn verdicts(&self) -> Vec<&'static str> {
        self.inner.verdicts().into_iter().map(|v| v.as_str()).collect()
    }

    fn in_points(&self) -> Vec<usize> {
        self.inner.in_points()
    }

    fn coverage(&self) -> f64 {
        self.inner.coverage()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }
}

/// Runs one walk and estimates its direction set.
#[pyfunction]
#[pyo3(signature = (spec, n_steps, seed=0, stream=0, estimator_json=None))]
fn simulate(
    py: Python<'_>,
    spec: &PySpec,
    n_steps: u64,
    seed: u64,
    stream: u64,
    estimator_json: Option<&str>,
) -> PyResult<(PyTrajectory, PyEstimate)> {
    let est: EstimatorConfig = match estimator_json {
        Some(t) => serde_json::from_str(t).map_err(|e| PyValueError::new_err(format!("estimator: {e}")))?,
        None => EstimatorConfig::default(),
    };
    est.validate().map_err(err)?;
    let spec = spec.inner.clone();
    let (record, estimate) = py
        .detach(move || -> Result<_, Error> {
            let sampler = make_increment_sampler(&spec)?;
            let mut acc = CapVisitAccumulator::new(spec.dimension, &est)?;
            let record = run_walk_stream(&sampler, n_steps, seed, stream, &mut [&mut acc], &RunOptions::default())?;
            let estimate = acc.finalize_with_meta(record.seed.clone(), n_steps)?;
            Ok((record, estimate))
        })
        .map_err(err)?;
    Ok((PyTrajectory { inner: record }, PyEstimate { inner: estimate }))
}

/// Runs a JSON-configured experiment, writes its artifacts and returns the
/// summary as JSON text.
#[pyfunction]
#[pyo3(signature = (config_json, output_dir=None))]
fn run_experiment(py: Python<'_>, config_json: &str, output_dir: Option<String>) -> PyResult<String> {
    let mut cfg = ExperimentConfig::from_json(config_json).map_err(err)?;
    if let Some(d) = output_dir {
        cfg.output_dir = d.into();
    }
    let out = py.detach(move || run_exp(&cfg)).map_err(err)?;
    serde_json::to_string(&out.summary).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction]
fn s_hull_contains(generators: Vec<Vec<f64>>, w: Vec<f64>) -> PyResult<bool> {
    let h = s_hull(&units(generators)?).map_err(err)?;
    let w = hat(&w);
    Ok(!w.is_zero() && contains(&h, &w))
}

/// Planar s-hull as `(start, end)` angle pairs, counter-clockwise.
#[pyfunction]
fn s_hull_arcs(generators: Vec<Vec<f64>>) -> PyResult<Vec<(f64, f64)>> {
    let h = s_hull(&units(generators)?).map_err(err)?;
    match (h.dimension(), h.arcs()) {
        (2, Some(a)) => Ok(a.arcs.iter().map(|a| (a.start, a.end)).collect()),
        (d, _) => Err(PyValueError::new_err(format!("arcs are planar only, got d = {d}"))),
    }
}

/// Radius of the largest origin-centred ball inside the hull of `points`.
#[pyfunction]
fn inscribed_radius(points: Vec<Vec<f64>>) -> PyResult<f64> {
    let mut h = hull_of(&points).map_err(err)?;
    Ok(radius(&mut h))
}

/// Hazard sequence `u_0..u_K` and the summability verdict.
#[pyfunction]
#[pyo3(signature = (tail, k=64))]
fn pruitt(tail: &str, k: usize) -> PyResult<(Vec<f64>, &'static str)> {
    let tail: TailFunction = tail.parse().map_err(err)?;
    let u = u_sequence(&tail, k).map_err(err)?;
    let verdict = pruitt_diagnostic(&u).verdict.as_str();
    Ok((u, verdict))
}

#[pyfunction]
#[pyo3(signature = (name, steps=None, runs=None, seed=None, alpha=None, dimension=None))]
fn reproduce(
    py: Python<'_>,
    name: &str,
    steps: Option<u64>,
    runs: Option<usize>,
    seed: Option<u64>,
    alpha: Option<f64>,
    dimension: Option<usize>,
) -> PyResult<(bool, String)> {
    let o = ExampleOverrides {
        scale: Overrides { runs, steps, seed },
        alpha,
        dimension,
    };
    let name = name.to_string();
    let r = py.detach(move || reproduce_example(&name, &o)).map_err(err)?;
    Ok((r.passed, r.to_text()))
}

#[pyfunction]
#[pyo3(signature = (id, steps=None, runs=None, seed=None))]
fn criterion(py: Python<'_>, id: u32, steps: Option<u64>, runs: Option<usize>, seed: Option<u64>) -> PyResult<(bool, String)> {
    let o = Overrides { runs, steps, seed };
    let out = py.detach(move || run_criterion(id, &o)).map_err(err)?;
    Ok((out.passed, out.line()))
}

#[pymodule]
fn angwalk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpec>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyEstimate>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(s_hull_contains, m)?)?;
    m.add_function(wrap_pyfunction!(s_hull_arcs, m)?)?;
    m.add_function(wrap_pyfunction!(inscribed_radius, m)?)?;
    m.add_function(wrap_pyfunction!(pruitt, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    m.add_function(wrap_pyfunction!(criterion, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
