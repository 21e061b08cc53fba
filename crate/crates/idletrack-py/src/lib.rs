//! Python bindings: the tracker, idle engine, simulator and metrics,
//! driven in-process.
//!
//! ```python
//! import idletrack_py as it
//! tracker = it.Tracker()
//! engine = it.IdleEngine()
//! for frame, dets in stream:
//!     for obj in tracker.step(dets, frame):
//!         verdict = engine.push(obj.track_id, obj.bbox, frame)
//! ```

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use idletrack::detection::TrackId;
use idletrack::error::Error;
use idletrack::eval::{idle_metrics, mot_metrics, track_owners, IdleOutcome};
use idletrack::fit::{fit_model, FitOptions};
use idletrack::idle::{IdleConfig, MachineState, MadVariant, WindowFeatures};
use idletrack::io::{read_scenario_str, LabeledWindow};
use idletrack::pipeline::labeled_windows;
use idletrack::simulator::{generate, GroundTruth, ScenarioSpec};
use idletrack::tracker::TrackerConfig;

fn to_py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_state(s: &str) -> PyResult<MachineState> {
    match s {
        "idle" => Ok(MachineState::Idle),
        "active" => Ok(MachineState::Active),
        other => Err(PyValueError::new_err(format!("unknown state {other:?}"))),
    }
}

/// Axis-aligned box, top-left anchored.
#[pyclass(name = "BBox", from_py_object)]
#[derive(Clone)]
struct PyBBox {
    inner: idletrack::BBox,
}

#[pymethods]
impl PyBBox {
    #[new]
    fn new(x: f64, y: f64, w: f64, h: f64) -> PyResult<Self> {
        Ok(PyBBox { inner: idletrack::BBox::new(x, y, w, h).map_err(to_py_err)? })
    }

    #[getter]
    fn x(&self) -> f64 {
        self.inner.x
    }

    #[getter]
    fn y(&self) -> f64 {
        self.inner.y
    }

    #[getter]
    fn w(&self) -> f64 {
        self.inner.w
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h
    }

    fn area(&self) -> f64 {
        self.inner.area()
    }

    fn centroid(&self) -> (f64, f64) {
        self.inner.centroid()
    }

    fn iou(&self, other: &PyBBox) -> f64 {
        self.inner.iou(&other.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "BBox(x={}, y={}, w={}, h={})",
            self.inner.x, self.inner.y, self.inner.w, self.inner.h
        )
    }
}

/// One detector output.
#[pyclass(name = "Detection", from_py_object)]
#[derive(Clone)]
struct PyDetection {
    inner: idletrack::Detection,
}

#[pymethods]
impl PyDetection {
    #[new]
    #[pyo3(signature = (frame, bbox, confidence, class_id=0))]
    fn new(frame: u64, bbox: PyBBox, confidence: f64, class_id: u32) -> PyResult<Self> {
        let det = idletrack::Detection::new(
            frame,
            bbox.inner,
            confidence,
            idletrack::ClassLabel::from_id(class_id),
        )
        .map_err(to_py_err)?;
        Ok(PyDetection { inner: det })
    }

    #[getter]
    fn frame(&self) -> u64 {
        self.inner.frame
    }

    #[getter]
    fn bbox(&self) -> PyBBox {
        PyBBox { inner: self.inner.bbox }
    }

    #[getter]
    fn confidence(&self) -> f64 {
        self.inner.confidence
    }

    #[getter]
    fn class_id(&self) -> u32 {
        self.inner.class.id
    }

    #[getter]
    fn class_name(&self) -> String {
        self.inner.class.name.clone()
    }
}

/// One emitted track box.
#[pyclass(name = "TrackedObject", from_py_object)]
#[derive(Clone)]
struct PyTrackedObject {
    inner: idletrack::TrackedObject,
}

#[pymethods]
impl PyTrackedObject {
    #[getter]
    fn frame(&self) -> u64 {
        self.inner.frame
    }

    #[getter]
    fn track_id(&self) -> u64 {
        self.inner.track_id.0
    }

    #[getter]
    fn class_id(&self) -> u32 {
        self.inner.class.id
    }

    #[getter]
    fn bbox(&self) -> PyBBox {
        PyBBox { inner: self.inner.bbox }
    }

    #[getter]
    fn confidence(&self) -> f64 {
        self.inner.confidence
    }

    fn __repr__(&self) -> String {
        format!(
            "TrackedObject(frame={}, track_id={}, class_id={})",
            self.inner.frame, self.inner.track_id.0, self.inner.class.id
        )
    }
}

/// Two-stage association tracker over one detection stream.
#[pyclass(name = "Tracker")]
struct PyTracker {
    inner: idletrack::Tracker,
}

#[pymethods]
impl PyTracker {
    #[new]
    #[pyo3(signature = (high_thresh=0.5, low_thresh=0.1, new_track_thresh=0.6, match_thresh=0.8, track_buffer=30, min_box_area=10.0, class_gated=true))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        high_thresh: f64,
        low_thresh: f64,
        new_track_thresh: f64,
        match_thresh: f64,
        track_buffer: u32,
        min_box_area: f64,
        class_gated: bool,
    ) -> PyResult<Self> {
        let config = TrackerConfig {
            high_thresh,
            low_thresh,
            new_track_thresh,
            match_thresh,
            track_buffer,
            min_box_area,
            class_gated,
        };
        Ok(PyTracker { inner: idletrack::Tracker::new(config).map_err(to_py_err)? })
    }

    /// Ingest one frame of detections; returns the active tracks.
    fn step(&mut self, detections: Vec<PyDetection>, frame: u64) -> PyResult<Vec<PyTrackedObject>> {
        let dets: Vec<idletrack::Detection> = detections.into_iter().map(|d| d.inner).collect();
        let out = self.inner.step(&dets, frame).map_err(to_py_err)?;
        Ok(out.into_iter().map(|inner| PyTrackedObject { inner }).collect())
    }

    /// Track ids terminated since the last call.
    fn drain_terminated(&mut self) -> Vec<u64> {
        self.inner.drain_terminated().into_iter().map(|id| id.0).collect()
    }

    fn live_track_count(&self) -> usize {
        self.inner.tracks().len()
    }
}

/// One classified window.
#[pyclass(name = "IdleVerdict", from_py_object)]
#[derive(Clone)]
struct PyIdleVerdict {
    inner: idletrack::IdleVerdict,
}

#[pymethods]
impl PyIdleVerdict {
    #[getter]
    fn track_id(&self) -> u64 {
        self.inner.track_id.0
    }

    #[getter]
    fn first_frame(&self) -> u64 {
        self.inner.first_frame
    }

    #[getter]
    fn last_frame(&self) -> u64 {
        self.inner.last_frame
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.p
    }

    #[getter]
    fn state(&self) -> &'static str {
        self.inner.state.as_str()
    }

    #[getter]
    fn mad_ad(&self) -> f64 {
        self.inner.features.mad_ad
    }

    #[getter]
    fn mad_cd(&self) -> f64 {
        self.inner.features.mad_cd
    }

    fn __repr__(&self) -> String {
        format!(
            "IdleVerdict(track_id={}, window=({}, {}), state={:?}, p={:.4})",
            self.inner.track_id.0,
            self.inner.first_frame,
            self.inner.last_frame,
            self.inner.state.as_str(),
            self.inner.p
        )
    }
}

/// Logistic idle/active model.
#[pyclass(name = "IdleModel", from_py_object)]
#[derive(Clone)]
struct PyIdleModel {
    inner: idletrack::IdleModel,
}

#[pymethods]
impl PyIdleModel {
    /// Build from explicit coefficients.
    #[new]
    #[pyo3(signature = (beta0, beta1, beta2, positive_label="idle"))]
    fn new(beta0: f64, beta1: f64, beta2: f64, positive_label: &str) -> PyResult<Self> {
        let model = idletrack::IdleModel {
            beta0,
            beta1,
            beta2,
            positive_label: parse_state(positive_label)?,
        };
        model.validate().map_err(to_py_err)?;
        Ok(PyIdleModel { inner: model })
    }

    /// The coefficients shipped with the pipeline.
    #[staticmethod]
    fn default() -> Self {
        PyIdleModel { inner: idletrack::IdleModel::default() }
    }

    #[getter]
    fn beta0(&self) -> f64 {
        self.inner.beta0
    }

    #[getter]
    fn beta1(&self) -> f64 {
        self.inner.beta1
    }

    #[getter]
    fn beta2(&self) -> f64 {
        self.inner.beta2
    }

    #[getter]
    fn positive_label(&self) -> &'static str {
        self.inner.positive_label.as_str()
    }

    /// (p, state) for a feature pair.
    fn classify(&self, mad_ad: f64, mad_cd: f64) -> (f64, &'static str) {
        let f = WindowFeatures { mad_ad, mad_cd, n: 2 };
        let (p, state) = self.inner.classify(&f);
        (p, state.as_str())
    }
}

/// Tumbling-window feature extraction and classification per track.
#[pyclass(name = "IdleEngine")]
struct PyIdleEngine {
    inner: idletrack::IdleEngine,
}

#[pymethods]
impl PyIdleEngine {
    #[new]
    #[pyo3(signature = (model=None, capacity=15, fps=10.0))]
    fn new(model: Option<PyIdleModel>, capacity: usize, fps: f64) -> PyResult<Self> {
        let model = model.map_or_else(idletrack::IdleModel::default, |m| m.inner);
        let config = IdleConfig { capacity, fps, mad_variant: MadVariant::AsPrinted };
        Ok(PyIdleEngine { inner: idletrack::IdleEngine::new(model, config).map_err(to_py_err)? })
    }

    /// Push one observation; returns a verdict when the window fills.
    fn push(&mut self, track_id: u64, bbox: PyBBox, frame: u64) -> PyResult<Option<PyIdleVerdict>> {
        let verdict = self
            .inner
            .push(TrackId(track_id), &bbox.inner, frame)
            .map_err(to_py_err)?;
        Ok(verdict.map(|inner| PyIdleVerdict { inner }))
    }

    /// Drop a terminated track's partial window.
    fn discard(&mut self, track_id: u64) {
        self.inner.discard(TrackId(track_id));
    }

    fn window_seconds(&self) -> f64 {
        self.inner.config().window_seconds()
    }
}

/// Scenario ground truth handle.
#[pyclass(name = "GroundTruth")]
struct PyGroundTruth {
    inner: GroundTruth,
}

#[pymethods]
impl PyGroundTruth {
    fn frame_count(&self) -> usize {
        self.inner.frames.len()
    }

    fn entity_count(&self) -> usize {
        self.inner.entity_count()
    }

    /// Oracle idle/active label for an entity over a frame window.
    #[pyo3(signature = (entity_id, first_frame, last_frame, eps_v=0.5))]
    fn window_idle_label(
        &self,
        entity_id: u32,
        first_frame: u64,
        last_frame: u64,
        eps_v: f64,
    ) -> &'static str {
        self.inner.window_idle_label(entity_id, first_frame, last_frame, eps_v).as_str()
    }
}

fn parse_scenario(py_toml: &str) -> PyResult<ScenarioSpec> {
    read_scenario_str(py_toml).map_err(to_py_err)
}

/// Generate a scenario from its TOML text; returns (detections, truth).
#[pyfunction]
#[pyo3(signature = (scenario_toml, seed=None))]
fn simulate(scenario_toml: &str, seed: Option<u64>) -> PyResult<(Vec<PyDetection>, PyGroundTruth)> {
    let mut spec = parse_scenario(scenario_toml)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let (dets, truth) = generate(&spec).map_err(to_py_err)?;
    Ok((
        dets.into_iter().map(|inner| PyDetection { inner }).collect(),
        PyGroundTruth { inner: truth },
    ))
}

/// MOTA/MOTP/IDF1 metrics for a tracked stream, as a dict.
#[pyfunction]
#[pyo3(signature = (tracked, truth, iou_match=0.5))]
fn score_tracking<'py>(
    py: Python<'py>,
    tracked: Vec<PyTrackedObject>,
    truth: &PyGroundTruth,
    iou_match: f64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    use pyo3::types::PyDict;
    let objs: Vec<idletrack::TrackedObject> = tracked.into_iter().map(|t| t.inner).collect();
    let r = mot_metrics(&objs, &truth.inner, iou_match);
    let d = PyDict::new(py);
    d.set_item("mota", r.mota)?;
    d.set_item("motp", r.motp)?;
    d.set_item("idf1", r.idf1)?;
    d.set_item("id_precision", r.id_precision)?;
    d.set_item("id_recall", r.id_recall)?;
    d.set_item("id_switches", r.id_switches)?;
    d.set_item("false_positives", r.false_positives)?;
    d.set_item("false_negatives", r.false_negatives)?;
    d.set_item("gt_total", r.gt_total)?;
    Ok(d)
}

/// Accuracy/precision/recall/F1 of verdicts against the oracle, as a dict.
#[pyfunction]
#[pyo3(signature = (verdicts, tracked, truth, iou_match=0.5, eps_v=0.5))]
fn score_idle<'py>(
    py: Python<'py>,
    verdicts: Vec<PyIdleVerdict>,
    tracked: Vec<PyTrackedObject>,
    truth: &PyGroundTruth,
    iou_match: f64,
    eps_v: f64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    use pyo3::types::PyDict;
    let objs: Vec<idletrack::TrackedObject> = tracked.into_iter().map(|t| t.inner).collect();
    let owners = track_owners(&objs, &truth.inner, iou_match);
    let outcomes: Vec<IdleOutcome> = verdicts
        .iter()
        .map(|v| {
            let label = owners.get(&v.inner.track_id).copied().flatten().map(|entity| {
                truth.inner.window_idle_label(entity, v.inner.first_frame, v.inner.last_frame, eps_v)
            });
            IdleOutcome { predicted: v.inner.state, truth: label }
        })
        .collect();
    let r = idle_metrics(&outcomes).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("accuracy", r.accuracy)?;
    d.set_item("precision", r.precision)?;
    d.set_item("recall", r.recall)?;
    d.set_item("f1", r.f1)?;
    d.set_item("tp", r.tp)?;
    d.set_item("fp", r.fp)?;
    d.set_item("tn", r.tn)?;
    d.set_item("fn", r.fn_)?;
    Ok(d)
}

/// Fit logistic coefficients from (mad_ad, mad_cd, label) triples.
#[pyfunction]
#[pyo3(signature = (windows, positive_label="idle"))]
fn fit(windows: Vec<(f64, f64, String)>, positive_label: &str) -> PyResult<PyIdleModel> {
    let pairs: Vec<(WindowFeatures, MachineState)> = windows
        .into_iter()
        .map(|(mad_ad, mad_cd, label)| {
            Ok((WindowFeatures { mad_ad, mad_cd, n: 2 }, parse_state(&label)?))
        })
        .collect::<PyResult<_>>()?;
    let opts = FitOptions { positive_label: parse_state(positive_label)?, ..Default::default() };
    Ok(PyIdleModel { inner: fit_model(&pairs, &opts).map_err(to_py_err)? })
}

/// Run the full stack on a scenario and return oracle-labeled windows as
/// (mad_ad, mad_cd, label) triples.
#[pyfunction]
#[pyo3(signature = (scenario_toml, capacity=15, fps=10.0, iou_match=0.5, eps_v=0.5))]
fn scenario_windows(
    scenario_toml: &str,
    capacity: usize,
    fps: f64,
    iou_match: f64,
    eps_v: f64,
) -> PyResult<Vec<(f64, f64, &'static str)>> {
    let spec = parse_scenario(scenario_toml)?;
    let idle = IdleConfig { capacity, fps, mad_variant: MadVariant::AsPrinted };
    let windows: Vec<LabeledWindow> =
        labeled_windows(&spec, &TrackerConfig::default(), &idle, iou_match, eps_v)
            .map_err(to_py_err)?;
    Ok(windows
        .into_iter()
        .map(|w| (w.features.mad_ad, w.features.mad_cd, w.label.as_str()))
        .collect())
}

#[pymodule]
fn idletrack_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBBox>()?;
    m.add_class::<PyDetection>()?;
    m.add_class::<PyTrackedObject>()?;
    m.add_class::<PyTracker>()?;
    m.add_class::<PyIdleVerdict>()?;
    m.add_class::<PyIdleModel>()?;
    m.add_class::<PyIdleEngine>()?;
    m.add_class::<PyGroundTruth>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(score_tracking, m)?)?;
    m.add_function(wrap_pyfunction!(score_idle, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_windows, m)?)?;
    Ok(())
}
