//! Python bindings for `spatialmix`.
//!
//! Audio crosses the boundary as lists of floats, one list per channel.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

use spatialmix::audio::{self, AudioBuffer, WavEncoding};
use spatialmix::dsp::{self, ReverbBank};
use spatialmix::geometry;
use spatialmix::interpolation::{self, InterpolationMode, PlanOptions, WeightLaw};
use spatialmix::ir_store::{self, Distribution, IrType};
use spatialmix::layouts;
use spatialmix::mixer::{self, MixConfig, Normalize};

fn err(e: spatialmix::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = spatialmix::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn options(snap_threshold_deg: f64, barycentric: bool) -> PlanOptions {
    PlanOptions {
        snap_threshold_deg,
        weight_law: if barycentric { WeightLaw::Barycentric } else { WeightLaw::InverseDistance },
    }
}

fn layout_opt(name: Option<&str>) -> PyResult<Option<layouts::SpeakerLayout>> {
    name.map(layouts::get_layout).transpose().map_err(err)
}

/// A normalized direction in degrees. Azimuth is counter-clockwise from the
/// front in [0, 360); elevation is in [-90, 90].
#[pyclass(name = "Direction", frozen, eq, from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct PyDirection(geometry::Direction);

#[pymethods]
impl PyDirection {
    #[new]
    fn new(azimuth_deg: f64, elevation_deg: f64) -> PyResult<Self> {
        geometry::Direction::new(azimuth_deg, elevation_deg).map(PyDirection).map_err(err)
    }

    #[staticmethod]
    fn from_cartesian(x: f64, y: f64, z: f64) -> PyResult<Self> {
        geometry::Direction::from_cartesian(x, y, z).map(PyDirection).map_err(err)
    }

    #[getter]
    fn azimuth(&self) -> f64 {
        self.0.azimuth()
    }

    #[getter]
    fn elevation(&self) -> f64 {
        self.0.elevation()
    }

    /// Unit vector (x front, y left, z up).
    #[allow(clippy::wrong_self_convention)]
    fn to_cartesian(&self) -> (f64, f64, f64) {
        let v = self.0.to_cartesian();
        (v.x, v.y, v.z)
    }

    fn __repr__(&self) -> String {
        format!("Direction({}, {})", self.0.azimuth(), self.0.elevation())
    }
}

#[pyfunction]
fn normalize_direction(azimuth_deg: f64, elevation_deg: f64) -> PyResult<PyDirection> {
    geometry::normalize_direction(azimuth_deg, elevation_deg).map(PyDirection).map_err(err)
}

#[pyfunction]
fn angular_distance(a: PyDirection, b: PyDirection) -> f64 {
    geometry::angular_distance(a.0, b.0)
}

#[pyclass(name = "IrSet", frozen)]
struct PyIrSet(ir_store::IrSet);

#[pymethods]
impl PyIrSet {
    /// `distribution` is `lebedev50` or `ring:<step>:<el>,<el>,...`.
    #[staticmethod]
    #[pyo3(signature = (distribution="lebedev50", sample_rate_hz=48000, ir_length=256, seed=0))]
    fn synthesize(distribution: &str, sample_rate_hz: u32, ir_length: usize, seed: u64) -> PyResult<Self> {
        let dist: Distribution = parse(distribution)?;
        ir_store::synthesize_ir_set(&dist, sample_rate_hz, ir_length, seed).map(PyIrSet).map_err(err)
    }

    #[staticmethod]
    fn load(data_root: &str, subject_id: &str, ir_type: &str, sample_rate_hz: u32) -> PyResult<Self> {
        let ir_type: IrType = parse(ir_type)?;
        ir_store::load_ir_set(data_root, subject_id, ir_type, sample_rate_hz).map(PyIrSet).map_err(err)
    }

    fn write(&self, data_root: &str) -> PyResult<()> {
        ir_store::write_ir_set(&self.0, data_root).map(|_| ()).map_err(err)
    }

    #[getter]
    fn subject_id(&self) -> &str {
        self.0.subject_id()
    }

    #[getter]
    fn ir_type(&self) -> &'static str {
        self.0.ir_type().as_str()
    }

    #[getter]
    fn sample_rate(&self) -> u32 {
        self.0.sample_rate()
    }

    #[getter]
    fn ir_len(&self) -> usize {
        self.0.ir_len()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn directions(&self) -> Vec<PyDirection> {
        self.0.points().iter().map(|p| PyDirection(p.direction)).collect()
    }

    /// `(direction, left, right)` of point `i`.
    fn point(&self, i: usize) -> PyResult<(PyDirection, Vec<f64>, Vec<f64>)> {
        let p = self.0.points().get(i).ok_or_else(|| PyIndexError::new_err(format!("no point {i}")))?;
        Ok((PyDirection(p.direction), p.left.clone(), p.right.clone()))
    }

    /// Index of the nearest point and its distance in degrees.
    fn nearest(&self, d: PyDirection) -> (usize, f64) {
        ir_store::nearest_point(&self.0, d.0)
    }
}

#[pyclass(name = "InterpolationPlan", frozen, from_py_object)]
#[derive(Clone)]
struct PyPlan(interpolation::InterpolationPlan);

#[pymethods]
impl PyPlan {
    #[getter]
    fn mode_used(&self) -> &'static str {
        self.0.mode_used.as_str()
    }

    /// `(index, weight)` pairs.
    #[getter]
    fn entries(&self) -> Vec<(usize, f64)> {
        self.0.entries.clone()
    }

    #[getter]
    fn achieved_direction(&self) -> PyDirection {
        PyDirection(self.0.achieved_direction)
    }

    #[getter]
    fn achieved_error_deg(&self) -> f64 {
        self.0.achieved_error_deg
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.0.warnings.clone()
    }

    fn weight_sum(&self) -> f64 {
        self.0.weight_sum()
    }

    fn __repr__(&self) -> String {
        format!("InterpolationPlan({}, {:?}, error={:.4})", self.0.mode_used, self.0.entries, self.0.achieved_error_deg)
    }
}

#[pyfunction]
#[pyo3(signature = (set, direction, mode="auto", snap_threshold_deg=interpolation::DEFAULT_SNAP_DEG, barycentric=false))]
fn plan(set: &PyIrSet, direction: PyDirection, mode: &str, snap_threshold_deg: f64, barycentric: bool) -> PyResult<PyPlan> {
    let mode: InterpolationMode = parse(mode)?;
    interpolation::plan(&set.0, direction.0, mode, &options(snap_threshold_deg, barycentric))
        .map(PyPlan)
        .map_err(err)
}

/// Weighted sum of the planned IR pairs, as `(left, right)`.
#[pyfunction]
fn blend(set: &PyIrSet, plan: &PyPlan) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = interpolation::blend(&set.0, &plan.0).map_err(err)?;
    Ok((p.left, p.right))
}

#[pyfunction]
fn supported_layouts() -> Vec<&'static str> {
    layouts::SUPPORTED_LAYOUTS.to_vec()
}

type ChannelRow = (&'static str, Option<f64>, Option<f64>);

/// Channels of a layout as `(label, azimuth, elevation)`; the LFE has no
/// direction.
#[pyfunction]
fn get_layout(name: &str) -> PyResult<Vec<ChannelRow>> {
    let layout = layouts::get_layout(name).map_err(err)?;
    Ok(layout
        .channels
        .iter()
        .map(|c| (c.label, c.direction().map(|d| d.azimuth()), c.direction().map(|d| d.elevation())))
        .collect())
}

#[pyfunction]
fn convolve(signal: Vec<f64>, ir: Vec<f64>) -> Vec<f64> {
    dsp::convolve_samples(&signal, &ir)
}

/// `(left_gain, right_gain)` for a pan in [-1, 1].
#[pyfunction]
fn pan_constant_power(pan: f64) -> (f64, f64) {
    dsp::pan_constant_power(pan)
}

/// Renders a mono source at `direction`; returns `(left, right, plan)`.
#[pyfunction]
#[pyo3(signature = (source, direction, set, mode="auto", layout=None, snap_threshold_deg=interpolation::DEFAULT_SNAP_DEG))]
fn render_source_binaural(
    source: Vec<f64>,
    direction: PyDirection,
    set: &PyIrSet,
    mode: &str,
    layout: Option<&str>,
    snap_threshold_deg: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, PyPlan)> {
    let mode: InterpolationMode = parse(mode)?;
    let layout = layout_opt(layout)?;
    let src = AudioBuffer::mono(set.0.sample_rate(), source).map_err(err)?;
    let r = dsp::render_source_binaural(&src, direction.0, &set.0, mode, layout.as_ref(), &options(snap_threshold_deg, false))
        .map_err(err)?;
    let mut ch = r.audio.into_channels();
    let right = ch.pop().unwrap_or_default();
    let left = ch.pop().unwrap_or_default();
    Ok((left, right, PyPlan(r.plan)))
}

#[pyclass(name = "Track", from_py_object)]
#[derive(Clone)]
struct PyTrack {
    #[pyo3(get, set)]
    name: String,
    #[pyo3(get, set)]
    samples: Vec<f64>,
    #[pyo3(get, set)]
    level: f64,
    #[pyo3(get, set)]
    reverb: f64,
    #[pyo3(get, set)]
    azimuth_deg: f64,
    #[pyo3(get, set)]
    elevation_deg: f64,
    #[pyo3(get, set)]
    pan: f64,
}

#[pymethods]
impl PyTrack {
    #[new]
    #[pyo3(signature = (name, samples, level=1.0, reverb=0.0, azimuth_deg=0.0, elevation_deg=0.0, pan=0.0))]
    fn new(name: String, samples: Vec<f64>, level: f64, reverb: f64, azimuth_deg: f64, elevation_deg: f64, pan: f64) -> Self {
        PyTrack { name, samples, level, reverb, azimuth_deg, elevation_deg, pan }
    }
}

#[pyclass(name = "MixResult", frozen)]
struct PyMixResult {
    #[pyo3(get)]
    left: Vec<f64>,
    #[pyo3(get)]
    right: Vec<f64>,
    #[pyo3(get)]
    peak: f64,
    #[pyo3(get)]
    gain: f64,
    #[pyo3(get)]
    clipped: bool,
    /// `(name, plan)` per track, or per channel for surround renders.
    #[pyo3(get)]
    plans: Vec<(String, PyPlan)>,
}

impl From<mixer::MixResult> for PyMixResult {
    fn from(r: mixer::MixResult) -> Self {
        let plans = r.tracks.into_iter().map(|t| (t.name, PyPlan(t.plan))).collect();
        let mut ch = r.audio.into_channels();
        let right = ch.pop().unwrap_or_default();
        let left = ch.pop().unwrap_or_default();
        PyMixResult { left, right, peak: r.peak, gain: r.gain, clipped: r.clipped, plans }
    }
}

#[allow(clippy::too_many_arguments)]
fn mix_config(set_subject: &str, rate: u32, ir_type: IrType, mode: &str, layout: Option<&str>, reverb_type: u8, keep_tail: bool, normalize: &str) -> PyResult<MixConfig> {
    let mut cfg = MixConfig::new(set_subject, rate, ir_type);
    cfg.interpolation_mode = parse(mode)?;
    cfg.speaker_layout = layout.map(str::to_string);
    cfg.reverb_type = reverb_type;
    cfg.keep_tail = keep_tail;
    cfg.normalize = parse::<Normalize>(normalize)?;
    Ok(cfg)
}

fn track_objects(tracks: &[PyTrack], rate: u32) -> PyResult<Vec<mixer::TrackObject>> {
    tracks
        .iter()
        .map(|t| {
            let audio = AudioBuffer::mono(rate, t.samples.clone()).map_err(err)?;
            Ok(mixer::TrackObject::new(t.name.clone(), audio, t.level, t.reverb, t.azimuth_deg, t.elevation_deg))
        })
        .collect()
}

/// Binaural mix of `tracks` over `set`, with synthetic reverbs seeded by
/// `seed`.
#[pyfunction]
#[pyo3(signature = (tracks, set, mode="auto", layout=None, reverb_type=1, seed=0, keep_tail=true, normalize="off"))]
#[allow(clippy::too_many_arguments)]
fn mix_tracks_binaural(
    tracks: Vec<PyTrack>,
    set: &PyIrSet,
    mode: &str,
    layout: Option<&str>,
    reverb_type: u8,
    seed: u64,
    keep_tail: bool,
    normalize: &str,
) -> PyResult<PyMixResult> {
    let s = &set.0;
    let cfg = mix_config(s.subject_id(), s.sample_rate(), s.ir_type(), mode, layout, reverb_type, keep_tail, normalize)?;
    let reverbs = ReverbBank::synthetic(s.sample_rate(), seed).map_err(err)?;
    let objects = track_objects(&tracks, s.sample_rate())?;
    mixer::mix_tracks_binaural(&objects, &cfg, s, &reverbs).map(Into::into).map_err(err)
}

/// Constant-power stereo mix using each track's `pan`.
#[pyfunction]
#[pyo3(signature = (tracks, sample_rate_hz=48000, reverb_type=1, seed=0, keep_tail=true, normalize="off"))]
fn mix_tracks_stereo(tracks: Vec<PyTrack>, sample_rate_hz: u32, reverb_type: u8, seed: u64, keep_tail: bool, normalize: &str) -> PyResult<PyMixResult> {
    let cfg = mix_config("", sample_rate_hz, IrType::Hrir, "auto", None, reverb_type, keep_tail, normalize)?;
    let reverbs = ReverbBank::synthetic(sample_rate_hz, seed).map_err(err)?;
    let objects = track_objects(&tracks, sample_rate_hz)?;
    let pans: Vec<f64> = tracks.iter().map(|t| t.pan).collect();
    mixer::mix_tracks_stereo(&objects, &pans, &cfg, &reverbs).map(Into::into).map_err(err)
}

/// Renders a channel-encoded program (one list per channel, in layout
/// order) to binaural.
#[pyfunction]
#[pyo3(signature = (channels, input_layout, set, output_layout=None, mode="auto", normalize="off"))]
fn render_surround_to_binaural(
    channels: Vec<Vec<f64>>,
    input_layout: &str,
    set: &PyIrSet,
    output_layout: Option<&str>,
    mode: &str,
    normalize: &str,
) -> PyResult<PyMixResult> {
    let s = &set.0;
    let output_layout = output_layout.unwrap_or(input_layout);
    let cfg = mix_config(s.subject_id(), s.sample_rate(), s.ir_type(), mode, Some(output_layout), 1, true, normalize)?;
    let program = AudioBuffer::new(s.sample_rate(), channels).map_err(err)?;
    mixer::render_surround_to_binaural(&program, input_layout, output_layout, &cfg, s).map(Into::into).map_err(err)
}

/// Returns `(sample_rate, channels)`.
#[pyfunction]
fn read_wav(path: &str) -> PyResult<(u32, Vec<Vec<f64>>)> {
    let a = audio::read_wav(path).map_err(err)?;
    Ok((a.sample_rate(), a.into_channels()))
}

/// `encoding` is `pcm16`, `pcm24` or `float32`.
#[pyfunction]
#[pyo3(signature = (path, sample_rate_hz, channels, encoding="pcm24"))]
fn write_wav(path: &str, sample_rate_hz: u32, channels: Vec<Vec<f64>>, encoding: &str) -> PyResult<()> {
    let encoding = match encoding.to_ascii_lowercase().as_str() {
        "pcm16" => WavEncoding::Pcm16,
        "pcm24" => WavEncoding::Pcm24,
        "float32" => WavEncoding::Float32,
        other => return Err(PyValueError::new_err(format!("unknown encoding {other:?}"))),
    };
    let a = AudioBuffer::new(sample_rate_hz, channels).map_err(err)?;
    audio::write_wav(path, &a, encoding).map_err(err)
}

#[pymodule]
fn spatialmix_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDirection>()?;
    m.add_class::<PyIrSet>()?;
    m.add_class::<PyPlan>()?;
    m.add_class::<PyTrack>()?;
    m.add_class::<PyMixResult>()?;
    m.add("INTERPOLATION_MODES", InterpolationMode::NAMES.to_vec())?;
    m.add_function(wrap_pyfunction!(normalize_direction, m)?)?;
    m.add_function(wrap_pyfunction!(angular_distance, m)?)?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(blend, m)?)?;
    m.add_function(wrap_pyfunction!(supported_layouts, m)?)?;
    m.add_function(wrap_pyfunction!(get_layout, m)?)?;
    m.add_function(wrap_pyfunction!(convolve, m)?)?;
    m.add_function(wrap_pyfunction!(pan_constant_power, m)?)?;
    m.add_function(wrap_pyfunction!(render_source_binaural, m)?)?;
    m.add_function(wrap_pyfunction!(mix_tracks_binaural, m)?)?;
    m.add_function(wrap_pyfunction!(mix_tracks_stereo, m)?)?;
    m.add_function(wrap_pyfunction!(render_surround_to_binaural, m)?)?;
    m.add_function(wrap_pyfunction!(read_wav, m)?)?;
    m.add_function(wrap_pyfunction!(write_wav, m)?)?;
    Ok(())
}
