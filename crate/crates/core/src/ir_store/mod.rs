//! Spherically sampled stereo impulse-response sets.
//!
//! On disk a set lives at `<root>/<subject>/<HRIR|BRIR>/<rate>/manifest.tsv`
//! next to one stereo WAV per measured direction.

mod import;
mod manifest;
mod synth;

pub use import::{import_sadie, ImportOptions, ImportReport};
pub use manifest::{IrManifest, ManifestEntry, MANIFEST_FILE, MANIFEST_SCHEMA};
pub use synth::{synthesize_ir_set, Distribution};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::audio::{read_wav, write_wav, AudioBuffer, WavEncoding};
use crate::error::{Error, Result};
use crate::geometry::{find_duplicates, Direction, DirectionGrid, DUPLICATE_TOL_DEG};

pub const SUPPORTED_RATES: [u32; 3] = [44100, 48000, 96000];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IrType {
    Hrir,
    Brir,
}

impl IrType {
    pub fn as_str(self) -> &'static str {
        match self {
            IrType::Hrir => "HRIR",
            IrType::Brir => "BRIR",
        }
    }
}

impl fmt::Display for IrType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IrType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HRIR" => Ok(IrType::Hrir),
            "BRIR" => Ok(IrType::Brir),
            _ => Err(Error::InvalidArgument(format!(
                "unknown IR type {s:?}; expected HRIR or BRIR"
            ))),
        }
    }
}

/// A measured left/right impulse-response pair.
#[derive(Debug, Clone, PartialEq)]
pub struct IrPoint {
    pub direction: Direction,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl IrPoint {
    pub fn new(direction: Direction, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if left.is_empty() || left.len() != right.len() {
            return Err(Error::InvalidArgument(format!(
                "IR pair at {direction} needs equal non-zero lengths, got {} and {}",
                left.len(),
                right.len()
            )));
        }
        if left.iter().chain(&right).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "IR pair at {direction} has non-finite samples"
            )));
        }
        Ok(IrPoint {
            direction,
            left,
            right,
        })
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }
}

/// An immutable, validated impulse-response set.
#[derive(Debug, Clone)]
pub struct IrSet {
    subject_id: String,
    ir_type: IrType,
    sample_rate_hz: u32,
    points: Vec<IrPoint>,
    grid: DirectionGrid,
}

impl IrSet {
    pub fn new(
        subject_id: impl Into<String>,
        ir_type: IrType,
        sample_rate_hz: u32,
        points: Vec<IrPoint>,
    ) -> Result<Self> {
        let subject_id = subject_id.into();
        if !SUPPORTED_RATES.contains(&sample_rate_hz) {
            return Err(Error::InvalidArgument(format!(
                "sample rate {sample_rate_hz} Hz not supported; expected one of {SUPPORTED_RATES:?}"
            )));
        }
        if points.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "IR set {subject_id} needs at least 3 points, got {}",
                points.len()
            )));
        }
        let len = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != len) {
            return Err(Error::InvalidArgument(format!(
                "IR at {} has length {}, expected {len}",
                p.direction,
                p.len()
            )));
        }
        let grid = DirectionGrid::new(points.iter().map(|p| p.direction).collect());
        if let Some(&(i, j)) = find_duplicates(grid.directions()).first() {
            return Err(Error::InvalidArgument(format!(
                "points #{j} {} and #{i} {} are closer than {DUPLICATE_TOL_DEG} deg",
                points[j].direction, points[i].direction
            )));
        }
        Ok(IrSet {
            subject_id,
            ir_type,
            sample_rate_hz,
            points,
            grid,
        })
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn ir_type(&self) -> IrType {
        self.ir_type
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn points(&self) -> &[IrPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &IrPoint {
        &self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Samples per impulse response.
    pub fn ir_len(&self) -> usize {
        self.points[0].len()
    }

    pub fn grid(&self) -> &DirectionGrid {
        &self.grid
    }

    /// Same data under a different subject and type label.
    pub fn relabel(mut self, subject_id: impl Into<String>, ir_type: IrType) -> Self {
        self.subject_id = subject_id.into();
        self.ir_type = ir_type;
        self
    }
}

/// Index and great-circle distance of the stored point closest to `d`.
pub fn nearest_point(set: &IrSet, d: Direction) -> (usize, f64) {
    set.grid().nearest(d)
}

/// Directory holding the set for one (subject, type, rate) triple.
pub fn set_dir(root: &Path, subject_id: &str, ir_type: IrType, sample_rate_hz: u32) -> PathBuf {
    root.join(subject_id)
        .join(ir_type.as_str())
        .join(sample_rate_hz.to_string())
}

pub fn load_ir_set(root: impl AsRef<Path>, subject_id: &str, ir_type: IrType, sample_rate_hz: u32) -> Result<IrSet> {
    let dir = set_dir(root.as_ref(), subject_id, ir_type, sample_rate_hz);
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(Error::NotFound(format!(
            "no IR set for subject {subject_id}, {ir_type}, {sample_rate_hz} Hz (expected {})",
            manifest_path.display()
        )));
    }
    let manifest = IrManifest::read(&manifest_path)?;
    if manifest.subject_id != subject_id || manifest.ir_type != ir_type || manifest.sample_rate_hz != sample_rate_hz {
        return Err(Error::format(
            &manifest_path,
            format!(
                "header says {} {} {} Hz but the set was requested as {subject_id} {ir_type} {sample_rate_hz} Hz",
                manifest.subject_id, manifest.ir_type, manifest.sample_rate_hz
            ),
        ));
    }
    let mut points = Vec::with_capacity(manifest.entries.len());
    for e in &manifest.entries {
        let path = dir.join(&e.path);
        let audio = read_ir_wav(&path, sample_rate_hz)?;
        let direction = Direction::new(e.azimuth, e.elevation)?;
        let [left, right]: [Vec<f64>; 2] = audio.into_channels().try_into().expect("checked stereo");
        points.push(IrPoint::new(direction, left, right).map_err(|err| Error::format(&path, err.to_string()))?);
    }
    IrSet::new(subject_id, ir_type, sample_rate_hz, points).map_err(|e| Error::format(&manifest_path, e.to_string()))
}

pub(crate) fn read_ir_wav(path: &Path, sample_rate_hz: u32) -> Result<AudioBuffer> {
    if !path.is_file() {
        return Err(Error::format(path, "referenced IR file does not exist"));
    }
    let audio = read_wav(path)?;
    if audio.num_channels() != 2 {
        return Err(Error::format(
            path,
            format!("IR files must be stereo, found {} channel(s)", audio.num_channels()),
        ));
    }
    if audio.sample_rate() != sample_rate_hz {
        return Err(Error::format(
            path,
            format!("sample rate {} Hz does not match manifest rate {sample_rate_hz} Hz", audio.sample_rate()),
        ));
    }
    Ok(audio)
}

/// Writes `set` as 32-bit float WAVs plus a manifest under `root`.
pub fn write_ir_set(set: &IrSet, root: impl AsRef<Path>) -> Result<IrManifest> {
    let dir = set_dir(root.as_ref(), set.subject_id(), set.ir_type(), set.sample_rate());
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut entries = Vec::with_capacity(set.len());
    for (i, p) in set.points().iter().enumerate() {
        let name = format!("ir_{i:05}.wav");
        let audio = AudioBuffer::stereo(set.sample_rate(), p.left.clone(), p.right.clone())?;
        write_wav(dir.join(&name), &audio, WavEncoding::Float32)?;
        entries.push(ManifestEntry {
            azimuth: p.direction.azimuth(),
            elevation: p.direction.elevation(),
            path: PathBuf::from(name),
        });
    }
    let manifest = IrManifest {
        schema: MANIFEST_SCHEMA,
        subject_id: set.subject_id().to_string(),
        ir_type: set.ir_type(),
        sample_rate_hz: set.sample_rate(),
        entries,
    };
    manifest.write(dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lebedev::lebedev50;

    fn tiny_set() -> IrSet {
        synthesize_ir_set(&Distribution::Lebedev50, 48000, 64, 3).unwrap()
    }

    #[test]
    fn ir_type_parsing() {
        assert_eq!("hrir".parse::<IrType>().unwrap(), IrType::Hrir);
        assert_eq!("BRIR".parse::<IrType>().unwrap(), IrType::Brir);
        assert!("SOFA".parse::<IrType>().is_err());
    }

    #[test]
    fn set_invariants_are_enforced() {
        let d = |az| Direction::new(az, 0.0).unwrap();
        let p = |az| IrPoint::new(d(az), vec![1.0, 0.0], vec![0.5, 0.0]).unwrap();
        assert!(IrSet::new("X", IrType::Hrir, 48000, vec![p(0.0), p(10.0)]).is_err());
        assert!(IrSet::new("X", IrType::Hrir, 22050, vec![p(0.0), p(10.0), p(20.0)]).is_err());
        assert!(IrSet::new("X", IrType::Hrir, 48000, vec![p(0.0), p(10.0), p(10.005)]).is_err());
        let short = IrPoint::new(d(30.0), vec![1.0], vec![1.0]).unwrap();
        assert!(IrSet::new("X", IrType::Hrir, 48000, vec![p(0.0), p(10.0), short]).is_err());
        assert!(IrPoint::new(d(0.0), vec![1.0], vec![]).is_err());
        assert!(IrPoint::new(d(0.0), vec![f64::NAN], vec![0.0]).is_err());
        assert!(IrSet::new("X", IrType::Hrir, 48000, vec![p(0.0), p(10.0), p(20.0)]).is_ok());
    }

    #[test]
    fn write_then_load_is_sample_exact() {
        let dir = tempfile::tempdir().unwrap();
        let set = tiny_set().relabel("H3", IrType::Brir);
        write_ir_set(&set, dir.path()).unwrap();
        let back = load_ir_set(dir.path(), "H3", IrType::Brir, 48000).unwrap();
        assert_eq!(back.len(), 50);
        assert_eq!(back.points(), set.points());
    }

    #[test]
    fn missing_set_names_the_triple() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_ir_set(dir.path(), "D1", IrType::Hrir, 48000).unwrap_err();
        assert!(matches!(err, Error::NotFound(_)));
        let msg = err.to_string();
        assert!(msg.contains("D1") && msg.contains("HRIR") && msg.contains("48000"), "{msg}");
    }

    #[test]
    fn missing_ir_file_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let set = tiny_set().relabel("H4", IrType::Brir);
        write_ir_set(&set, dir.path()).unwrap();
        let victim = set_dir(dir.path(), "H4", IrType::Brir, 48000).join("ir_00007.wav");
        std::fs::remove_file(&victim).unwrap();
        let err = load_ir_set(dir.path(), "H4", IrType::Brir, 48000).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
        assert!(err.to_string().contains("ir_00007.wav"));
    }

    #[test]
    fn wrong_rate_and_mono_files_are_format_errors() {
        let dir = tempfile::tempdir().unwrap();
        let set = tiny_set().relabel("H5", IrType::Brir);
        write_ir_set(&set, dir.path()).unwrap();
        let sdir = set_dir(dir.path(), "H5", IrType::Brir, 48000);
        let mono = AudioBuffer::mono(48000, vec![0.0; 64]).unwrap();
        write_wav(sdir.join("ir_00001.wav"), &mono, WavEncoding::Float32).unwrap();
        let err = load_ir_set(dir.path(), "H5", IrType::Brir, 48000).unwrap_err();
        assert!(err.to_string().contains("ir_00001.wav") && err.to_string().contains("stereo"));

        let fast = AudioBuffer::stereo(44100, vec![0.0; 64], vec![0.0; 64]).unwrap();
        write_wav(sdir.join("ir_00001.wav"), &fast, WavEncoding::Float32).unwrap();
        let err = load_ir_set(dir.path(), "H5", IrType::Brir, 48000).unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
        assert!(err.to_string().contains("44100"));
    }

    #[test]
    fn nearest_point_examples() {
        let set = tiny_set();
        let pts = lebedev50();
        for (i, &p) in pts.iter().enumerate() {
            assert_eq!(nearest_point(&set, p), (i, 0.0));
        }
        // 1 degree up from a horizontal node
        let q = Direction::new(pts[2].azimuth(), 1.0).unwrap();
        let (i, d) = nearest_point(&set, q);
        assert_eq!(i, 2);
        assert!((d - 1.0).abs() < 1e-6);
    }
}
