//! Batch rendering over the cartesian product of parameter axes.
//!
//! ```toml
//! schema = 1
//! seed = 7
//! azimuths = [0, 90]
//! elevations = [0]
//! subject_ids = ["SYNTH"]
//! ir_types = ["HRIR"]
//! layouts = ["none", "5.1"]     # "none" renders directly over the set
//! modes = ["auto"]
//! levels = [1.0]
//! reverb_amounts = [0.0]
//! reverb_types = [1]
//! sample_rates = [48000]
//! sources = ["audio/a.wav"]     # relative to the grid file
//! normalize = "off"             # optional
//! keep_tail = true              # optional
//! encoding = "pcm24"            # optional: pcm16, pcm24 or float32
//! ```
//!
//! Jobs run in the order sources, subjects, IR types, rates, layouts,
//! modes, azimuths, elevations, levels, reverb types, reverb amounts, the
//! last axis varying fastest.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::scene::read_source;
use crate::audio::{write_wav, AudioBuffer, WavEncoding};
use crate::dsp::ReverbBank;
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::interpolation::{InterpolationMode, PlanOptions};
use crate::ir_store::{load_ir_set, IrSet, IrType};
use crate::layouts::get_layout;
use crate::mixer::{mix_tracks_binaural, MixConfig, Normalize, TrackObject};

pub const GRID_SCHEMA: u32 = 1;
pub const DEFAULT_JOB_CAP: usize = 10_000;
pub const DATASET_MANIFEST: &str = "manifest.tsv";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetGrid {
    pub schema: u32,
    #[serde(default)]
    pub seed: u64,
    pub azimuths: Vec<f64>,
    pub elevations: Vec<f64>,
    pub subject_ids: Vec<String>,
    pub ir_types: Vec<String>,
    pub layouts: Vec<String>,
    pub modes: Vec<String>,
    pub levels: Vec<f64>,
    pub reverb_amounts: Vec<f64>,
    pub reverb_types: Vec<u8>,
    pub sample_rates: Vec<u32>,
    pub sources: Vec<PathBuf>,
    #[serde(default = "default_normalize")]
    pub normalize: String,
    #[serde(default = "default_true")]
    pub keep_tail: bool,
    #[serde(default = "default_encoding")]
    pub encoding: String,
}

fn default_normalize() -> String {
    "off".into()
}
fn default_true() -> bool {
    true
}
fn default_encoding() -> String {
    "pcm24".into()
}

pub fn parse_encoding(s: &str) -> Result<WavEncoding> {
    match s.to_ascii_lowercase().as_str() {
        "pcm16" => Ok(WavEncoding::Pcm16),
        "pcm24" => Ok(WavEncoding::Pcm24),
        "float32" | "float" => Ok(WavEncoding::Float32),
        _ => Err(Error::InvalidArgument(format!("unknown encoding {s:?}; expected pcm16, pcm24 or float32"))),
    }
}

/// One combination of grid values.
#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub index: usize,
    pub source: PathBuf,
    pub subject_id: String,
    pub ir_type: IrType,
    pub sample_rate_hz: u32,
    pub layout: Option<String>,
    pub mode: InterpolationMode,
    pub azimuth: f64,
    pub elevation: f64,
    pub level: f64,
    pub reverb_type: u8,
    pub reverb_amount: f64,
}

/// Outcome of one job, as written to the manifest.
#[derive(Debug, Clone)]
pub struct JobRecord {
    pub job: Job,
    pub output: PathBuf,
    pub peak: f64,
    pub clipped: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct DatasetReport {
    pub records: Vec<JobRecord>,
    pub manifest_path: PathBuf,
}

impl DatasetReport {
    pub fn failed(&self) -> usize {
        self.records.iter().filter(|r| r.error.is_some()).count()
    }
}

impl DatasetGrid {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(format!("grid file {}", path.display())),
            _ => Error::io(path, e),
        })?;
        let grid: DatasetGrid = toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        if grid.schema != GRID_SCHEMA {
            return Err(Error::format(path, format!("unsupported grid schema {}", grid.schema)));
        }
        Ok(grid)
    }

    fn axes(&self) -> [(&'static str, usize); 11] {
        [
            ("sources", self.sources.len()),
            ("subject_ids", self.subject_ids.len()),
            ("ir_types", self.ir_types.len()),
            ("sample_rates", self.sample_rates.len()),
            ("layouts", self.layouts.len()),
            ("modes", self.modes.len()),
            ("azimuths", self.azimuths.len()),
            ("elevations", self.elevations.len()),
            ("levels", self.levels.len()),
            ("reverb_types", self.reverb_types.len()),
            ("reverb_amounts", self.reverb_amounts.len()),
        ]
    }

    /// Product of the axis sizes, saturating.
    pub fn job_count(&self) -> usize {
        self.axes().iter().fold(1usize, |n, (_, k)| n.saturating_mul(*k))
    }

    /// Validates every axis value and expands the grid in job order.
    /// Source paths are resolved against `base`.
    pub fn jobs(&self, base: &Path) -> Result<Vec<Job>> {
        if let Some((name, _)) = self.axes().iter().find(|(_, k)| *k == 0) {
            return Err(Error::InvalidArgument(format!("grid axis {name} is empty")));
        }
        let ir_types = self.ir_types.iter().map(|s| s.parse::<IrType>()).collect::<Result<Vec<_>>>()?;
        let modes = self.modes.iter().map(|s| s.parse::<InterpolationMode>()).collect::<Result<Vec<_>>>()?;
        let layouts = self
            .layouts
            .iter()
            .map(|l| if l.eq_ignore_ascii_case("none") { Ok(None) } else { get_layout(l).map(|_| Some(l.clone())) })
            .collect::<Result<Vec<_>>>()?;
        for &a in self.azimuths.iter().chain(&self.elevations) {
            if !a.is_finite() {
                return Err(Error::InvalidArgument(format!("grid angle {a} is not finite")));
            }
        }
        let mut jobs = Vec::with_capacity(self.job_count());
        for source in &self.sources {
            for subject in &self.subject_ids {
                for &ir_type in &ir_types {
                    for &rate in &self.sample_rates {
                        for layout in &layouts {
                            for &mode in &modes {
                                for &az in &self.azimuths {
                                    for &el in &self.elevations {
                                        for &level in &self.levels {
                                            for &rt in &self.reverb_types {
                                                for &amount in &self.reverb_amounts {
                                                    jobs.push(Job {
                                                        index: jobs.len(),
                                                        source: base.join(source),
                                                        subject_id: subject.clone(),
                                                        ir_type,
                                                        sample_rate_hz: rate,
                                                        layout: layout.clone(),
                                                        mode,
                                                        azimuth: az,
                                                        elevation: el,
                                                        level,
                                                        reverb_type: rt,
                                                        reverb_amount: amount,
                                                    });
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(jobs)
    }
}

fn angle_tag(prefix: &str, v: f64, signed: bool) -> String {
    let sign = if signed { if v < 0.0 { "-" } else { "+" } } else { "" };
    let a = v.abs();
    let whole = a.trunc() as u64;
    let frac = a - a.trunc();
    let mut s = format!("{prefix}{sign}{whole:03}");
    if frac != 0.0 {
        let f = format!("{frac}");
        s.push('p');
        s.push_str(f.trim_start_matches("0."));
    }
    s
}

impl Job {
    /// `subject_irtype_rate_layout_mode_azXXX_elYYY_<hash>.wav`, the hash
    /// covering the parameters not spelled out in the name.
    pub fn file_name(&self, seed: u64, normalize: Normalize, keep_tail: bool, encoding: WavEncoding) -> String {
        let d = Direction::new(self.azimuth, self.elevation).expect("angles validated");
        let mut h = Sha256::new();
        h.update(format!(
            "source={}\nlevel={}\nreverb_type={}\nreverb_amount={}\nseed={seed}\nnormalize={normalize}\nkeep_tail={keep_tail}\nencoding={encoding:?}\n",
            self.source.display(),
            self.level,
            self.reverb_type,
            self.reverb_amount
        ));
        let digest = h.finalize();
        let hash: String = digest[..4].iter().map(|b| format!("{b:02x}")).collect();
        format!(
            "{}_{}_{}_{}_{}_{}_{}_{hash}.wav",
            sanitize(&self.subject_id),
            self.ir_type,
            self.sample_rate_hz,
            self.layout.as_deref().unwrap_or("none"),
            self.mode,
            angle_tag("az", d.azimuth(), false),
            angle_tag("el", d.elevation(), true),
        )
    }
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '-' }).collect()
}

pub struct DatasetOptions {
    pub data_root: PathBuf,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub force: bool,
    pub job_cap: usize,
}

type SetKey = (String, IrType, u32);

/// Renders every job of `grid` into `options.out_dir` and writes the
/// manifest. Failed jobs are recorded and do not stop the others.
pub fn run_dataset(grid: &DatasetGrid, grid_dir: &Path, options: &DatasetOptions) -> Result<DatasetReport> {
    let count = grid.job_count();
    log::info!("dataset grid declares {count} jobs");
    if count > options.job_cap && !options.force {
        return Err(Error::InvalidArgument(format!(
            "grid expands to {count} jobs, above the cap of {}; pass --force to run it anyway",
            options.job_cap
        )));
    }
    let jobs = grid.jobs(grid_dir)?;
    let normalize: Normalize = grid.normalize.parse()?;
    let encoding = parse_encoding(&grid.encoding)?;
    std::fs::create_dir_all(&options.out_dir).map_err(|e| Error::io(&options.out_dir, e))?;

    let mut sets: HashMap<SetKey, std::result::Result<IrSet, String>> = HashMap::new();
    let mut reverbs: HashMap<u32, std::result::Result<ReverbBank, String>> = HashMap::new();
    let mut sources: HashMap<PathBuf, std::result::Result<AudioBuffer, String>> = HashMap::new();
    for j in &jobs {
        sets.entry((j.subject_id.clone(), j.ir_type, j.sample_rate_hz))
            .or_insert_with(|| load_ir_set(&options.data_root, &j.subject_id, j.ir_type, j.sample_rate_hz).map_err(|e| e.to_string()));
        reverbs
            .entry(j.sample_rate_hz)
            .or_insert_with(|| ReverbBank::load(&options.data_root, j.sample_rate_hz, grid.seed).map_err(|e| e.to_string()));
        sources.entry(j.source.clone()).or_insert_with(|| read_source(&j.source).map_err(|e| e.to_string()));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))?;
    let records: Vec<JobRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let name = job.file_name(grid.seed, normalize, grid.keep_tail, encoding);
                let output = options.out_dir.join(&name);
                let outcome = (|| -> std::result::Result<(f64, bool), String> {
                    let set = sets[&(job.subject_id.clone(), job.ir_type, job.sample_rate_hz)].as_ref()?;
                    let bank = reverbs[&job.sample_rate_hz].as_ref()?;
                    let audio = sources[&job.source].as_ref()?;
                    let cfg = MixConfig {
                        subject_id: job.subject_id.clone(),
                        sample_rate_hz: job.sample_rate_hz,
                        ir_type: job.ir_type,
                        speaker_layout: job.layout.clone(),
                        interpolation_mode: job.mode,
                        reverb_type: job.reverb_type,
                        keep_tail: grid.keep_tail,
                        normalize,
                        plan_options: PlanOptions::default(),
                    };
                    let track = TrackObject::new(
                        job.source.display().to_string(),
                        audio.clone(),
                        job.level,
                        job.reverb_amount,
                        job.azimuth,
                        job.elevation,
                    );
                    let mix = mix_tracks_binaural(&[track], &cfg, set, bank).map_err(|e| e.to_string())?;
                    write_wav(&output, &mix.audio, encoding).map_err(|e| e.to_string())?;
                    Ok((mix.peak, mix.clipped))
                })();
                match outcome {
                    Ok((peak, clipped)) => JobRecord { job: job.clone(), output: PathBuf::from(name), peak, clipped, error: None },
                    Err(e) => {
                        log::error!("job {} failed: {e}", job.index);
                        JobRecord { job: job.clone(), output: PathBuf::new(), peak: 0.0, clipped: false, error: Some(e) }
                    }
                }
            })
            .collect()
    });

    let manifest_path = options.out_dir.join(DATASET_MANIFEST);
    std::fs::write(&manifest_path, manifest_text(&records, grid.seed)).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(DatasetReport { records, manifest_path })
}

pub const MANIFEST_COLUMNS: [&str; 19] = [
    "job", "source", "subject", "ir_type", "rate", "layout", "mode", "azimuth", "elevation", "level",
    "reverb_type", "reverb_amount", "seed", "output", "peak", "clipped", "status", "error", "tags",
];

fn manifest_text(records: &[JobRecord], seed: u64) -> String {
    let mut s = MANIFEST_COLUMNS.join("\t");
    s.push('\n');
    for r in records {
        let j = &r.job;
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{seed}\t{}\t{}\t{}\t{}\t{}\t",
            j.index,
            j.source.display(),
            j.subject_id,
            j.ir_type,
            j.sample_rate_hz,
            j.layout.as_deref().unwrap_or("none"),
            j.mode,
            j.azimuth,
            j.elevation,
            j.level,
            j.reverb_type,
            j.reverb_amount,
            r.output.display(),
            r.peak,
            r.clipped,
            if r.error.is_some() { "failed" } else { "ok" },
            r.error.as_deref().unwrap_or("").replace(['\t', '\n'], " "),
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> DatasetGrid {
        toml::from_str(
            r#"
schema = 1
azimuths = [0, 90, -30.5]
elevations = [0, 45]
subject_ids = ["A", "B"]
ir_types = ["HRIR"]
layouts = ["none"]
modes = ["auto"]
levels = [1.0]
reverb_amounts = [0.0]
reverb_types = [1]
sample_rates = [48000]
sources = ["x.wav"]
"#,
        )
        .unwrap()
    }

    #[test]
    fn expansion_order_and_count() {
        let g = grid();
        assert_eq!(g.job_count(), 12);
        let jobs = g.jobs(Path::new("/base")).unwrap();
        assert_eq!(jobs.len(), 12);
        assert_eq!((jobs[0].subject_id.as_str(), jobs[0].azimuth, jobs[0].elevation), ("A", 0.0, 0.0));
        assert_eq!((jobs[1].azimuth, jobs[1].elevation), (0.0, 45.0));
        assert_eq!(jobs[6].subject_id, "B");
        assert_eq!(jobs[0].source, PathBuf::from("/base/x.wav"));
    }

    #[test]
    fn empty_axis_and_bad_values_are_rejected() {
        let mut g = grid();
        g.levels.clear();
        assert!(g.jobs(Path::new(".")).unwrap_err().to_string().contains("levels"));
        let mut g = grid();
        g.layouts = vec!["6.1".into()];
        assert!(matches!(g.jobs(Path::new(".")), Err(Error::UnsupportedLayout { .. })));
    }

    #[test]
    fn file_names_encode_parameters() {
        let jobs = grid().jobs(Path::new(".")).unwrap();
        let n = jobs[4].file_name(0, Normalize::Off, true, WavEncoding::Pcm24);
        assert!(n.starts_with("A_HRIR_48000_none_auto_az329p5_el+000_"), "{n}");
        assert!(n.ends_with(".wav"));
        assert_ne!(n, jobs[4].file_name(1, Normalize::Off, true, WavEncoding::Pcm24));
        let names: std::collections::HashSet<_> = jobs.iter().map(|j| j.file_name(0, Normalize::Off, true, WavEncoding::Pcm24)).collect();
        assert_eq!(names.len(), jobs.len());
    }
}
