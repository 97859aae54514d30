//! Mix scene files.
//!
//! ```toml
//! schema = 1
//!
//! [config]
//! subject_id = "SYNTH"
//! sample_rate_hz = 48000
//! ir_type = "HRIR"
//! speaker_layout = "5.1"        # optional; omit for a direct render
//! interpolation_mode = "auto"
//! reverb_type = 1
//! keep_tail = true
//! normalize = "off"             # or "peak"
//! snap_threshold_deg = 2.0
//!
//! [[tracks]]
//! name = "vocals"
//! audio = "audio/vocals.wav"    # relative to the scene file
//! level = 0.8
//! reverb = 0.2
//! azimuth_deg = 0
//! elevation_deg = 0
//! pan = 0.0                     # used only by the stereo mixer
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::audio::{read_wav, AudioBuffer};
use crate::error::{Error, Result};
use crate::interpolation::{InterpolationMode, PlanOptions, DEFAULT_SNAP_DEG};
use crate::ir_store::IrType;
use crate::mixer::{MixConfig, Normalize, TrackObject};

pub const SCENE_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub schema: u32,
    pub config: SceneConfig,
    pub tracks: Vec<SceneTrack>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub subject_id: String,
    pub sample_rate_hz: u32,
    pub ir_type: String,
    pub speaker_layout: Option<String>,
    #[serde(default = "default_mode")]
    pub interpolation_mode: String,
    #[serde(default = "default_reverb_type")]
    pub reverb_type: u8,
    #[serde(default = "default_true")]
    pub keep_tail: bool,
    #[serde(default = "default_normalize")]
    pub normalize: String,
    #[serde(default = "default_snap")]
    pub snap_threshold_deg: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneTrack {
    pub name: String,
    pub audio: PathBuf,
    #[serde(default = "default_one")]
    pub level: f64,
    #[serde(default)]
    pub reverb: f64,
    #[serde(default)]
    pub azimuth_deg: f64,
    #[serde(default)]
    pub elevation_deg: f64,
    #[serde(default)]
    pub pan: f64,
}

fn default_mode() -> String {
    "auto".into()
}
fn default_reverb_type() -> u8 {
    1
}
fn default_true() -> bool {
    true
}
fn default_normalize() -> String {
    "off".into()
}
fn default_snap() -> f64 {
    DEFAULT_SNAP_DEG
}
fn default_one() -> f64 {
    1.0
}

/// A parsed scene with its audio loaded.
#[derive(Debug, Clone)]
pub struct Scene {
    pub config: MixConfig,
    pub tracks: Vec<TrackObject>,
    pub pans: Vec<f64>,
}

impl SceneFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::NotFound(format!("scene file {}", path.display())),
            _ => Error::io(path, e),
        })?;
        let scene: SceneFile = toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        if scene.schema != SCENE_SCHEMA {
            return Err(Error::format(path, format!("unsupported scene schema {}", scene.schema)));
        }
        Ok(scene)
    }

    pub fn mix_config(&self) -> Result<MixConfig> {
        let c = &self.config;
        Ok(MixConfig {
            subject_id: c.subject_id.clone(),
            sample_rate_hz: c.sample_rate_hz,
            ir_type: c.ir_type.parse::<IrType>()?,
            speaker_layout: c.speaker_layout.clone().filter(|l| !l.eq_ignore_ascii_case("none")),
            interpolation_mode: c.interpolation_mode.parse::<InterpolationMode>()?,
            reverb_type: c.reverb_type,
            keep_tail: c.keep_tail,
            normalize: c.normalize.parse::<Normalize>()?,
            plan_options: PlanOptions {
                snap_threshold_deg: c.snap_threshold_deg,
                ..PlanOptions::default()
            },
        })
    }
}

/// Reads a WAV as a mono source, averaging multichannel files.
pub fn read_source(path: &Path) -> Result<AudioBuffer> {
    let audio = read_wav(path)?;
    if audio.num_channels() > 1 {
        log::warn!("{} has {} channels; averaging to mono", path.display(), audio.num_channels());
    }
    Ok(audio.to_mono())
}

/// Loads a scene file and every track's audio.
pub fn load_scene(path: &Path) -> Result<Scene> {
    let file = SceneFile::read(path)?;
    let config = file.mix_config()?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut tracks = Vec::with_capacity(file.tracks.len());
    let mut pans = Vec::with_capacity(file.tracks.len());
    for t in &file.tracks {
        let audio = read_source(&base.join(&t.audio))?;
        tracks.push(TrackObject::new(&t.name, audio, t.level, t.reverb, t.azimuth_deg, t.elevation_deg));
        pans.push(t.pan);
    }
    Ok(Scene { config, tracks, pans })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_defaults() {
        let text = r#"
schema = 1
[config]
subject_id = "H3"
sample_rate_hz = 48000
ir_type = "brir"
[[tracks]]
name = "a"
audio = "a.wav"
azimuth_deg = -45
"#;
        let f: SceneFile = toml::from_str(text).unwrap();
        let c = f.mix_config().unwrap();
        assert_eq!(c.ir_type, IrType::Brir);
        assert_eq!(c.interpolation_mode, InterpolationMode::Auto);
        assert_eq!(c.speaker_layout, None);
        assert_eq!(f.tracks[0].level, 1.0);
        assert_eq!(f.tracks[0].azimuth_deg, -45.0);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = "schema = 1\n[config]\nsubject_id = \"H3\"\nsample_rate_hz = 48000\nir_type = \"HRIR\"\nlayout = \"5.1\"\ntracks = []\n";
        assert!(toml::from_str::<SceneFile>(text).is_err());
    }
}
