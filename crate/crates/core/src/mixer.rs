//! Multi-track binaural and stereo mixing, and surround program rendering.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::audio::AudioBuffer;
use crate::dsp::{
    apply_reverb, pan_constant_power, render_source_binaural, speaker_ir_set, ReverbBank,
};
use crate::dsp::render::{binaural_convolve, check_source, render_over_speakers};
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::interpolation::{InterpolationMode, InterpolationPlan, PlanOptions};
use crate::ir_store::{IrSet, IrType};
use crate::layouts::{get_layout, SpeakerLayout};

/// LFE gain into each ear.
pub const LFE_GAIN: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// One mono source in a mix.
#[derive(Debug, Clone)]
pub struct TrackObject {
    pub name: String,
    pub audio: AudioBuffer,
    /// Linear gain in `[0, 1]`.
    pub level: f64,
    /// Reverb wet amount in `[0, 1]`.
    pub reverb: f64,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl TrackObject {
    pub fn new(name: impl Into<String>, audio: AudioBuffer, level: f64, reverb: f64, azimuth_deg: f64, elevation_deg: f64) -> Self {
        TrackObject {
            name: name.into(),
            audio,
            level,
            reverb,
            azimuth_deg,
            elevation_deg,
        }
    }

    pub fn direction(&self) -> Result<Direction> {
        Direction::new(self.azimuth_deg, self.elevation_deg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalize {
    #[default]
    Off,
    /// Scale the mix so its peak is exactly full scale.
    Peak,
}

impl FromStr for Normalize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" | "none" => Ok(Normalize::Off),
            "peak" => Ok(Normalize::Peak),
            _ => Err(Error::InvalidArgument(format!("unknown normalization {s:?}; expected off or peak"))),
        }
    }
}

impl fmt::Display for Normalize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalize::Off => "off",
            Normalize::Peak => "peak",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixConfig {
    pub subject_id: String,
    pub sample_rate_hz: u32,
    pub ir_type: IrType,
    /// `None` renders every track directly over the measured set.
    pub speaker_layout: Option<String>,
    pub interpolation_mode: InterpolationMode,
    /// 1 to 4.
    pub reverb_type: u8,
    /// Keep the convolution tails; otherwise trim to the longest input.
    pub keep_tail: bool,
    pub normalize: Normalize,
    pub plan_options: PlanOptions,
}

impl MixConfig {
    pub fn new(subject_id: impl Into<String>, sample_rate_hz: u32, ir_type: IrType) -> Self {
        MixConfig {
            subject_id: subject_id.into(),
            sample_rate_hz,
            ir_type,
            speaker_layout: None,
            interpolation_mode: InterpolationMode::Auto,
            reverb_type: 1,
            keep_tail: true,
            normalize: Normalize::Off,
            plan_options: PlanOptions::default(),
        }
    }

    fn layout(&self) -> Result<Option<SpeakerLayout>> {
        self.speaker_layout.as_deref().map(get_layout).transpose()
    }
}

/// How one track or channel was spatialized.
#[derive(Debug, Clone)]
pub struct TrackReport {
    pub name: String,
    pub plan: InterpolationPlan,
    /// Layout channel of each plan index when rendered over a layout.
    pub speaker_channels: Option<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct MixResult {
    pub audio: AudioBuffer,
    pub tracks: Vec<TrackReport>,
    /// Peak of the returned audio.
    pub peak: f64,
    /// Gain applied by normalization (1 when off).
    pub gain: f64,
    /// Any sample beyond full scale.
    pub clipped: bool,
}

fn clamp_unit(what: &str, track: &str, v: f64) -> f64 {
    let c = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
    if c != v {
        log::warn!("track {track}: {what} {v} clamped to {c}");
    }
    c
}

fn check_set(cfg: &MixConfig, set: &IrSet) -> Result<()> {
    if set.subject_id() != cfg.subject_id || set.ir_type() != cfg.ir_type || set.sample_rate() != cfg.sample_rate_hz {
        return Err(Error::SetMismatch(format!(
            "config asks for {} {} at {} Hz but the set is {} {} at {} Hz",
            cfg.subject_id,
            cfg.ir_type,
            cfg.sample_rate_hz,
            set.subject_id(),
            set.ir_type(),
            set.sample_rate()
        )));
    }
    Ok(())
}

fn check_tracks(tracks: &[TrackObject], cfg: &MixConfig, reverbs: &ReverbBank) -> Result<()> {
    if tracks.is_empty() {
        return Err(Error::InvalidArgument("no tracks to mix".into()));
    }
    for t in tracks {
        if t.audio.sample_rate() != cfg.sample_rate_hz {
            return Err(Error::SampleRateMismatch {
                context: format!("track {}", t.name),
                expected: cfg.sample_rate_hz,
                actual: t.audio.sample_rate(),
            });
        }
        if t.audio.num_channels() != 1 {
            return Err(Error::InvalidArgument(format!(
                "track {} has {} channels; tracks must be mono",
                t.name,
                t.audio.num_channels()
            )));
        }
    }
    if reverbs.sample_rate() != cfg.sample_rate_hz {
        return Err(Error::SampleRateMismatch {
            context: "reverb models".into(),
            expected: cfg.sample_rate_hz,
            actual: reverbs.sample_rate(),
        });
    }
    reverbs.get(cfg.reverb_type)?;
    Ok(())
}

/// Level then reverb. Reverb 0 leaves the signal untouched, without a
/// padded tail.
fn pre_process(t: &TrackObject, cfg: &MixConfig, reverbs: &ReverbBank) -> Result<Vec<f64>> {
    let level = clamp_unit("level", &t.name, t.level);
    let amount = clamp_unit("reverb", &t.name, t.reverb);
    let dry: Vec<f64> = t.audio.channel(0).iter().map(|x| x * level).collect();
    if amount == 0.0 {
        return Ok(dry);
    }
    apply_reverb(&dry, reverbs.get(cfg.reverb_type)?, amount)
}

/// Sums stereo buffers aligned at sample 0, in order.
fn sum_stereo<'a>(parts: impl IntoIterator<Item = &'a [Vec<f64>]>) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(), Vec::new()];
    for p in parts {
        for (o, c) in out.iter_mut().zip(p) {
            if o.len() < c.len() {
                o.resize(c.len(), 0.0);
            }
            for (a, b) in o.iter_mut().zip(c) {
                *a += b;
            }
        }
    }
    out
}

fn finish(mut lr: Vec<Vec<f64>>, input_len: usize, cfg: &MixConfig, tracks: Vec<TrackReport>) -> Result<MixResult> {
    if !cfg.keep_tail {
        for c in &mut lr {
            c.truncate(input_len);
        }
    }
    let mut audio = AudioBuffer::new(cfg.sample_rate_hz, lr)?;
    let mut peak = audio.peak();
    let mut gain = 1.0;
    if cfg.normalize == Normalize::Peak && peak > 0.0 {
        gain = 1.0 / peak;
        let scaled = audio.into_channels().into_iter().map(|c| c.into_iter().map(|x| x * gain).collect()).collect();
        audio = AudioBuffer::new(cfg.sample_rate_hz, scaled)?;
        peak = audio.peak();
    }
    let clipped = peak > 1.0;
    if clipped {
        log::warn!("mix peaks at {peak:.4} ({:+.2} dBFS) and will clip", 20.0 * peak.log10());
    }
    Ok(MixResult {
        audio,
        tracks,
        peak,
        gain,
        clipped,
    })
}

/// Mixes mono tracks to binaural stereo.
///
/// Each track is scaled by its level, sent through the configured reverb
/// and rendered at its direction, over the configured layout if any.
/// Tracks are rendered in parallel and summed in order.
pub fn mix_tracks_binaural(tracks: &[TrackObject], cfg: &MixConfig, set: &IrSet, reverbs: &ReverbBank) -> Result<MixResult> {
    check_tracks(tracks, cfg, reverbs)?;
    check_set(cfg, set)?;
    let layout = cfg.layout()?;
    let speakers = layout
        .as_ref()
        .map(|l| speaker_ir_set(set, l, cfg.interpolation_mode, &cfg.plan_options, true))
        .transpose()?;
    let rendered = tracks
        .par_iter()
        .map(|t| {
            let signal = AudioBuffer::mono(cfg.sample_rate_hz, pre_process(t, cfg, reverbs)?)?;
            let d = t.direction()?;
            let r = match &speakers {
                Some(s) => render_over_speakers(&signal, d, s, cfg.interpolation_mode, &cfg.plan_options)?,
                None => render_source_binaural(&signal, d, set, cfg.interpolation_mode, None, &cfg.plan_options)?,
            };
            Ok((
                r.audio,
                TrackReport {
                    name: t.name.clone(),
                    plan: r.plan,
                    speaker_channels: r.speaker_channels,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let lr = sum_stereo(rendered.iter().map(|(a, _)| a.channels()));
    let input_len = tracks.iter().map(|t| t.audio.len()).max().unwrap_or(0);
    finish(lr, input_len, cfg, rendered.into_iter().map(|(_, r)| r).collect())
}

/// Mixes mono tracks to stereo with constant-power panning, `pans[i]`
/// belonging to `tracks[i]`. The IR fields of `cfg` are ignored.
pub fn mix_tracks_stereo(tracks: &[TrackObject], pans: &[f64], cfg: &MixConfig, reverbs: &ReverbBank) -> Result<MixResult> {
    check_tracks(tracks, cfg, reverbs)?;
    if pans.len() != tracks.len() {
        return Err(Error::InvalidArgument(format!("{} pans for {} tracks", pans.len(), tracks.len())));
    }
    let parts = tracks
        .par_iter()
        .zip(pans)
        .map(|(t, &pan)| {
            let s = pre_process(t, cfg, reverbs)?;
            let (gl, gr) = pan_constant_power(pan);
            Ok(vec![s.iter().map(|x| x * gl).collect(), s.iter().map(|x| x * gr).collect()])
        })
        .collect::<Result<Vec<Vec<Vec<f64>>>>>()?;
    let lr = sum_stereo(parts.iter().map(Vec::as_slice));
    let input_len = tracks.iter().map(|t| t.audio.len()).max().unwrap_or(0);
    finish(lr, input_len, cfg, Vec::new())
}

/// Renders a channel-encoded surround program to binaural stereo.
///
/// With equal layouts each speaker channel is convolved with the measured
/// IR at its speaker; a speaker without a measured point within the snap
/// threshold is an error. With different layouts each input channel is a
/// source at its input speaker direction, panned over the output layout's
/// speakers. LFE goes to both ears at -3 dB.
pub fn render_surround_to_binaural(
    program: &AudioBuffer,
    input_layout: &str,
    output_layout: &str,
    cfg: &MixConfig,
    set: &IrSet,
) -> Result<MixResult> {
    let input = get_layout(input_layout)?;
    let output = get_layout(output_layout)?;
    check_set(cfg, set)?;
    if program.num_channels() != input.len() {
        return Err(Error::ChannelCount {
            layout: input.name.to_string(),
            expected: input.len(),
            actual: program.num_channels(),
        });
    }
    if program.sample_rate() != cfg.sample_rate_hz {
        return Err(Error::SampleRateMismatch {
            context: format!("{} program", input.name),
            expected: cfg.sample_rate_hz,
            actual: program.sample_rate(),
        });
    }
    check_source(&AudioBuffer::mono(program.sample_rate(), program.channel(0).to_vec())?, set)?;
    let same = input.name == output.name;
    let mode = if same { InterpolationMode::Nearest } else { cfg.interpolation_mode };
    let speakers = speaker_ir_set(set, &output, mode, &cfg.plan_options, !same)?;

    let rendered = input
        .channels
        .par_iter()
        .enumerate()
        .filter_map(|(ch, c)| c.direction().map(|d| (ch, c, d)))
        .map(|(ch, c, d)| {
            let signal = program.channel(ch);
            if same {
                let k = speakers.channels.iter().position(|&o| o == ch).expect("every speaker resolved");
                let audio = binaural_convolve(signal, speakers.set.point(k), cfg.sample_rate_hz)?;
                let plan = InterpolationPlan {
                    mode_used: InterpolationMode::Nearest,
                    entries: vec![(k, 1.0)],
                    achieved_direction: d,
                    achieved_error_deg: 0.0,
                    warnings: Vec::new(),
                };
                Ok((audio, TrackReport { name: c.label.to_string(), plan, speaker_channels: Some(speakers.channels.clone()) }))
            } else {
                let src = AudioBuffer::mono(cfg.sample_rate_hz, signal.to_vec())?;
                let r = render_over_speakers(&src, d, &speakers, mode, &cfg.plan_options)?;
                log::info!("{} {d}: {} over {:?}", c.label, r.plan.mode_used, r.plan.entries);
                Ok((r.audio, TrackReport { name: c.label.to_string(), plan: r.plan, speaker_channels: r.speaker_channels }))
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let mut lr = sum_stereo(rendered.iter().map(|(a, _)| a.channels()));
    let full = program.len() + set.ir_len() - 1;
    for c in &mut lr {
        c.resize(full, 0.0);
    }
    if let Some(lfe) = input.lfe_index() {
        for c in &mut lr {
            for (o, x) in c.iter_mut().zip(program.channel(lfe)) {
                *o += LFE_GAIN * x;
            }
        }
    }
    finish(lr, program.len(), cfg, rendered.into_iter().map(|(_, r)| r).collect())
}
