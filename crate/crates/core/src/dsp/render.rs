use super::convolve_many;
use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::interpolation::{blend, plan, InterpolationMode, InterpolationPlan, PlanOptions};
use crate::ir_store::{IrPoint, IrSet};
use crate::layouts::SpeakerLayout;

/// IR pairs at the speakers of a layout, resolved against a measured set.
#[derive(Debug, Clone)]
pub struct SpeakerIrs {
    pub layout: SpeakerLayout,
    /// One point per non-LFE channel, in channel order, at the exact
    /// speaker direction.
    pub set: IrSet,
    /// Layout channel index of each point of `set`.
    pub channels: Vec<usize>,
    /// How each speaker IR was obtained from the measured set.
    pub sources: Vec<InterpolationPlan>,
}

/// Resolves an IR pair for every speaker of `layout`.
///
/// A speaker within the snap threshold of a measured point takes that
/// point's IRs. Otherwise the IRs are interpolated from the full set with
/// `mode`, or, when `allow_interpolation` is false, the speaker is reported
/// as missing.
pub fn speaker_ir_set(
    set: &IrSet,
    layout: &SpeakerLayout,
    mode: InterpolationMode,
    options: &PlanOptions,
    allow_interpolation: bool,
) -> Result<SpeakerIrs> {
    let mut points = Vec::new();
    let mut channels = Vec::new();
    let mut sources = Vec::new();
    for (ch, c) in layout.channels.iter().enumerate() {
        let Some(d) = c.direction() else { continue };
        let (idx, dist) = set.grid().nearest(d);
        if dist > options.snap_threshold_deg && !allow_interpolation {
            return Err(Error::NoDiscreteIr {
                label: c.label.to_string(),
                azimuth: d.azimuth(),
                elevation: d.elevation(),
                distance_deg: dist,
                threshold_deg: options.snap_threshold_deg,
            });
        }
        let p = plan(set, d, mode, options)?;
        if dist > options.snap_threshold_deg {
            log::info!(
                "speaker {} {d}: no measured point within {} deg, interpolated with {} over {:?}",
                c.label,
                options.snap_threshold_deg,
                p.mode_used,
                p.entries
            );
        } else {
            debug_assert_eq!(p.entries, vec![(idx, 1.0)]);
        }
        let ir = blend(set, &p)?;
        points.push(IrPoint::new(d, ir.left, ir.right)?);
        channels.push(ch);
        sources.push(p);
    }
    let speaker_set = IrSet::new(
        format!("{}@{}", set.subject_id(), layout.name),
        set.ir_type(),
        set.sample_rate(),
        points,
    )?;
    Ok(SpeakerIrs {
        layout: layout.clone(),
        set: speaker_set,
        channels,
        sources,
    })
}

/// Stereo output of one rendered source and the plan that produced it.
#[derive(Debug, Clone)]
pub struct RenderedSource {
    pub audio: AudioBuffer,
    /// Indices refer to the measured set, or to the speakers when a layout
    /// was given.
    pub plan: InterpolationPlan,
    /// Layout channel of each plan index when a layout was given.
    pub speaker_channels: Option<Vec<usize>>,
}

/// Renders a mono source at `direction`.
///
/// Without a layout the IR is planned over the whole set. With a layout
/// the source is panned over the layout's speakers: the plan is made over
/// the speaker directions and the speaker IRs are blended with its weights.
pub fn render_source_binaural(
    source: &AudioBuffer,
    direction: Direction,
    set: &IrSet,
    mode: InterpolationMode,
    layout: Option<&SpeakerLayout>,
    options: &PlanOptions,
) -> Result<RenderedSource> {
    match layout {
        None => {
            let (audio, plan) = render_over(source, direction, set, mode, options)?;
            Ok(RenderedSource {
                audio,
                plan,
                speaker_channels: None,
            })
        }
        Some(layout) => {
            let speakers = speaker_ir_set(set, layout, mode, options, true)?;
            render_over_speakers(source, direction, &speakers, mode, options)
        }
    }
}

pub(crate) fn render_over_speakers(
    source: &AudioBuffer,
    direction: Direction,
    speakers: &SpeakerIrs,
    mode: InterpolationMode,
    options: &PlanOptions,
) -> Result<RenderedSource> {
    let (audio, plan) = render_over(source, direction, &speakers.set, mode, options)?;
    Ok(RenderedSource {
        audio,
        plan,
        speaker_channels: Some(speakers.channels.clone()),
    })
}

pub(crate) fn check_source(source: &AudioBuffer, set: &IrSet) -> Result<()> {
    if source.sample_rate() != set.sample_rate() {
        return Err(Error::SampleRateMismatch {
            context: format!("source for IR set {}", set.subject_id()),
            expected: set.sample_rate(),
            actual: source.sample_rate(),
        });
    }
    if source.num_channels() != 1 {
        return Err(Error::InvalidArgument(format!(
            "sources must be mono, got {} channels",
            source.num_channels()
        )));
    }
    if source.is_empty() {
        return Err(Error::InvalidArgument("source is empty".into()));
    }
    Ok(())
}

fn render_over(
    source: &AudioBuffer,
    direction: Direction,
    set: &IrSet,
    mode: InterpolationMode,
    options: &PlanOptions,
) -> Result<(AudioBuffer, InterpolationPlan)> {
    check_source(source, set)?;
    let p = plan(set, direction, mode, options)?;
    let ir = blend(set, &p)?;
    let audio = binaural_convolve(source.channel(0), &ir, set.sample_rate())?;
    Ok((audio, p))
}

/// Convolves a mono signal with both ears of an IR pair.
pub(crate) fn binaural_convolve(signal: &[f64], ir: &IrPoint, sample_rate_hz: u32) -> Result<AudioBuffer> {
    let mut out = convolve_many(signal, &[&ir.left, &ir.right]);
    let right = out.pop().expect("two outputs");
    let left = out.pop().expect("two outputs");
    AudioBuffer::stereo(sample_rate_hz, left, right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::convolve_samples;
    use crate::ir_store::{synthesize_ir_set, Distribution};
    use crate::layouts::get_layout;

    fn dir(az: f64, el: f64) -> Direction {
        Direction::new(az, el).unwrap()
    }

    fn source() -> AudioBuffer {
        AudioBuffer::mono(48000, (0..500).map(|k| ((k * 7919) % 113) as f64 / 113.0 - 0.5).collect()).unwrap()
    }

    fn set() -> IrSet {
        synthesize_ir_set(&Distribution::Lebedev50, 48000, 64, 3).unwrap()
    }

    #[test]
    fn stored_direction_is_plain_convolution() {
        let set = set();
        let src = source();
        let p = set.point(2);
        let r = render_source_binaural(&src, p.direction, &set, InterpolationMode::ThreePoint, None, &PlanOptions::default()).unwrap();
        assert_eq!(r.plan.entries, vec![(2, 1.0)]);
        assert_eq!(r.audio.channel(0), convolve_samples(src.channel(0), &p.left).as_slice());
        assert_eq!(r.audio.channel(1), convolve_samples(src.channel(0), &p.right).as_slice());
    }

    #[test]
    fn speaker_direction_gets_one_speaker() {
        let set = set();
        let layout = get_layout("5.1").unwrap();
        let r = render_source_binaural(&source(), dir(30.0, 0.0), &set, InterpolationMode::Auto, Some(&layout), &PlanOptions::default()).unwrap();
        assert_eq!(r.plan.entries.len(), 1);
        assert_eq!(r.plan.entries[0].1, 1.0);
        let ch = r.speaker_channels.unwrap()[r.plan.entries[0].0];
        assert_eq!(layout.channels[ch].label, "L");
    }

    #[test]
    fn layout_render_is_sum_of_speaker_renders() {
        let set = set();
        let layout = get_layout("5.1").unwrap();
        let src = source();
        let opts = PlanOptions::default();
        let speakers = speaker_ir_set(&set, &layout, InterpolationMode::ThreePoint, &opts, true).unwrap();
        let r = render_source_binaural(&src, dir(15.0, 0.0), &set, InterpolationMode::ThreePoint, Some(&layout), &opts).unwrap();
        assert_eq!(r.plan.entries.len(), 2);
        let mut want = vec![vec![0.0; r.audio.len()]; 2];
        for &(i, w) in &r.plan.entries {
            let p = speakers.set.point(i);
            for (ear, h) in [&p.left, &p.right].into_iter().enumerate() {
                for (o, v) in want[ear].iter_mut().zip(convolve_samples(src.channel(0), h)) {
                    *o += w * v;
                }
            }
        }
        for (ear, want) in want.iter().enumerate() {
            let err = r.audio.channel(ear).iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-9, "{err}");
        }
    }

    #[test]
    fn discrete_only_reports_missing_speaker() {
        let set = set();
        let layout = get_layout("5.1").unwrap();
        let err = speaker_ir_set(&set, &layout, InterpolationMode::Nearest, &PlanOptions::default(), false).unwrap_err();
        assert!(matches!(err, Error::NoDiscreteIr { ref label, .. } if label == "L"), "{err}");
    }

    #[test]
    fn rejects_bad_sources() {
        let set = set();
        let o = PlanOptions::default();
        let m = InterpolationMode::Nearest;
        let wrong_rate = AudioBuffer::mono(44100, vec![1.0]).unwrap();
        assert!(matches!(render_source_binaural(&wrong_rate, dir(0.0, 0.0), &set, m, None, &o), Err(Error::SampleRateMismatch { .. })));
        let empty = AudioBuffer::mono(48000, vec![]).unwrap();
        assert!(render_source_binaural(&empty, dir(0.0, 0.0), &set, m, None, &o).is_err());
    }
}
