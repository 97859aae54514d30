//! Sample buffers and WAV file I/O.
//!
//! Samples are held as `f64` in linear full-scale units. WAV files may be
//! 16- or 24-bit PCM or 32-bit IEEE float, little-endian.

use std::path::Path;

use crate::error::{Error, Result};

/// One or more equal-length channels at a common sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    sample_rate_hz: u32,
    channels: Vec<Vec<f64>>,
}

impl AudioBuffer {
    pub fn new(sample_rate_hz: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidArgument("sample rate must be positive".into()));
        }
        if channels.is_empty() {
            return Err(Error::InvalidArgument("audio buffer needs at least one channel".into()));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::InvalidArgument("channel lengths differ".into()));
        }
        if channels.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("audio contains non-finite samples".into()));
        }
        Ok(AudioBuffer {
            sample_rate_hz,
            channels,
        })
    }

    pub fn mono(sample_rate_hz: u32, samples: Vec<f64>) -> Result<Self> {
        Self::new(sample_rate_hz, vec![samples])
    }

    pub fn stereo(sample_rate_hz: u32, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        Self::new(sample_rate_hz, vec![left, right])
    }

    pub fn silent(sample_rate_hz: u32, channels: usize, len: usize) -> Self {
        AudioBuffer {
            sample_rate_hz,
            channels: vec![vec![0.0; len]; channels.max(1)],
        }
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Frames per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.channels[i]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    pub fn peak(&self) -> f64 {
        self.channels
            .iter()
            .flatten()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Averages all channels into one.
    pub fn to_mono(&self) -> AudioBuffer {
        if self.channels.len() == 1 {
            return self.clone();
        }
        let n = self.channels.len() as f64;
        let mixed = (0..self.len())
            .map(|k| self.channels.iter().map(|c| c[k]).sum::<f64>() / n)
            .collect();
        AudioBuffer {
            sample_rate_hz: self.sample_rate_hz,
            channels: vec![mixed],
        }
    }
}

/// Sample encoding for written WAV files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WavEncoding {
    Pcm16,
    #[default]
    Pcm24,
    Float32,
}

fn wav_err(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::format(path, other.to_string()),
    }
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::NotFound(format!("audio file {}", path.display())));
    }
    let reader = hound::WavReader::open(path).map_err(|e| wav_err(path, e))?;
    let spec = reader.spec();
    let n_ch = spec.channels as usize;
    if n_ch == 0 {
        return Err(Error::format(path, "zero channels"));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| wav_err(path, e))?,
        (hound::SampleFormat::Int, bits @ (16 | 24)) => {
            let scale = (1i64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| wav_err(path, e))?
        }
        (fmt, bits) => {
            return Err(Error::format(
                path,
                format!("unsupported encoding {fmt:?} {bits}-bit; expected 16/24-bit PCM or 32-bit float"),
            ))
        }
    };
    let frames = interleaved.len() / n_ch;
    let mut channels = vec![Vec::with_capacity(frames); n_ch];
    for frame in interleaved.chunks_exact(n_ch) {
        for (c, &x) in channels.iter_mut().zip(frame) {
            c.push(x);
        }
    }
    AudioBuffer::new(spec.sample_rate, channels).map_err(|e| Error::format(path, e.to_string()))
}

/// Writes `audio` to `path`. PCM output saturates at full scale.
pub fn write_wav(path: impl AsRef<Path>, audio: &AudioBuffer, encoding: WavEncoding) -> Result<()> {
    let path = path.as_ref();
    let (bits, format) = match encoding {
        WavEncoding::Pcm16 => (16, hound::SampleFormat::Int),
        WavEncoding::Pcm24 => (24, hound::SampleFormat::Int),
        WavEncoding::Float32 => (32, hound::SampleFormat::Float),
    };
    let spec = hound::WavSpec {
        channels: audio.num_channels() as u16,
        sample_rate: audio.sample_rate(),
        bits_per_sample: bits,
        sample_format: format,
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(|e| wav_err(path, e))?;
    let scale = (1i64 << (bits - 1)) as f64;
    let (lo, hi) = (-scale, scale - 1.0);
    for k in 0..audio.len() {
        for c in audio.channels() {
            let r = match encoding {
                WavEncoding::Float32 => w.write_sample(c[k] as f32),
                _ => w.write_sample((c[k] * scale).round().clamp(lo, hi) as i32),
            };
            r.map_err(|e| wav_err(path, e))?;
        }
    }
    w.finalize().map_err(|e| wav_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_and_non_finite() {
        assert!(AudioBuffer::new(48000, vec![vec![0.0; 3], vec![0.0; 2]]).is_err());
        assert!(AudioBuffer::mono(48000, vec![f64::NAN]).is_err());
        assert!(AudioBuffer::new(48000, vec![]).is_err());
        assert!(AudioBuffer::mono(0, vec![0.0]).is_err());
    }

    #[test]
    fn float_wav_is_exact_for_f32_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        let left: Vec<f64> = (0..100).map(|i| ((i as f32) * 0.013).sin() as f64).collect();
        let right: Vec<f64> = left.iter().map(|x| -x * 0.5).collect();
        let a = AudioBuffer::stereo(44100, left, right).unwrap();
        write_wav(&p, &a, WavEncoding::Float32).unwrap();
        assert_eq!(read_wav(&p).unwrap(), a);
    }

    #[test]
    fn pcm24_round_trips_grid_values_and_saturates() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.wav");
        let step = 1.0 / (1 << 23) as f64;
        let a = AudioBuffer::mono(48000, vec![0.0, step, -1.0, 0.5, 1.5]).unwrap();
        write_wav(&p, &a, WavEncoding::Pcm24).unwrap();
        let b = read_wav(&p).unwrap();
        assert_eq!(&b.channel(0)[..4], &a.channel(0)[..4]);
        assert_eq!(b.channel(0)[4], 1.0 - step);
    }

    #[test]
    fn missing_file_is_not_found() {
        assert!(matches!(read_wav("/nonexistent/x.wav"), Err(Error::NotFound(_))));
    }
}
