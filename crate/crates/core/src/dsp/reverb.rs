use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::convolve_samples;
use crate::audio::read_wav;
use crate::error::{Error, Result};

/// Names of reverb models 1 to 4.
pub const REVERB_NAMES: [&str; 4] = ["Theatre", "Office", "Small Room", "Meeting Room"];
/// Decay to -60 dB of the built-in stand-in models, in seconds.
pub const SYNTHETIC_DECAY_S: [f64; 4] = [2.0, 0.5, 0.3, 0.7];
/// Relative to the data root.
pub const REVERB_MANIFEST: &str = "reverb/manifest.tsv";

/// A mono room response with unit energy.
#[derive(Debug, Clone, PartialEq)]
pub struct ReverbModel {
    id: u8,
    sample_rate_hz: u32,
    ir: Vec<f64>,
}

fn check_id(id: u8) -> Result<()> {
    if (1..=4).contains(&id) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "reverb type {id} unknown; expected 1 (Theatre), 2 (Office), 3 (Small Room) or 4 (Meeting Room)"
        )))
    }
}

impl ReverbModel {
    /// Wraps `ir`, scaling it so that its squared samples sum to one.
    pub fn new(id: u8, sample_rate_hz: u32, ir: Vec<f64>) -> Result<Self> {
        check_id(id)?;
        let energy: f64 = ir.iter().map(|x| x * x).sum();
        if !(energy > 0.0 && energy.is_finite()) {
            return Err(Error::InvalidArgument(format!("reverb IR for type {id} has no energy")));
        }
        let norm = energy.sqrt();
        Ok(ReverbModel {
            id,
            sample_rate_hz,
            ir: ir.into_iter().map(|x| x / norm).collect(),
        })
    }

    /// Exponentially decaying seeded noise standing in for a measured room.
    pub fn synthetic(id: u8, sample_rate_hz: u32, seed: u64) -> Result<Self> {
        check_id(id)?;
        let t60 = SYNTHETIC_DECAY_S[id as usize - 1];
        let len = (t60 * sample_rate_hz as f64).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let ir = (0..len)
            .map(|k| {
                let t = k as f64 / sample_rate_hz as f64;
                10f64.powf(-3.0 * t / t60) * rng.random_range(-1.0..1.0)
            })
            .collect();
        Self::new(id, sample_rate_hz, ir)
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn name(&self) -> &'static str {
        REVERB_NAMES[self.id as usize - 1]
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn ir(&self) -> &[f64] {
        &self.ir
    }
}

/// The four reverb models at one sample rate.
#[derive(Debug, Clone)]
pub struct ReverbBank {
    models: Vec<ReverbModel>,
}

impl ReverbBank {
    pub fn synthetic(sample_rate_hz: u32, seed: u64) -> Result<Self> {
        let models = (1..=4)
            .map(|id| ReverbModel::synthetic(id, sample_rate_hz, seed))
            .collect::<Result<_>>()?;
        Ok(ReverbBank { models })
    }

    /// Reads `<root>/reverb/manifest.tsv` when present. Rows are
    /// `id<TAB>path` with paths relative to the manifest; `#` starts a
    /// comment. Ids without a row use the synthetic stand-in.
    pub fn load(data_root: impl AsRef<Path>, sample_rate_hz: u32, seed: u64) -> Result<Self> {
        let manifest = data_root.as_ref().join(REVERB_MANIFEST);
        let mut bank = Self::synthetic(sample_rate_hz, seed)?;
        if !manifest.exists() {
            log::info!("no {}; using synthetic reverbs", manifest.display());
            return Ok(bank);
        }
        let text = std::fs::read_to_string(&manifest).map_err(|e| Error::io(&manifest, e))?;
        let dir = manifest.parent().expect("manifest path has a parent");
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("schema=") {
                continue;
            }
            let bad = |why: String| Error::format(&manifest, format!("line {}: {why}", n + 1));
            let (id, path) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected id and path separated by a tab".into()))?;
            let id: u8 = id.trim().parse().map_err(|_| bad(format!("bad reverb id {id:?}")))?;
            check_id(id).map_err(|e| bad(e.to_string()))?;
            let wav = dir.join(path.trim());
            let audio = read_wav(&wav)?;
            if audio.sample_rate() != sample_rate_hz {
                return Err(Error::SampleRateMismatch {
                    context: format!("reverb IR {}", wav.display()),
                    expected: sample_rate_hz,
                    actual: audio.sample_rate(),
                });
            }
            if audio.num_channels() > 1 {
                log::warn!("reverb IR {} has {} channels; averaging to mono", wav.display(), audio.num_channels());
            }
            let mono = audio.to_mono().into_channels().remove(0);
            bank.models[id as usize - 1] = ReverbModel::new(id, sample_rate_hz, mono).map_err(|e| bad(e.to_string()))?;
        }
        Ok(bank)
    }

    pub fn get(&self, id: u8) -> Result<&ReverbModel> {
        check_id(id)?;
        Ok(&self.models[id as usize - 1])
    }

    pub fn sample_rate(&self) -> u32 {
        self.models[0].sample_rate_hz
    }
}

/// `(1 - amount) * dry + amount * (dry * reverb)`, with the dry signal
/// zero-padded to the full convolution length.
pub fn apply_reverb(signal: &[f64], model: &ReverbModel, amount: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&amount) {
        return Err(Error::InvalidArgument(format!("reverb amount {amount} outside [0, 1]")));
    }
    if signal.is_empty() {
        return Ok(Vec::new());
    }
    let full = signal.len() + model.ir.len() - 1;
    if amount == 0.0 {
        let mut out = signal.to_vec();
        out.resize(full, 0.0);
        return Ok(out);
    }
    let mut wet = convolve_samples(signal, &model.ir);
    if amount == 1.0 {
        return Ok(wet);
    }
    for (w, &d) in wet.iter_mut().zip(signal) {
        *w = (1.0 - amount) * d + amount * *w;
    }
    for w in wet.iter_mut().skip(signal.len()) {
        *w *= amount;
    }
    Ok(wet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{write_wav, AudioBuffer, WavEncoding};

    #[test]
    fn synthetic_models_have_unit_energy_and_names() {
        let bank = ReverbBank::synthetic(48000, 5).unwrap();
        for id in 1..=4 {
            let m = bank.get(id).unwrap();
            let e: f64 = m.ir().iter().map(|x| x * x).sum();
            assert!((e - 1.0).abs() < 1e-12);
            assert_eq!(m.ir().len(), (SYNTHETIC_DECAY_S[id as usize - 1] * 48000.0) as usize);
        }
        assert_eq!(bank.get(3).unwrap().name(), "Small Room");
        assert!(bank.get(0).is_err() && bank.get(5).is_err());
        assert_eq!(ReverbModel::synthetic(2, 48000, 5).unwrap(), *bank.get(2).unwrap());
    }

    #[test]
    fn wet_dry_extremes_and_midpoint() {
        let model = ReverbModel::new(2, 48000, vec![0.5, -0.25, 0.125, 0.3]).unwrap();
        let x = vec![1.0, -0.5, 0.25, 0.0, 0.75];
        let dry = apply_reverb(&x, &model, 0.0).unwrap();
        assert_eq!(dry.len(), 8);
        assert_eq!(&dry[..5], x.as_slice());
        assert!(dry[5..].iter().all(|&v| v == 0.0));
        let wet = apply_reverb(&x, &model, 1.0).unwrap();
        assert_eq!(wet, convolve_samples(&x, model.ir()));
        let half = apply_reverb(&x, &model, 0.5).unwrap();
        for k in 0..8 {
            assert!((half[k] - 0.5 * (dry[k] + wet[k])).abs() < 1e-12);
        }
        assert!(apply_reverb(&x, &model, 1.5).is_err());
    }

    #[test]
    fn manifest_overrides_selected_ids() {
        let root = tempfile::tempdir().unwrap();
        let dir = root.path().join("reverb");
        std::fs::create_dir_all(&dir).unwrap();
        write_wav(dir.join("hall.wav"), &AudioBuffer::mono(48000, vec![0.0, 3.0, 4.0]).unwrap(), WavEncoding::Float32).unwrap();
        std::fs::write(dir.join("manifest.tsv"), "schema=1\n# id\tpath\n1\thall.wav\n").unwrap();
        let bank = ReverbBank::load(root.path(), 48000, 9).unwrap();
        assert_eq!(bank.get(1).unwrap().ir(), &[0.0, 0.6, 0.8]);
        assert_eq!(bank.get(2).unwrap(), &ReverbModel::synthetic(2, 48000, 9).unwrap());
        assert!(matches!(ReverbBank::load(root.path(), 44100, 9), Err(Error::SampleRateMismatch { .. })));
    }
}
