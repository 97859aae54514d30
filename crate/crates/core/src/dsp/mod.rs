//! Signal primitives: FFT convolution, panning, reverb and single-source
//! binaural rendering.

pub(crate) mod render;
mod reverb;

pub use render::{render_source_binaural, speaker_ir_set, RenderedSource, SpeakerIrs};
pub use reverb::{apply_reverb, ReverbBank, ReverbModel, REVERB_MANIFEST, REVERB_NAMES, SYNTHETIC_DECAY_S};

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};

/// FFT size for overlap-add with an IR of `ir_len` taps and `full_len`
/// output samples.
pub fn fft_size(ir_len: usize, full_len: usize) -> usize {
    (4 * ir_len).next_power_of_two().min(full_len.next_power_of_two()).max(1)
}

/// Signals or IRs at most this long are convolved in the time domain.
pub const DIRECT_MAX_LEN: usize = 32;

fn convolve_direct(x: &[f64], h: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; x.len() + h.len() - 1];
    for (i, &a) in x.iter().enumerate() {
        for (yk, &b) in y[i..].iter_mut().zip(h) {
            *yk += a * b;
        }
    }
    y
}

/// Full linear convolution of `signal` with each of `irs`, sharing the
/// forward transforms of the signal blocks. Output `k` has length
/// `signal.len() + irs[k].len() - 1`.
pub fn convolve_many(signal: &[f64], irs: &[&[f64]]) -> Vec<Vec<f64>> {
    let m = irs.iter().map(|h| h.len()).max().unwrap_or(0);
    if signal.is_empty() || irs.iter().any(|h| h.is_empty()) {
        return irs.iter().map(|_| Vec::new()).collect();
    }
    if signal.len().min(m) <= DIRECT_MAX_LEN {
        return irs.iter().map(|h| convolve_direct(signal, h)).collect();
    }
    let full = signal.len() + m - 1;
    let size = fft_size(m, full);
    let block = size - m + 1;
    let mut planner = FftPlanner::<f64>::new();
    let fwd: Arc<dyn Fft<f64>> = planner.plan_fft_forward(size);
    let inv: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(size);
    let mut scratch = vec![Complex::default(); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];

    let spectra: Vec<Vec<Complex<f64>>> = irs
        .iter()
        .map(|h| {
            let mut buf = vec![Complex::default(); size];
            for (b, &x) in buf.iter_mut().zip(h.iter()) {
                b.re = x;
            }
            fwd.process_with_scratch(&mut buf, &mut scratch);
            buf
        })
        .collect();

    let scale = 1.0 / size as f64;
    let mut out: Vec<Vec<f64>> = irs.iter().map(|h| vec![0.0; signal.len() + h.len() - 1]).collect();
    let mut x = vec![Complex::default(); size];
    let mut y = vec![Complex::default(); size];
    for start in (0..signal.len()).step_by(block) {
        let chunk = &signal[start..(start + block).min(signal.len())];
        x.fill(Complex::default());
        for (b, &s) in x.iter_mut().zip(chunk) {
            b.re = s;
        }
        fwd.process_with_scratch(&mut x, &mut scratch);
        for (h, o) in spectra.iter().zip(out.iter_mut()) {
            for ((yk, xk), hk) in y.iter_mut().zip(&x).zip(h) {
                *yk = xk * hk;
            }
            inv.process_with_scratch(&mut y, &mut scratch);
            let n = (chunk.len() + m - 1).min(o.len() - start);
            for (dst, src) in o[start..start + n].iter_mut().zip(&y) {
                *dst += src.re * scale;
            }
        }
    }
    out
}

pub fn convolve_samples(signal: &[f64], ir: &[f64]) -> Vec<f64> {
    convolve_many(signal, &[ir]).pop().expect("one IR in, one output out")
}

/// Convolves a mono signal with a mono IR at the same sample rate.
pub fn convolve(signal: &AudioBuffer, ir: &AudioBuffer) -> Result<AudioBuffer> {
    if signal.sample_rate() != ir.sample_rate() {
        return Err(Error::InvalidArgument(format!(
            "cannot convolve a {} Hz signal with a {} Hz IR",
            signal.sample_rate(),
            ir.sample_rate()
        )));
    }
    if signal.num_channels() != 1 || ir.num_channels() != 1 {
        return Err(Error::InvalidArgument("convolve takes mono buffers".into()));
    }
    if signal.is_empty() || ir.is_empty() {
        return Err(Error::InvalidArgument("convolve needs non-empty buffers".into()));
    }
    AudioBuffer::mono(signal.sample_rate(), convolve_samples(signal.channel(0), ir.channel(0)))
}

/// Constant-power gains `(left, right)` for `pan` in `[-1, 1]`, -1 being
/// hard left. Values outside are clamped.
pub fn pan_constant_power(pan: f64) -> (f64, f64) {
    let p = if pan.is_nan() { 0.0 } else { pan.clamp(-1.0, 1.0) };
    if p != pan {
        log::warn!("pan {pan} clamped to {p}");
    }
    // cos((p + 1) pi / 4) and sin((p + 1) pi / 4)
    let q = std::f64::consts::FRAC_PI_4;
    (((1.0 - p) * q).sin(), ((1.0 + p) * q).sin())
}
