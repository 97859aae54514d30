//! Deterministic synthetic HRIR-like sets for tests and demos.
//!
//! Each pair is a direct impulse per ear with a spherical-head interaural
//! delay, a lateral level difference, an elevation-dependent early echo
//! and a quiet decaying noise tail. Samples are rounded to `f32` so a set
//! survives a float WAV round trip bit for bit.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{IrPoint, IrSet, IrType};
use crate::error::{Error, Result};
use crate::geometry::{lebedev::lebedev50, Direction};

const HEAD_RADIUS_M: f64 = 0.0875;
const SPEED_OF_SOUND_M_S: f64 = 343.0;
const MAX_ILD_DB: f64 = 10.0;
const ONSET: usize = 4;
const MIN_IR_LEN: usize = 32;

/// Where the synthetic set places its measurements.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Lebedev50,
    /// Rings at each elevation with one point every `step_deg` of azimuth,
    /// starting at 0.
    Ring { step_deg: f64, elevations: Vec<f64> },
    Custom(Vec<Direction>),
}

impl Distribution {
    pub fn directions(&self) -> Result<Vec<Direction>> {
        match self {
            Distribution::Lebedev50 => Ok(lebedev50()),
            Distribution::Ring { step_deg, elevations } => {
                if !(step_deg.is_finite() && *step_deg > 0.0 && *step_deg <= 360.0) {
                    return Err(Error::InvalidArgument(format!("ring step {step_deg} must be in (0, 360]")));
                }
                if elevations.is_empty() {
                    return Err(Error::InvalidArgument("ring distribution needs at least one elevation".into()));
                }
                let per_ring = (360.0 / step_deg - 1e-9).ceil() as usize;
                let mut out = Vec::new();
                for &el in elevations {
                    let d = Direction::new(0.0, el)?;
                    if d.is_pole() {
                        out.push(d);
                        continue;
                    }
                    for k in 0..per_ring {
                        out.push(Direction::new(k as f64 * step_deg, el)?);
                    }
                }
                Ok(out)
            }
            Distribution::Custom(points) => Ok(points.clone()),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    /// `lebedev50` or `ring:<step>:<el>,<el>,...`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!(
            "unknown distribution {s:?}; expected lebedev50 or ring:<step_deg>:<el>,<el>,..."
        ));
        let lower = s.trim().to_ascii_lowercase();
        if lower == "lebedev50" {
            return Ok(Distribution::Lebedev50);
        }
        let rest = lower.strip_prefix("ring:").ok_or_else(bad)?;
        let (step, els) = rest.split_once(':').ok_or_else(bad)?;
        let step_deg = step.parse::<f64>().map_err(|_| bad())?;
        let elevations = els
            .split(',')
            .map(|e| e.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Distribution::Ring { step_deg, elevations })
    }
}

/// Woodworth interaural delay in seconds for a source at `d`, positive when
/// the left ear leads.
pub(crate) fn woodworth_itd(d: Direction) -> f64 {
    let lateral = d.to_cartesian().y.clamp(-1.0, 1.0);
    let theta = lateral.abs().asin();
    (HEAD_RADIUS_M / SPEED_OF_SOUND_M_S) * (theta + theta.sin()) * lateral.signum()
}

pub fn synthesize_ir_set(
    distribution: &Distribution,
    sample_rate_hz: u32,
    ir_length_samples: usize,
    seed: u64,
) -> Result<IrSet> {
    if ir_length_samples < MIN_IR_LEN {
        return Err(Error::InvalidArgument(format!(
            "synthetic IRs need at least {MIN_IR_LEN} samples, got {ir_length_samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let directions = distribution.directions()?;
    let points = directions
        .into_iter()
        .map(|d| {
            let (left, right) = synth_pair(d, sample_rate_hz, ir_length_samples, &mut rng);
            IrPoint::new(d, left, right)
        })
        .collect::<Result<Vec<_>>>()?;
    IrSet::new("SYNTH", IrType::Hrir, sample_rate_hz, points)
}

fn synth_pair(d: Direction, rate: u32, len: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let c = d.to_cartesian();
    let itd = woodworth_itd(d);
    let lag = ((itd.abs() * rate as f64).round() as usize).min(len - ONSET - 8);
    let far_gain = 10f64.powf(-MAX_ILD_DB * c.y.abs() / 20.0);
    // left ear is on +y
    let (left_onset, right_onset, left_gain, right_gain) = if itd >= 0.0 {
        (ONSET, ONSET + lag, 1.0, far_gain)
    } else {
        (ONSET + lag, ONSET, far_gain, 1.0)
    };
    let echo_delay = 1 + ((d.elevation() + 90.0) / 180.0 * 5.0).round() as usize;
    let echo_gain = 0.3 * (0.6 + 0.4 * c.x);
    let decay = len as f64 / 6.0;
    let mut ear = |onset: usize, gain: f64| -> Vec<f64> {
        let mut h = vec![0.0; len];
        h[onset] += gain;
        if onset + echo_delay < len {
            h[onset + echo_delay] += gain * echo_gain;
        }
        for (k, x) in h.iter_mut().enumerate().skip(onset + echo_delay + 1) {
            let env = (-((k - onset) as f64) / decay).exp();
            *x += 0.02 * gain * env * rng.random_range(-1.0..1.0);
        }
        h.into_iter().map(|x| x as f32 as f64).collect()
    };
    let left = ear(left_onset, left_gain);
    let right = ear(right_onset, right_gain);
    (left, right)
}
