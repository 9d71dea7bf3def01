//! Keyed-sine rendering of a run timeline.

use super::{AudioBuffer, DspError, SynthesisConfig};
use crate::morse::Run;
use std::f64::consts::PI;

/// Render alternating on/off runs to audio.
///
/// Each on-run becomes a sine burst with raised-cosine ramps. Durations are
/// honored between the half-amplitude points of the envelope, so the burst
/// proper runs half a ramp longer at each end and the ramps do not bias the
/// measured timing. The sine phase restarts at every burst, which keeps the
/// sampled edge shape identical from burst to burst. Boundaries land on the
/// nearest sample.
pub fn synthesize(runs: &[Run], config: &SynthesisConfig) -> Result<AudioBuffer, DspError> {
    config.validate()?;
    if runs.is_empty() || !runs.iter().any(|r| r.on) {
        return Err(DspError::EmptySignal);
    }
    if runs.iter().any(|r| r.duration <= 0.0 || r.duration.is_nan()) {
        return Err(DspError::config("every run must have a positive duration"));
    }

    let fs = config.sample_rate as f64;
    let total: f64 = runs.iter().map(|r| r.duration).sum::<f64>() + 2.0 * config.pad;
    let len = (total * fs).round() as usize;
    let mut samples = vec![0.0f32; len];

    let mut cursor = config.pad;
    for run in runs {
        if run.on {
            let duration = run.duration;
            // A burst shorter than the ramp still gets symmetric edges.
            let ramp = config.ramp.min(duration);
            let foot = cursor - ramp / 2.0;
            let burst = duration + ramp;
            let first = (foot * fs).round().max(0.0) as usize;
            let last = ((foot + burst) * fs).round() as usize;
            for (i, sample) in samples.iter_mut().enumerate().take(last.min(len)).skip(first) {
                let t = i as f64 / fs;
                let env = envelope(t - foot, burst, ramp);
                let tone = (2.0 * PI * config.coding_frequency * (t - cursor)).sin();
                *sample += (config.amplitude * env * tone) as f32;
            }
        }
        cursor += run.duration;
    }

    Ok(AudioBuffer { samples, sample_rate: config.sample_rate })
}

/// Raised-cosine envelope over a burst of length `total` with `ramp`-long
/// edges; 0.5 exactly halfway up each ramp.
fn envelope(t: f64, total: f64, ramp: f64) -> f64 {
    if t < 0.0 || t > total {
        0.0
    } else if ramp <= 0.0 {
        1.0
    } else if t < ramp {
        0.5 * (1.0 - (PI * t / ramp).cos())
    } else if t > total - ramp {
        0.5 * (1.0 - (PI * (total - t) / ramp).cos())
    } else {
        1.0
    }
}
