//! Zero-phase bandpass filtering.

use super::{AudioBuffer, DspError};
use std::f64::consts::PI;

/// Bandpass to [center*(1-fraction), center*(1+fraction)].
///
/// A peak-normalized biquad resonator is applied forward and then backward,
/// so the magnitude response squares (better than 40 dB an octave out) and
/// the phase cancels: envelope edges stay where they were.
pub fn bandpass(buffer: &AudioBuffer, center: f64, fraction: f64) -> Result<AudioBuffer, DspError> {
    if !(fraction > 0.0 && fraction < 0.5) {
        return Err(DspError::config("band fraction must be in (0, 0.5)"));
    }
    let fs = buffer.sample_rate as f64;
    if !(center > 0.0 && center * (1.0 + fraction) < fs / 2.0) {
        return Err(DspError::config(format!(
            "band around {center} Hz does not fit below the {} Hz Nyquist limit",
            fs / 2.0
        )));
    }

    // Standard audio-cookbook constant-peak bandpass; the -3 dB width per
    // pass is 2*fraction*center, i.e. Q = 1/(2*fraction).
    let omega = 2.0 * PI * center / fs;
    let q = 1.0 / (2.0 * fraction);
    let alpha = omega.sin() / (2.0 * q);
    let a0 = 1.0 + alpha;
    let b0 = alpha / a0;
    let b2 = -alpha / a0;
    let a1 = -2.0 * omega.cos() / a0;
    let a2 = (1.0 - alpha) / a0;

    let mut samples = biquad(&buffer.samples, b0, b2, a1, a2);
    samples.reverse();
    let mut samples = biquad(&samples, b0, b2, a1, a2);
    samples.reverse();

    Ok(AudioBuffer { samples, sample_rate: buffer.sample_rate })
}

/// One pass of the resonator (b1 is always zero for this shape).
fn biquad(x: &[f32], b0: f64, b2: f64, a1: f64, a2: f64) -> Vec<f32> {
    let (mut z1, mut z2) = (0.0f64, 0.0f64);
    x.iter()
        .map(|&xi| {
            let xi = xi as f64;
            let y = b0 * xi + z1;
            z1 = -a1 * y + z2;
            z2 = b2 * xi - a2 * y;
            y as f32
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(hz: f64, seconds: f64) -> AudioBuffer {
        let n = (seconds * 8000.0) as usize;
        let samples = (0..n)
            .map(|i| (0.5 * (2.0 * PI * hz * i as f64 / 8000.0).sin()) as f32)
            .collect();
        AudioBuffer { samples, sample_rate: 8000 }
    }

    // Steady-state RMS, skipping the settling edges.
    fn rms(buffer: &AudioBuffer) -> f64 {
        let n = buffer.samples.len();
        let core = &buffer.samples[n / 4..3 * n / 4];
        (core.iter().map(|s| (s * s) as f64).sum::<f64>() / core.len() as f64).sqrt()
    }

    #[test]
    fn center_tone_passes_unharmed() {
        let input = tone(900.0, 1.0);
        let output = bandpass(&input, 900.0, 0.05).unwrap();
        let loss_db = 20.0 * (rms(&output) / rms(&input)).log10();
        assert!(loss_db.abs() <= 1.0, "loss {loss_db:.2} dB");
    }

    #[test]
    fn octave_out_is_down_40db() {
        for hz in [450.0, 1800.0] {
            let input = tone(hz, 1.0);
            let output = bandpass(&input, 900.0, 0.05).unwrap();
            let drop_db = 20.0 * (rms(&input) / rms(&output)).log10();
            assert!(drop_db >= 40.0, "{hz} Hz only dropped {drop_db:.1} dB");
        }
    }

    #[test]
    fn far_out_tone_vanishes() {
        let input = tone(400.0, 1.0);
        let output = bandpass(&input, 898.0, 0.05).unwrap();
        let drop_db = 20.0 * (rms(&input) / rms(&output)).log10();
        assert!(drop_db >= 40.0, "only dropped {drop_db:.1} dB");
    }

    #[test]
    fn band_limits_are_checked() {
        let input = tone(900.0, 0.1);
        assert!(bandpass(&input, 900.0, 0.0).is_err());
        assert!(bandpass(&input, 900.0, 0.5).is_err());
        assert!(bandpass(&input, 3900.0, 0.05).is_err());
    }
}
