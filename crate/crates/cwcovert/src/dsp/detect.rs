//! Sliding-window envelope detection with half-amplitude edge refinement.

use super::{AudioBuffer, DetectorConfig, DspError};
use crate::morse::Run;

/// Recover alternating on/off runs from (filtered) audio.
///
/// The rectified signal is scanned in windows of `window_cycles` carrier
/// cycles: a window turns the detector on when any sample reaches
/// `threshold_factor` times the mean absolute level, and off again only when
/// every sample drops below the hysteresis fraction of that. Each detected
/// burst is then trimmed to its half-amplitude points, which pins edges to
/// the sample grid instead of the window grid; durations come out accurate
/// to about a carrier half-cycle regardless of window width. Leading and
/// trailing silence are dropped, so the sequence starts and ends keyed-down.
pub fn extract_runs(
    buffer: &AudioBuffer,
    center: f64,
    config: &DetectorConfig,
) -> Result<Vec<Run>, DspError> {
    let edges = burst_edges(buffer, center, config)?;
    let fs = buffer.sample_rate as f64;
    let mut runs = Vec::with_capacity(2 * edges.len() - 1);
    for (k, &(a, b)) in edges.iter().enumerate() {
        if k > 0 {
            let prev_b = edges[k - 1].1;
            runs.push(Run::space((a - prev_b - 1) as f64 / fs));
        }
        runs.push(Run::mark((b - a + 1) as f64 / fs));
    }
    Ok(runs)
}

/// Absolute sample spans (first, last) of every detected burst, inclusive on
/// both ends. This is `extract_runs` before the conversion to durations; the
/// channel simulator warps time around these anchors.
pub(crate) fn burst_edges(
    buffer: &AudioBuffer,
    center: f64,
    config: &DetectorConfig,
) -> Result<Vec<(usize, usize)>, DspError> {
    config.validate()?;
    if center.is_nan() || center <= 0.0 {
        return Err(DspError::config("center frequency must be positive"));
    }
    let x = &buffer.samples;
    let fs = buffer.sample_rate as f64;
    let mean_abs = buffer.mean_abs();
    if x.is_empty() || mean_abs <= 0.0 {
        return Err(DspError::NoSignal);
    }
    let window = (config.window_cycles as f64 * fs / center).round().max(1.0) as usize;
    let t_on = config.threshold_factor * mean_abs;
    let t_off = config.hysteresis * t_on;

    // Window-level on/off spans, in sample indices.
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut state = false;
    let mut start = 0usize;
    for (w, chunk) in x.chunks(window).enumerate() {
        let peak = chunk.iter().map(|s| s.abs() as f64).fold(0.0, f64::max);
        let next = if state { peak >= t_off } else { peak >= t_on };
        if next && !state {
            start = w * window;
        }
        if !next && state {
            spans.push((start, w * window));
        }
        state = next;
    }
    if state {
        spans.push((start, x.len()));
    }
    if spans.is_empty() {
        return Err(DspError::NoSignal);
    }

    // Half-amplitude edges per burst, measured on the tone envelope and
    // relative to that burst's own peak. The crossing can sit a little
    // outside the windowed span, so the edges may walk outward over
    // contiguous above-half samples.
    let quarter = fs / (4.0 * center);
    let env = |i: usize| tone_envelope_at(x, i, quarter);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (k, &(s0, s1)) in spans.iter().enumerate() {
        let peak = (s0..s1).map(env).fold(0.0f32, f32::max);
        let half = 0.5 * peak;
        let mut a = (s0..s1).find(|&i| env(i) >= half).unwrap();
        let mut b = (s0..s1).rev().find(|&i| env(i) >= half).unwrap();
        let lo = edges.last().map_or(0, |&(_, prev_b)| prev_b + 1);
        let hi = spans.get(k + 1).map_or(x.len(), |&(next_s0, _)| next_s0);
        while a > lo && env(a - 1) >= half {
            a -= 1;
        }
        while b + 1 < hi && env(b + 1) >= half {
            b += 1;
        }
        edges.push((a, b));
    }
    Ok(edges)
}

/// Envelope of a tone at one sample: the magnitude of the analytic signal.
/// The quadrature part is sampled a quarter cycle away on both sides, which
/// cancels the envelope's own slope to second order, so half-amplitude
/// crossings stay put even on the ramps.
pub(crate) fn tone_envelope_at(x: &[f32], i: usize, quarter: f64) -> f32 {
    let q = (interpolate(x, i as f64 + quarter) - interpolate(x, i as f64 - quarter)) / 2.0;
    let xi = x[i] as f64;
    (xi * xi + q * q).sqrt() as f32
}

/// Four-point cubic interpolation, zero outside the buffer.
fn interpolate(x: &[f32], t: f64) -> f64 {
    let i = t.floor() as isize;
    let u = t - i as f64;
    let sample = |j: isize| -> f64 {
        if j < 0 || j as usize >= x.len() {
            0.0
        } else {
            x[j as usize] as f64
        }
    };
    let (p0, p1, p2, p3) = (sample(i - 1), sample(i), sample(i + 1), sample(i + 2));
    0.5 * (2.0 * p1
        + (p2 - p0) * u
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u * u
        + (3.0 * (p1 - p2) + p3 - p0) * u * u * u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{synthesize, SynthesisConfig};
    use crate::morse::{elements_to_nominal_runs, text_to_elements};

    fn loopback_runs(text: &str, window_cycles: u32) -> Vec<Run> {
        let parsed = text_to_elements(text).unwrap();
        let runs = elements_to_nominal_runs(&parsed, 0.060);
        let audio = synthesize(&runs, &SynthesisConfig::default()).unwrap();
        let config = DetectorConfig { window_cycles, ..Default::default() };
        extract_runs(&audio, 900.0, &config).unwrap()
    }

    #[test]
    fn clean_dot_lands_within_two_windows()  {
        let audio = synthesize(&[Run::mark(0.060)], &SynthesisConfig::default()).unwrap();
        let got = extract_runs(&audio, 900.0, &DetectorConfig::default()).unwrap();
        assert_eq!(got.len(), 1);
        assert!(got[0].on);
        let window = 8000.0 / 900.0 / 8000.0;
        assert!(
            (got[0].duration - 0.060).abs() <= 2.0 * window,
            "duration {}",
            got[0].duration
        );
    }

    #[test]
    fn all_silence_is_no_signal() {
        let silence = AudioBuffer { samples: vec![0.0; 8000], sample_rate: 8000 };
        assert!(matches!(
            extract_runs(&silence, 900.0, &DetectorConfig::default()),
            Err(DspError::NoSignal)
        ));
    }

    #[test]
    fn wider_windows_never_split_clean_runs() {
        let narrow = loopback_runs("paris paris", 1);
        let wide = loopback_runs("paris paris", 3);
        assert_eq!(
            narrow.iter().filter(|r| r.on).count(),
            wide.iter().filter(|r| r.on).count()
        );
    }

    #[test]
    fn runs_start_and_end_keyed_down() {
        let runs = loopback_runs("cq", 1);
        assert!(runs.first().unwrap().on);
        assert!(runs.last().unwrap().on);
        assert_eq!(runs.len() % 2, 1);
        // States alternate strictly.
        for pair in runs.windows(2) {
            assert_ne!(pair[0].on, pair[1].on);
        }
    }

    #[test]
    fn durations_are_window_grid_independent() {
        // The same message decoded with 1- and 3-cycle windows must agree on
        // durations to sub-window precision, thanks to edge refinement.
        let narrow = loopback_runs("test de cq", 1);
        let wide = loopback_runs("test de cq", 3);
        assert_eq!(narrow.len(), wide.len());
        for (n, w) in narrow.iter().zip(&wide) {
            assert!(
                (n.duration - w.duration).abs() < 0.0005,
                "window width changed a duration: {} vs {}",
                n.duration,
                w.duration
            );
        }
    }
}
