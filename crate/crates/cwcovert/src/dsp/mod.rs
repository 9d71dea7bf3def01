//! Physical layer: keyed-sine synthesis, PCM WAV I/O, and recovery of on/off
//! run-lengths from audio via dominant-frequency estimation, zero-phase
//! bandpass filtering, and sliding-window envelope detection.

mod detect;
mod filter;
mod spectrum;
mod synth;
mod wav;

pub use detect::extract_runs;
pub(crate) use detect::burst_edges;
pub use filter::bandpass;
pub use spectrum::dominant_frequency;
pub use synth::synthesize;
pub use wav::{wav_read, wav_write};

use crate::morse::{self, Element, MorseError};
use thiserror::Error;

/// Mono audio samples in [-1, 1] with their sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl AudioBuffer {
    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Mean absolute sample value, the detector's normalization level.
    pub fn mean_abs(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.abs() as f64).sum::<f64>() / self.samples.len() as f64
    }
}

/// How keyed timelines are rendered to audio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisConfig {
    /// Tone frequency in Hz.
    pub coding_frequency: f64,
    pub sample_rate: u32,
    /// Peak amplitude in [0, 1].
    pub amplitude: f64,
    /// Raised-cosine ramp length in seconds at each burst edge.
    pub ramp: f64,
    /// Leading and trailing silence in seconds.
    pub pad: f64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            coding_frequency: 900.0,
            sample_rate: 8000,
            amplitude: 0.8,
            ramp: 0.005,
            pad: 0.25,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<(), DspError> {
        if self.coding_frequency <= 0.0 || self.coding_frequency.is_nan() {
            return Err(DspError::config("coding frequency must be positive"));
        }
        if (self.sample_rate as f64) < 4.0 * self.coding_frequency {
            return Err(DspError::config(format!(
                "sample rate {} Hz is below four times the coding frequency {} Hz",
                self.sample_rate, self.coding_frequency
            )));
        }
        if !(self.amplitude > 0.0 && self.amplitude <= 1.0) {
            return Err(DspError::config("amplitude must be in (0, 1]"));
        }
        if self.ramp < 0.0 || self.ramp.is_nan() || self.pad < 0.0 || self.pad.is_nan() {
            return Err(DspError::config("ramp and pad must be non-negative"));
        }
        Ok(())
    }
}

/// How the envelope detector turns filtered audio into runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Detection window width in carrier cycles; 1 for clean signals, 3 to
    /// ride through noise.
    pub window_cycles: u32,
    /// The on threshold is this factor times the mean absolute sample value.
    pub threshold_factor: f64,
    /// A window stays on until every sample falls below `hysteresis` times
    /// the on threshold.
    pub hysteresis: f64,
    /// Half-width of the detection band as a fraction of the center.
    pub band_fraction: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            window_cycles: 1,
            threshold_factor: 1.5,
            hysteresis: 0.8,
            band_fraction: 0.05,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), DspError> {
        if self.window_cycles == 0 {
            return Err(DspError::config("window_cycles must be at least 1"));
        }
        if self.threshold_factor <= 0.0 || self.threshold_factor.is_nan() {
            return Err(DspError::config("threshold_factor must be positive"));
        }
        if !(self.hysteresis > 0.0 && self.hysteresis <= 1.0) {
            return Err(DspError::config("hysteresis must be in (0, 1]"));
        }
        if !(self.band_fraction > 0.0 && self.band_fraction < 0.5) {
            return Err(DspError::config("band_fraction must be in (0, 0.5)"));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DspError {
    #[error("invalid configuration: {reason}")]
    ConfigInvalid { reason: String },
    #[error("empty signal")]
    EmptySignal,
    #[error("unsupported WAV format: need mono 16-bit PCM, got {detail}")]
    UnsupportedFormat { detail: String },
    #[error("no signal detected")]
    NoSignal,
    #[error("signal too short for a spectrum estimate: {samples} samples, need {need}")]
    TooShort { samples: usize, need: usize },
    #[error(transparent)]
    Morse(#[from] MorseError),
    #[error("WAV I/O: {0}")]
    Wav(#[from] hound::Error),
}

impl DspError {
    fn config(reason: impl Into<String>) -> DspError {
        DspError::ConfigInvalid { reason: reason.into() }
    }
}

/// Full receive-side options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub detector: DetectorConfig,
    /// Glitch-merge fraction of a unit; runs shorter than this are cleaned
    /// away before classification.
    pub tolerance: f64,
    /// Known dot duration in seconds, if pre-shared.
    pub unit_hint: Option<f64>,
    /// Known tone frequency in Hz; skips spectrum estimation when set.
    pub freq_hint: Option<f64>,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            detector: DetectorConfig::default(),
            tolerance: 0.3,
            unit_hint: None,
            freq_hint: None,
        }
    }
}

/// Receive-side measurements the command line prints.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub sample_count: usize,
    pub sample_rate: u32,
    /// Mean absolute sample value of the raw input.
    pub signal_average: f64,
    pub dominant_hz: f64,
    pub band_low_hz: f64,
    pub band_high_hz: f64,
    pub tolerance: f64,
}

/// Outcome of the full receive pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Overt text in normalized form.
    pub text: String,
    /// Measured duration and class of each element of `text`, in order.
    pub elements: Vec<(f64, Element)>,
    /// Dot duration used for classification.
    pub unit: f64,
    pub diagnostics: Diagnostics,
}

/// Dominant frequency, bandpass, envelope detection, and classification in
/// one call. The receive path has no hidden randomness: the same buffer
/// always decodes to identical durations.
pub fn decode_pipeline(
    buffer: &AudioBuffer,
    config: &DecoderConfig,
) -> Result<DecodeResult, DspError> {
    config.detector.validate()?;
    let signal_average = buffer.mean_abs();
    if buffer.samples.is_empty() || signal_average <= 0.0 {
        return Err(DspError::NoSignal);
    }
    let dominant_hz = match config.freq_hint {
        Some(hz) => hz,
        None => dominant_frequency(buffer)?,
    };
    let filtered = bandpass(buffer, dominant_hz, config.detector.band_fraction)?;
    let runs = extract_runs(&filtered, dominant_hz, &config.detector)?;
    let classified = morse::classify_runs_detailed(&runs, config.unit_hint, config.tolerance)?;
    Ok(DecodeResult {
        text: classified.text,
        elements: classified.elements,
        unit: classified.unit,
        diagnostics: Diagnostics {
            sample_count: buffer.samples.len(),
            sample_rate: buffer.sample_rate,
            signal_average,
            dominant_hz,
            band_low_hz: dominant_hz * (1.0 - config.detector.band_fraction),
            band_high_hz: dominant_hz * (1.0 + config.detector.band_fraction),
            tolerance: config.tolerance,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morse::{elements_to_nominal_runs, normalize, text_to_elements};

    const CQ: &str = "cq cq cq de test";

    fn loopback_audio(text: &str, unit: f64) -> AudioBuffer {
        let parsed = text_to_elements(text).unwrap();
        let runs = elements_to_nominal_runs(&parsed, unit);
        synthesize(&runs, &SynthesisConfig::default()).unwrap()
    }

    #[test]
    fn pipeline_decodes_clean_loopback() {
        let audio = loopback_audio(CQ, 0.060);
        let decoded = decode_pipeline(&audio, &DecoderConfig::default()).unwrap();
        assert_eq!(decoded.text, normalize(CQ));
        assert_eq!(
            decoded.elements.len(),
            text_to_elements(CQ).unwrap().element_count()
        );
        assert!((decoded.diagnostics.dominant_hz - 900.0).abs() < 2.0);
        assert!(decoded.diagnostics.signal_average > 0.0);
    }

    #[test]
    fn pipeline_is_deterministic() {
        let audio = loopback_audio("cq cq", 0.060);
        let a = decode_pipeline(&audio, &DecoderConfig::default()).unwrap();
        let b = decode_pipeline(&audio, &DecoderConfig::default()).unwrap();
        assert_eq!(a, b);
        for ((da, _), (db, _)) in a.elements.iter().zip(&b.elements) {
            assert_eq!(da.to_bits(), db.to_bits());
        }
    }

    #[test]
    fn silence_is_no_signal() {
        let silence = AudioBuffer { samples: vec![0.0; 2400], sample_rate: 8000 };
        assert!(matches!(
            decode_pipeline(&silence, &DecoderConfig::default()),
            Err(DspError::NoSignal)
        ));
    }

    #[test]
    fn recovered_durations_track_the_timeline() {
        // Clean loopback timing fidelity: every recovered on-duration within
        // a window plus one sample of what was synthesized.
        let parsed = text_to_elements("the quick brown fox jumps over the lazy dog").unwrap();
        let runs = elements_to_nominal_runs(&parsed, 0.060);
        let config = SynthesisConfig::default();
        let audio = synthesize(&runs, &config).unwrap();
        let decoded = decode_pipeline(&audio, &DecoderConfig::default()).unwrap();

        let sent: Vec<f64> = runs.iter().filter(|r| r.on).map(|r| r.duration).collect();
        assert_eq!(decoded.elements.len(), sent.len());
        let window = 1.0 * 8000.0 / 900.0 / 8000.0; // one carrier cycle, seconds
        let bound = window + 1.0 / 8000.0;
        for (i, ((got, _), want)) in decoded.elements.iter().zip(&sent).enumerate() {
            assert!(
                (got - want).abs() <= bound,
                "element {i}: sent {want:.6}, recovered {got:.6}, bound {bound:.6}"
            );
        }
    }

    #[test]
    fn zero_phase_filtering_keeps_run_midpoints() {
        let audio = loopback_audio("sos sos", 0.060);
        let detector = DetectorConfig::default();
        let raw_runs = extract_runs(&audio, 900.0, &detector).unwrap();
        let filtered = bandpass(&audio, 900.0, detector.band_fraction).unwrap();
        let filt_runs = extract_runs(&filtered, 900.0, &detector).unwrap();
        assert_eq!(raw_runs.len(), filt_runs.len());

        let midpoints = |runs: &[crate::morse::Run]| -> Vec<f64> {
            let mut t = 0.0;
            runs.iter()
                .map(|r| {
                    let mid = t + r.duration / 2.0;
                    t += r.duration;
                    (r.on, mid)
                })
                .filter(|(on, _)| *on)
                .map(|(_, mid)| mid)
                .collect()
        };
        // Midpoints are relative to the first edge; compare spacing.
        let a = midpoints(&raw_runs);
        let b = midpoints(&filt_runs);
        for (x, y) in a.iter().zip(&b) {
            assert!(
                ((x - a[0]) - (y - b[0])).abs() <= 1.0 / 8000.0 + 1e-9,
                "midpoint moved: {x} vs {y}"
            );
        }
    }
}
