//! Channel impairment simulator and Monte-Carlo error-rate harness: a
//! desk-scale stand-in for the radio and VoIP paths a keyed transmission
//! would really cross.

use crate::covert::{self, ChannelSymbol, CovertError};
use crate::dsp::{
    bandpass, burst_edges, decode_pipeline, dominant_frequency, synthesize, AudioBuffer,
    DecoderConfig, DetectorConfig, DspError, SynthesisConfig,
};
use crate::keying::{CovertKey, GaussianStream, KeyingStatistics};
use crate::morse::{normalize, text_to_elements, MorseError};
use thiserror::Error;

/// What the simulated path does to the audio. Unset impairments are skipped,
/// so the default spec passes the signal through untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpairmentSpec {
    /// Target in-band signal-to-noise ratio in dB; white noise is scaled so
    /// its share inside the detection band hits this ratio.
    pub snr_db: Option<f64>,
    /// Uniform ±bound in milliseconds for warping every keying edge.
    pub jitter_ms: Option<f64>,
    /// Round-trip linear-interpolation resample through this rate.
    pub resample_hz: Option<u32>,
    /// Peak depth of a slow multiplicative fade, in [0, 1).
    pub fade_depth: Option<f64>,
    /// Fade cycle length in seconds, used when `fade_depth` is set.
    pub fade_period: f64,
}

impl Default for ImpairmentSpec {
    fn default() -> Self {
        ImpairmentSpec {
            snr_db: None,
            jitter_ms: None,
            resample_hz: None,
            fade_depth: None,
            fade_period: 1.0,
        }
    }
}

impl ImpairmentSpec {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(ChannelError::config("snr_db must be finite"));
            }
        }
        if let Some(jitter) = self.jitter_ms {
            if !jitter.is_finite() || jitter < 0.0 {
                return Err(ChannelError::config("jitter_ms must be finite and non-negative"));
            }
        }
        if let Some(rate) = self.resample_hz {
            if rate == 0 {
                return Err(ChannelError::config("resample_hz must be positive"));
            }
        }
        if let Some(depth) = self.fade_depth {
            if !(0.0..1.0).contains(&depth) {
                return Err(ChannelError::config("fade_depth must be in [0, 1)"));
            }
            if self.fade_period.is_nan() || self.fade_period <= 0.0 {
                return Err(ChannelError::config("fade_period must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("invalid impairment: {reason}")]
    ConfigInvalid { reason: String },
    #[error(transparent)]
    Dsp(#[from] DspError),
    #[error(transparent)]
    Covert(#[from] CovertError),
    #[error(transparent)]
    Morse(#[from] MorseError),
}

impl ChannelError {
    fn config(reason: impl Into<String>) -> ChannelError {
        ChannelError::ConfigInvalid { reason: reason.into() }
    }
}

/// Run the audio through the impaired path. Deterministic: the same buffer,
/// spec, and seed always produce the same output. Impairments apply in
/// physical order: timing jitter and fading happen at the sender's key and
/// the air, resampling at the codec, noise on top of everything.
pub fn apply_impairments(
    buffer: &AudioBuffer,
    spec: &ImpairmentSpec,
    seed: u64,
) -> Result<AudioBuffer, ChannelError> {
    spec.validate()?;
    let mut seeds = GaussianStream::from_seed(seed);
    let jitter_seed = seeds.next_u64();
    let noise_seed = seeds.next_u64();

    let mut out = buffer.clone();
    if let Some(jitter_ms) = spec.jitter_ms {
        if jitter_ms > 0.0 {
            out = warp_edges(&out, jitter_ms / 1000.0, jitter_seed)?;
        }
    }
    if let Some(depth) = spec.fade_depth {
        apply_fade(&mut out, depth, spec.fade_period);
    }
    if let Some(rate) = spec.resample_hz {
        out = resample(&resample(&out, rate), buffer.sample_rate);
    }
    if let Some(snr_db) = spec.snr_db {
        add_in_band_noise(&mut out, snr_db, noise_seed)?;
    }
    Ok(out)
}

/// Shift every detected keying edge by an independent uniform draw in
/// ±`jitter` seconds, then piecewise-linearly warp the audio between the
/// shifted edges. This reproduces the failure mode that matters to a timing
/// channel: durations arrive wrong while the tone itself stays clean.
fn warp_edges(buffer: &AudioBuffer, jitter: f64, seed: u64) -> Result<AudioBuffer, ChannelError> {
    let fs = buffer.sample_rate as f64;
    let center = dominant_frequency(buffer)?;
    let edges = burst_edges(buffer, center, &DetectorConfig::default())?;

    let mut anchors: Vec<f64> = Vec::with_capacity(2 * edges.len() + 2);
    anchors.push(0.0);
    for &(a, b) in &edges {
        anchors.push(a as f64);
        anchors.push(b as f64 + 1.0);
    }
    anchors.push(buffer.samples.len() as f64);

    // Interior anchors move by at most their draw, and never past the
    // midpoint toward a neighbor, which keeps the warp strictly monotone.
    let mut rng = GaussianStream::from_seed(seed);
    let mut warped = anchors.clone();
    for i in 1..warped.len() - 1 {
        let delta = (2.0 * rng.next_uniform() - 1.0) * jitter * fs;
        let lo = 0.5 * (anchors[i - 1] + anchors[i]) + 0.5;
        let hi = 0.5 * (anchors[i] + anchors[i + 1]) - 0.5;
        warped[i] = (anchors[i] + delta).clamp(lo, hi.max(lo));
    }

    let mut samples = vec![0.0f32; buffer.samples.len()];
    let mut seg = 0usize;
    for (i, out) in samples.iter_mut().enumerate() {
        let t = i as f64;
        while seg + 2 < warped.len() && t >= warped[seg + 1] {
            seg += 1;
        }
        let u = (t - warped[seg]) / (warped[seg + 1] - warped[seg]);
        let src = anchors[seg] + u * (anchors[seg + 1] - anchors[seg]);
        *out = sample_at(&buffer.samples, src);
    }
    Ok(AudioBuffer { samples, sample_rate: buffer.sample_rate })
}

fn apply_fade(buffer: &mut AudioBuffer, depth: f64, period: f64) {
    let step = std::f64::consts::TAU / (period * buffer.sample_rate as f64);
    for (i, s) in buffer.samples.iter_mut().enumerate() {
        let gain = 1.0 - 0.5 * depth * (1.0 - (step * i as f64).cos());
        *s = (*s as f64 * gain) as f32;
    }
}

fn resample(buffer: &AudioBuffer, rate: u32) -> AudioBuffer {
    if rate == buffer.sample_rate {
        return buffer.clone();
    }
    let ratio = buffer.sample_rate as f64 / rate as f64;
    let n = (buffer.samples.len() as f64 / ratio).round() as usize;
    let samples = (0..n).map(|i| sample_at(&buffer.samples, i as f64 * ratio)).collect();
    AudioBuffer { samples, sample_rate: rate }
}

fn sample_at(x: &[f32], t: f64) -> f32 {
    let i = t.floor();
    let u = t - i;
    let i = i as isize;
    let get = |j: isize| -> f64 {
        if j < 0 || j as usize >= x.len() {
            0.0
        } else {
            x[j as usize] as f64
        }
    };
    (get(i) * (1.0 - u) + get(i + 1) * u) as f32
}

fn mean_power(x: &[f32]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|&s| s as f64 * s as f64).sum::<f64>() / x.len() as f64
}

/// Add white Gaussian noise scaled so that the ratio of signal power to
/// noise power inside the detection band equals `snr_db`. White noise is
/// added full-band; the detector's own filter discards the rest, so the
/// in-band figure is the one that predicts decode behavior.
fn add_in_band_noise(
    buffer: &mut AudioBuffer,
    snr_db: f64,
    seed: u64,
) -> Result<(), ChannelError> {
    let band = DetectorConfig::default().band_fraction;
    let center = dominant_frequency(buffer)?;
    let in_band_signal = mean_power(&bandpass(buffer, center, band)?.samples);
    if in_band_signal <= 0.0 {
        return Err(ChannelError::config("cannot calibrate noise against a silent signal"));
    }

    let mut rng = GaussianStream::from_seed(seed);
    let noise: Vec<f32> =
        (0..buffer.samples.len()).map(|_| rng.next_gaussian() as f32).collect();
    let noise_buffer = AudioBuffer { samples: noise, sample_rate: buffer.sample_rate };
    let in_band_noise = mean_power(&bandpass(&noise_buffer, center, band)?.samples);

    let target = 10f64.powf(snr_db / 10.0);
    let scale = (in_band_signal / (in_band_noise * target)).sqrt();
    for (s, n) in buffer.samples.iter_mut().zip(&noise_buffer.samples) {
        *s += (scale * *n as f64) as f32;
    }
    Ok(())
}

/// In-band SNR of an impaired copy against its clean original, in dB,
/// measured inside the detection band around `center`.
pub fn measure_in_band_snr(
    clean: &AudioBuffer,
    impaired: &AudioBuffer,
    center: f64,
) -> Result<f64, ChannelError> {
    if clean.samples.len() != impaired.samples.len() {
        return Err(ChannelError::config("buffers differ in length"));
    }
    let band = DetectorConfig::default().band_fraction;
    let residual = AudioBuffer {
        samples: clean
            .samples
            .iter()
            .zip(&impaired.samples)
            .map(|(c, i)| i - c)
            .collect(),
        sample_rate: clean.sample_rate,
    };
    let signal = mean_power(&bandpass(clean, center, band)?.samples);
    let noise = mean_power(&bandpass(&residual, center, band)?.samples);
    Ok(10.0 * (signal / noise).log10())
}

/// Aggregate outcome of a Monte-Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialReport {
    pub trials: usize,
    /// Trials whose overt decode matched the carrier text exactly.
    pub overt_exact: usize,
    /// Trials whose covert decode matched the payload exactly, end marker
    /// included.
    pub covert_exact: usize,
    /// Fraction of covert symbols decoded wrongly, across all trials.
    pub covert_symbol_error_rate: f64,
    /// Mean |recovered - transmitted| element duration in seconds, over
    /// trials where the element count survived.
    pub mean_abs_duration_error: f64,
}

/// Keeps the gap-wobble stream from replaying the impairment noise.
const GAP_SEED_SALT: u64 = 0x9af8_65d1_20c4_7b3e;

/// End-to-end Monte-Carlo: for each trial, modulate the covert payload onto
/// the carrier, synthesize, impair with seed `base_seed + trial`, then run
/// the full receive pipeline and covert demodulation. Failed decodes count
/// as wholly wrong trials rather than aborting the run.
#[allow(clippy::too_many_arguments)]
pub fn run_trials(
    carrier_text: &str,
    covert_text: &str,
    stats: &KeyingStatistics,
    key: &CovertKey,
    spec: &ImpairmentSpec,
    decoder: &DecoderConfig,
    n_trials: usize,
    base_seed: u64,
) -> Result<TrialReport, ChannelError> {
    spec.validate()?;
    let carrier = text_to_elements(carrier_text)?;
    let symbols = covert::covert_text_to_symbols(covert_text)?;
    let want_overt = normalize(carrier_text);
    let want_covert = normalize(covert_text);
    let synth = SynthesisConfig::default();

    let mut overt_exact = 0usize;
    let mut covert_exact = 0usize;
    let mut symbol_errors = 0usize;
    let mut duration_error_sum = 0.0;
    let mut duration_count = 0usize;

    for trial in 0..n_trials as u64 {
        let seed = base_seed.wrapping_add(trial);
        let mut covert_stream = key.stream();
        let mut gap_stream = GaussianStream::from_seed(seed ^ GAP_SEED_SALT);
        let timeline =
            covert::modulate(&carrier, &symbols, stats, &mut covert_stream, Some(&mut gap_stream))?;
        let audio = synthesize(&timeline.runs(), &synth)?;
        let impaired = apply_impairments(&audio, spec, seed)?;
        let sent = timeline.element_durations();

        let Ok(decoded) = decode_pipeline(&impaired, decoder) else {
            symbol_errors += symbols.len();
            continue;
        };
        if decoded.text == want_overt {
            overt_exact += 1;
        }
        if decoded.elements.len() == sent.len() {
            for ((got, _), (want, _)) in decoded.elements.iter().zip(&sent) {
                duration_error_sum += (got - want).abs();
                duration_count += 1;
            }
        }
        let Ok(demod) = covert::demodulate(&decoded.elements, stats, key, Some(sent.len()))
        else {
            symbol_errors += symbols.len();
            continue;
        };
        if demod.end_of_message && demod.text == want_covert {
            covert_exact += 1;
        }
        // A missed end marker makes the decoder classify every remaining
        // element, so cap each trial at one payload of errors.
        symbol_errors += symbol_distance(&symbols, &demod.symbols).min(symbols.len());
    }

    let symbols_total = symbols.len() * n_trials;
    Ok(TrialReport {
        trials: n_trials,
        overt_exact,
        covert_exact,
        covert_symbol_error_rate: if symbols_total == 0 {
            0.0
        } else {
            symbol_errors as f64 / symbols_total as f64
        },
        mean_abs_duration_error: if duration_count == 0 {
            0.0
        } else {
            duration_error_sum / duration_count as f64
        },
    })
}

fn symbol_distance(sent: &[ChannelSymbol], got: &[ChannelSymbol]) -> usize {
    let common = sent.len().min(got.len());
    let mismatched = sent[..common].iter().zip(got).filter(|(a, b)| a != b).count();
    mismatched + sent.len().abs_diff(got.len())
}

/// Header for sweep exports, matching [`csv_line`].
pub const CSV_HEADER: &str = "snr_db,jitter_ms,trials,overt_exact,covert_exact,symbol_error_rate";

/// One sweep row; unset impairments become empty cells.
pub fn csv_line(spec: &ImpairmentSpec, report: &TrialReport) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    format!(
        "{},{},{},{},{},{}",
        opt(spec.snr_db),
        opt(spec.jitter_ms),
        report.trials,
        report.overt_exact,
        report.covert_exact,
        report.covert_symbol_error_rate,
    )
}
