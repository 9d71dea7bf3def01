//! The pre-shared sender profile, its file format, and the deterministic
//! keyed Gaussian stream both endpoints replay.
//!
//! Transmitter and receiver must regenerate identical real-number sequences
//! from a shared key, so the PRNG (SplitMix64), the Gaussian method
//! (Box-Muller, cosine branch only), and the seed derivation (FNV-1a-64) are
//! all pinned, and the transcendentals come from `libm` rather than the
//! platform math library.

use crate::morse::{Element, MorseItem, MorseText, Run};
use std::path::Path;
use thiserror::Error;

/// Per-class element duration profile, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyingStatistics {
    pub dot_mean: f64,
    pub dot_std: f64,
    pub dash_mean: f64,
    pub dash_std: f64,
}

impl KeyingStatistics {
    pub fn mean(&self, elem: Element) -> f64 {
        match elem {
            Element::Dot => self.dot_mean,
            Element::Dash => self.dash_mean,
        }
    }

    pub fn std(&self, elem: Element) -> f64 {
        match elem {
            Element::Dot => self.dot_std,
            Element::Dash => self.dash_std,
        }
    }

    /// All values positive, and the dot and dash duration ranges must stay
    /// disjoint even at the widest covert offsets (4 sigma apart).
    pub fn validate(&self) -> Result<(), KeyingError> {
        let fields = [
            ("dot_mean", self.dot_mean),
            ("dot_std", self.dot_std),
            ("dash_mean", self.dash_mean),
            ("dash_std", self.dash_std),
        ];
        for (name, value) in fields {
            if !value.is_finite() || value <= 0.0 {
                return Err(KeyingError::InvalidStatistics {
                    reason: format!("{name} must be a positive number, got {value}"),
                });
            }
        }
        if self.dot_mean + 4.0 * self.dot_std >= self.dash_mean - 4.0 * self.dash_std {
            return Err(KeyingError::InvalidStatistics {
                reason: format!(
                    "dot and dash ranges overlap: dot up to {} s, dash down to {} s",
                    self.dot_mean + 4.0 * self.dot_std,
                    self.dash_mean - 4.0 * self.dash_std
                ),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum KeyingError {
    #[error("key must not be empty")]
    EmptyKey,
    #[error("invalid statistics: {reason}")]
    InvalidStatistics { reason: String },
    #[error("stats file line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("stats file is missing {name}")]
    MissingField { name: &'static str },
    #[error("stats file value for {name} is not usable")]
    InvalidValue { name: String },
    #[error("too few {class} elements to estimate statistics: {count}, need at least 20")]
    InsufficientSamples { class: &'static str, count: usize },
    #[error(transparent)]
    Decode(#[from] crate::dsp::DspError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// FNV-1a-64 digest of the key bytes; the shared PRNG seed.
pub fn derive_seed(key: &[u8]) -> Result<u64, KeyingError> {
    if key.is_empty() {
        return Err(KeyingError::EmptyKey);
    }
    let mut hash: u64 = 14695981039346656037;
    for &byte in key {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(1099511628211);
    }
    Ok(hash)
}

/// Shared secret key and the seed derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovertKey {
    key: Vec<u8>,
    seed: u64,
}

impl CovertKey {
    pub fn new(key: impl AsRef<[u8]>) -> Result<CovertKey, KeyingError> {
        let key = key.as_ref().to_vec();
        let seed = derive_seed(&key)?;
        Ok(CovertKey { key, seed })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// A fresh stream positioned at the first draw for this key.
    pub fn stream(&self) -> GaussianStream {
        GaussianStream::from_seed(self.seed)
    }
}

/// Deterministic standard-normal stream.
///
/// State advances by the SplitMix64 recurrence; uniforms are the top 53 bits;
/// each Gaussian consumes exactly two uniforms through the Box-Muller cosine
/// branch (a zero first uniform is redrawn). Identical seeds give
/// bit-identical draws on every platform.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianStream {
    state: u64,
    draws: u64,
}

impl GaussianStream {
    pub fn from_seed(seed: u64) -> GaussianStream {
        GaussianStream { state: seed, draws: 0 }
    }

    /// Number of Gaussian deviates handed out so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub(crate) fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4B7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) from the top 53 bits of the next state word.
    pub fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    pub fn next_gaussian(&mut self) -> f64 {
        let mut u1 = self.next_uniform();
        while u1 == 0.0 {
            u1 = self.next_uniform();
        }
        let u2 = self.next_uniform();
        self.draws += 1;
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * std::f64::consts::PI * u2)
    }
}

/// Fold `x` into [-sigma, sigma) by whole 2-sigma periods. In-range values
/// return unchanged, which makes wrapping exactly idempotent; the folding
/// arithmetic alone could drift by an ulp on a round trip.
pub fn wrap(x: f64, sigma: f64) -> f64 {
    if (-sigma..sigma).contains(&x) {
        return x;
    }
    let period = 2.0 * sigma;
    (((x + sigma) % period + period) % period) - sigma
}

/// Duration for an element given its standard-normal deviate: the class mean
/// plus the sigma-scaled deviate, wrapped so it never leaves one sigma.
pub fn duration_from_deviate(z: f64, elem: Element, stats: &KeyingStatistics) -> f64 {
    let sigma = stats.std(elem);
    stats.mean(elem) + wrap(sigma * z, sigma)
}

/// Keyed base duration for the next element; consumes one Gaussian draw.
pub fn base_duration(
    stream: &mut GaussianStream,
    elem: Element,
    stats: &KeyingStatistics,
) -> f64 {
    duration_from_deviate(stream.next_gaussian(), elem, stats)
}

/// Timeline of an ordinary sender whose element durations scatter naturally
/// around the profile means, with no wrapping: what a receiver hears during a
/// training period. Gaps get the dot-class spread around their nominal
/// 1/3/7-unit lengths.
pub fn natural_timeline(
    text: &MorseText,
    stats: &KeyingStatistics,
    stream: &mut GaussianStream,
) -> Vec<Run> {
    text.gapped_sequence()
        .iter()
        .map(|item| match item {
            MorseItem::Element(e) => Run::mark(
                (stats.mean(*e) + stats.std(*e) * stream.next_gaussian()).max(0.001),
            ),
            MorseItem::Gap(g) => Run::space(
                (g.units() as f64 * stats.dot_mean + stats.dot_std * stream.next_gaussian())
                    .max(0.001),
            ),
        })
        .collect()
}

/// Fewest elements per class `derive_stats` will accept.
pub const MIN_TRAINING_SAMPLES: usize = 20;

/// Learn a sender's keying profile by listening to an unmodulated
/// transmission: decode the recording, split the measured on-durations by
/// class, and take each class's sample mean and standard deviation.
pub fn derive_stats(
    audio: &crate::dsp::AudioBuffer,
    config: &crate::dsp::DecoderConfig,
) -> Result<KeyingStatistics, KeyingError> {
    let decoded = crate::dsp::decode_pipeline(audio, config)?;
    let mut dots = Vec::new();
    let mut dashes = Vec::new();
    for &(duration, elem) in &decoded.elements {
        match elem {
            Element::Dot => dots.push(duration),
            Element::Dash => dashes.push(duration),
        }
    }
    for (class, samples) in [("dot", &dots), ("dash", &dashes)] {
        if samples.len() < MIN_TRAINING_SAMPLES {
            return Err(KeyingError::InsufficientSamples { class, count: samples.len() });
        }
    }
    let (dot_mean, dot_std) = mean_and_std(&dots);
    let (dash_mean, dash_std) = mean_and_std(&dashes);
    Ok(KeyingStatistics { dot_mean, dot_std, dash_mean, dash_std })
}

fn mean_and_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

const STATS_FIELDS: [&str; 4] = ["dot_mean_ms", "dot_std_ms", "dash_mean_ms", "dash_std_ms"];

/// Parse the `name = value` stats format. Values are milliseconds in the
/// file, seconds in memory; `#` starts a comment; unknown or repeated names
/// are rejected.
pub fn parse_stats(text: &str) -> Result<KeyingStatistics, KeyingError> {
    let mut values: [Option<f64>; 4] = [None; 4];
    for (i, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((name, value)) = line.split_once('=') else {
            return Err(KeyingError::ParseError {
                line: i + 1,
                message: format!("expected `name = value`, got {raw_line:?}"),
            });
        };
        let name = name.trim();
        let Some(slot) = STATS_FIELDS.iter().position(|f| *f == name) else {
            return Err(KeyingError::ParseError {
                line: i + 1,
                message: format!("unknown field {name:?}"),
            });
        };
        if values[slot].is_some() {
            return Err(KeyingError::ParseError {
                line: i + 1,
                message: format!("field {name:?} given twice"),
            });
        }
        let seconds = parse_ms_as_seconds(value.trim()).ok_or_else(|| {
            KeyingError::InvalidValue { name: name.to_string() }
        })?;
        values[slot] = Some(seconds);
    }
    for (slot, name) in STATS_FIELDS.iter().enumerate() {
        if values[slot].is_none() {
            return Err(KeyingError::MissingField { name });
        }
    }
    let stats = KeyingStatistics {
        dot_mean: values[0].unwrap(),
        dot_std: values[1].unwrap(),
        dash_mean: values[2].unwrap(),
        dash_std: values[3].unwrap(),
    };
    stats.validate()?;
    Ok(stats)
}

/// Serialize to the file format; `parse_stats` recovers the exact values.
pub fn serialize_stats(stats: &KeyingStatistics) -> String {
    format!(
        "# CW keying statistics: per-class element duration mean and spread\n\
         dot_mean_ms = {}\n\
         dot_std_ms = {}\n\
         dash_mean_ms = {}\n\
         dash_std_ms = {}\n",
        ms_string(stats.dot_mean),
        ms_string(stats.dot_std),
        ms_string(stats.dash_mean),
        ms_string(stats.dash_std),
    )
}

pub fn read_stats_file(path: &Path) -> Result<KeyingStatistics, KeyingError> {
    parse_stats(&std::fs::read_to_string(path)?)
}

pub fn write_stats_file(stats: &KeyingStatistics, path: &Path) -> Result<(), KeyingError> {
    stats.validate()?;
    std::fs::write(path, serialize_stats(stats))?;
    Ok(())
}

/// Read a milliseconds literal as seconds with a single rounding: the /1000
/// happens in the decimal exponent, not in floating point, so writing and
/// re-reading a stats file is bit-exact.
fn parse_ms_as_seconds(value: &str) -> Option<f64> {
    let scaled = match value.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = value[pos + 1..].parse().ok()?;
            format!("{}e{}", &value[..pos], exp.checked_sub(3)?)
        }
        None => format!("{value}e-3"),
    };
    let seconds = scaled.parse::<f64>().ok()?;
    (seconds.is_finite() && seconds > 0.0).then_some(seconds)
}

/// Milliseconds rendering of a seconds value: the shortest round-trip digits
/// with the decimal point moved three places, again exact by construction.
fn ms_string(seconds: f64) -> String {
    let repr = format!("{seconds}");
    let (int_part, frac_part) = match repr.split_once('.') {
        Some((i, f)) => (i, f),
        None => (repr.as_str(), ""),
    };
    let mut frac = frac_part.to_string();
    while frac.len() < 3 {
        frac.push('0');
    }
    let head = format!("{int_part}{}", &frac[..3]);
    let head = head.trim_start_matches('0');
    let head = if head.is_empty() { "0" } else { head };
    let tail = frac[3..].trim_end_matches('0');
    if tail.is_empty() {
        head.to_string()
    } else {
        format!("{head}.{tail}")
    }
}
