//! A covert timing channel riding on Morse code.
//!
//! A carrier CW transmission is keyed with pseudo-random element durations
//! that both endpoints regenerate from a shared secret. Small, keyed
//! deviations from those durations carry a hidden message; to anyone without
//! the key, the timing looks like an ordinary human fist. The crate covers
//! the whole path: text to element timeline ([`morse`]), keyed duration
//! streams and training ([`keying`]), covert modulation and demodulation
//! ([`covert`]), audio synthesis and recovery ([`dsp`]), a channel
//! impairment simulator ([`channel`]), and a statistical footprint report
//! ([`detectability`]).

pub mod channel;
pub mod covert;
pub mod detectability;
pub mod dsp;
pub mod keying;
pub mod morse;

pub use channel::{ImpairmentSpec, TrialReport};
pub use covert::{ChannelSymbol, CovertError, Demodulated, KeyedTimeline};
pub use detectability::DetectabilityReport;
pub use dsp::{AudioBuffer, DecodeResult, DecoderConfig, DetectorConfig, DspError, SynthesisConfig};
pub use keying::{CovertKey, GaussianStream, KeyingError, KeyingStatistics};
pub use morse::{Element, MorseError, MorseText, Run};
