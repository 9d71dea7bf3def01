//! The covert codec: hidden text becomes a stream of five-valued channel
//! symbols, each symbol rides on one carrier element as a sigma-multiple
//! shift of its keyed base duration, and the receiver classifies measured
//! deltas back into symbols.

use crate::keying::{base_duration, CovertKey, GaussianStream, KeyingError, KeyingStatistics};
use crate::morse::{self, Element, MorseError, MorseItem, MorseText, Run};
use thiserror::Error;

/// The five line symbols and their duration offsets in sigma units.
///
/// All special markers sit on the positive side so the dot/dash codes keep
/// the widest margins: dot +1, dash -1, letter gap 0, word gap +2, end of
/// message +3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelSymbol {
    CovertDot,
    CovertDash,
    LetterGap,
    WordGap,
    EndOfMessage,
}

impl ChannelSymbol {
    /// Offset in multiples of the carrier element's class sigma.
    pub fn offset(self) -> f64 {
        match self {
            ChannelSymbol::CovertDot => 1.0,
            ChannelSymbol::CovertDash => -1.0,
            ChannelSymbol::LetterGap => 0.0,
            ChannelSymbol::WordGap => 2.0,
            ChannelSymbol::EndOfMessage => 3.0,
        }
    }
}

#[derive(Debug, Error)]
pub enum CovertError {
    #[error("covert message needs {needed} carrier elements, only {available} available")]
    InsufficientCarrier { needed: usize, available: usize },
    #[error("carrier element count {got} does not match the expected {expected}")]
    StatsMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Morse(#[from] MorseError),
    #[error(transparent)]
    Keying(#[from] KeyingError),
}

/// One span of the keyed transmission: duration plus, for element spans, the
/// carrier element and the covert symbol it carries (if any).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelineSegment {
    pub on: bool,
    pub duration: f64,
    pub element: Option<Element>,
    pub symbol: Option<ChannelSymbol>,
}

/// Ordered on/off spans with exact durations; the interchange form between
/// the codec and audio synthesis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KeyedTimeline {
    pub segments: Vec<TimelineSegment>,
}

impl KeyedTimeline {
    /// Collapse to plain runs for synthesis or direct classification.
    pub fn runs(&self) -> Vec<Run> {
        self.segments
            .iter()
            .map(|s| Run { on: s.on, duration: s.duration })
            .collect()
    }

    /// Element durations in transmission order, paired with their class.
    pub fn element_durations(&self) -> Vec<(f64, Element)> {
        self.segments
            .iter()
            .filter_map(|s| s.element.map(|e| (s.duration, e)))
            .collect()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }
}

/// Expand covert text into channel symbols: the elements of each letter,
/// a letter gap after every letter (upgraded to a word gap at word breaks),
/// and a single end-of-message marker.
pub fn covert_text_to_symbols(text: &str) -> Result<Vec<ChannelSymbol>, MorseError> {
    let parsed = morse::text_to_elements(text)?;
    let mut symbols = Vec::new();
    for (wi, word) in parsed.words().iter().enumerate() {
        if wi > 0 {
            *symbols.last_mut().expect("words are non-empty") = ChannelSymbol::WordGap;
        }
        for (_, pattern) in word {
            for ch in pattern.chars() {
                symbols.push(match ch {
                    '.' => ChannelSymbol::CovertDot,
                    _ => ChannelSymbol::CovertDash,
                });
            }
            symbols.push(ChannelSymbol::LetterGap);
        }
    }
    symbols.push(ChannelSymbol::EndOfMessage);
    Ok(symbols)
}

/// Carrier elements available for keying.
pub fn capacity(carrier_text: &str) -> Result<usize, MorseError> {
    Ok(morse::text_to_elements(carrier_text)?.element_count())
}

/// Carrier elements a covert message consumes.
pub fn required(covert_text: &str) -> Result<usize, MorseError> {
    Ok(covert_text_to_symbols(covert_text)?.len())
}

/// Build the keyed transmission timeline.
///
/// Element `i` lasts its keyed base duration plus `offset(symbol_i)` class
/// sigmas; elements beyond the symbol stream (after end-of-message) stay at
/// their unmodified base duration, indistinguishable from an idle sender.
/// Gaps are nominal 1/3/7 dot-mean units; `gap_jitter`, when given, adds a
/// dot-sigma Gaussian wobble so the silences look hand-keyed too. Gap
/// durations never consume keyed draws, so receiver synchronization depends
/// only on the element count.
pub fn modulate(
    carrier: &MorseText,
    symbols: &[ChannelSymbol],
    stats: &KeyingStatistics,
    stream: &mut GaussianStream,
    mut gap_jitter: Option<&mut GaussianStream>,
) -> Result<KeyedTimeline, CovertError> {
    stats.validate()?;
    let available = carrier.element_count();
    if symbols.len() > available {
        return Err(CovertError::InsufficientCarrier {
            needed: symbols.len(),
            available,
        });
    }

    let mut segments = Vec::new();
    let mut index = 0usize;
    for item in carrier.gapped_sequence() {
        match item {
            MorseItem::Element(elem) => {
                let base = base_duration(stream, elem, stats);
                let symbol = symbols.get(index).copied();
                let offset = symbol.map_or(0.0, ChannelSymbol::offset);
                segments.push(TimelineSegment {
                    on: true,
                    duration: base + offset * stats.std(elem),
                    element: Some(elem),
                    symbol,
                });
                index += 1;
            }
            MorseItem::Gap(gap) => {
                let nominal = gap.units() as f64 * stats.dot_mean;
                let duration = match gap_jitter.as_deref_mut() {
                    Some(jitter) => {
                        // Keep gaps away from the class boundaries even on a
                        // wild draw: no shorter than half a unit.
                        (nominal + stats.dot_std * jitter.next_gaussian())
                            .max(0.5 * stats.dot_mean)
                    }
                    None => nominal,
                };
                segments.push(TimelineSegment {
                    on: false,
                    duration,
                    element: None,
                    symbol: None,
                });
            }
        }
    }
    Ok(KeyedTimeline { segments })
}

/// Covert decode of measured element durations.
#[derive(Debug, Clone, PartialEq)]
pub struct Demodulated {
    /// Recovered covert text in normalized form.
    pub text: String,
    /// Classified symbols up to and including the end-of-message marker.
    pub symbols: Vec<ChannelSymbol>,
    /// False when the carrier ran out before an end-of-message marker; the
    /// text is still returned but may be truncated.
    pub end_of_message: bool,
    /// Duration deltas in class-sigma units, one per measured element.
    pub deltas: Vec<f64>,
}

/// Replay the keyed stream against measured element durations and classify
/// each delta to the nearest symbol offset.
///
/// `measured` pairs each on-duration with the element class from the
/// receiver's own overt decode; the keyed stream is consumed in exactly that
/// order. Decision boundaries sit midway between the offsets, clamped at the
/// extremes. Everything after the end-of-message marker is discarded, which
/// is what keeps random tail deltas from appearing as trailing garbage.
pub fn demodulate(
    measured: &[(f64, Element)],
    stats: &KeyingStatistics,
    key: &CovertKey,
    expected_elements: Option<usize>,
) -> Result<Demodulated, CovertError> {
    stats.validate()?;
    if let Some(expected) = expected_elements {
        if measured.len() != expected {
            return Err(CovertError::StatsMismatch { expected, got: measured.len() });
        }
    }

    let mut stream = key.stream();
    let mut deltas = Vec::with_capacity(measured.len());
    let mut symbols = Vec::new();
    let mut words: Vec<String> = Vec::new();
    let mut word = String::new();
    let mut pattern = String::new();
    let mut end_of_message = false;

    let flush_letter = |pattern: &mut String, word: &mut String| {
        if !pattern.is_empty() {
            if let Some(c) = morse::char_for_pattern(pattern) {
                word.push(c);
            }
            pattern.clear();
        }
    };

    for &(duration, elem) in measured {
        let base = base_duration(&mut stream, elem, stats);
        let delta = (duration - base) / stats.std(elem);
        deltas.push(delta);
        if end_of_message {
            continue;
        }
        let symbol = if delta < -0.5 {
            ChannelSymbol::CovertDash
        } else if delta < 0.5 {
            ChannelSymbol::LetterGap
        } else if delta < 1.5 {
            ChannelSymbol::CovertDot
        } else if delta < 2.5 {
            ChannelSymbol::WordGap
        } else {
            ChannelSymbol::EndOfMessage
        };
        symbols.push(symbol);
        match symbol {
            ChannelSymbol::CovertDot => pattern.push('.'),
            ChannelSymbol::CovertDash => pattern.push('-'),
            ChannelSymbol::LetterGap => flush_letter(&mut pattern, &mut word),
            ChannelSymbol::WordGap => {
                flush_letter(&mut pattern, &mut word);
                if !word.is_empty() {
                    words.push(std::mem::take(&mut word));
                }
            }
            ChannelSymbol::EndOfMessage => {
                flush_letter(&mut pattern, &mut word);
                if !word.is_empty() {
                    words.push(std::mem::take(&mut word));
                }
                end_of_message = true;
            }
        }
    }
    // Carrier ended before the marker: keep what was assembled.
    flush_letter(&mut pattern, &mut word);
    if !word.is_empty() {
        words.push(word);
    }

    Ok(Demodulated {
        text: words.join(" "),
        symbols,
        end_of_message,
        deltas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morse::text_to_elements;

    const CARRIER: &str = "cq cq cq calling cq this is xxxxxx testing a radio \
                           system.  forgive any interruption.  have a good day.";
    const COVERT: &str = "Mr. Watson come here, I want to see you.";

    const STATS: KeyingStatistics = KeyingStatistics {
        dot_mean: 0.060,
        dot_std: 0.010,
        dash_mean: 0.180,
        dash_std: 0.010,
    };

    fn loopback(carrier: &str, covert: &str, key: &str) -> Demodulated {
        let carrier = text_to_elements(carrier).unwrap();
        let symbols = covert_text_to_symbols(covert).unwrap();
        let key = CovertKey::new(key).unwrap();
        let mut stream = key.stream();
        let timeline = modulate(&carrier, &symbols, &STATS, &mut stream, None).unwrap();
        demodulate(
            &timeline.element_durations(),
            &STATS,
            &key,
            Some(carrier.element_count()),
        )
        .unwrap()
    }

    #[test]
    fn single_letter_expansion() {
        use ChannelSymbol::*;
        assert_eq!(
            covert_text_to_symbols("e").unwrap(),
            vec![CovertDot, LetterGap, EndOfMessage]
        );
    }

    #[test]
    fn word_gap_replaces_letter_gap() {
        use ChannelSymbol::*;
        assert_eq!(
            covert_text_to_symbols("a b").unwrap(),
            vec![
                CovertDot, CovertDash, WordGap, CovertDash, CovertDot, CovertDot,
                CovertDot, LetterGap, EndOfMessage
            ]
        );
    }

    #[test]
    fn empty_payload_is_just_the_marker() {
        assert_eq!(
            covert_text_to_symbols("").unwrap(),
            vec![ChannelSymbol::EndOfMessage]
        );
    }

    #[test]
    fn capacity_and_required_counts() {
        assert_eq!(capacity("cq").unwrap(), 8);
        assert_eq!(required("").unwrap(), 1);
        assert_eq!(required("e").unwrap(), 3);
        assert!(required("e").unwrap() <= capacity("cq").unwrap());
        assert_eq!(capacity(CARRIER).unwrap(), 241);
        assert_eq!(required(COVERT).unwrap(), 118);
    }

    #[test]
    fn loopback_recovers_covert_text_without_trailing_garbage() {
        let got = loopback(CARRIER, COVERT, "secret");
        assert_eq!(got.text, "mr. watson come here, i want to see you.");
        assert!(got.end_of_message);
        assert_eq!(got.deltas.len(), 241);
    }

    #[test]
    fn empty_covert_message_marks_only_the_first_element() {
        let carrier = text_to_elements("cq cq").unwrap();
        let key = CovertKey::new("k1").unwrap();
        let symbols = covert_text_to_symbols("").unwrap();
        let mut stream = key.stream();
        let timeline = modulate(&carrier, &symbols, &STATS, &mut stream, None).unwrap();

        // Replay the bases independently to isolate the offsets.
        let mut replay = key.stream();
        for (i, (duration, elem)) in timeline.element_durations().iter().enumerate() {
            let base = base_duration(&mut replay, *elem, &STATS);
            let offset = (duration - base) / STATS.std(*elem);
            let expected = if i == 0 { 3.0 } else { 0.0 };
            assert!((offset - expected).abs() < 1e-9, "element {i}: offset {offset}");
        }

        let got = demodulate(&timeline.element_durations(), &STATS, &key, None).unwrap();
        assert_eq!(got.text, "");
        assert!(got.end_of_message);
    }

    #[test]
    fn oversized_covert_message_is_rejected() {
        let carrier = text_to_elements("ee").unwrap();
        let symbols = covert_text_to_symbols("a").unwrap();
        let key = CovertKey::new("k").unwrap();
        let err = modulate(&carrier, &symbols, &STATS, &mut key.stream(), None).unwrap_err();
        match err {
            CovertError::InsufficientCarrier { needed, available } => {
                assert_eq!((needed, available), (4, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unmodulated_carrier_decodes_to_nothing_without_marker() {
        let carrier = text_to_elements("cq cq cq").unwrap();
        let key = CovertKey::new("secret").unwrap();
        let mut stream = key.stream();
        // No symbols at all: a plain keyed transmission.
        let timeline = modulate(&carrier, &[], &STATS, &mut stream, None).unwrap();
        let got = demodulate(&timeline.element_durations(), &STATS, &key, None).unwrap();
        assert_eq!(got.text, "");
        assert!(!got.end_of_message);
        assert!(got.symbols.iter().all(|s| *s == ChannelSymbol::LetterGap));
    }

    #[test]
    fn mismatched_element_count_is_detected() {
        let key = CovertKey::new("secret").unwrap();
        let measured = vec![(0.060, Element::Dot); 10];
        let err = demodulate(&measured, &STATS, &key, Some(11)).unwrap_err();
        assert!(matches!(err, CovertError::StatsMismatch { expected: 11, got: 10 }));
    }

    #[test]
    fn round_trip_survives_measurement_error_inside_half_sigma() {
        let carrier = text_to_elements(CARRIER).unwrap();
        let symbols = covert_text_to_symbols(COVERT).unwrap();
        let key = CovertKey::new("secret").unwrap();
        let mut stream = key.stream();
        let timeline = modulate(&carrier, &symbols, &STATS, &mut stream, None).unwrap();

        let mut noise = GaussianStream::from_seed(0xD15EA5E);
        let close: Vec<(f64, Element)> = timeline
            .element_durations()
            .iter()
            .map(|(d, e)| {
                let u = noise.next_uniform();
                (d + (2.0 * u - 1.0) * 0.4 * STATS.std(*e), *e)
            })
            .collect();
        let got = demodulate(&close, &STATS, &key, None).unwrap();
        assert_eq!(got.text, "mr. watson come here, i want to see you.");
        assert!(got.end_of_message);
    }

    #[test]
    fn round_trip_breaks_beyond_half_sigma() {
        let carrier = text_to_elements(CARRIER).unwrap();
        let symbols = covert_text_to_symbols(COVERT).unwrap();
        let key = CovertKey::new("secret").unwrap();
        let mut stream = key.stream();
        let timeline = modulate(&carrier, &symbols, &STATS, &mut stream, None).unwrap();

        // +/-0.6 sigma errors cross the decision boundaries about a sixth of
        // the time; over 241 elements a clean decode is impossible.
        let mut noise = GaussianStream::from_seed(0xBAD5EED);
        let far: Vec<(f64, Element)> = timeline
            .element_durations()
            .iter()
            .map(|(d, e)| {
                let u = noise.next_uniform();
                (d + (2.0 * u - 1.0) * 0.6 * STATS.std(*e), *e)
            })
            .collect();
        let got = demodulate(&far, &STATS, &key, None).unwrap();
        assert_ne!(got.text, "mr. watson come here, i want to see you.");
    }

    #[test]
    fn transmitted_durations_stay_bounded_and_classes_disjoint() {
        let carrier_text = "cq cq cq ".repeat(90);
        let carrier = text_to_elements(&carrier_text).unwrap();
        assert!(carrier.element_count() >= 2000);
        let symbols = covert_text_to_symbols(&"the quick brown fox ".repeat(8)).unwrap();
        let key = CovertKey::new("bounds").unwrap();
        let mut stream = key.stream();
        let mut jitter = GaussianStream::from_seed(1);
        let timeline =
            modulate(&carrier, &symbols, &STATS, &mut stream, Some(&mut jitter)).unwrap();

        let (mut dot_max, mut dash_min) = (0.0f64, f64::INFINITY);
        for (duration, elem) in timeline.element_durations() {
            let (mu, sigma) = (STATS.mean(elem), STATS.std(elem));
            assert!(duration >= mu - 2.0 * sigma - 1e-12);
            assert!(duration <= mu + 4.0 * sigma + 1e-12);
            match elem {
                Element::Dot => dot_max = dot_max.max(duration),
                Element::Dash => dash_min = dash_min.min(duration),
            }
        }
        assert!(dot_max < dash_min, "dot {dot_max} overlaps dash {dash_min}");
    }

    #[test]
    fn modulation_is_deterministic() {
        let carrier = text_to_elements("cq cq de w1aw").unwrap();
        let symbols = covert_text_to_symbols("hi").unwrap();
        let key = CovertKey::new("secret").unwrap();
        let a = modulate(&carrier, &symbols, &STATS, &mut key.stream(), None).unwrap();
        let b = modulate(&carrier, &symbols, &STATS, &mut key.stream(), None).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.segments.iter().zip(&b.segments) {
            assert_eq!(x.duration.to_bits(), y.duration.to_bits());
        }
    }
}
