//! Morse alphabet, text/element conversion, and timing classification.
//!
//! Timing follows the standard unit ratios: a dot lasts one unit and a dash
//! three; the gaps inside a letter, between letters, and between words last
//! 1, 3, and 7 units.

use thiserror::Error;

/// A single keyed element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Element {
    Dot,
    Dash,
}

impl Element {
    /// Nominal length in dot units.
    pub fn units(self) -> u32 {
        match self {
            Element::Dot => 1,
            Element::Dash => 3,
        }
    }
}

impl std::fmt::Display for Element {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            Element::Dot => "dot",
            Element::Dash => "dash",
        })
    }
}

/// Silence between elements of a letter, between letters, or between words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GapKind {
    IntraSymbol,
    InterSymbol,
    InterWord,
}

impl GapKind {
    /// Nominal length in dot units.
    pub fn units(self) -> u32 {
        match self {
            GapKind::IntraSymbol => 1,
            GapKind::InterSymbol => 3,
            GapKind::InterWord => 7,
        }
    }
}

/// Characters we can key: letters, digits, and common CW punctuation.
/// Lookups are case-insensitive.
pub const SYMBOL_TABLE: &[(char, &str)] = &[
    ('a', ".-"),
    ('b', "-..."),
    ('c', "-.-."),
    ('d', "-.."),
    ('e', "."),
    ('f', "..-."),
    ('g', "--."),
    ('h', "...."),
    ('i', ".."),
    ('j', ".---"),
    ('k', "-.-"),
    ('l', ".-.."),
    ('m', "--"),
    ('n', "-."),
    ('o', "---"),
    ('p', ".--."),
    ('q', "--.-"),
    ('r', ".-."),
    ('s', "..."),
    ('t', "-"),
    ('u', "..-"),
    ('v', "...-"),
    ('w', ".--"),
    ('x', "-..-"),
    ('y', "-.--"),
    ('z', "--.."),
    ('0', "-----"),
    ('1', ".----"),
    ('2', "..---"),
    ('3', "...--"),
    ('4', "....-"),
    ('5', "....."),
    ('6', "-...."),
    ('7', "--..."),
    ('8', "---.."),
    ('9', "----."),
    ('.', ".-.-.-"),
    (',', "--..--"),
    ('?', "..--.."),
    ('/', "-..-."),
    ('=', "-...-"),
    ('\'', ".----."),
];

/// Element pattern for a character, if it is in the supported alphabet.
pub fn pattern_for(c: char) -> Option<&'static str> {
    let c = c.to_ascii_lowercase();
    SYMBOL_TABLE.iter().find(|(ch, _)| *ch == c).map(|(_, p)| *p)
}

/// Character for an element pattern written as dots and dashes.
pub fn char_for_pattern(pattern: &str) -> Option<char> {
    SYMBOL_TABLE.iter().find(|(_, p)| *p == pattern).map(|(c, _)| *c)
}

fn pattern_elements(pattern: &str) -> impl Iterator<Item = Element> + '_ {
    pattern.chars().map(|c| match c {
        '.' => Element::Dot,
        _ => Element::Dash,
    })
}

/// Lowercase and collapse runs of whitespace to single spaces. This is the
/// canonical form produced by decoding; Morse carries no letter case.
pub fn normalize(text: &str) -> String {
    text.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Error, PartialEq)]
pub enum MorseError {
    #[error("unsupported character {ch:?} at position {position}")]
    UnsupportedCharacter { position: usize, ch: char },
    #[error("no signal: nothing to classify")]
    NoSignal,
    #[error("ambiguous unit: on-duration clusters separated by {separation:.2}x, need 1.5x")]
    AmbiguousUnit { separation: f64 },
}

/// A parsed message: words of letters, each letter paired with its pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorseText {
    words: Vec<Vec<(char, &'static str)>>,
}

/// One step of a keyed transmission: an element, or the gap before the next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorseItem {
    Element(Element),
    Gap(GapKind),
}

impl MorseText {
    pub fn words(&self) -> &[Vec<(char, &'static str)>] {
        &self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Total number of dot/dash elements, the capacity available for keying.
    pub fn element_count(&self) -> usize {
        self.words
            .iter()
            .flatten()
            .map(|(_, p)| p.len())
            .sum()
    }

    /// All elements in transmission order, without gaps.
    pub fn flat_elements(&self) -> Vec<Element> {
        self.words
            .iter()
            .flatten()
            .flat_map(|(_, p)| pattern_elements(p))
            .collect()
    }

    /// Elements interleaved with the gaps that separate them.
    pub fn gapped_sequence(&self) -> Vec<MorseItem> {
        let mut seq = Vec::new();
        for (wi, word) in self.words.iter().enumerate() {
            if wi > 0 {
                seq.push(MorseItem::Gap(GapKind::InterWord));
            }
            for (li, (_, pattern)) in word.iter().enumerate() {
                if li > 0 {
                    seq.push(MorseItem::Gap(GapKind::InterSymbol));
                }
                for (ei, elem) in pattern_elements(pattern).enumerate() {
                    if ei > 0 {
                        seq.push(MorseItem::Gap(GapKind::IntraSymbol));
                    }
                    seq.push(MorseItem::Element(elem));
                }
            }
        }
        seq
    }

    /// The normalized text this message keys.
    pub fn to_text(&self) -> String {
        self.words
            .iter()
            .map(|w| w.iter().map(|(c, _)| *c).collect::<String>())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Parse text into element sequences per letter, keeping word boundaries.
/// Unsupported characters are rejected, never dropped.
pub fn text_to_elements(text: &str) -> Result<MorseText, MorseError> {
    let mut words = Vec::new();
    let mut word: Vec<(char, &'static str)> = Vec::new();
    for (position, ch) in text.chars().enumerate() {
        if ch.is_whitespace() {
            if !word.is_empty() {
                words.push(std::mem::take(&mut word));
            }
            continue;
        }
        let lower = ch.to_ascii_lowercase();
        match pattern_for(lower) {
            Some(pattern) => word.push((lower, pattern)),
            None => return Err(MorseError::UnsupportedCharacter { position, ch }),
        }
    }
    if !word.is_empty() {
        words.push(word);
    }
    Ok(MorseText { words })
}

/// One keyed or silent span, with its duration in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Run {
    pub on: bool,
    pub duration: f64,
}

impl Run {
    /// Key-down span.
    pub fn mark(duration: f64) -> Run {
        Run { on: true, duration }
    }

    /// Key-up span.
    pub fn space(duration: f64) -> Run {
        Run { on: false, duration }
    }
}

/// Exact nominal timeline for a message at the given dot duration.
pub fn elements_to_nominal_runs(text: &MorseText, unit: f64) -> Vec<Run> {
    assert!(unit > 0.0, "unit must be positive");
    text.gapped_sequence()
        .iter()
        .map(|item| match item {
            MorseItem::Element(e) => Run::mark(e.units() as f64 * unit),
            MorseItem::Gap(g) => Run::space(g.units() as f64 * unit),
        })
        .collect()
}

/// Result of classifying a run sequence back into text.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Dot duration used for thresholds: the hint if given, else estimated.
    pub unit: f64,
    /// Decoded text in normalized form.
    pub text: String,
    /// Measured duration and class of each element of `text`, in order.
    /// Aligned one-to-one with `text_to_elements(text).flat_elements()`.
    pub elements: Vec<(f64, Element)>,
}

/// Classify alternating on/off runs into text.
///
/// Runs shorter than `tolerance` times the unit are treated as glitches and
/// merged away first. On-runs split into dots and dashes at 2 units; off-runs
/// split into intra-letter, inter-letter, and inter-word gaps at 2 and 5
/// units. Without a `unit_hint` the unit is estimated by a two-cluster split
/// of the on-run durations.
pub fn classify_runs(
    runs: &[Run],
    unit_hint: Option<f64>,
    tolerance: f64,
) -> Result<String, MorseError> {
    classify_runs_detailed(runs, unit_hint, tolerance).map(|c| c.text)
}

/// As [`classify_runs`], but also returns the unit and per-element durations
/// needed by the timing side of the receiver.
pub fn classify_runs_detailed(
    runs: &[Run],
    unit_hint: Option<f64>,
    tolerance: f64,
) -> Result<Classification, MorseError> {
    assert!(
        tolerance > 0.0 && tolerance < 0.5,
        "tolerance must be in (0, 0.5)"
    );
    if let Some(u) = unit_hint {
        assert!(u > 0.0, "unit hint must be positive");
    }

    // A first unit estimate (possibly skewed by glitches) sets the merge
    // threshold; after cleanup the unit is re-estimated from sound runs.
    let rough_unit = match unit_hint {
        Some(u) => u,
        None => estimate_unit(&on_durations(runs))?,
    };
    let cleaned = merge_glitches(runs, tolerance * rough_unit);
    let unit = match unit_hint {
        Some(u) => u,
        None => estimate_unit(&on_durations(&cleaned))?,
    };
    if !cleaned.iter().any(|r| r.on) {
        return Err(MorseError::NoSignal);
    }

    let mut words: Vec<String> = Vec::new();
    let mut word = String::new();
    let mut pattern = String::new();
    // Durations of the letter being assembled; committed only if its pattern
    // is readable, so `elements` stays aligned with the decoded text.
    let mut pending: Vec<(f64, Element)> = Vec::new();
    let mut elements: Vec<(f64, Element)> = Vec::new();

    let mut flush_letter =
        |pattern: &mut String, pending: &mut Vec<(f64, Element)>, word: &mut String| {
            if !pattern.is_empty() {
                if let Some(c) = char_for_pattern(pattern) {
                    word.push(c);
                    elements.append(pending);
                } else {
                    pending.clear();
                }
                pattern.clear();
            }
        };

    for run in &cleaned {
        if run.on {
            let elem = if run.duration < 2.0 * unit {
                Element::Dot
            } else {
                Element::Dash
            };
            pattern.push(match elem {
                Element::Dot => '.',
                Element::Dash => '-',
            });
            pending.push((run.duration, elem));
        } else if !pattern.is_empty() {
            if run.duration < 2.0 * unit {
                // Intra-letter gap: keep accumulating the pattern.
            } else if run.duration < 5.0 * unit {
                flush_letter(&mut pattern, &mut pending, &mut word);
            } else {
                flush_letter(&mut pattern, &mut pending, &mut word);
                if !word.is_empty() {
                    words.push(std::mem::take(&mut word));
                }
            }
        }
    }
    flush_letter(&mut pattern, &mut pending, &mut word);
    if !word.is_empty() {
        words.push(word);
    }

    Ok(Classification {
        unit,
        text: words.join(" "),
        elements,
    })
}

fn on_durations(runs: &[Run]) -> Vec<f64> {
    runs.iter().filter(|r| r.on).map(|r| r.duration).collect()
}

/// Estimate the dot duration as the mean of the short cluster of a two-means
/// split over on-run durations, seeded at the extremes.
fn estimate_unit(durations: &[f64]) -> Result<f64, MorseError> {
    if durations.is_empty() {
        return Err(MorseError::NoSignal);
    }
    let mut short = durations.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut long = durations.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..64 {
        let midpoint = (short + long) / 2.0;
        let (mut s_sum, mut s_n, mut l_sum, mut l_n) = (0.0, 0usize, 0.0, 0usize);
        for &d in durations {
            if d <= midpoint {
                s_sum += d;
                s_n += 1;
            } else {
                l_sum += d;
                l_n += 1;
            }
        }
        if s_n == 0 || l_n == 0 {
            return Err(MorseError::AmbiguousUnit { separation: 1.0 });
        }
        let (new_short, new_long) = (s_sum / s_n as f64, l_sum / l_n as f64);
        if new_short == short && new_long == long {
            break;
        }
        short = new_short;
        long = new_long;
    }
    let separation = long / short;
    if separation < 1.5 {
        return Err(MorseError::AmbiguousUnit { separation });
    }
    Ok(short)
}

/// Remove runs shorter than `min_duration`: interior glitches are absorbed
/// into the spans on either side (which share a state), boundary glitches are
/// dropped. Shortest first, repeated to a fixpoint, so a second pass with the
/// same threshold changes nothing.
pub fn merge_glitches(runs: &[Run], min_duration: f64) -> Vec<Run> {
    let mut runs = runs.to_vec();
    loop {
        let glitch = runs
            .iter()
            .enumerate()
            .filter(|(_, r)| r.duration < min_duration)
            .min_by(|a, b| {
                a.1.duration
                    .partial_cmp(&b.1.duration)
                    .unwrap()
                    .then(a.0.cmp(&b.0))
            })
            .map(|(i, _)| i);
        let Some(i) = glitch else {
            return runs;
        };
        if i == 0 || i == runs.len() - 1 {
            runs.remove(i);
        } else {
            let merged = Run {
                on: runs[i - 1].on,
                duration: runs[i - 1].duration + runs[i].duration + runs[i + 1].duration,
            };
            runs.splice(i - 1..=i + 1, [merged]);
        }
    }
}
