//! Statistical footprint of the timing channel: Kolmogorov-Smirnov distances
//! between observed element durations and what an unmodulated keyed sender
//! would produce. Everything here reports; nothing passes or fails, because
//! "looks like ordinary keying" is a judgment call left to the reader.

use crate::keying::KeyingStatistics;
use crate::morse::Element;
use std::fmt;

/// Two-sample KS statistic: the largest vertical gap between the empirical
/// CDFs. Zero means the sorted samples interleave perfectly; 1 means the
/// supports do not even overlap. NaNs are ignored.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = finite_sorted(a);
    let mut b = finite_sorted(b);
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { 1.0 };
    }
    let (n, m) = (a.len() as f64, b.len() as f64);
    a.push(f64::INFINITY);
    b.push(f64::INFINITY);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while a[i].is_finite() || b[j].is_finite() {
        let x = a[i].min(b[j]);
        while a[i] <= x {
            i += 1;
        }
        while b[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / n - j as f64 / m).abs());
    }
    sup
}

/// One-sample KS statistic against a model CDF, evaluated on both sides of
/// every step of the empirical CDF.
pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let sorted = finite_sorted(samples);
    if sorted.is_empty() {
        return 0.0;
    }
    let n = sorted.len() as f64;
    let mut sup = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        sup = sup.max((f - i as f64 / n).abs());
        sup = sup.max((f - (i + 1) as f64 / n).abs());
    }
    sup
}

fn finite_sorted(xs: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(|p, q| p.partial_cmp(q).unwrap());
    v
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// CDF of a keyed base duration: mean plus a standard normal deviate scaled
/// by `std` and wrapped into one standard deviation on either side. The
/// probability mass that would have landed beyond k sigmas folds back in,
/// hence the sum over 2k-shifted normal CDFs.
pub fn wrapped_normal_cdf(x: f64, mean: f64, std: f64) -> f64 {
    let t = (x - mean) / std;
    if t < -1.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in (-8..=8).map(|k| 2.0 * f64::from(k)) {
        p += normal_cdf(k + t) - normal_cdf(k - 1.0);
    }
    p.clamp(0.0, 1.0)
}

/// Per-class summary of one comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassReport {
    pub element: Element,
    pub count: usize,
    /// Sample mean of the observed durations, seconds.
    pub mean: f64,
    /// Sample standard deviation of the observed durations, seconds.
    pub std: f64,
    /// KS distance to the baseline (model CDF or reference sample).
    pub ks: f64,
    /// Fraction of durations outside the plausible keying envelope, which
    /// spans three sigma below to four above (the widest legal offset).
    pub outlier_fraction: f64,
}

/// What the observed durations were compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// The wrapped-normal distribution implied by a keying profile.
    Expectation,
    /// A second recording's measured durations.
    Recording,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectabilityReport {
    pub baseline: Baseline,
    pub dot: ClassReport,
    pub dash: ClassReport,
}

impl DetectabilityReport {
    /// 5% critical value for the KS statistic at this sample size; a rough
    /// yardstick for the reader, not a verdict.
    pub fn ks_critical(count: usize) -> f64 {
        if count == 0 {
            return f64::INFINITY;
        }
        1.36 / (count as f64).sqrt()
    }
}

impl fmt::Display for DetectabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.baseline {
            Baseline::Expectation => "keyed wrapped-normal expectation",
            Baseline::Recording => "reference recording",
        };
        writeln!(f, "duration statistics vs {what}")?;
        for report in [&self.dot, &self.dash] {
            writeln!(
                f,
                "{:>5}: n {:>5}  mean {:>8.3} ms  std {:>7.3} ms  ks {:.4} (5% crit {:.4})  outliers {:.2}%",
                report.element,
                report.count,
                report.mean * 1e3,
                report.std * 1e3,
                report.ks,
                Self::ks_critical(report.count),
                report.outlier_fraction * 100.0,
            )?;
        }
        Ok(())
    }
}

fn split_by_class(durations: &[(f64, Element)]) -> (Vec<f64>, Vec<f64>) {
    let mut dots = Vec::new();
    let mut dashes = Vec::new();
    for &(d, e) in durations {
        match e {
            Element::Dot => dots.push(d),
            Element::Dash => dashes.push(d),
        }
    }
    (dots, dashes)
}

fn moments(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn outlier_fraction(xs: &[f64], mean: f64, std: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let (lo, hi) = (mean - 3.0 * std, mean + 4.0 * std);
    xs.iter().filter(|&&x| x < lo || x > hi).count() as f64 / xs.len() as f64
}

fn class_report(
    element: Element,
    observed: &[f64],
    ks: f64,
    envelope: (f64, f64),
) -> ClassReport {
    let (mean, std) = moments(observed);
    ClassReport {
        element,
        count: observed.len(),
        mean,
        std,
        ks,
        outlier_fraction: outlier_fraction(observed, envelope.0, envelope.1),
    }
}

/// Compare measured element durations against the wrapped-normal law a keyed
/// sender with this profile would follow when sending no covert payload.
pub fn compare_to_expectation(
    durations: &[(f64, Element)],
    stats: &KeyingStatistics,
) -> DetectabilityReport {
    let (dots, dashes) = split_by_class(durations);
    let dot_ks = ks_one_sample(&dots, |x| wrapped_normal_cdf(x, stats.dot_mean, stats.dot_std));
    let dash_ks =
        ks_one_sample(&dashes, |x| wrapped_normal_cdf(x, stats.dash_mean, stats.dash_std));
    DetectabilityReport {
        baseline: Baseline::Expectation,
        dot: class_report(Element::Dot, &dots, dot_ks, (stats.dot_mean, stats.dot_std)),
        dash: class_report(Element::Dash, &dashes, dash_ks, (stats.dash_mean, stats.dash_std)),
    }
}

/// Compare measured element durations against a second recording's, class by
/// class. With a profile in hand its envelope bounds the outlier count;
/// otherwise the reference sample's own moments stand in.
pub fn compare_to_reference(
    durations: &[(f64, Element)],
    reference: &[(f64, Element)],
    stats: Option<&KeyingStatistics>,
) -> DetectabilityReport {
    let (dots, dashes) = split_by_class(durations);
    let (ref_dots, ref_dashes) = split_by_class(reference);
    let dot_envelope = match stats {
        Some(s) => (s.dot_mean, s.dot_std),
        None => moments(&ref_dots),
    };
    let dash_envelope = match stats {
        Some(s) => (s.dash_mean, s.dash_std),
        None => moments(&ref_dashes),
    };
    DetectabilityReport {
        baseline: Baseline::Recording,
        dot: class_report(Element::Dot, &dots, ks_two_sample(&dots, &ref_dots), dot_envelope),
        dash: class_report(
            Element::Dash,
            &dashes,
            ks_two_sample(&dashes, &ref_dashes),
            dash_envelope,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covert::{covert_text_to_symbols, modulate};
    use crate::keying::{base_duration, CovertKey, GaussianStream};
    use crate::morse::text_to_elements;

    const STATS_20WPM: KeyingStatistics = KeyingStatistics {
        dot_mean: 0.060,
        dot_std: 0.010,
        dash_mean: 0.180,
        dash_std: 0.010,
    };

    #[test]
    fn identical_samples_have_zero_distance() {
        let xs = [0.061, 0.054, 0.0701, 0.0555, 0.0662];
        assert_eq!(ks_two_sample(&xs, &xs), 0.0);
    }

    #[test]
    fn disjoint_samples_have_distance_one() {
        assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0], &[10.0, 11.0]), 1.0);
    }

    #[test]
    fn two_sample_handles_interleaved_values() {
        // ECDFs: after 1: 1/2 vs 0; after 2: 1/2 vs 1/2; after 3: 1 vs 1/2.
        assert!((ks_two_sample(&[1.0, 3.0], &[2.0, 4.0]) - 0.5).abs() < 1e-12);
        // Ties across both samples step together.
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
    }

    #[test]
    fn one_sample_against_own_quantiles_is_small() {
        // Deterministic grid of standard-normal quantile midpoints.
        let n = 1000;
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                let p = (i as f64 + 0.5) / n as f64;
                // crude quantile via bisection on the CDF
                let (mut lo, mut hi) = (-10.0, 10.0);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if normal_cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        let ks = ks_one_sample(&xs, normal_cdf);
        assert!(ks <= 0.5 / n as f64 + 1e-9, "ks {ks}");
    }

    #[test]
    fn normal_cdf_hits_known_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.8413447460685429).abs() < 1e-12);
        assert!((normal_cdf(-1.96) - 0.024997895148220435).abs() < 1e-12);
    }

    #[test]
    fn wrapped_cdf_is_a_proper_cdf_on_its_support() {
        let (mean, std) = (0.060, 0.010);
        assert_eq!(wrapped_normal_cdf(mean - 1.001 * std, mean, std), 0.0);
        assert_eq!(wrapped_normal_cdf(mean + 1.001 * std, mean, std), 1.0);
        assert!((wrapped_normal_cdf(mean + std, mean, std) - 1.0).abs() < 1e-12);
        let mut last = 0.0;
        for i in 0..=200 {
            let x = mean - std + 2.0 * std * i as f64 / 200.0;
            let p = wrapped_normal_cdf(x, mean, std);
            assert!((0.0..=1.0).contains(&p));
            assert!(p >= last - 1e-12, "not monotone at {x}");
            last = p;
        }
        // Wrapping folds the two tails onto the ends symmetrically, so the
        // median stays at the mean.
        assert!((wrapped_normal_cdf(mean, mean, std) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn wrapped_cdf_matches_a_big_keyed_sample() {
        let mut stream = GaussianStream::from_seed(31337);
        let sample: Vec<f64> = (0..20_000)
            .map(|_| base_duration(&mut stream, Element::Dot, &STATS_20WPM))
            .collect();
        let ks = ks_one_sample(&sample, |x| wrapped_normal_cdf(x, 0.060, 0.010));
        assert!(ks < 1.36 / (sample.len() as f64).sqrt(), "ks {ks}");
    }

    #[test]
    fn unmodulated_keyed_durations_match_expectation() {
        let mut stream = CovertKey::new("secret").unwrap().stream();
        let durations: Vec<(f64, Element)> = (0..4000)
            .map(|i| {
                let elem = if i % 2 == 0 { Element::Dot } else { Element::Dash };
                (base_duration(&mut stream, elem, &STATS_20WPM), elem)
            })
            .collect();
        let report = compare_to_expectation(&durations, &STATS_20WPM);
        let crit = DetectabilityReport::ks_critical(2000);
        assert_eq!(report.dot.count, 2000);
        assert_eq!(report.dash.count, 2000);
        assert!(report.dot.ks < crit, "dot ks {} vs {crit}", report.dot.ks);
        assert!(report.dash.ks < crit, "dash ks {} vs {crit}", report.dash.ks);
        assert_eq!(report.dot.outlier_fraction, 0.0);
        assert_eq!(report.dash.outlier_fraction, 0.0);
    }

    #[test]
    fn modulation_widens_the_footprint() {
        // The same carrier keyed with and without a payload: the modulated
        // durations sit visibly farther from the unmodulated sample.
        let carrier = text_to_elements(
            &"cq cq cq de test test k ".repeat(40),
        )
        .unwrap();
        let key = CovertKey::new("secret").unwrap();
        let quiet = modulate(&carrier, &[], &STATS_20WPM, &mut key.stream(), None).unwrap();
        let payload = covert_text_to_symbols(
            "the boats leave at dawn, watch the north pier until then.",
        )
        .unwrap();
        let loud = modulate(&carrier, &payload, &STATS_20WPM, &mut key.stream(), None).unwrap();
        let report = compare_to_reference(
            &loud.element_durations(),
            &quiet.element_durations(),
            Some(&STATS_20WPM),
        );
        assert!(report.dot.ks > 0.0 && report.dash.ks > 0.0);
        let text = report.to_string();
        assert!(text.contains("reference recording"));
        assert!(text.contains("dot") && text.contains("dash"));
    }
}
