//! Dominant-frequency estimation from an averaged periodogram.

use super::{AudioBuffer, DspError};
use rustfft::{num_complex::Complex, FftPlanner};

const FRAME: usize = 8192;

/// Frequency of the strongest spectral line.
///
/// Power spectra of non-overlapping 8192-sample frames are averaged and the
/// peak bin (excluding DC) wins; resolution is sample_rate/8192, just under
/// a hertz at 8 kHz.
pub fn dominant_frequency(buffer: &AudioBuffer) -> Result<f64, DspError> {
    if buffer.samples.len() < FRAME {
        return Err(DspError::TooShort {
            samples: buffer.samples.len(),
            need: FRAME,
        });
    }
    let fft = FftPlanner::<f32>::new().plan_fft_forward(FRAME);
    let mut power = vec![0.0f64; FRAME / 2];
    let mut frame: Vec<Complex<f32>> = Vec::with_capacity(FRAME);
    for chunk in buffer.samples.chunks_exact(FRAME) {
        frame.clear();
        frame.extend(chunk.iter().map(|&x| Complex::new(x, 0.0)));
        fft.process(&mut frame);
        for (p, c) in power.iter_mut().zip(&frame[..FRAME / 2]) {
            *p += c.norm_sqr() as f64;
        }
    }
    let peak = power[1..]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i + 1)
        .unwrap();
    Ok(peak as f64 * buffer.sample_rate as f64 / FRAME as f64)
}
