//! Mono PCM16 WAV reading and writing.

use super::{AudioBuffer, DspError};
use std::path::Path;

/// Write samples as 16-bit little-endian PCM, rounding to the nearest step.
pub fn wav_write(buffer: &AudioBuffer, path: &Path) -> Result<(), DspError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: buffer.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec)?;
    for &s in &buffer.samples {
        let v = (s as f64 * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(v)?;
    }
    writer.finalize()?;
    Ok(())
}

/// Read a mono PCM16 file back to floats in [-1, 1].
pub fn wav_read(path: &Path) -> Result<AudioBuffer, DspError> {
    let mut reader = hound::WavReader::open(path)?;
    let spec = reader.spec();
    if spec.channels != 1
        || spec.bits_per_sample != 16
        || spec.sample_format != hound::SampleFormat::Int
    {
        return Err(DspError::UnsupportedFormat {
            detail: format!(
                "{} channel(s), {}-bit {}",
                spec.channels,
                spec.bits_per_sample,
                match spec.sample_format {
                    hound::SampleFormat::Int => "integer",
                    hound::SampleFormat::Float => "float",
                }
            ),
        });
    }
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|v| v as f32 / 32768.0))
        .collect::<Result<Vec<_>, _>>()?;
    if samples.is_empty() {
        return Err(DspError::EmptySignal);
    }
    Ok(AudioBuffer { samples, sample_rate: spec.sample_rate })
}
