use crate::error::CliError;
use crate::{diag, RxArgs};
use cwcovert::covert::demodulate;
use cwcovert::dsp::{decode_pipeline, wav_read, DecoderConfig, DetectorConfig};
use cwcovert::keying::{read_stats_file, CovertKey};

pub fn run(args: &RxArgs) -> Result<(), CliError> {
    let keyed = match (&args.stats, &args.key) {
        (Some(path), Some(key)) => {
            diag(format_args!(
                "Read statistics for covert demodulation from {}",
                path.display()
            ));
            Some((read_stats_file(path)?, CovertKey::new(key)?))
        }
        _ => None,
    };

    let audio = wav_read(&args.input)?;
    diag(format_args!(
        "Read {} samples from {} with sample frequency {} Hz and encoding pcm16",
        audio.samples.len(),
        args.input.display(),
        audio.sample_rate
    ));

    let config = DecoderConfig {
        detector: DetectorConfig {
            window_cycles: args.window_cycles,
            ..Default::default()
        },
        tolerance: args.tolerance,
        ..Default::default()
    };
    let decoded = decode_pipeline(&audio, &config)?;
    let d = &decoded.diagnostics;
    diag(format_args!("Signal average: {}", d.signal_average));
    diag(format_args!("Using dominant frequency: {} Hz", d.dominant_hz.round() as i64));
    diag(format_args!(
        "Filtering to between {} and {} Hz",
        d.band_low_hz.floor() as i64,
        d.band_high_hz.floor() as i64
    ));
    diag(format_args!("Decoding with tolerance: {:.3}", d.tolerance));

    println!("Message: {}", decoded.text);
    if let Some((stats, key)) = keyed {
        let covert = demodulate(&decoded.elements, &stats, &key, None)?;
        println!("Decoded: {}", covert.text);
    }
    diag("Finished");
    Ok(())
}
