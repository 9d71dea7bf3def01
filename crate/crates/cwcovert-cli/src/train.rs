use crate::error::CliError;
use crate::{diag, TrainArgs};
use cwcovert::dsp::{wav_read, DecoderConfig, DetectorConfig};
use cwcovert::keying::{derive_stats, write_stats_file};

pub fn run(args: &TrainArgs) -> Result<(), CliError> {
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
    let stats = derive_stats(&audio, &config)?;
    diag(format_args!(
        "Derived dot {:.1} ms (std {:.1}), dash {:.1} ms (std {:.1})",
        stats.dot_mean * 1000.0,
        stats.dot_std * 1000.0,
        stats.dash_mean * 1000.0,
        stats.dash_std * 1000.0
    ));
    diag(format_args!("Saving statistics to {}", args.output.display()));
    write_stats_file(&stats, &args.output)?;
    diag("Finished.");
    Ok(())
}
