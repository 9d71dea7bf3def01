use crate::error::CliError;
use crate::{diag, DetectArgs};
use cwcovert::detectability::{compare_to_expectation, compare_to_reference};
use cwcovert::dsp::{decode_pipeline, wav_read, DecoderConfig, DetectorConfig};
use cwcovert::keying::read_stats_file;

pub fn run(args: &DetectArgs) -> Result<(), CliError> {
    let config = DecoderConfig {
        detector: DetectorConfig {
            window_cycles: args.window_cycles,
            ..Default::default()
        },
        tolerance: args.tolerance,
        ..Default::default()
    };

    let audio = wav_read(&args.modulated)?;
    let decoded = decode_pipeline(&audio, &config)?;
    diag(format_args!(
        "Measured {} element durations in {}",
        decoded.elements.len(),
        args.modulated.display()
    ));

    let report = if let Some(path) = &args.stats {
        let stats = read_stats_file(path)?;
        compare_to_expectation(&decoded.elements, &stats)
    } else {
        let path = args.reference.as_ref().expect("clap requires reference or stats");
        let reference = decode_pipeline(&wav_read(path)?, &config)?;
        diag(format_args!(
            "Measured {} element durations in {}",
            reference.elements.len(),
            path.display()
        ));
        compare_to_reference(&decoded.elements, &reference.elements, None)
    };

    let text = format!("{report}");
    match &args.report {
        Some(path) => {
            std::fs::write(path, &text).map_err(CliError::io)?;
            diag(format_args!("Wrote report to {}", path.display()));
        }
        None => print!("{text}"),
    }
    diag("Finished.");
    Ok(())
}
