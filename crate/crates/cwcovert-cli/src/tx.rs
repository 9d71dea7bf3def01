use crate::error::CliError;
use crate::{diag, TxArgs};
use cwcovert::covert::{covert_text_to_symbols, modulate};
use cwcovert::dsp::{synthesize, wav_write, SynthesisConfig};
use cwcovert::keying::{natural_timeline, read_stats_file, CovertKey, GaussianStream};
use cwcovert::morse::text_to_elements;

pub fn run(args: &TxArgs) -> Result<(), CliError> {
    if args.message.trim().is_empty() {
        return Err(CliError::usage("the carrier message (-m) must not be empty"));
    }
    diag(format_args!("Saving output to {}", args.output.display()));
    diag(format_args!("Using coding frequency {} Hz", args.freq));
    diag(format_args!("Using sampling frequency {} Hz", args.rate));
    diag(format_args!("Getting statistics from {}", args.stats.display()));

    let stats = read_stats_file(&args.stats)?;
    let carrier = text_to_elements(&args.message)?;

    diag("Generating audio");
    let runs = match &args.key {
        // Keyed sender: every duration rides the key stream, with the covert
        // payload (possibly empty) as per-element offsets.
        Some(key) => {
            let symbols = match &args.covert {
                Some(covert) => covert_text_to_symbols(covert)?,
                None => Vec::new(),
            };
            let mut stream = CovertKey::new(key)?.stream();
            let mut gap_stream = GaussianStream::from_seed(args.seed);
            let gap_jitter = if args.no_gap_jitter { None } else { Some(&mut gap_stream) };
            modulate(&carrier, &symbols, &stats, &mut stream, gap_jitter)?.runs()
        }
        // Plain sender: ordinary hand-keyed scatter from the profile, the
        // kind of traffic cwtrain listens to.
        None => {
            let mut stream = GaussianStream::from_seed(args.seed);
            natural_timeline(&carrier, &stats, &mut stream)
        }
    };

    let config = SynthesisConfig {
        coding_frequency: args.freq,
        sample_rate: args.rate,
        ..Default::default()
    };
    let audio = synthesize(&runs, &config)?;
    wav_write(&audio, &args.output)?;
    diag("Finished.");
    Ok(())
}
