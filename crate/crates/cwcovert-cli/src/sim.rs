use crate::error::CliError;
use crate::{diag, SimArgs};
use cwcovert::channel::{csv_line, run_trials, ImpairmentSpec, CSV_HEADER};
use cwcovert::dsp::{DecoderConfig, DetectorConfig};
use cwcovert::keying::{read_stats_file, CovertKey};

pub fn run(args: &SimArgs) -> Result<(), CliError> {
    let stats = read_stats_file(&args.stats)?;
    let key = CovertKey::new(&args.key)?;
    let decoder = DecoderConfig {
        detector: DetectorConfig {
            window_cycles: args.window_cycles,
            ..Default::default()
        },
        ..Default::default()
    };

    // Sweep the cross product of the listed SNR and jitter points; an
    // unset axis contributes a single "absent" point.
    let snrs: Vec<Option<f64>> = if args.snr.is_empty() {
        vec![None]
    } else {
        args.snr.iter().copied().map(Some).collect()
    };
    let jitters: Vec<Option<f64>> = if args.jitter.is_empty() {
        vec![None]
    } else {
        args.jitter.iter().copied().map(Some).collect()
    };

    diag(format_args!(
        "Running {} trials per point, base seed {}",
        args.trials, args.seed
    ));
    let mut rows = vec![CSV_HEADER.to_string()];
    for &snr_db in &snrs {
        for &jitter_ms in &jitters {
            let spec = ImpairmentSpec {
                snr_db,
                jitter_ms,
                resample_hz: args.resample,
                fade_depth: args.fade,
                fade_period: args.fade_period,
            };
            let report = run_trials(
                &args.carrier,
                &args.covert,
                &stats,
                &key,
                &spec,
                &decoder,
                args.trials,
                args.seed,
            )?;
            let label = |v: Option<f64>, unit: &str| match v {
                Some(x) => format!("{x} {unit}"),
                None => "off".to_string(),
            };
            println!(
                "snr {} jitter {}: overt {}/{} covert {}/{} symbol error rate {:.4}",
                label(snr_db, "dB"),
                label(jitter_ms, "ms"),
                report.overt_exact,
                report.trials,
                report.covert_exact,
                report.trials,
                report.covert_symbol_error_rate
            );
            rows.push(csv_line(&spec, &report));
        }
    }

    if let Some(path) = &args.csv {
        let mut body = rows.join("\n");
        body.push('\n');
        std::fs::write(path, body).map_err(CliError::io)?;
        diag(format_args!("Wrote sweep CSV to {}", path.display()));
    }
    diag("Finished.");
    Ok(())
}
