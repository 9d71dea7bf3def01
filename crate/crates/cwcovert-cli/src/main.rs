//! One binary, five subcommands: transmit, receive, train, simulate, and a
//! detectability report. Decoded messages go to standard output; `**`
//! diagnostics go to standard error so pipelines see clean text.

mod detect;
mod error;
mod rx;
mod sim;
mod train;
mod tx;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "cwcovert", version, about = "Covert timing channel over Morse code audio")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Key a message into a WAV file, optionally with a covert payload.
    Cwtx(TxArgs),
    /// Decode a WAV file; with stats and key, also the covert payload.
    Cwrx(RxArgs),
    /// Derive keying statistics from an unmodulated recording.
    Cwtrain(TrainArgs),
    /// Monte-Carlo decode trials through an impaired channel.
    Cwsim(SimArgs),
    /// Report how far a recording's timing sits from unmodulated keying.
    Cwdetect(DetectArgs),
}

#[derive(clap::Args)]
struct TxArgs {
    /// Output WAV path.
    #[arg(short, long, value_name = "WAV")]
    output: PathBuf,
    /// Overt carrier message.
    #[arg(short, long, value_name = "TEXT")]
    message: String,
    /// Keying statistics file.
    #[arg(short, long, value_name = "STATSFILE")]
    stats: PathBuf,
    /// Covert payload to hide in the element timing.
    #[arg(short, long, value_name = "TEXT", requires = "key")]
    covert: Option<String>,
    /// Shared secret key; alone it keys an unmodulated carrier.
    #[arg(short, long, value_name = "KEY")]
    key: Option<String>,
    /// Tone frequency in Hz.
    #[arg(long, default_value_t = 900.0, value_name = "HZ")]
    freq: f64,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 8000, value_name = "HZ")]
    rate: u32,
    /// Key the gaps at their exact nominal lengths instead of wobbling them.
    #[arg(long)]
    no_gap_jitter: bool,
    /// Seed for the gap wobble and for the unkeyed sender's scatter.
    #[arg(long, default_value_t = 0, value_name = "N")]
    seed: u64,
}

#[derive(clap::Args)]
struct RxArgs {
    /// Input WAV path.
    #[arg(short, long, value_name = "WAV")]
    input: PathBuf,
    /// Keying statistics file; together with --key enables covert decode.
    #[arg(short = 'c', long = "stats", value_name = "STATSFILE", requires = "key")]
    stats: Option<PathBuf>,
    /// Shared secret key.
    #[arg(short, long, value_name = "KEY", requires = "stats")]
    key: Option<String>,
    /// Glitch-merge tolerance as a fraction of the dot length.
    #[arg(long, default_value_t = 0.3, value_name = "FRACTION")]
    tolerance: f64,
    /// Envelope detector window width in carrier cycles; 3 rides noise.
    #[arg(long, default_value_t = 1, value_name = "N")]
    window_cycles: u32,
}

#[derive(clap::Args)]
struct TrainArgs {
    /// Input WAV path.
    #[arg(short, long, value_name = "WAV")]
    input: PathBuf,
    /// Statistics file to write.
    #[arg(short, long, value_name = "STATSFILE")]
    output: PathBuf,
    /// Glitch-merge tolerance as a fraction of the dot length.
    #[arg(long, default_value_t = 0.3, value_name = "FRACTION")]
    tolerance: f64,
    /// Envelope detector window width in carrier cycles.
    #[arg(long, default_value_t = 1, value_name = "N")]
    window_cycles: u32,
}

#[derive(clap::Args)]
struct SimArgs {
    /// Overt carrier message.
    #[arg(long, value_name = "TEXT")]
    carrier: String,
    /// Covert payload.
    #[arg(long, value_name = "TEXT", default_value = "")]
    covert: String,
    /// Keying statistics file.
    #[arg(long, value_name = "STATSFILE")]
    stats: PathBuf,
    /// Shared secret key.
    #[arg(long, value_name = "KEY")]
    key: String,
    /// In-band SNR points in dB; several values sweep the channel.
    #[arg(long, value_delimiter = ',', value_name = "DB")]
    snr: Vec<f64>,
    /// Edge jitter bounds in milliseconds; several values sweep.
    #[arg(long, value_delimiter = ',', value_name = "MS")]
    jitter: Vec<f64>,
    /// Resample the audio through this rate and back.
    #[arg(long, value_name = "HZ")]
    resample: Option<u32>,
    /// Slow fade depth in [0, 1).
    #[arg(long, value_name = "DEPTH")]
    fade: Option<f64>,
    /// Fade period in seconds.
    #[arg(long, default_value_t = 1.0, value_name = "S")]
    fade_period: f64,
    /// Trials per sweep point.
    #[arg(long, default_value_t = 20, value_name = "N")]
    trials: usize,
    /// Base seed; trial i uses seed + i.
    #[arg(long, default_value_t = 0, value_name = "N")]
    seed: u64,
    /// Write sweep rows to this CSV file.
    #[arg(long, value_name = "CSV")]
    csv: Option<PathBuf>,
    /// Detector window width; defaults to the noise-robust 3 cycles.
    #[arg(long, default_value_t = 3, value_name = "N")]
    window_cycles: u32,
}

#[derive(clap::Args)]
struct DetectArgs {
    /// Recording under test.
    #[arg(long, value_name = "WAV")]
    modulated: PathBuf,
    /// Unmodulated recording to compare against.
    #[arg(long, value_name = "WAV", conflicts_with = "stats", required_unless_present = "stats")]
    reference: Option<PathBuf>,
    /// Keying profile giving the unmodulated expectation.
    #[arg(long, value_name = "STATSFILE")]
    stats: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Glitch-merge tolerance as a fraction of the dot length.
    #[arg(long, default_value_t = 0.3, value_name = "FRACTION")]
    tolerance: f64,
    /// Envelope detector window width in carrier cycles.
    #[arg(long, default_value_t = 1, value_name = "N")]
    window_cycles: u32,
}

fn diag(line: impl std::fmt::Display) {
    eprintln!("** {line}");
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Cwtx(args) => tx::run(&args),
        Command::Cwrx(args) => rx::run(&args),
        Command::Cwtrain(args) => train::run(&args),
        Command::Cwsim(args) => sim::run(&args),
        Command::Cwdetect(args) => detect::run(&args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(err.code());
    }
}
