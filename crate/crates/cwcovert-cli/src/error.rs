//! Error-to-exit-code mapping: 2 usage, 3 capacity, 4 I/O, 5 no usable
//! signal.

use cwcovert::covert::CovertError;
use cwcovert::keying::KeyingError;
use cwcovert::morse::MorseError;
use cwcovert::channel::ChannelError;
use cwcovert::dsp::DspError;
use std::fmt;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_NO_SIGNAL: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    message: String,
    code: i32,
}

impl CliError {
    pub fn new(message: impl Into<String>, code: i32) -> CliError {
        CliError { message: message.into(), code }
    }

    pub fn usage(message: impl Into<String>) -> CliError {
        CliError::new(message, EXIT_USAGE)
    }

    pub fn io(message: impl fmt::Display) -> CliError {
        CliError::new(message.to_string(), EXIT_IO)
    }

    pub fn code(&self) -> i32 {
        self.code
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<MorseError> for CliError {
    fn from(err: MorseError) -> CliError {
        let code = match err {
            // Bad characters come from the command line; a signal whose
            // timing cannot be classified comes from the air.
            MorseError::UnsupportedCharacter { .. } => EXIT_USAGE,
            MorseError::NoSignal | MorseError::AmbiguousUnit { .. } => EXIT_NO_SIGNAL,
        };
        CliError::new(err.to_string(), code)
    }
}

impl From<DspError> for CliError {
    fn from(err: DspError) -> CliError {
        match err {
            DspError::Morse(inner) => inner.into(),
            DspError::ConfigInvalid { .. } => CliError::new(err.to_string(), EXIT_USAGE),
            DspError::Wav(_) | DspError::UnsupportedFormat { .. } => {
                CliError::new(err.to_string(), EXIT_IO)
            }
            DspError::EmptySignal | DspError::NoSignal | DspError::TooShort { .. } => {
                CliError::new(err.to_string(), EXIT_NO_SIGNAL)
            }
        }
    }
}

impl From<KeyingError> for CliError {
    fn from(err: KeyingError) -> CliError {
        match err {
            KeyingError::Decode(inner) => inner.into(),
            KeyingError::EmptyKey => CliError::new(err.to_string(), EXIT_USAGE),
            KeyingError::InsufficientSamples { .. } => {
                CliError::new(err.to_string(), EXIT_NO_SIGNAL)
            }
            KeyingError::InvalidStatistics { .. }
            | KeyingError::ParseError { .. }
            | KeyingError::MissingField { .. }
            | KeyingError::InvalidValue { .. }
            | KeyingError::Io(_) => CliError::new(err.to_string(), EXIT_IO),
        }
    }
}

impl From<CovertError> for CliError {
    fn from(err: CovertError) -> CliError {
        match err {
            CovertError::Morse(inner) => inner.into(),
            CovertError::Keying(inner) => inner.into(),
            CovertError::InsufficientCarrier { .. } => {
                CliError::new(err.to_string(), EXIT_CAPACITY)
            }
            CovertError::StatsMismatch { .. } => CliError::new(err.to_string(), EXIT_NO_SIGNAL),
        }
    }
}

impl From<ChannelError> for CliError {
    fn from(err: ChannelError) -> CliError {
        match err {
            ChannelError::Morse(inner) => inner.into(),
            ChannelError::Covert(inner) => inner.into(),
            ChannelError::Dsp(inner) => inner.into(),
            ChannelError::ConfigInvalid { .. } => CliError::new(err.to_string(), EXIT_USAGE),
        }
    }
}
