//! Process exit codes. Each outcome has exactly one code.

use sepauto::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_NOT_PRESERVER: u8 = 2;
pub const EXIT_AMBIGUOUS: u8 = 3;
pub const EXIT_MALFORMED: u8 = 64;
pub const EXIT_SHAPE: u8 = 65;
pub const EXIT_IO: u8 = 66;
pub const EXIT_UNSUPPORTED: u8 = 69;
pub const EXIT_INTERNAL: u8 = 70;
pub const EXIT_USAGE: u8 = 72;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

pub fn code_for(err: &Error) -> u8 {
    match err {
        Error::Format(_) | Error::NotHermitian { .. } | Error::NotDensity(_) => EXIT_MALFORMED,
        Error::InvalidShape(_)
        | Error::DimensionMismatch { .. }
        | Error::InvalidSlots(_)
        | Error::InvalidPermutation(_) => EXIT_SHAPE,
        Error::Io(_) => EXIT_IO,
        Error::UnsupportedShape(_) => EXIT_UNSUPPORTED,
        Error::NonUnitary { .. } | Error::Noninvertible { .. } | Error::Configuration(_) => EXIT_INTERNAL,
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Self { code: code_for(&err), message: err.to_string() }
    }
}
