use std::io;

/// Errors raised by every fallible operation in the crate.
///
/// The variants line up with the CLI exit codes: input problems are
/// [`Error::Parse`] and [`Error::Invalid`], numeric preconditions are
/// [`Error::Domain`] and [`Error::Degenerate`], enumeration guards are
/// [`Error::Capacity`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate statistic: {0}")]
    Degenerate(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn kernel_window(kernel: &str, pop_size: usize, n: usize) -> Self {
        Error::Domain(format!(
            "kernel undefined at this (N,n): {kernel} needs a legal window, got N={pop_size}, n={n}"
        ))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
