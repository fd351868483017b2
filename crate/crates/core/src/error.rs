use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates a configuration invariant.
    #[error("configuration error: {0}")]
    Config(String),

    /// An input vector has the wrong length for the requested framing.
    #[error("framing error: {what} expects {expected} elements, got {actual}")]
    Framing {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// Zero-forcing would divide by a zero channel response.
    #[error("equalization singularity: channel response is zero on data subcarrier {bin}")]
    Singularity { bin: usize },

    /// Inverse transform of a supposedly Hermitian spectrum was not real.
    #[error("imaginary residue {residue:e} exceeds bound {bound:e}")]
    ImaginaryResidue { residue: f64, bound: f64 },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn framing(what: &'static str, expected: usize, actual: usize) -> Self {
        Error::Framing {
            what,
            expected,
            actual,
        }
    }
}
