//! Error taxonomy shared by every module.
//!
//! The CLI maps these onto its exit-code contract: input/domain/logic errors
//! are caller mistakes, resource/size errors mean the request is too large
//! for the configured budget, numeric errors indicate a float-level failure,
//! and gap errors name the singular gap that was too small to extract frames.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: bad symbol, invalid weights, missing seed, ...
    #[error("input error: {0}")]
    Input(String),

    /// Parameter outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Non-finite values or a float computation that cannot proceed.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A singular gap needed for frame extraction is below tolerance.
    /// `which` is "sigma1/sigma2" or "sigma2/sigma3".
    #[error("gap error: relative gap {which} = {value:e} below tolerance {tol:e}")]
    Gap {
        which: &'static str,
        value: f64,
        tol: f64,
    },

    /// The request exceeds the resource budget; `estimate` is the projected
    /// cost in the stated unit so the caller can rescale.
    #[error("resource error: {what} (estimated {estimate:.3e} {unit}, budget {budget:.3e})")]
    Resource {
        what: String,
        estimate: f64,
        budget: f64,
        unit: &'static str,
    },

    /// A set-valued computation would materialize too many elements.
    #[error("size error: {0}; consider sampling or a smaller exponent")]
    Size(String),

    /// An internal invariant failed; indicates a bug, not bad input.
    #[error("logic error: {0}")]
    Logic(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
