use thiserror::Error;

use crate::rootfind::RootError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside its domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error(transparent)]
    Root(#[from] RootError),

    /// The angle falls outside the stationary-point window, so the closed
    /// form for the interior maximum does not apply.
    #[error("phi = {phi} lies outside the stationary window ({lo}, {hi}]")]
    Case { phi: f64, lo: f64, hi: f64 },

    #[error("degenerate circle point: rho = sigma = 0")]
    Degenerate,

    /// Lower and upper bounds disagree beyond tolerance. Always a bug.
    #[error("bounds disagree at delta = {delta}: m = {lower}, M = {upper}, gap = {gap:e}")]
    EqualityViolation {
        delta: f64,
        lower: f64,
        upper: f64,
        gap: f64,
    },

    #[error("invalid quantum state: {0}")]
    State(String),
}

pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        expected,
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(domain("delta", delta, "0 <= delta <= 1"))
    }
}
