use core::fmt;

use crate::sampler::Model;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Which side of the threshold an observation falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `x <= u`
    Bulk,
    /// `x > u`
    Tail,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Bulk => f.write_str("at or below"),
            Side::Tail => f.write_str("above"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("frequency table has no positive observations")]
    EmptyTable,
    #[error("no observations {side} threshold {u}")]
    DegenerateSide { side: Side, u: u64 },
    #[error("no threshold has exceedance proportion within [{lo}, {hi}]")]
    NoCandidates { lo: f64, hi: f64 },
    #[error("trace is empty")]
    EmptyTrace,
    #[error("model {unvisited} never visited; Bayes factor bound {bound}")]
    DegenerateTrace { unvisited: Model, bound: f64 },
    #[error("could not find a starting state with finite log-posterior")]
    Initialization,
    #[error("invalid configuration: {0}")]
    Config(&'static str),
}
