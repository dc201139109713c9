//! Discrete extreme value mixture distributions for heavy-tailed count data.
//!
//! Two families are provided, both supported on the positive integers:
//!
//! * **geometric-IGPD**: a truncated geometric bulk on `1..=u` joined to an
//!   integer-valued generalised Pareto tail above `u`;
//! * **power-law-IGPD**: a truncated discrete power law bulk joined to the same
//!   tail.
//!
//! The threshold `u` is a parameter. It is estimated either by profile
//! likelihood ([`likelihood::profile_threshold`]) or by Metropolis-within-Gibbs
//! sampling ([`sampler::run_chain`]) jointly with a binary model indicator that
//! switches between the density-continuity-constrained and unconstrained
//! exceedance probability. [`posterior`] turns traces into survival bands,
//! Kolmogorov-Smirnov statistics and exponent summaries.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, threading and the
//! command line live in the `tailmix` crate.

#![cfg_attr(not(test), no_std)]
#![deny(rust_2018_idioms)]

extern crate alloc;

pub mod distributions;
mod error;
pub mod likelihood;
mod math;
pub mod optim;
pub mod posterior;
pub mod sampler;
pub mod special;
mod table;

pub use distributions::{BulkKind, MixturePmf, MixtureSpec, ParamVector, SurvivalCurve};
pub use error::{Error, Result, Side};
pub use likelihood::{ComponentFit, ProfilePoint, ThresholdProfile};
pub use posterior::{SurvivalBand, SurvivalBandRow};
pub use sampler::{McmcConfig, Model, PriorSpec, SigmaPrior, Trace, TraceRow};
pub use table::FrequencyTable;
