//! Exact-rational analysis toolkit for the RFC 6298 retransmission-timeout
//! computation and Karn's RTT-sampling rule.
//!
//! Everything here is computed over arbitrary-precision rationals; no
//! floating point enters any result. The crate provides:
//!
//! * [`exactnum`] — the [`Rational`](exactnum::Rational) number type plus
//!   the ceiling utilities and an exact large-power comparator.
//! * [`limitwit`] — constructive witness functions `delta(alpha, eps)`
//!   certifying that `alpha^n` falls below any positive `eps` for all
//!   `n > delta`, by two independent constructions, with a brute-force
//!   oracle for cross-checking.
//! * [`rtocalc`] — the srtt/rttvar/rto recursion over a sample sequence.
//! * [`steadystate`] — closed-form bounds on srtt and rttvar when samples
//!   stay inside an interval `[c-r, c+r]`, and finite-n convergence
//!   certificates for their limits.
//! * [`netsim`] — a deterministic discrete-event simulation of a sender,
//!   a cumulative-ACK receiver, and a lossy channel, sampling RTTs only
//!   for packets transmitted exactly once.
//! * [`scenario`] — preset sample-sequence generators (periodic spike,
//!   uniform) and timeout detection.
//! * [`trace`] — the CSV trace format shared by the CLI subcommands.

pub mod exactnum;
pub mod limitwit;
pub mod netsim;
pub mod rtocalc;
pub mod scenario;
pub mod steadystate;
pub mod trace;

pub use exactnum::Rational;

use thiserror::Error;

/// Errors shared across the crate's modules.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("divisor must be positive")]
    NonPositiveDivisor,
    #[error("alpha must lie in [0, 1), got {0}")]
    AlphaOutOfRange(String),
    #[error("epsilon must be positive, got {0}")]
    EpsilonNotPositive(String),
    #[error("argument must be at least 1")]
    ZeroArgument,
    #[error("sample must be positive, got {0}")]
    NonPositiveSample(String),
    #[error("sample sequence is empty")]
    EmptySamples,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("window start m={m} must be less than n={n}")]
    BadWindow { m: u64, n: u64 },
    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),
}

pub type Result<T> = std::result::Result<T, Error>;
