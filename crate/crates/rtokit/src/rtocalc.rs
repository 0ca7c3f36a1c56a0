//! The retransmission-timeout recursion over a stream of RTT samples.
//!
//! With gains `alpha`, `beta` and clock granularity `g`, all positive and
//! the gains below one:
//!
//! ```text
//! srtt_1   = S_1              rttvar_1 = S_1 / 2
//! srtt_i   = (1-alpha) * srtt_{i-1} + alpha * S_i
//! rttvar_i = (1-beta)  * rttvar_{i-1} + beta * |srtt_{i-1} - S_i|
//! rto_i    = srtt_i + max(g, 4 * rttvar_i)
//! ```
//!
//! The deviation update reads the *previous* srtt; regression tests pin
//! that ordering. Everything is exact — no rounding, no RTO floor, no
//! timer backoff.

use crate::exactnum::Rational;
use crate::{Error, Result};

/// Gains and clock granularity. `g` shares the time unit of the samples
/// and has no default: its size relative to the sample spread decides
/// whether timeouts can occur at all.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RtoParams {
    pub alpha: Rational,
    pub beta: Rational,
    pub g: Rational,
}

impl RtoParams {
    pub fn new(alpha: Rational, beta: Rational, g: Rational) -> Result<Self> {
        let unit = Rational::one();
        if !alpha.is_positive() || alpha >= unit {
            return Err(Error::InvalidParams(format!("alpha={alpha} not in (0,1)")));
        }
        if !beta.is_positive() || beta >= unit {
            return Err(Error::InvalidParams(format!("beta={beta} not in (0,1)")));
        }
        if !g.is_positive() {
            return Err(Error::InvalidParams(format!("g={g} not positive")));
        }
        Ok(RtoParams { alpha, beta, g })
    }

    /// RFC 6298's standard gains, alpha = 1/8 and beta = 1/4.
    pub fn standard(g: Rational) -> Result<Self> {
        RtoParams::new(Rational::new(1, 8), Rational::new(1, 4), g)
    }
}

/// One step of the recursion: the (srtt, rttvar, rto) triple at `step`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RtoState {
    pub step: u64,
    pub srtt: Rational,
    pub rttvar: Rational,
    pub rto: Rational,
}

impl RtoState {
    /// Builds a state from given smoothed values, recomputing the rto
    /// invariant `rto = srtt + max(g, 4 * rttvar)`. Used to resume a run
    /// from a known prior instead of the first-sample base case.
    pub fn resume(params: &RtoParams, step: u64, srtt: Rational, rttvar: Rational) -> RtoState {
        let rto = rto_of(params, &srtt, &rttvar);
        RtoState {
            step,
            srtt,
            rttvar,
            rto,
        }
    }
}

fn rto_of(params: &RtoParams, srtt: &Rational, rttvar: &Rational) -> Rational {
    let four_var = Rational::from(4i64) * rttvar;
    srtt + &params.g.clone().max(four_var)
}

fn check_sample(s: &Rational) -> Result<()> {
    if !s.is_positive() {
        return Err(Error::NonPositiveSample(s.to_string()));
    }
    Ok(())
}

/// Base case from the first sample: srtt = S, rttvar = S/2.
pub fn init(params: &RtoParams, first_sample: &Rational) -> Result<RtoState> {
    check_sample(first_sample)?;
    let srtt = first_sample.clone();
    let rttvar = first_sample / &Rational::from(2i64);
    let rto = rto_of(params, &srtt, &rttvar);
    Ok(RtoState {
        step: 1,
        srtt,
        rttvar,
        rto,
    })
}

/// Recursive case. The rttvar update uses `prev.srtt`, i.e. the smoothed
/// value from before this sample is folded in.
pub fn step(params: &RtoParams, prev: &RtoState, sample: &Rational) -> Result<RtoState> {
    check_sample(sample)?;
    let one = Rational::one();
    let deviation = (&prev.srtt - sample).abs();
    let rttvar = &(&(&one - &params.beta) * &prev.rttvar) + &(&params.beta * &deviation);
    let srtt = &(&(&one - &params.alpha) * &prev.srtt) + &(&params.alpha * sample);
    let rto = rto_of(params, &srtt, &rttvar);
    Ok(RtoState {
        step: prev.step + 1,
        srtt,
        rttvar,
        rto,
    })
}

/// Folds `init` then `step` over a non-empty sample sequence. Output length
/// equals input length.
pub fn run(params: &RtoParams, samples: &[Rational]) -> Result<Vec<RtoState>> {
    let (first, rest) = samples.split_first().ok_or(Error::EmptySamples)?;
    let mut states = Vec::with_capacity(samples.len());
    states.push(init(params, first)?);
    for s in rest {
        let next = step(params, states.last().expect("non-empty"), s)?;
        states.push(next);
    }
    Ok(states)
}

/// Folds `step` over samples starting from an explicit prior state.
/// Returns one state per sample; the prior itself is not included.
pub fn run_from(
    params: &RtoParams,
    prior: &RtoState,
    samples: &[Rational],
) -> Result<Vec<RtoState>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut states = Vec::with_capacity(samples.len());
    let mut current = prior.clone();
    for s in samples {
        current = step(params, &current, s)?;
        states.push(current.clone());
    }
    Ok(states)
}
