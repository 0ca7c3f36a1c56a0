//! Closed-form bounds on the recursion while samples stay in `[c-r, c+r]`,
//! and finite-n certificates for what those bounds converge to.
//!
//! Indexing convention: the *prior* state (srtt_prior, rttvar_prior) sits at
//! state index 0 and samples are then fed one per step, so
//! [`srtt_bounds`]`(spec, n)` brackets the srtt after `n + 1` further
//! samples, matching the exponent `n + 1` in the closed forms:
//!
//! ```text
//! L(n) = (1-a)^(n+1) srtt_prior + (1 - (1-a)^(n+1)) (c - r)
//! H(n) = (1-a)^(n+1) srtt_prior + (1 - (1-a)^(n+1)) (c + r)
//! ```
//!
//! As `n` grows, `L -> c-r`, `H -> c+r`, and the rttvar bound tends to
//! `2r`; [`convergence_n_for`] turns those limits into explicit cutoffs by
//! reducing each to a power-decay witness from [`crate::limitwit`].

use num_bigint::BigUint;
use num_traits::Zero;
use std::cmp::Ordering;

use crate::exactnum::{cmp_pow, Rational};
use crate::limitwit::{witness_for, WitnessMethod};
use crate::rtocalc::RtoParams;
use crate::{Error, Result};

/// A steady-state window: center, radius, gains, and the state the window
/// starts from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SteadySpec {
    pub center: Rational,
    pub radius: Rational,
    pub params: RtoParams,
    pub srtt_prior: Rational,
    pub rttvar_prior: Rational,
}

impl SteadySpec {
    pub fn new(
        center: Rational,
        radius: Rational,
        params: RtoParams,
        srtt_prior: Rational,
        rttvar_prior: Rational,
    ) -> Result<Self> {
        if !radius.is_positive() {
            return Err(Error::InvalidParams(format!("radius={radius} not positive")));
        }
        if &center - &radius <= Rational::zero() {
            return Err(Error::InvalidParams(format!(
                "c - r = {} must be positive so samples stay positive",
                &center - &radius
            )));
        }
        if !srtt_prior.is_positive() || !rttvar_prior.is_positive() {
            return Err(Error::InvalidParams("priors must be positive".into()));
        }
        Ok(SteadySpec {
            center,
            radius,
            params,
            srtt_prior,
            rttvar_prior,
        })
    }

    pub fn low(&self) -> Rational {
        &self.center - &self.radius
    }

    pub fn high(&self) -> Rational {
        &self.center + &self.radius
    }
}

/// The bound values at one window length, as emitted into trace reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub n: u64,
    pub lower: Rational,
    pub upper: Rational,
    pub delta_m: Rational,
    pub rttvar_upper: Rational,
}

/// Assembles every bound at window length `n` with split `m`.
pub fn bound_report(
    spec: &SteadySpec,
    n: u64,
    m: u64,
    rttvar_at: Option<&Rational>,
) -> Result<BoundReport> {
    let (lower, upper) = srtt_bounds(spec, n);
    debug_assert!(lower <= upper);
    Ok(BoundReport {
        n,
        lower,
        upper,
        delta_m: delta_m(spec, m),
        rttvar_upper: rttvar_upper(spec, n, m, rttvar_at)?,
    })
}

/// True iff every sample lies in the closed interval `[c-r, c+r]`.
pub fn is_steady_state(samples: &[Rational], center: &Rational, radius: &Rational) -> bool {
    let lo = center - radius;
    let hi = center + radius;
    samples.iter().all(|s| lo <= *s && *s <= hi)
}

/// Cumulative smoothing weight `sum_{j=0..k} (1-alpha)^j alpha` in closed
/// form `1 - (1-alpha)^(k+1)`. Debug builds re-derive small cases by the
/// literal sum.
pub fn geometric_weight(alpha: &Rational, k: u64) -> Result<Rational> {
    if !alpha.is_positive() || *alpha >= Rational::one() {
        return Err(Error::AlphaOutOfRange(alpha.to_string()));
    }
    let decay = Rational::one() - alpha;
    let weight = Rational::one() - decay.pow(k + 1);
    debug_assert!(
        k > 64 || {
            let mut sum = Rational::zero();
            for j in 0..=k {
                sum = &sum + &(&decay.pow(j) * alpha);
            }
            sum == weight
        }
    );
    Ok(weight)
}

/// `(L, H)` bracketing the srtt after `n + 1` in-window samples.
pub fn srtt_bounds(spec: &SteadySpec, n: u64) -> (Rational, Rational) {
    let decay = (Rational::one() - &spec.params.alpha).pow(n + 1);
    let weight = Rational::one() - &decay;
    let lower = &(&decay * &spec.srtt_prior) + &(&weight * &spec.low());
    let upper = &(&decay * &spec.srtt_prior) + &(&weight * &spec.high());
    (lower, upper)
}

/// One branch of the per-step deviation envelope at state index `u`:
/// `2r + (1-alpha)^u (srtt_prior - (c+r))`. At `u = 0` this is exactly
/// `srtt_prior - (c-r)`.
fn deviation_branch_high(spec: &SteadySpec, u: u64) -> Rational {
    let decay = (Rational::one() - &spec.params.alpha).pow(u);
    let two_r = Rational::from(2i64) * &spec.radius;
    &two_r + &(&decay * &(&spec.srtt_prior - &spec.high()))
}

/// The other branch: `2r + (1-alpha)^u ((c-r) - srtt_prior)`.
fn deviation_branch_low(spec: &SteadySpec, u: u64) -> Rational {
    let decay = (Rational::one() - &spec.params.alpha).pow(u);
    let two_r = Rational::from(2i64) * &spec.radius;
    &two_r + &(&decay * &(&spec.low() - &spec.srtt_prior))
}

/// The deviation constant as written in the bound's derivation,
/// `Delta_m = (1-alpha)^(m+1) srtt_prior + 2r - (1-alpha)^(m+1)(c+r)`.
/// This is the branch that dominates when the prior sits above the window;
/// see [`delta_window`] for the two-sided envelope that is always an upper
/// bound on `|srtt_{j-1} - S_j|`.
pub fn delta_m(spec: &SteadySpec, m: u64) -> Rational {
    deviation_branch_high(spec, m + 1)
}

/// Exact upper bound on `|srtt_{j-1} - S_j|` over every step the window
/// `[m, n]` covers (state indices `u = m ..= n` supply the srtt read by
/// steps `m+1 ..= n+1`). Each branch is monotone in `u`, so the supremum
/// is attained at a window endpoint.
pub fn delta_window(spec: &SteadySpec, m: u64, n: u64) -> Rational {
    debug_assert!(m <= n);
    deviation_branch_high(spec, m)
        .max(deviation_branch_high(spec, n))
        .max(deviation_branch_low(spec, m))
        .max(deviation_branch_low(spec, n))
}

fn rttvar_bound_shape(beta: &Rational, steps: u64, start: &Rational, delta: &Rational) -> Rational {
    let decay = (Rational::one() - beta).pow(steps);
    &(&decay * start) + &(&(Rational::one() - &decay) * delta)
}

/// The rttvar bound `(1-b)^(n+1-m) rttvar_at + (1-(1-b)^(n+1-m)) Delta_m`
/// with the literal [`delta_m`]. Requires `m < n`. For `m = 0` the start
/// value is the spec's prior; for `m > 0` the caller must supply the
/// running `rttvar` at state index `m` from a concrete trace.
pub fn rttvar_upper(
    spec: &SteadySpec,
    n: u64,
    m: u64,
    rttvar_at: Option<&Rational>,
) -> Result<Rational> {
    let start = rttvar_start(spec, n, m, rttvar_at)?;
    Ok(rttvar_bound_shape(
        &spec.params.beta,
        n + 1 - m,
        &start,
        &delta_m(spec, m),
    ))
}

/// Same shape as [`rttvar_upper`] but with the two-sided [`delta_window`]
/// envelope, which makes it a certified upper bound on the running rttvar
/// after `n + 1` samples. Accepts `m <= n`.
pub fn rttvar_upper_window(
    spec: &SteadySpec,
    n: u64,
    m: u64,
    rttvar_at: Option<&Rational>,
) -> Result<Rational> {
    if m > n {
        return Err(Error::BadWindow { m, n });
    }
    let start = match rttvar_at {
        Some(v) => v.clone(),
        None if m == 0 => spec.rttvar_prior.clone(),
        None => {
            return Err(Error::InvalidParams(
                "rttvar at the window start is required when m > 0".into(),
            ))
        }
    };
    Ok(rttvar_bound_shape(
        &spec.params.beta,
        n + 1 - m,
        &start,
        &delta_window(spec, m, n),
    ))
}

fn rttvar_start(
    spec: &SteadySpec,
    n: u64,
    m: u64,
    rttvar_at: Option<&Rational>,
) -> Result<Rational> {
    if m >= n {
        return Err(Error::BadWindow { m, n });
    }
    match rttvar_at {
        Some(v) => Ok(v.clone()),
        None if m == 0 => Ok(spec.rttvar_prior.clone()),
        None => Err(Error::InvalidParams(
            "rttvar at the window start is required when m > 0".into(),
        )),
    }
}

/// The asymptotic-form rttvar bound with the deviation pinned at `2r`:
/// `(1-b)^(n+1) rttvar_prior + (1-(1-b)^(n+1)) 2r`. This is the quantity
/// whose limit is exactly `2r`.
pub fn rttvar_steady_bound(spec: &SteadySpec, n: u64) -> Rational {
    rttvar_bound_shape(
        &spec.params.beta,
        n + 1,
        &spec.rttvar_prior,
        &(Rational::from(2i64) * &spec.radius),
    )
}

/// Which limit a convergence cutoff certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceTarget {
    /// `L(n) -> c - r`
    SrttLower,
    /// `H(n) -> c + r`
    SrttUpper,
    /// `rttvar_steady_bound(n) -> 2r`
    RttvarBound,
}

fn target_gap(spec: &SteadySpec, target: ConvergenceTarget) -> (Rational, Rational) {
    // (decay base, |start - limit|): the target quantity at window length n
    // differs from its limit by exactly base^(n+1) * gap.
    match target {
        ConvergenceTarget::SrttLower => (
            Rational::one() - &spec.params.alpha,
            (&spec.srtt_prior - &spec.low()).abs(),
        ),
        ConvergenceTarget::SrttUpper => (
            Rational::one() - &spec.params.alpha,
            (&spec.srtt_prior - &spec.high()).abs(),
        ),
        ConvergenceTarget::RttvarBound => (
            Rational::one() - &spec.params.beta,
            (&spec.rttvar_prior - &(Rational::from(2i64) * &spec.radius)).abs(),
        ),
    }
}

/// Returns `N` such that for every `n >= N` the target quantity lies within
/// `eps` of its limit, exactly. Reduces to a power-decay witness: with
/// `M = max(1, |start - limit|)`, any `delta` certifying
/// `base^j < eps / M` for `j > delta` works as `N`.
pub fn convergence_n_for(
    spec: &SteadySpec,
    target: ConvergenceTarget,
    eps: &Rational,
    method: WitnessMethod,
) -> Result<BigUint> {
    if !eps.is_positive() {
        return Err(Error::EpsilonNotPositive(eps.to_string()));
    }
    let (base, gap) = target_gap(spec, target);
    if gap.is_zero() {
        return Ok(BigUint::zero());
    }
    let scale = gap.max(Rational::one());
    let witness = witness_for(method, &base, &eps.checked_div(&scale)?)?;
    Ok(witness.delta)
}

/// Exact check that the target quantity at window length `n` is within
/// `eps` of its limit, i.e. `base^(n+1) * |start - limit| < eps`. Decided
/// through the scaled comparator so `n` may be astronomically large.
pub fn within_eps_of_limit(
    spec: &SteadySpec,
    target: ConvergenceTarget,
    eps: &Rational,
    n: &BigUint,
) -> bool {
    let (base, gap) = target_gap(spec, target);
    if gap.is_zero() {
        return eps.is_positive();
    }
    let threshold = match eps.checked_div(&gap) {
        Ok(t) => t,
        Err(_) => return false,
    };
    cmp_pow(&base, &(n + 1u32), &threshold) == Ordering::Less
}
