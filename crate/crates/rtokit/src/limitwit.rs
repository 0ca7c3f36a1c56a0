//! Constructive convergence witnesses for `alpha^n -> 0` on `0 <= alpha < 1`.
//!
//! Each witness function returns a `delta` such that `alpha^n < eps` holds
//! exactly for every `n > delta`. Two independent constructions are
//! provided — one built on the ceiling function, one on the binomial
//! theorem via halving — plus a brute-force scan that serves as an oracle
//! for both. Nothing here is trusted: [`WitnessResult::verify`] re-checks
//! the contract with exact arithmetic.

use num_bigint::BigUint;
use num_traits::{One, Pow, Zero};
use std::cmp::Ordering;

use crate::exactnum::{ceil_scaled_pow, cmp_pow, Rational};
use crate::{Error, Result};

/// Which construction produced a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessMethod {
    Ceiling,
    BinomialManual,
    BinomialSemiAuto,
    BruteForce,
}

impl WitnessMethod {
    pub fn name(&self) -> &'static str {
        match self {
            WitnessMethod::Ceiling => "ceiling",
            WitnessMethod::BinomialManual => "binomial-manual",
            WitnessMethod::BinomialSemiAuto => "binomial",
            WitnessMethod::BruteForce => "brute-force",
        }
    }
}

/// A witness `delta` with the inputs it certifies.
///
/// Contract: for all `n > delta`, `alpha^n < epsilon`, exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessResult {
    pub delta: BigUint,
    pub method: WitnessMethod,
    pub alpha: Rational,
    pub epsilon: Rational,
}

impl WitnessResult {
    /// Exact re-check of the contract at `n = delta+1 ..= delta+horizon`.
    pub fn verify(&self, horizon: u64) -> bool {
        witness_holds(&self.alpha, &self.epsilon, &self.delta, horizon)
    }
}

/// True iff `alpha^n < eps` exactly for every `n` in `(delta, delta+horizon]`.
pub fn witness_holds(alpha: &Rational, eps: &Rational, delta: &BigUint, horizon: u64) -> bool {
    (1..=horizon).all(|j| cmp_pow(alpha, &(delta + j), eps) == Ordering::Less)
}

fn validate(alpha: &Rational, eps: &Rational) -> Result<()> {
    if alpha.is_negative() || *alpha >= Rational::one() {
        return Err(Error::AlphaOutOfRange(alpha.to_string()));
    }
    if !eps.is_positive() {
        return Err(Error::EpsilonNotPositive(eps.to_string()));
    }
    Ok(())
}

/// `k = ceil(alpha / (1 - alpha))`, the index from which the hyperbolic
/// envelope dominates `alpha^n`. Requires `0 < alpha < 1`.
pub fn envelope_start(alpha: &Rational) -> Result<BigUint> {
    if !alpha.is_positive() || *alpha >= Rational::one() {
        return Err(Error::AlphaOutOfRange(alpha.to_string()));
    }
    let k = alpha.checked_div(&(Rational::one() - alpha))?.ceil();
    Ok(k.magnitude().clone())
}

/// The envelope value `k * alpha^k / n` with `k = ceil(alpha/(1-alpha))`.
/// Requires `0 < alpha < 1` and `n >= 1`. Evaluates the power literally, so
/// keep `k` (i.e. `alpha`'s closeness to 1) moderate.
pub fn power_envelope(alpha: &Rational, n: &BigUint) -> Result<Rational> {
    if n.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let k = envelope_start(alpha)?;
    let k_rat = Rational::from(k.clone());
    Ok(&(&k_rat * &alpha.pow_big(&k)) / &Rational::from(n.clone()))
}

/// Ceiling-construction witness: `delta = max(k, d)` with
/// `k = ceil(alpha/(1-alpha))` and `d = ceil(k * alpha^k / eps')` where
/// `eps' = min(eps, 1) / 2`. The halving turns the construction's `<=`
/// into the strict `<` the contract requires.
pub fn ceiling_delta(alpha: &Rational, eps: &Rational) -> Result<WitnessResult> {
    validate(alpha, eps)?;
    let delta = if alpha.is_zero() {
        BigUint::zero()
    } else {
        let eps_eff = eps.clone().min(Rational::one()) / Rational::from(2i64);
        let k = envelope_start(alpha)?;
        let scale = Rational::from(k.clone()).checked_div(&eps_eff)?;
        let d = ceil_scaled_pow(&scale, alpha, &k);
        k.max(d.magnitude().clone())
    };
    Ok(WitnessResult {
        delta,
        method: WitnessMethod::Ceiling,
        alpha: alpha.clone(),
        epsilon: eps.clone(),
    })
}

/// Smallest exponent `e >= start` with `q < 2^e`, by repeated doubling.
pub fn pow2_threshold(start: u64, q: &BigUint) -> u64 {
    let mut e = start;
    let mut threshold = BigUint::one() << e;
    while *q >= threshold {
        e += 1;
        threshold <<= 1;
    }
    e
}

/// Halving depth of `eps`: `pow2_threshold(0, denominator(eps))`, which
/// guarantees `1/2^d < eps`.
pub fn halving_depth(eps: &Rational) -> Result<u64> {
    if !eps.is_positive() {
        return Err(Error::EpsilonNotPositive(eps.to_string()));
    }
    Ok(pow2_threshold(0, &eps.denom_abs()))
}

/// Binomial-construction witness: `delta = p * d` where `p` is the
/// numerator of `alpha` in lowest terms (so `alpha^p <= 1/2`) and
/// `d = halving_depth(min(eps, 1))` (so `(1/2)^d < eps`). Then for
/// `n > p*d`: `alpha^n <= (alpha^p)^floor(n/p) <= (1/2)^d < eps`.
pub fn binomial_delta(alpha: &Rational, eps: &Rational) -> Result<WitnessResult> {
    validate(alpha, eps)?;
    let delta = if alpha.is_zero() {
        BigUint::zero()
    } else {
        let eps_eff = eps.clone().min(Rational::one());
        let d = halving_depth(&eps_eff)?;
        alpha.numer_abs() * d
    };
    Ok(WitnessResult {
        delta,
        method: WitnessMethod::BinomialSemiAuto,
        alpha: alpha.clone(),
        epsilon: eps.clone(),
    })
}

/// Linear-scan oracle: the smallest `delta <= cap` with
/// `alpha^(delta+1) < eps`, or `None` if no such delta exists below the
/// cap. Since `alpha^n` is nonincreasing for `alpha < 1`, the first hit is
/// the minimum and every valid witness is `>=` it.
pub fn brute_force_min_delta(alpha: &Rational, eps: &Rational, cap: u64) -> Result<Option<u64>> {
    validate(alpha, eps)?;
    let mut power = alpha.clone();
    for delta in 0..=cap {
        if power < *eps {
            return Ok(Some(delta));
        }
        power = &power * alpha;
    }
    Ok(None)
}

/// Exact check of `2 * n^n <= (1+n)^n`. Requires `n >= 1`; expected to hold
/// for every such `n`.
pub fn check_binomial_inequality(n: u64) -> Result<bool> {
    if n == 0 {
        return Err(Error::ZeroArgument);
    }
    let nn = BigUint::from(n);
    let lhs = BigUint::from(2u32) * Pow::pow(&nn, n);
    let rhs = Pow::pow(&(nn + 1u32), n);
    Ok(lhs <= rhs)
}

/// Witness dispatch used by the CLI and the convergence planner.
pub fn witness_for(
    method: WitnessMethod,
    alpha: &Rational,
    eps: &Rational,
) -> Result<WitnessResult> {
    match method {
        WitnessMethod::Ceiling => ceiling_delta(alpha, eps),
        WitnessMethod::BinomialManual | WitnessMethod::BinomialSemiAuto => {
            binomial_delta(alpha, eps)
        }
        WitnessMethod::BruteForce => {
            let cap = 1_000_000;
            match brute_force_min_delta(alpha, eps, cap)? {
                Some(d) => Ok(WitnessResult {
                    delta: BigUint::from(d),
                    method: WitnessMethod::BruteForce,
                    alpha: alpha.clone(),
                    epsilon: eps.clone(),
                }),
                None => Err(Error::InvalidParams(format!(
                    "no witness below scan cap {cap}"
                ))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn envelope_examples() {
        // alpha = 1/2: k = ceil(1) = 1, k*alpha^k = 1/2
        assert_eq!(power_envelope(&r(1, 2), &big(1)).unwrap(), r(1, 2));
        assert_eq!(power_envelope(&r(1, 2), &big(4)).unwrap(), r(1, 8));
        assert!(power_envelope(&r(1, 2), &big(0)).is_err());
        assert!(power_envelope(&r(3, 2), &big(1)).is_err());
        assert!(power_envelope(&Rational::zero(), &big(1)).is_err());
    }

    #[test]
    fn envelope_at_start_equals_power() {
        // k * alpha^k / k = alpha^k
        for alpha in [r(1, 2), r(3, 4), r(9, 10), r(1, 7)] {
            let k = envelope_start(&alpha).unwrap();
            assert_eq!(
                power_envelope(&alpha, &k).unwrap(),
                alpha.pow_big(&k),
                "alpha={alpha}"
            );
        }
    }

    #[test]
    fn ceiling_delta_examples() {
        assert_eq!(
            ceiling_delta(&Rational::zero(), &r(1, 100)).unwrap().delta,
            BigUint::zero()
        );
        // alpha=1/2, eps=1/8: eps'=1/16, k=1, d=ceil((1/2)/(1/16))=8
        let w = ceiling_delta(&r(1, 2), &r(1, 8)).unwrap();
        assert_eq!(w.delta, big(8));
        assert_eq!(r(1, 2).pow(9), Rational::new(1, 512));
        assert!(r(1, 2).pow(9) < r(1, 8));
        assert!(w.verify(10));

        let w = ceiling_delta(&r(3, 4), &r(1, 10)).unwrap();
        let next = w.delta.clone() + 1u32;
        assert!(r(3, 4).pow_big(&next) < r(1, 10));
        assert!(w.verify(10));
        // the scan oracle agrees it is a valid (not undersized) witness
        let min = brute_force_min_delta(&r(3, 4), &r(1, 10), 1000).unwrap().unwrap();
        assert!(w.delta >= BigUint::from(min));
    }

    #[test]
    fn ceiling_delta_rejects_bad_inputs() {
        assert!(ceiling_delta(&r(-1, 2), &r(1, 10)).is_err());
        assert!(ceiling_delta(&Rational::one(), &r(1, 10)).is_err());
        assert!(ceiling_delta(&r(1, 2), &Rational::zero()).is_err());
        assert!(ceiling_delta(&r(1, 2), &r(-1, 10)).is_err());
    }

    #[test]
    fn pow2_threshold_examples() {
        assert_eq!(pow2_threshold(3, &big(5)), 3);
        assert_eq!(pow2_threshold(0, &big(1)), 1);
        assert_eq!(pow2_threshold(0, &big(8)), 4);
        assert_eq!(pow2_threshold(0, &BigUint::zero()), 0);
    }

    #[test]
    fn halving_depth_examples() {
        assert_eq!(halving_depth(&r(1, 10)).unwrap(), 4);
        assert!(r(1, 16) < r(1, 10));
        assert_eq!(halving_depth(&Rational::one()).unwrap(), 1);
        assert!(r(1, 2) < Rational::one());
        assert_eq!(halving_depth(&r(3, 7)).unwrap(), 3);
        assert!(r(1, 8) < r(3, 7));
        assert!(halving_depth(&Rational::zero()).is_err());
    }

    #[test]
    fn binomial_delta_examples() {
        let w = binomial_delta(&r(3, 4), &r(1, 10)).unwrap();
        assert_eq!(w.delta, big(12));
        // (3/4)^13 = 1594323/67108864 < 1/10
        assert_eq!(r(3, 4).pow(13), Rational::new(1_594_323, 67_108_864));
        assert!(r(3, 4).pow(13) < r(1, 10));

        let w = binomial_delta(&r(1, 2), &r(1, 10)).unwrap();
        assert_eq!(w.delta, big(4));
        assert_eq!(r(1, 2).pow(5), r(1, 32));

        let w = binomial_delta(&Rational::zero(), &Rational::from(5i64)).unwrap();
        assert_eq!(w.delta, BigUint::zero());
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_min_delta(&r(1, 2), &r(1, 8), 100).unwrap(), Some(3));
        assert_eq!(
            brute_force_min_delta(&Rational::zero(), &Rational::one(), 10).unwrap(),
            Some(0)
        );
        assert_eq!(brute_force_min_delta(&r(9, 10), &r(1, 2), 100).unwrap(), Some(6));
        // (9/10)^7 < 1/2 <= (9/10)^6
        assert!(r(9, 10).pow(7) < r(1, 2));
        assert!(r(9, 10).pow(6) >= r(1, 2));
        assert_eq!(brute_force_min_delta(&r(99, 100), &r(1, 100), 10).unwrap(), None);
    }

    #[test]
    fn binomial_inequality_examples() {
        assert!(check_binomial_inequality(1).unwrap()); // 2 <= 2
        assert!(check_binomial_inequality(2).unwrap()); // 8 <= 9
        assert!(check_binomial_inequality(5).unwrap()); // 6250 <= 7776
        assert!(check_binomial_inequality(0).is_err());
        for n in 1..=50 {
            assert!(check_binomial_inequality(n).unwrap(), "n={n}");
        }
    }

    fn arb_alpha() -> impl Strategy<Value = Rational> {
        // 0 < alpha < 1
        (1i64..=200, 2i64..=200)
            .prop_filter_map("alpha in (0,1)", |(p, q)| (p < q).then(|| Rational::new(p, q)))
    }

    fn arb_eps() -> impl Strategy<Value = Rational> {
        (1i64..=300, 1i64..=300).prop_map(|(a, b)| Rational::new(a, b))
    }

    proptest! {
        #[test]
        fn both_witnesses_satisfy_contract(alpha in arb_alpha(), eps in arb_eps()) {
            for w in [ceiling_delta(&alpha, &eps).unwrap(), binomial_delta(&alpha, &eps).unwrap()] {
                // literal route, independent of cmp_pow
                let mut power = alpha.pow_big(&(w.delta.clone() + 1u32));
                for j in 1..=6u64 {
                    prop_assert!(power < eps, "method {:?} delta {} n delta+{j}", w.method, w.delta);
                    power = &power * &alpha;
                }
                prop_assert!(w.verify(6));
            }
        }

        #[test]
        fn witnesses_are_at_least_the_scan_minimum(alpha in arb_alpha(), eps in arb_eps()) {
            if let Some(min) = brute_force_min_delta(&alpha, &eps, 20_000).unwrap() {
                let min = BigUint::from(min);
                prop_assert!(ceiling_delta(&alpha, &eps).unwrap().delta >= min);
                prop_assert!(binomial_delta(&alpha, &eps).unwrap().delta >= min);
            }
        }

        #[test]
        fn pow2_threshold_is_minimal(start in 0u64..=20, q in 0u64..=1_000_000u64) {
            let q = BigUint::from(q);
            let e = pow2_threshold(start, &q);
            prop_assert!(e >= start);
            prop_assert!(q < (BigUint::one() << e));
            if e > start {
                prop_assert!(q >= (BigUint::one() << (e - 1)));
            }
        }

        #[test]
        fn halving_depth_beats_eps(a in 1i64..=1000, b in 1i64..=1000) {
            let eps = Rational::new(a, b);
            let d = halving_depth(&eps).unwrap();
            let half_pow = Rational::new(1, 2).pow(d);
            prop_assert!(half_pow < eps);
            // and 1/2^threshold(0,q) < 1/q
            let dq = pow2_threshold(0, &BigUint::from(b as u64));
            prop_assert!(Rational::new(1, 2).pow(dq) < Rational::new(1, b));
        }

        #[test]
        fn exponent_is_monotone(alpha in arb_alpha(), k in 1u64..=40, extra in 0u64..=40) {
            let n = k + extra;
            prop_assert!(alpha.pow(n) <= alpha.pow(k));
        }

        #[test]
        fn alpha_to_its_numerator_is_at_most_half(alpha in arb_alpha()) {
            let p = alpha.numer_abs();
            prop_assert!(cmp_pow(&alpha, &p, &r(1, 2)) != Ordering::Greater);
        }

        #[test]
        fn fraction_below_one_is_at_most_x_over_1_plus_x(alpha in arb_alpha()) {
            // alpha = x/y in lowest terms, alpha < 1 implies alpha <= x/(1+x)
            let x = Rational::from(alpha.numer_abs());
            let bound = &x / &(&x + &Rational::one());
            prop_assert!(alpha <= bound);
        }

        #[test]
        fn small_alpha_power_of_denominator_below_eps(
            a in 1i64..=100, c in 1i64..=50, y in 1i64..=40,
        ) {
            // alpha <= 1/2, eps = x/y: alpha^y <= eps
            let alpha = Rational::new(a, 2 * a + c);
            let eps = Rational::new(c, y);
            let yy = eps.denom_abs().to_u64().unwrap();
            prop_assert!(alpha.pow(yy) <= eps);
        }

        #[test]
        fn envelope_dominates_powers(alpha in arb_alpha(), span in 0u64..=20) {
            let k = envelope_start(&alpha).unwrap();
            // alpha <= k/(1+k)
            let k_rat = Rational::from(k.clone());
            prop_assert!(alpha <= &k_rat / &(&k_rat + &Rational::one()));
            let n = k.clone() + span;
            prop_assert!(alpha.pow_big(&n) <= power_envelope(&alpha, &n).unwrap());
        }

        #[test]
        fn index_ratio_is_monotone(k in 0u64..=1000, extra in 0u64..=1000) {
            let n = k + extra;
            prop_assert!(
                Rational::new(k as i64, k as i64 + 1) <= Rational::new(n as i64, n as i64 + 1)
            );
        }
    }
}
