//! Exact arbitrary-precision rational arithmetic.
//!
//! [`Rational`] wraps a `num_rational::BigRational` kept in canonical lowest
//! terms with a positive denominator, so `numer`/`denom` are well-defined for
//! every value. On top of the field operations this module provides the
//! ceiling utilities (`ceil`, [`ceil_div`]) and two big-power helpers,
//! [`cmp_pow`] and [`ceil_scaled_pow`], which decide questions about `x^n`
//! exactly even when the literal power would have billions of digits.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// An exact rational number in canonical form: lowest terms, denominator > 0.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds `numer/denom`, reducing to canonical form.
    ///
    /// Panics if `denom` is zero; use [`Rational::checked_div`] when the
    /// divisor is not statically known to be nonzero.
    pub fn new<N: Into<BigInt>, D: Into<BigInt>>(numer: N, denom: D) -> Self {
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Signed numerator of the canonical form.
    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    /// Denominator of the canonical form, always positive.
    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// |numerator| as an unsigned integer.
    pub fn numer_abs(&self) -> BigUint {
        self.0.numer().magnitude().clone()
    }

    pub fn denom_abs(&self) -> BigUint {
        self.0.denom().magnitude().clone()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    /// Exact `self^n` with `0^0 = 1`.
    pub fn pow(&self, n: u64) -> Rational {
        self.pow_big(&BigUint::from(n))
    }

    /// Exact `self^n` for an arbitrary-precision exponent. The caller is
    /// responsible for the result fitting in memory; see [`cmp_pow`] for
    /// comparisons that avoid materializing the power.
    pub fn pow_big(&self, n: &BigUint) -> Rational {
        if n.is_zero() {
            return Rational::one();
        }
        // Coprime numerator and denominator stay coprime under powers, so
        // the result is already canonical.
        let numer = Pow::pow(self.0.numer(), n);
        let denom = Pow::pow(self.0.denom(), n);
        Rational(BigRational::new_raw(numer, denom))
    }

    /// Smallest integer >= self.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Division with an explicit error on a zero divisor.
    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational> {
        if rhs.is_zero() {
            Err(Error::DivisionByZero)
        } else {
            Ok(Rational(&self.0 / &rhs.0))
        }
    }

    pub fn min(self, other: Rational) -> Rational {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Rational) -> Rational {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Decimal approximation with `digits` fractional digits, rounded half
    /// away from zero. Only used for report formatting; every computation in
    /// this crate stays exact.
    pub fn to_decimal_string(&self, digits: u32) -> String {
        let sign = if self.is_negative() { "-" } else { "" };
        let a = self.abs();
        let scale = BigInt::from(10u32).pow(digits);
        // round(|x| * 10^digits) = floor((2 * numer * 10^digits + denom) / (2 * denom))
        let doubled: BigInt = a.numer() * &scale * 2 + a.denom();
        let scaled = doubled.div_floor(&(a.denom() * 2));
        let (int_part, frac_part) = scaled.div_rem(&scale);
        if digits == 0 {
            format!("{sign}{int_part}")
        } else {
            format!(
                "{sign}{int_part}.{frac:0>width$}",
                frac = frac_part,
                width = digits as usize
            )
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // "p/q", or just "p" when the denominator is one.
        self.0.fmt(f)
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(v)))
    }
}

impl From<u64> for Rational {
    fn from(v: u64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(v)))
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational(BigRational::from_integer(v))
    }
}

impl From<BigUint> for Rational {
    fn from(v: BigUint) -> Self {
        Rational(BigRational::from_integer(BigInt::from(v)))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `"p/q"`, a bare integer `"p"`, or a finite decimal literal
    /// such as `"67.5"` (converted exactly to `135/2`). The sign goes on the
    /// numerator.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let err = || Error::ParseRational(s.to_string());
        if let Some((n, d)) = t.split_once('/') {
            let numer: BigInt = n.trim().parse().map_err(|_| err())?;
            let dt = d.trim();
            if dt.is_empty() || !dt.chars().all(|c| c.is_ascii_digit()) {
                return Err(err());
            }
            let denom: BigInt = dt.parse().map_err(|_| err())?;
            if denom.is_zero() {
                return Err(err());
            }
            Ok(Rational(BigRational::new(numer, denom)))
        } else if t.contains('.') {
            parse_decimal(t).ok_or_else(err)
        } else {
            let v: BigInt = t.parse().map_err(|_| err())?;
            Ok(Rational(BigRational::from_integer(v)))
        }
    }
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (negative, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = rest.split_once('.')?;
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let int_v = if int_part.is_empty() {
        BigUint::zero()
    } else {
        int_part.parse::<BigUint>().ok()?
    };
    let frac_v = if frac_part.is_empty() {
        BigUint::zero()
    } else {
        frac_part.parse::<BigUint>().ok()?
    };
    let denom = BigUint::from(10u32).pow(frac_part.len() as u32);
    let numer = int_v * &denom + frac_v;
    let mut numer = BigInt::from(numer);
    if negative {
        numer = -numer;
    }
    Some(Rational(BigRational::new(numer, BigInt::from(denom))))
}

/// Smallest integer z with z >= x/y. Requires y > 0.
pub fn ceil_div(x: &Rational, y: &Rational) -> Result<BigInt> {
    if !y.is_positive() {
        return Err(Error::NonPositiveDivisor);
    }
    Ok((x / y).ceil())
}

// --- exact decisions about large powers ---------------------------------
//
// A witness delta can be on the order of 10^12, so checking `alpha^n < eps`
// by evaluating the power is hopeless in general. Instead we track the power
// through binary exponentiation as a pair of dyadic bounds
// `lo <= base^n <= hi` with mantissas truncated (down for lo, up for hi) to
// a working precision, and refine the precision until the bounds separate
// the comparison. Equality of `base^n` with a rational is only possible when
// both literal powers are small (coprimality forces `q^n | b` and
// `p^n | a`), and that case is settled literally, so the refinement loop
// terminates with an exact answer.

/// Dyadic bound: value = m * 2^e, m >= 1.
#[derive(Clone)]
struct Fx {
    m: BigUint,
    e: i128,
}

impl Fx {
    fn one() -> Fx {
        Fx {
            m: BigUint::one(),
            e: 0,
        }
    }
}

fn fx_norm(mut m: BigUint, mut e: i128, prec: u64, round_up: bool) -> Fx {
    let bits = m.bits();
    if bits > prec {
        let k = bits - prec;
        let dropped = round_up && !(&m & ((BigUint::one() << k) - 1u32)).is_zero();
        m >>= k;
        if dropped {
            m += 1u32;
        }
        e += k as i128;
    }
    Fx { m, e }
}

fn fx_mul(a: &Fx, b: &Fx, prec: u64, round_up: bool) -> Fx {
    fx_norm(&a.m * &b.m, a.e + b.e, prec, round_up)
}

fn fx_from_ratio(num: &BigUint, den: &BigUint, prec: u64, round_up: bool) -> Fx {
    let shift = prec + den.bits();
    let scaled = num << shift;
    let (quot, rem) = scaled.div_rem(den);
    let m = if round_up && !rem.is_zero() {
        quot + 1u32
    } else {
        quot
    };
    fx_norm(m, -(shift as i128), prec, round_up)
}

/// Bounds on (num/den)^exp for a positive base, exp >= 1.
fn fx_pow_bounds(num: &BigUint, den: &BigUint, exp: &BigUint, prec: u64) -> (Fx, Fx) {
    let base_lo = fx_from_ratio(num, den, prec, false);
    let base_hi = fx_from_ratio(num, den, prec, true);
    let mut lo = Fx::one();
    let mut hi = Fx::one();
    for i in (0..exp.bits()).rev() {
        lo = fx_mul(&lo, &lo, prec, false);
        hi = fx_mul(&hi, &hi, prec, true);
        if exp.bit(i) {
            lo = fx_mul(&lo, &base_lo, prec, false);
            hi = fx_mul(&hi, &base_hi, prec, true);
        }
    }
    (lo, hi)
}

/// Compares m*2^e with a/b (all positive) exactly.
fn fx_cmp_ratio(fx: &Fx, a: &BigUint, b: &BigUint) -> Ordering {
    let lhs = &fx.m * b;
    let lhs_bits = lhs.bits() as i128 + fx.e;
    let rhs_bits = a.bits() as i128;
    match lhs_bits.cmp(&rhs_bits) {
        Ordering::Equal => {
            if fx.e >= 0 {
                (lhs << fx.e as u64).cmp(a)
            } else {
                lhs.cmp(&(a << (-fx.e) as u64))
            }
        }
        other => other,
    }
}

fn fx_ceil(fx: &Fx) -> BigUint {
    if fx.e >= 0 {
        &fx.m << fx.e as u64
    } else {
        let s = (-fx.e) as u64;
        let floor = &fx.m >> s;
        if (&fx.m & ((BigUint::one() << s) - 1u32)).is_zero() {
            floor
        } else {
            floor + 1u32
        }
    }
}

const LITERAL_BITS_LIMIT: u128 = 4096;
const PREC_START: u64 = 128;
const PREC_LIMIT: u64 = 1 << 16;

fn literal_feasible(p_bits: u64, q_bits: u64, exp: &BigUint) -> bool {
    match exp.to_u128() {
        Some(n) => n.saturating_mul(p_bits.max(q_bits) as u128) <= LITERAL_BITS_LIMIT,
        None => false,
    }
}

/// True when base^exp could equal a value whose relevant side has
/// `limit_bits` bits. Coprimality forces the literal power to divide that
/// side, which pins its size.
fn equality_feasible(base_bits: u64, exp: &BigUint, limit_bits: u64) -> bool {
    if base_bits <= 1 {
        return true; // base component is 1
    }
    match exp.to_u128() {
        Some(n) => n.saturating_mul((base_bits - 1) as u128) < limit_bits as u128,
        None => false,
    }
}

/// Exact three-way comparison of `base^exp` against `rhs`, without
/// materializing the power unless it is small. `0^0 = 1`.
pub fn cmp_pow(base: &Rational, exp: &BigUint, rhs: &Rational) -> Ordering {
    if exp.is_zero() {
        return Rational::one().cmp(rhs);
    }
    if base.is_zero() {
        return Rational::zero().cmp(rhs);
    }
    if base.is_negative() {
        let mag = base.abs();
        return if exp.is_even() {
            cmp_pow(&mag, exp, rhs)
        } else if rhs.is_negative() {
            cmp_pow(&mag, exp, &rhs.abs()).reverse()
        } else {
            Ordering::Less
        };
    }
    // base > 0 from here on
    if !rhs.is_positive() {
        return Ordering::Greater;
    }
    let p = base.numer_abs();
    let q = base.denom_abs();
    if p == q {
        return Rational::one().cmp(rhs);
    }
    let a = rhs.numer_abs();
    let b = rhs.denom_abs();
    if literal_feasible(p.bits(), q.bits(), exp)
        || (equality_feasible(p.bits(), exp, a.bits()) && equality_feasible(q.bits(), exp, b.bits()))
    {
        return base.pow_big(exp).cmp(rhs);
    }
    // Equality is now impossible, so the bounds eventually separate.
    let mut prec = PREC_START;
    loop {
        let (lo, hi) = fx_pow_bounds(&p, &q, exp, prec);
        if fx_cmp_ratio(&hi, &a, &b) == Ordering::Less {
            return Ordering::Less;
        }
        if fx_cmp_ratio(&lo, &a, &b) == Ordering::Greater {
            return Ordering::Greater;
        }
        if prec >= PREC_LIMIT {
            return base.pow_big(exp).cmp(rhs);
        }
        prec *= 2;
    }
}

/// Exact `ceil(scale * base^exp)` for positive `scale` and `base`, again
/// without materializing the power when it is large.
pub fn ceil_scaled_pow(scale: &Rational, base: &Rational, exp: &BigUint) -> BigInt {
    debug_assert!(scale.is_positive() && base.is_positive());
    if exp.is_zero() {
        return scale.ceil();
    }
    let p = base.numer_abs();
    let q = base.denom_abs();
    let sn = scale.numer_abs();
    let sd = scale.denom_abs();
    if literal_feasible(p.bits(), q.bits(), exp)
        || (equality_feasible(p.bits(), exp, sd.bits()) && equality_feasible(q.bits(), exp, sn.bits()))
    {
        return (scale * &base.pow_big(exp)).ceil();
    }
    let mut prec = PREC_START;
    loop {
        let (lo, hi) = fx_pow_bounds(&p, &q, exp, prec);
        let vlo = fx_mul(&lo, &fx_from_ratio(&sn, &sd, prec, false), prec, false);
        let vhi = fx_mul(&hi, &fx_from_ratio(&sn, &sd, prec, true), prec, true);
        let clo = fx_ceil(&vlo);
        let chi = fx_ceil(&vhi);
        if clo == chi {
            return BigInt::from(clo);
        }
        if prec >= PREC_LIMIT {
            return (scale * &base.pow_big(exp)).ceil();
        }
        prec *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn field_op_examples() {
        assert_eq!(r(1, 2) + r(1, 3), r(5, 6));
        assert_eq!(r(3, 4) * r(4, 3), Rational::one());
        let zero = r(7, 10) - r(7, 10);
        assert!(zero.is_zero());
        assert_eq!(zero.denom(), &BigInt::from(1));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(
            r(1, 2).checked_div(&Rational::zero()),
            Err(Error::DivisionByZero)
        );
        assert_eq!(r(1, 2).checked_div(&r(1, 3)), Ok(r(3, 2)));
    }

    #[test]
    fn pow_examples() {
        assert_eq!(r(1, 2).pow(4), r(1, 16));
        // oracle: direct multiplication
        assert_eq!(r(3, 4).pow(3), &(&r(3, 4) * &r(3, 4)) * &r(3, 4));
        assert_eq!(r(5, 7).pow(0), Rational::one());
        assert_eq!(Rational::zero().pow(0), Rational::one());
        assert_eq!(Rational::zero().pow(5), Rational::zero());
    }

    #[test]
    fn ceil_examples() {
        assert_eq!(r(5, 2).ceil(), BigInt::from(3));
        assert_eq!(r(-1, 2).ceil(), BigInt::from(0));
        assert_eq!(Rational::from(4i64).ceil(), BigInt::from(4));
    }

    #[test]
    fn ceil_div_examples() {
        assert_eq!(
            ceil_div(&Rational::from(7i64), &Rational::from(2i64)).unwrap(),
            BigInt::from(4)
        );
        assert_eq!(
            ceil_div(&Rational::from(6i64), &Rational::from(2i64)).unwrap(),
            BigInt::from(3)
        );
        let q = ceil_div(&r(1, 2), &r(1, 16)).unwrap();
        assert_eq!(q, BigInt::from(8));
        // (1/2)/(1/16) = 8 exactly: z = 8 is the least integer >= 8
        for z in 1..8 {
            assert!(Rational::from(z as i64) < &r(1, 2) / &r(1, 16));
        }
        assert!(ceil_div(&r(1, 2), &Rational::zero()).is_err());
        assert!(ceil_div(&r(1, 2), &r(-1, 3)).is_err());
    }

    #[test]
    fn parses_all_three_forms() {
        assert_eq!("1/2".parse::<Rational>().unwrap(), r(1, 2));
        assert_eq!("-3/6".parse::<Rational>().unwrap(), r(-1, 2));
        assert_eq!("8".parse::<Rational>().unwrap(), Rational::from(8i64));
        assert_eq!("67.5".parse::<Rational>().unwrap(), r(135, 2));
        assert_eq!("-0.25".parse::<Rational>().unwrap(), r(-1, 4));
        assert_eq!("0.1".parse::<Rational>().unwrap(), r(1, 10));
        assert!("".parse::<Rational>().is_err());
        assert!("1/0".parse::<Rational>().is_err());
        assert!("1/-2".parse::<Rational>().is_err());
        assert!("a.b".parse::<Rational>().is_err());
    }

    #[test]
    fn display_puts_sign_on_numerator() {
        assert_eq!(r(-1, 2).to_string(), "-1/2");
        assert_eq!(r(4, 1).to_string(), "4");
        assert_eq!(r(135, 2).to_string(), "135/2");
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(r(135, 2).to_decimal_string(3), "67.500");
        assert_eq!(r(1, 3).to_decimal_string(4), "0.3333");
        assert_eq!(r(2, 3).to_decimal_string(2), "0.67");
        assert_eq!(r(-1, 8).to_decimal_string(2), "-0.13");
        assert_eq!(Rational::from(5i64).to_decimal_string(0), "5");
    }

    #[test]
    fn cmp_pow_handles_equality_and_huge_exponents() {
        let half = r(1, 2);
        let exact = half.pow(100);
        assert_eq!(cmp_pow(&half, &BigUint::from(100u32), &exact), Ordering::Equal);
        let just_below = &exact - &Rational::new(1, BigInt::from(2).pow(200u32));
        assert_eq!(
            cmp_pow(&half, &BigUint::from(100u32), &just_below),
            Ordering::Greater
        );
        // (999999/1000000)^(10^12) is unimaginably small but unevaluable;
        // the comparator still decides it.
        let near_one = r(999_999, 1_000_000);
        let n = BigUint::from(1_000_000_000_000u64);
        assert_eq!(cmp_pow(&near_one, &n, &r(1, 1_000_000)), Ordering::Less);
        assert_eq!(
            cmp_pow(&near_one, &BigUint::from(2u32), &r(1, 1_000_000)),
            Ordering::Greater
        );
    }

    #[test]
    fn ceil_scaled_pow_matches_literal_on_feasible_sizes() {
        let cases = [
            (r(7, 3), r(1, 2), 10u64),
            (r(1, 1000), r(99, 100), 57),
            (r(12345, 7), r(2, 3), 40),
        ];
        for (scale, base, n) in cases {
            let literal = (&scale * &base.pow(n)).ceil();
            assert_eq!(
                ceil_scaled_pow(&scale, &base, &BigUint::from(n)),
                literal,
                "scale={scale} base={base} n={n}"
            );
        }
    }

    #[test]
    fn cmp_pow_survives_deep_refinement() {
        // rhs is (2/3)^10000 truncated to ~300 significant bits, so the
        // bounds only separate after a few precision doublings; the literal
        // power is the oracle for both directions.
        let base = r(2, 3);
        let n = 10_000u64;
        let exact = base.pow(n);
        let shift = 6_200u32; // value is around 2^-5850
        let scaled = (exact.numer() << shift) / exact.denom();
        let truncated_down = Rational::new(scaled.clone(), BigInt::from(1) << shift);
        let truncated_up = Rational::new(scaled + 1, BigInt::from(1) << shift);
        assert!(truncated_down < exact && exact < truncated_up);
        let n = BigUint::from(n);
        assert_eq!(cmp_pow(&base, &n, &truncated_down), Ordering::Greater);
        assert_eq!(cmp_pow(&base, &n, &truncated_up), Ordering::Less);
    }

    #[test]
    fn cmp_pow_resolves_near_ties() {
        // 1/2^n vs 1/(2^n - 1): relative gap 2^-n, far beyond any working
        // precision, so this drives the refinement loop into its literal
        // fallback (cheap here since the base numerator is 1).
        let half = r(1, 2);
        let n = BigUint::from(100_000u32);
        let almost = Rational::new(
            BigInt::from(1),
            (BigInt::from(1) << 100_000u32) - BigInt::from(1),
        );
        assert_eq!(cmp_pow(&half, &n, &almost), Ordering::Less);
        let exact = Rational::new(BigInt::from(1), BigInt::from(1) << 100_000u32);
        assert_eq!(cmp_pow(&half, &n, &exact), Ordering::Equal);
        let below = Rational::new(
            BigInt::from(1),
            (BigInt::from(1) << 100_000u32) + BigInt::from(1),
        );
        assert_eq!(cmp_pow(&half, &n, &below), Ordering::Greater);
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-1000i64..=1000, 1i64..=1000).prop_map(|(n, d)| Rational::new(n, d))
    }

    fn arb_positive() -> impl Strategy<Value = Rational> {
        (1i64..=1000, 1i64..=1000).prop_map(|(n, d)| Rational::new(n, d))
    }

    proptest! {
        #[test]
        fn ceil_bracket(x in arb_rational()) {
            let c = Rational::from(x.ceil());
            prop_assert!(&c - &Rational::one() < x && x <= c);
        }

        #[test]
        fn nested_ceiling_identity(x in arb_positive(), m in 1i64..=60, n in 1i64..=60) {
            let mn = Rational::from(m * n);
            let lhs = (&x / &mn).ceil();
            let inner = Rational::from((&x / &Rational::from(m)).ceil());
            let rhs = (&inner / &Rational::from(n)).ceil();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn ceil_quotient_bound(x in arb_positive(), y in arb_positive()) {
            // x / ceil(x/y) <= y
            let c = Rational::from(ceil_div(&x, &y).unwrap());
            prop_assert!(&x / &c <= y);
        }

        #[test]
        fn scaling_is_monotone(x in arb_positive(), y in arb_positive(), z in arb_positive()) {
            let (lo, hi) = if y <= z { (y, z) } else { (z, y) };
            prop_assert!(&lo / &x <= &hi / &x);
            prop_assert!(&lo * &x <= &hi * &x);
        }

        #[test]
        fn field_axiom_spot_checks(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
        }

        #[test]
        fn parse_display_round_trip(x in arb_rational()) {
            let back: Rational = x.to_string().parse().unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn cmp_pow_agrees_with_literal(
            p in 1i64..=50, q in 1i64..=50, n in 0u64..=64,
            a in -50i64..=50, b in 1i64..=50,
        ) {
            let base = Rational::new(p, q);
            let rhs = Rational::new(a, b);
            let literal = base.pow(n).cmp(&rhs);
            prop_assert_eq!(cmp_pow(&base, &BigUint::from(n), &rhs), literal);
        }

        #[test]
        fn cmp_pow_agrees_with_literal_negative_base(
            p in -50i64..=-1, q in 1i64..=50, n in 0u64..=33,
            a in -50i64..=50, b in 1i64..=50,
        ) {
            let base = Rational::new(p, q);
            let rhs = Rational::new(a, b);
            let literal = base.pow(n).cmp(&rhs);
            prop_assert_eq!(cmp_pow(&base, &BigUint::from(n), &rhs), literal);
        }

        #[test]
        fn ceil_scaled_pow_agrees_with_literal(
            sn in 1i64..=10_000, sd in 1i64..=10_000,
            p in 1i64..=60, q in 1i64..=60, n in 0u64..=48,
        ) {
            let scale = Rational::new(sn, sd);
            let base = Rational::new(p, q);
            let literal = (&scale * &base.pow(n)).ceil();
            prop_assert_eq!(ceil_scaled_pow(&scale, &base, &BigUint::from(n)), literal);
        }
    }
}
