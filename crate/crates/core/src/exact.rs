//! Exact integer and rational arithmetic plus the counting primitives that the
//! other modules are built on.
//!
//! Integers and rationals are GMP-backed (`rug`); real-valued quantities use
//! MPFR floats at a configurable binary precision.

use std::cmp::Ordering;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{invalid, Error, Result};

/// Arbitrary-precision signed integer.
pub type ExactInt = Integer;
/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type ExactRat = Rational;
/// Binary floating point with a per-value precision.
pub type BigReal = Float;

pub const DEFAULT_PRECISION_BITS: u32 = 128;
pub const MIN_PRECISION_BITS: u32 = 64;

/// Working precision for real-valued evaluations, in bits (never below 64).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Precision(u32);

impl Precision {
    pub fn new(bits: u32) -> Result<Self> {
        if bits < MIN_PRECISION_BITS {
            return invalid(format!(
                "precision must be at least {MIN_PRECISION_BITS} bits, got {bits}"
            ));
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Same precision widened by `extra` guard bits.
    pub fn widened(self, extra: u32) -> Precision {
        Precision(self.0 + extra)
    }

    pub fn real<T>(self, value: T) -> BigReal
    where
        Float: rug::Assign<T>,
    {
        Float::with_val(self.0, value)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(DEFAULT_PRECISION_BITS)
    }
}

/// Binomial coefficient `C(n, k)` for any integers.
///
/// `k < 0` gives 0. For negative `n` the falling-factorial definition
/// `n(n-1)...(n-k+1)/k!` is used, so `C(-n, l) = (-1)^l C(n+l-1, l)`.
pub fn binomial(n: i64, k: i64) -> ExactInt {
    if k < 0 {
        return Integer::new();
    }
    if n >= 0 {
        if k > n {
            return Integer::new();
        }
        let k = k.min(n - k);
        return Integer::from(n).binomial(k as u32);
    }
    let mut num = falling_factorial(n, k as u64);
    num.div_exact_mut(&factorial(k as u32));
    num
}

/// Binomial coefficient restricted to the counting range: 0 whenever either
/// argument is negative or `k > n`.
pub fn binomial_counting(n: i64, k: i64) -> ExactInt {
    if n < 0 || k < 0 || k > n {
        Integer::new()
    } else {
        binomial(n, k)
    }
}

pub fn factorial(n: u32) -> ExactInt {
    Integer::from(Integer::factorial(n))
}

/// `p! / (p_1! p_2! ...)`.
pub fn multinomial(p: i64, parts: &[i64]) -> Result<ExactInt> {
    if parts.iter().any(|&x| x < 0) || parts.iter().sum::<i64>() != p {
        return Err(Error::BadComposition {
            total: p,
            parts: parts.to_vec(),
        });
    }
    let mut remaining = p;
    let mut acc = Integer::from(1);
    for &part in parts {
        acc *= binomial(remaining, part);
        remaining -= part;
    }
    Ok(acc)
}

/// `x (x-1) ... (x-k+1)`, equal to 1 for `k = 0`.
pub fn falling_factorial(x: i64, k: u64) -> ExactInt {
    product_range(x, k)
}

// Product of the k consecutive integers x, x-1, ..., x-k+1 by binary splitting.
fn product_range(x: i64, k: u64) -> Integer {
    match k {
        0 => Integer::from(1),
        1 => Integer::from(x),
        2..=16 => {
            let mut acc = Integer::from(x);
            for i in 1..k as i64 {
                acc *= x - i;
            }
            acc
        }
        _ => {
            let half = k / 2;
            product_range(x, half) * product_range(x - half as i64, k - half)
        }
    }
}

/// Round to the nearest integer, ties to even.
pub fn round_half_even(r: &ExactRat) -> ExactInt {
    let floor = Integer::from(r.floor_ref());
    let frac = Rational::from(r - &floor);
    match frac.cmp(&Rational::from((1, 2))) {
        Ordering::Less => floor,
        Ordering::Greater => floor + 1,
        Ordering::Equal => {
            if floor.is_even() {
                floor
            } else {
                floor + 1
            }
        }
    }
}

fn pow10(e: i64) -> Rational {
    let p = Integer::from(10).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        Rational::from(p)
    } else {
        Rational::from((Integer::from(1), p))
    }
}

/// Fixed-point rendering with `digits` digits after the decimal point,
/// rounded half-to-even.
pub fn rat_to_decimal(r: &ExactRat, digits: usize) -> String {
    let scaled = r * pow10(digits as i64);
    let q = round_half_even(&scaled);
    let negative = q < 0;
    let mut body = q.abs().to_string();
    if body.len() <= digits {
        body = format!("{}{}", "0".repeat(digits + 1 - body.len()), body);
    }
    let split = body.len() - digits;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(&body[..split]);
    if digits > 0 {
        out.push('.');
        out.push_str(&body[split..]);
    }
    out
}

/// Decimal exponent `e` with `10^e <= |r| < 10^(e+1)`; `r` must be nonzero.
fn decimal_exponent(r: &Rational) -> i64 {
    let abs = Rational::from(r.abs_ref());
    let bits = abs.numer().significant_bits() as i64 - abs.denom().significant_bits() as i64;
    let mut e = (bits as f64 * std::f64::consts::LOG10_2).floor() as i64;
    while pow10(e) > abs {
        e -= 1;
    }
    while pow10(e + 1) <= abs {
        e += 1;
    }
    e
}

/// Rendering with `sig` significant digits (round-half-even). Fixed notation
/// for moderate magnitudes, otherwise `d.ddde±x`.
pub fn rat_to_significant(r: &ExactRat, sig: usize) -> String {
    let sig = sig.max(1);
    if *r == 0 {
        return if sig == 1 {
            "0".into()
        } else {
            format!("0.{}", "0".repeat(sig - 1))
        };
    }
    let mut e = decimal_exponent(r);
    let abs = Rational::from(r.abs_ref());
    let mut q = round_half_even(&(&abs * pow10(sig as i64 - 1 - e)));
    if q == Integer::from(10).pow(sig as u32) {
        q /= 10;
        e += 1;
    }
    let digits = q.to_string();
    let sign = if *r < 0 { "-" } else { "" };
    if (-5..21).contains(&e) {
        if e < 0 {
            format!("{sign}0.{}{digits}", "0".repeat((-e - 1) as usize))
        } else if (e as usize) + 1 >= sig {
            format!("{sign}{digits}{}", "0".repeat(e as usize + 1 - sig))
        } else {
            let split = e as usize + 1;
            format!("{sign}{}.{}", &digits[..split], &digits[split..])
        }
    } else if sig == 1 {
        format!("{sign}{digits}e{e}")
    } else {
        format!("{sign}{}.{}e{e}", &digits[..1], &digits[1..])
    }
}

/// Significant-digit rendering of a float, via its exact rational value.
pub fn real_to_significant(x: &BigReal, sig: usize) -> String {
    match x.to_rational() {
        Some(r) => rat_to_significant(&r, sig),
        None if x.is_nan() => "NaN".into(),
        None if x.is_sign_negative() => "-inf".into(),
        None => "inf".into(),
    }
}

/// Nearest float at the given precision.
pub fn rat_to_real(r: &ExactRat, prec: Precision) -> BigReal {
    Float::with_val(prec.bits(), r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(49, 6), 13_983_816);
        for n in -5..10 {
            assert_eq!(binomial(n, 0), 1);
        }
        assert_eq!(binomial(-3, 2), 6);
        assert_eq!(binomial(5, -1), 0);
        assert_eq!(binomial(5, 7), 0);
    }

    #[test]
    fn pascal_rule_exhaustive() {
        for n in 2..=60 {
            for k in 1..n {
                assert_eq!(
                    binomial(n, k),
                    binomial(n - 1, k - 1) + binomial(n - 1, k),
                    "C({n},{k})"
                );
            }
        }
    }

    // brute force: product of (-n - i) / k! computed independently
    #[test]
    fn negative_upper_index_identity() {
        for n in 1..=20i64 {
            for l in 1..=20i64 {
                let lhs = binomial(-n, l) * if l % 2 == 0 { 1 } else { -1 };
                assert_eq!(lhs, binomial(n + l - 1, l), "n={n} l={l}");
            }
        }
        for n in 1..=10i64 {
            for l in 0..=10i64 {
                let mut num = Rational::from(1);
                for i in 0..l {
                    num *= Rational::from((-n - i, i + 1));
                }
                assert_eq!(Rational::from(binomial(-n, l)), num);
            }
        }
    }

    #[test]
    fn multinomial_examples() {
        assert_eq!(
            multinomial(24, &[6, 6, 6, 6]).unwrap(),
            Integer::from(2_308_743_493_056u64)
        );
        assert_eq!(
            multinomial(24, &[6, 6, 6, 6]).unwrap(),
            binomial(24, 6) * binomial(18, 6) * binomial(12, 6)
        );
        assert_eq!(multinomial(7, &[7]).unwrap(), 1);
        assert_eq!(multinomial(4, &[2, 1, 1]).unwrap(), 12);
        assert!(multinomial(4, &[2, 1]).is_err());
        assert!(multinomial(0, &[1, -1]).is_err());
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(365, 2), 132_860);
        assert_eq!(falling_factorial(17, 0), 1);
        assert_eq!(falling_factorial(5, 6), 0);
        assert_eq!(falling_factorial(-2, 3), -24);
        let by_loop = (0..100).fold(Integer::from(1), |acc, i| acc * (1000 - i));
        assert_eq!(falling_factorial(1000, 100), by_loop);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(rat_to_decimal(&Rational::from((11, 47)), 3), "0.234");
        assert_eq!(rat_to_decimal(&Rational::from((1, 2)), 4), "0.5000");
        assert_eq!(rat_to_decimal(&Rational::from((1, 3)), 6), "0.333333");
        // ties to even
        assert_eq!(rat_to_decimal(&Rational::from((1, 8)), 2), "0.12");
        assert_eq!(rat_to_decimal(&Rational::from((3, 8)), 2), "0.38");
        assert_eq!(rat_to_decimal(&Rational::from((-5, 4)), 1), "-1.2");
        assert_eq!(rat_to_decimal(&Rational::from(7), 0), "7");
    }

    #[test]
    fn significant_rendering() {
        assert_eq!(rat_to_significant(&Rational::from((11, 47)), 3), "0.234");
        assert_eq!(rat_to_significant(&Rational::from((264, 47)), 4), "5.617");
        assert_eq!(rat_to_significant(&Rational::from((999_999, 1)), 3), "1000000");
        assert_eq!(rat_to_significant(&Rational::from((1, 1000)), 2), "0.0010");
        assert_eq!(
            rat_to_significant(&Rational::from((1, 10_i64.pow(15))), 3),
            "1.00e-15"
        );
        assert_eq!(rat_to_significant(&Rational::new(), 3), "0.00");
    }

    proptest! {
        #[test]
        fn rational_add_sub_roundtrip(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
            let x = Rational::from((a, b));
            let y = Rational::from((c, d));
            let back = Rational::from(&x + &y) - &y;
            prop_assert_eq!(back, x);
        }

        #[test]
        fn multinomial_is_binomial_product(parts in proptest::collection::vec(0i64..8, 1..6)) {
            let p: i64 = parts.iter().sum();
            prop_assume!(p <= 40);
            let mut expect = factorial(p as u32);
            for &q in &parts {
                expect.div_exact_mut(&factorial(q as u32));
            }
            prop_assert_eq!(multinomial(p, &parts).unwrap(), expect);
        }
    }
}
