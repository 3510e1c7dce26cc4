//! Exact rational helpers.
//!
//! Measures are stored as [`Rational`]s. Tuple enumeration multiplies `p`
//! weights per tuple and sums millions of such products, so the hot loops
//! work on integer numerators over a common denominator instead of
//! normalizing a `BigRational` at every step.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `n`, `n/d` or a terminating decimal such as `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Input(format!("invalid rational `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = whole.starts_with('-');
        let whole: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse().map_err(|_| bad())?
        };
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().map_err(|_| bad())?;
        let num = whole.abs() * &den + frac;
        let num = if neg { -num } else { num };
        return Ok(Rational::new(num, den));
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

pub fn to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if d.is_finite() && n.is_finite() => n / d,
        _ => {
            // Scale down huge operands before converting.
            let shift = r.denom().bits().max(r.numer().bits()).saturating_sub(1000);
            let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
            n / d
        }
    }
}

/// Renders a rational either as `num/den` (default) or as a decimal.
pub fn render(r: &Rational, decimal: bool) -> String {
    if decimal {
        format!("{:.6}", to_f64(r))
    } else {
        r.to_string()
    }
}

/// A probability vector written over a common denominator.
#[derive(Debug, Clone)]
pub struct ScaledMeasure {
    pub denom: BigUint,
    pub nums: Vec<BigUint>,
    small: Option<Vec<u64>>,
    small_bits: u64,
}

impl ScaledMeasure {
    pub fn new(weights: &[Rational]) -> Self {
        let mut denom = BigUint::one();
        for w in weights {
            let d = w.denom().magnitude();
            denom = denom.lcm(d);
        }
        let nums: Vec<BigUint> = weights
            .iter()
            .map(|w| {
                let scale = &denom / w.denom().magnitude();
                w.numer().magnitude() * scale
            })
            .collect();
        let small: Option<Vec<u64>> = nums.iter().map(|n| n.to_u64()).collect();
        let small_bits = nums.iter().map(|n| n.bits()).max().unwrap_or(0);
        ScaledMeasure { denom, nums, small, small_bits }
    }

    pub fn len(&self) -> usize {
        self.nums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nums.is_empty()
    }

    /// Whether products of `p` numerators fit comfortably in a `u128`.
    pub fn fits_small(&self, p: usize) -> bool {
        self.small.is_some() && self.small_bits * p as u64 <= 100
    }

    pub fn small_nums(&self) -> Option<&[u64]> {
        self.small.as_deref()
    }

    pub fn denom_pow(&self, p: usize) -> BigUint {
        num_traits::pow(self.denom.clone(), p)
    }
}

/// Sums tuple weights, staying in `u128` until it would overflow.
#[derive(Debug, Clone, Default)]
pub struct WeightSum {
    small: u128,
    big: BigUint,
}

impl WeightSum {
    pub fn add_small(&mut self, w: u128) {
        match self.small.checked_add(w) {
            Some(s) => self.small = s,
            None => {
                self.big += BigUint::from(self.small);
                self.small = w;
            }
        }
    }

    pub fn add_big(&mut self, w: &BigUint) {
        self.big += w;
    }

    pub fn merge(&mut self, other: &WeightSum) {
        self.add_small(other.small);
        self.big += &other.big;
    }

    pub fn total(&self) -> BigUint {
        &self.big + BigUint::from(self.small)
    }

    /// The sum divided by `denom`.
    pub fn over(&self, denom: &BigUint) -> Rational {
        Rational::new(BigInt::from(self.total()), BigInt::from(denom.clone()))
    }
}

/// `2^-p` as a rational.
pub fn pow2_inv(p: usize) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse_rational("3/8").unwrap(), ratio(3, 8));
        assert_eq!(parse_rational("6/16").unwrap(), ratio(3, 8));
        assert_eq!(parse_rational("1").unwrap(), int(1));
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), ratio(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn scaled_measure_common_denominator() {
        let m = ScaledMeasure::new(&[ratio(1, 2), ratio(1, 3), ratio(1, 6)]);
        assert_eq!(m.denom, BigUint::from(6u32));
        assert_eq!(m.small_nums().unwrap(), &[3, 2, 1]);
        assert!(m.fits_small(3));
    }

    #[test]
    fn weight_sum_spills() {
        let mut s = WeightSum::default();
        s.add_small(u128::MAX);
        s.add_small(2);
        assert_eq!(s.total(), BigUint::from(u128::MAX) + BigUint::from(2u32));
    }
}
