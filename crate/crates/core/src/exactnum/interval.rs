//! Closed intervals with exact rational endpoints.
//!
//! Every operation returns an enclosure of the exact image set. Rational
//! operations are exact; irrational endpoints (fractional powers) are rounded
//! outward onto the grid `1/denom_bound`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{NumError, Rational};

/// Default outward-rounding grid for irrational endpoints: `2^-64`.
pub fn default_denom_bound() -> BigInt {
    BigInt::one() << 64
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatInterval {
    lo: Rational,
    hi: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl RatInterval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, NumError> {
        if lo > hi {
            return Err(NumError::EmptyInterval { lo: lo.to_string(), hi: hi.to_string() });
        }
        Ok(RatInterval { lo, hi })
    }

    pub fn point(x: Rational) -> Self {
        RatInterval { lo: x.clone(), hi: x }
    }

    /// Builds `[min(a,b), max(a,b)]`.
    pub fn hull_of(a: Rational, b: Rational) -> Self {
        if a <= b {
            RatInterval { lo: a, hi: b }
        } else {
            RatInterval { lo: b, hi: a }
        }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn into_bounds(self) -> (Rational, Rational) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn is_subset_of(&self, other: &RatInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Sign of every element: `Some(1)` if all positive, `Some(-1)` if all negative.
    pub fn strict_sign(&self) -> Option<i8> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else {
            None
        }
    }

    /// `{|x| : x in self}`.
    pub fn abs(&self) -> RatInterval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            RatInterval { lo: -&self.hi, hi: -&self.lo }
        } else {
            RatInterval { lo: Rational::zero(), hi: self.lo.abs().max(self.hi.abs()) }
        }
    }

    pub fn neg(&self) -> RatInterval {
        RatInterval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn add(&self, other: &RatInterval) -> RatInterval {
        RatInterval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn sub(&self, other: &RatInterval) -> RatInterval {
        RatInterval { lo: &self.lo - &other.hi, hi: &self.hi - &other.lo }
    }

    pub fn mul(&self, other: &RatInterval) -> RatInterval {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().cloned().expect("four products");
        let hi = products.iter().max().cloned().expect("four products");
        RatInterval { lo, hi }
    }

    pub fn recip(&self) -> Result<RatInterval, NumError> {
        if self.contains_zero() {
            return Err(NumError::DivByZeroInterval);
        }
        Ok(RatInterval { lo: self.hi.recip()?, hi: self.lo.recip()? })
    }

    pub fn div(&self, other: &RatInterval) -> Result<RatInterval, NumError> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn scale(&self, c: &Rational) -> RatInterval {
        RatInterval::hull_of(&self.lo * c, &self.hi * c)
    }

    pub fn op(&self, kind: IntervalOp, other: &RatInterval) -> Result<RatInterval, NumError> {
        match kind {
            IntervalOp::Add => Ok(self.add(other)),
            IntervalOp::Sub => Ok(self.sub(other)),
            IntervalOp::Mul => Ok(self.mul(other)),
            IntervalOp::Div => self.div(other),
        }
    }

    /// Exact integer power.
    pub fn powi(&self, exp: i64) -> Result<RatInterval, NumError> {
        if exp == 0 {
            return Ok(RatInterval::point(Rational::one()));
        }
        if exp < 0 {
            return self.recip()?.powi(-exp);
        }
        let lo = self.lo.pow(exp)?;
        let hi = self.hi.pow(exp)?;
        if exp % 2 == 1 || !self.lo.is_negative() {
            Ok(RatInterval { lo, hi })
        } else if !self.hi.is_positive() {
            Ok(RatInterval { lo: hi, hi: lo })
        } else {
            Ok(RatInterval { lo: Rational::zero(), hi: lo.max(hi) })
        }
    }

    /// Power with a rational exponent. Integer exponents are exact; any other
    /// exponent requires a strictly positive interval and yields endpoints
    /// rounded outward to multiples of `1/denom_bound`.
    pub fn pow_rational(&self, exp: &Rational, denom_bound: &BigInt) -> Result<RatInterval, NumError> {
        if exp.is_integer() {
            let e = i64::try_from(exp.numer().clone())
                .map_err(|_| NumError::Domain(format!("exponent {exp} too large")))?;
            return self.powi(e);
        }
        if !self.lo.is_positive() {
            return Err(NumError::Domain(format!(
                "fractional power {exp} of interval [{}, {}] touching <= 0",
                self.lo, self.hi
            )));
        }
        let (lo, hi) = if exp.is_positive() {
            (root_pow_floor(&self.lo, exp, denom_bound)?, root_pow_ceil(&self.hi, exp, denom_bound)?)
        } else {
            (root_pow_floor(&self.hi, exp, denom_bound)?, root_pow_ceil(&self.lo, exp, denom_bound)?)
        };
        Ok(RatInterval { lo, hi })
    }

    pub fn intersect(&self, other: &RatInterval) -> Option<RatInterval> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        (lo <= hi).then_some(RatInterval { lo, hi })
    }

    pub fn hull(&self, other: &RatInterval) -> RatInterval {
        RatInterval { lo: (&self.lo).min(&other.lo).clone(), hi: (&self.hi).max(&other.hi).clone() }
    }

    /// Widen by `r >= 0` on both sides.
    pub fn inflate(&self, r: &Rational) -> RatInterval {
        RatInterval { lo: &self.lo - r, hi: &self.hi + r }
    }

    pub fn bisect(&self) -> (RatInterval, RatInterval) {
        let mid = self.lo.midpoint(&self.hi);
        (RatInterval { lo: self.lo.clone(), hi: mid.clone() }, RatInterval { lo: mid, hi: self.hi.clone() })
    }
}

/// Splits `x^(p/q)` into `(x^p)^(1/q)` with `x > 0`, `q > 1`.
fn root_parts(x: &Rational, exp: &Rational) -> Result<(Rational, u32), NumError> {
    let p = i64::try_from(exp.numer().clone()).map_err(|_| NumError::Domain("exponent numerator too large".into()))?;
    let q = u32::try_from(exp.denom().clone()).map_err(|_| NumError::Domain("exponent denominator too large".into()))?;
    Ok((x.pow(p)?, q))
}

/// Largest `k/D <= y^(1/q)`; `exact` reports whether it is equal.
fn nth_root_floor(y: &Rational, q: u32, d: &BigInt) -> (BigInt, bool) {
    // k^q <= y D^q  <=>  k <= floor(y D^q)^(1/q)
    let dq = num_traits::pow(d.clone(), q as usize);
    let num = y.numer() * &dq;
    let scaled = &num / y.denom();
    let k = scaled.nth_root(q);
    let exact = num_traits::pow(k.clone(), q as usize) * y.denom() == num;
    (k, exact)
}

/// `y^(1/q)` when it is rational.
fn exact_root(y: &Rational, q: u32) -> Option<Rational> {
    let n = y.numer().nth_root(q);
    let m = y.denom().nth_root(q);
    let pq = |v: &BigInt| num_traits::pow(v.clone(), q as usize);
    (&pq(&n) == y.numer() && &pq(&m) == y.denom()).then(|| Rational::new(n, m).expect("positive denominator"))
}

fn root_pow_floor(x: &Rational, exp: &Rational, d: &BigInt) -> Result<Rational, NumError> {
    let (y, q) = root_parts(x, exp)?;
    if let Some(r) = exact_root(&y, q) {
        return Ok(r);
    }
    let (k, _) = nth_root_floor(&y, q, d);
    Rational::new(k, d.clone())
}

fn root_pow_ceil(x: &Rational, exp: &Rational, d: &BigInt) -> Result<Rational, NumError> {
    let (y, q) = root_parts(x, exp)?;
    if let Some(r) = exact_root(&y, q) {
        return Ok(r);
    }
    let (k, exact) = nth_root_floor(&y, q, d);
    let k = if exact { k } else { k + 1 };
    Rational::new(k, d.clone())
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Debug for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for RatInterval {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [&self.lo, &self.hi].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RatInterval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [lo, hi] = <[Rational; 2]>::deserialize(deserializer)?;
        RatInterval::new(lo, hi).map_err(serde::de::Error::custom)
    }
}

/// `[lo, hi]` from two literals; panics on bad input.
pub fn ival(lo: &str, hi: &str) -> RatInterval {
    RatInterval::new(super::rat(lo), super::rat(hi)).expect("ordered literal interval")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    #[test]
    fn spec_examples() {
        assert_eq!(ival("0", "1").add(&ival("0", "1")), ival("0", "2"));
        assert_eq!(ival("2/3", "1").div(&ival("2/3", "1")).unwrap(), ival("2/3", "3/2"));
        assert_eq!(ival("-1", "2").mul(&ival("3", "3")), ival("-3", "6"));
    }

    #[test]
    fn division_by_zero_interval() {
        assert_eq!(ival("1", "2").div(&ival("-1", "1")), Err(NumError::DivByZeroInterval));
        assert_eq!(ival("1", "2").div(&ival("0", "1")), Err(NumError::DivByZeroInterval));
    }

    #[test]
    fn even_powers_straddling_zero() {
        assert_eq!(ival("-2", "1").powi(2).unwrap(), ival("0", "4"));
        assert_eq!(ival("-2", "-1").powi(2).unwrap(), ival("1", "4"));
        assert_eq!(ival("-2", "1").powi(3).unwrap(), ival("-8", "1"));
        assert_eq!(ival("1/2", "2").powi(-1).unwrap(), ival("1/2", "2"));
    }

    #[test]
    fn fractional_powers_round_outward() {
        let d = default_denom_bound();
        let sq = ival("4", "9").pow_rational(&rat("1/2"), &d).unwrap();
        assert_eq!(sq, ival("2", "3"));
        let r2 = ival("2", "2").pow_rational(&rat("1/2"), &d).unwrap();
        assert!(r2.lo() < r2.hi());
        assert!(r2.lo() * r2.lo() < rat("2") && r2.hi() * r2.hi() > rat("2"));
        assert!(r2.width() <= Rational::new(1, d.clone()).unwrap());
        let inv = ival("4", "9").pow_rational(&rat("-1/2"), &d).unwrap();
        assert_eq!(inv.lo(), &rat("1/3"));
        assert!(inv.contains(&rat("1/2")));
        assert!(matches!(ival("0", "1").pow_rational(&rat("1/2"), &d), Err(NumError::Domain(_))));
        assert!(matches!(ival("-1", "1").pow_rational(&rat("3/2"), &d), Err(NumError::Domain(_))));
    }

    #[test]
    fn abs_cases() {
        assert_eq!(ival("-3", "2").abs(), ival("0", "3"));
        assert_eq!(ival("-3", "-2").abs(), ival("2", "3"));
    }
}
