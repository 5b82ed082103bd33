//! Real algebraic numbers as (square-free polynomial, isolating interval).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{NumError, Poly, RatInterval, Rational};

/// A real root of `poly` singled out by `[lo, hi]`.
///
/// Either `lo == hi` and `poly(lo) == 0`, or `lo < hi`, `poly` changes sign
/// strictly between the endpoints and has exactly one root in `(lo, hi)`.
/// `poly` is square-free with primitive integer coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AlgebraicReal {
    poly: Poly,
    lo: Rational,
    hi: Rational,
}

impl AlgebraicReal {
    pub fn new(poly: Poly, lo: Rational, hi: Rational) -> Result<Self, NumError> {
        if poly.degree().unwrap_or(0) == 0 {
            return Err(NumError::MalformedPolynomial("constant polynomial has no isolated root".into()));
        }
        let poly = primitive_integer(&poly.square_free());
        if lo > hi {
            return Err(NumError::EmptyInterval { lo: lo.to_string(), hi: hi.to_string() });
        }
        if lo == hi {
            if poly.sign_at(&lo) != 0 {
                return Err(NumError::NotIsolating(format!("{lo} is not a root of {poly}")));
            }
            return Ok(AlgebraicReal { poly, lo, hi });
        }
        let (slo, shi) = (poly.sign_at(&lo), poly.sign_at(&hi));
        if slo == 0 || shi == 0 || slo == shi {
            return Err(NumError::NotIsolating(format!("{poly} has no sign change on [{lo}, {hi}]")));
        }
        let count = poly.count_roots(&lo, &hi);
        if count != 1 {
            return Err(NumError::NotIsolating(format!("{poly} has {count} roots in [{lo}, {hi}]")));
        }
        Ok(AlgebraicReal { poly, lo, hi })
    }

    pub fn from_rational(r: Rational) -> Self {
        let poly = primitive_integer(&Poly::new(vec![-r.clone(), Rational::one()]));
        AlgebraicReal { poly, lo: r.clone(), hi: r }
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn interval(&self) -> RatInterval {
        RatInterval::new(self.lo.clone(), self.hi.clone()).expect("lo <= hi")
    }

    /// The exact value when the number is rational and already pinned down.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.lo == self.hi {
            return Some(self.lo.clone());
        }
        if self.poly.degree() == Some(1) {
            let c = self.poly.coeffs();
            return Some(-(&c[0] / &c[1]));
        }
        None
    }

    /// One bisection step; keeps the root.
    fn halve(&self) -> AlgebraicReal {
        if self.lo == self.hi {
            return self.clone();
        }
        let mid = self.lo.midpoint(&self.hi);
        let sm = self.poly.sign_at(&mid);
        if sm == 0 {
            return AlgebraicReal { poly: self.poly.clone(), lo: mid.clone(), hi: mid };
        }
        if sm == self.poly.sign_at(&self.lo) {
            AlgebraicReal { poly: self.poly.clone(), lo: mid, hi: self.hi.clone() }
        } else {
            AlgebraicReal { poly: self.poly.clone(), lo: self.lo.clone(), hi: mid }
        }
    }

    /// A representation whose isolating interval has width at most `width`.
    pub fn refined(&self, width: &Rational) -> Result<AlgebraicReal, NumError> {
        if !width.is_positive() {
            return Err(NumError::Domain(format!("refinement width {width} must be positive")));
        }
        let mut x = self.clone();
        while &(&x.hi - &x.lo) > width {
            x = x.halve();
        }
        Ok(x)
    }

    /// Isolating interval of width `<= width`. Repeated calls nest.
    pub fn refine(&self, width: &Rational) -> Result<RatInterval, NumError> {
        Ok(self.refined(width)?.interval())
    }

    /// Exact sign of `g(self)` for a polynomial `g` with rational coefficients.
    ///
    /// Zero is decided algebraically: `g(α) = 0` iff `gcd(p, g mod p)` has a
    /// root in the isolating interval. Nonzero signs come from interval
    /// evaluation on successively refined intervals, which terminates since
    /// `g(α) != 0`.
    pub fn sign_of(&self, g: &Poly) -> i8 {
        let r = g.rem(&self.poly);
        if r.is_zero() {
            return 0;
        }
        if let Some(v) = self.as_rational() {
            return r.sign_at(&v);
        }
        let h = self.poly.gcd(&r);
        if h.degree().unwrap_or(0) > 0 && h.count_roots(&self.lo, &self.hi) > 0 {
            return 0;
        }
        let mut x = self.clone();
        loop {
            let enc = r.eval_interval(&x.interval());
            if let Some(s) = enc.strict_sign() {
                return s;
            }
            x = x.halve();
        }
    }

    /// Sign of `self - c`.
    pub fn cmp_rational(&self, c: &Rational) -> std::cmp::Ordering {
        let g = Poly::new(vec![-c.clone(), Rational::one()]);
        self.sign_of(&g).cmp(&0)
    }

    /// Approximate value for display and estimates only.
    pub fn to_f64(&self) -> f64 {
        let w = Rational::new(1, BigInt::one() << 60).expect("nonzero");
        let x = self.refined(&w).expect("positive width");
        x.lo.midpoint(&x.hi).to_f64()
    }
}

/// Real roots of `poly` inside the closed window, in increasing order with
/// pairwise-disjoint isolating intervals.
pub fn root_isolate(poly: &Poly, window: &RatInterval) -> Result<Vec<AlgebraicReal>, NumError> {
    if poly.is_zero() {
        return Err(NumError::MalformedPolynomial("zero polynomial has every number as a root".into()));
    }
    let sf = primitive_integer(&poly.square_free());
    if sf.degree().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let (lo, hi) = (window.lo().clone(), window.hi().clone());
    let mut out = Vec::new();
    if sf.sign_at(&lo) == 0 {
        out.push(AlgebraicReal { poly: sf.clone(), lo: lo.clone(), hi: lo.clone() });
    }
    if lo < hi {
        isolate_open(&sf, &lo, &hi, &mut out);
        if sf.sign_at(&hi) == 0 {
            out.push(AlgebraicReal { poly: sf.clone(), lo: hi.clone(), hi });
        }
    }
    Ok(out)
}

/// Roots strictly inside `(a, b)`. Sturm counts cover `(a, b]` even when
/// an endpoint is itself a root.
fn isolate_open(p: &Poly, a: &Rational, b: &Rational, out: &mut Vec<AlgebraicReal>) {
    let (sa, sb) = (p.sign_at(a), p.sign_at(b));
    let mut n = p.count_roots(a, b);
    if sb == 0 {
        n -= 1;
    }
    if n == 0 {
        return;
    }
    if n == 1 && sa != 0 && sb != 0 {
        out.push(AlgebraicReal { poly: p.clone(), lo: a.clone(), hi: b.clone() });
        return;
    }
    let mid = a.midpoint(b);
    isolate_open(p, a, &mid, out);
    if p.sign_at(&mid) == 0 {
        out.push(AlgebraicReal { poly: p.clone(), lo: mid.clone(), hi: mid.clone() });
    }
    isolate_open(p, &mid, b, out);
}

/// Scale to integer coefficients with content 1 and positive leading coefficient.
pub(crate) fn primitive_integer(p: &Poly) -> Poly {
    if p.is_zero() {
        return p.clone();
    }
    let lcm = p.coeffs().iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.coeffs().iter().map(|c| (c * Rational::from_int(lcm.clone())).numer().clone()).collect();
    let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let sign = if ints.last().expect("nonzero").is_negative() { -BigInt::one() } else { BigInt::one() };
    Poly::new(ints.into_iter().map(|c| Rational::from_int(c / &content * &sign)).collect())
}

impl fmt::Display for AlgebraicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "root of {} in [{}, {}]", self.poly, self.lo, self.hi),
        }
    }
}

impl fmt::Debug for AlgebraicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraicReal({} in [{}, {}])", self.poly, self.lo, self.hi)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffRepr {
    Int(i64),
    Text(Rational),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraicRepr {
    poly: Vec<CoeffRepr>,
    lo: Rational,
    hi: Rational,
}

impl Serialize for AlgebraicReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let poly = self
            .poly
            .coeffs()
            .iter()
            .map(|c| match c.numer().to_i64() {
                Some(n) if c.is_integer() => CoeffRepr::Int(n),
                _ => CoeffRepr::Text(c.clone()),
            })
            .collect();
        AlgebraicRepr { poly, lo: self.lo.clone(), hi: self.hi.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AlgebraicReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = AlgebraicRepr::deserialize(deserializer)?;
        let coeffs = repr
            .poly
            .into_iter()
            .map(|c| match c {
                CoeffRepr::Int(n) => Rational::from(n),
                CoeffRepr::Text(r) => r,
            })
            .collect();
        AlgebraicReal::new(Poly::new(coeffs), repr.lo, repr.hi).map_err(serde::de::Error::custom)
    }
}
