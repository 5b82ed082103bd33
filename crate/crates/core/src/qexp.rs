//! Expansions `x = Σ a_n q^-n` with digits in `{0, 1}` for `1 < q < 2`:
//! the quasi-greedy expansion of 1, the lexicographic uniqueness criterion,
//! the self-similar set `K_q` of sequences in `{01, 10}^∞`, and the
//! threshold `q*`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::certifier::{self, Certificate, CertifyError, ConditionReport};
use crate::exactnum::{AlgebraicReal, NumError, Poly, RatInterval, Rational};
use crate::exprfn::Expr;
use crate::ifs_core::{HomogeneousIfs, InfiniteCode, Point};

pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QexpError {
    #[error("base {0} is not in (1, 2)")]
    BaseOutOfRange(String),
    #[error("no period found within the step budget; verified prefix {prefix}")]
    BudgetExhausted { prefix: String },
    #[error("sequences agree on the whole computed window of {window} digits")]
    Undecidable { window: usize },
    #[error("base {0} is irrational; this operation needs a rational base")]
    IrrationalBase(String),
    #[error("K_q is not verified inside U_q at q = {q} ({verdict})")]
    NotContained { q: String, verdict: Decision },
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Num(#[from] NumError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Yes,
    No,
    Unknown,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Yes => "yes",
            Decision::No => "no",
            Decision::Unknown => "unknown",
        })
    }
}

/// A base `1 < q < 2`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Base {
    Rational(Rational),
    Algebraic(AlgebraicReal),
}

impl Base {
    pub fn rational(q: Rational) -> Result<Base, QexpError> {
        if q <= 1 || q >= 2 {
            return Err(QexpError::BaseOutOfRange(q.to_string()));
        }
        Ok(Base::Rational(q))
    }

    pub fn algebraic(q: AlgebraicReal) -> Result<Base, QexpError> {
        if let Some(r) = q.as_rational() {
            return Base::rational(r);
        }
        if q.cmp_rational(&Rational::one()) != Ordering::Greater || q.cmp_rational(&Rational::from(2)) != Ordering::Less
        {
            return Err(QexpError::BaseOutOfRange(q.to_string()));
        }
        Ok(Base::Algebraic(q))
    }

    pub fn qstar() -> Base {
        Base::Algebraic(qstar())
    }

    /// The golden ratio, root of `x² - x - 1` in `(1, 2)`.
    pub fn golden() -> Base {
        Base::Algebraic(
            AlgebraicReal::new(Poly::from_ints(&[-1, -1, 1]), Rational::one(), Rational::from(2)).expect("isolating"),
        )
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Base::Rational(q) => Some(q),
            Base::Algebraic(_) => None,
        }
    }

    pub fn require_rational(&self) -> Result<&Rational, QexpError> {
        self.as_rational().ok_or_else(|| QexpError::IrrationalBase(self.to_string()))
    }

    fn modulus(&self) -> Poly {
        match self {
            Base::Rational(q) => Poly::new(vec![-q.clone(), Rational::one()]),
            Base::Algebraic(a) => a.poly().clone(),
        }
    }

    /// Sign of the field element `p(q)`.
    fn sign(&self, p: &Poly) -> i8 {
        match self {
            Base::Rational(q) => p.sign_at(q),
            Base::Algebraic(a) => a.sign_of(p),
        }
    }

    /// A rational interval containing `q` of width at most `width`.
    pub fn enclosure(&self, width: &Rational) -> RatInterval {
        match self {
            Base::Rational(q) => RatInterval::point(q.clone()),
            Base::Algebraic(a) => a.refine(width).expect("positive width"),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Base::Rational(q) => q.to_f64(),
            Base::Algebraic(a) => a.to_f64(),
        }
    }

    /// Exact comparison with `q*`.
    pub fn cmp_qstar(&self) -> Ordering {
        let qs = qstar();
        match self {
            Base::Rational(q) => qs.cmp_rational(q).reverse(),
            // the cubic's only root in (1, 2) is q*; it is negative below and positive above
            Base::Algebraic(a) => a.sign_of(qs.poly()).cmp(&0),
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::Rational(q) => write!(f, "{q}"),
            Base::Algebraic(a) => write!(f, "{a}"),
        }
    }
}

impl fmt::Debug for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Base({self})")
    }
}

impl FromStr for Base {
    type Err = QexpError;

    /// A rational (`19/10`, `1.9`), `qstar`, `golden`, or an algebraic JSON
    /// object.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t {
            "qstar" | "q*" => return Ok(Base::qstar()),
            "golden" | "phi" => return Ok(Base::golden()),
            _ => {}
        }
        if t.starts_with('{') {
            let a: AlgebraicReal = serde_json::from_str(t).map_err(|e| QexpError::Parse(format!("{t}: {e}")))?;
            return Base::algebraic(a);
        }
        Base::rational(t.parse()?)
    }
}

impl Serialize for Base {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Base::Rational(q) => q.serialize(serializer),
            Base::Algebraic(a) => a.serialize(serializer),
        }
    }
}

/// The root of `x³ - x² - 2x + 1` in `(1, 2)`, isolated in `[9/5, 181/100]`.
pub fn qstar() -> AlgebraicReal {
    AlgebraicReal::new(Poly::from_ints(&[1, -2, -1, 1]), Rational::frac(9, 5), Rational::frac(181, 100))
        .expect("q* is isolated by [9/5, 181/100]")
}

/// An eventually periodic 0-1 sequence `preperiod (period)^∞`, kept in
/// canonical form: shortest period, then shortest preperiod.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DigitSeq {
    preperiod: Vec<u8>,
    period: Vec<u8>,
}

impl DigitSeq {
    pub fn new(preperiod: Vec<u8>, period: Vec<u8>) -> Result<DigitSeq, QexpError> {
        if period.is_empty() || preperiod.iter().chain(&period).any(|&d| d > 1) {
            return Err(QexpError::Parse(format!("{preperiod:?}({period:?})")));
        }
        let mut s = DigitSeq { preperiod, period };
        s.canonicalize();
        Ok(s)
    }

    fn canonicalize(&mut self) {
        let n = self.period.len();
        if let Some(d) = (1..=n).find(|&d| n.is_multiple_of(d) && (d..n).all(|i| self.period[i] == self.period[i - d])) {
            self.period.truncate(d);
        }
        while let Some(&last) = self.preperiod.last() {
            if last != *self.period.last().expect("nonempty period") {
                break;
            }
            self.preperiod.pop();
            self.period.rotate_right(1);
        }
    }

    pub fn constant(d: u8) -> DigitSeq {
        DigitSeq::new(Vec::new(), vec![d]).expect("binary digit")
    }

    pub fn preperiod(&self) -> &[u8] {
        &self.preperiod
    }

    pub fn period(&self) -> &[u8] {
        &self.period
    }

    /// Digit at 0-based position `i`.
    pub fn digit(&self, i: usize) -> u8 {
        if i < self.preperiod.len() {
            self.preperiod[i]
        } else {
            self.period[(i - self.preperiod.len()) % self.period.len()]
        }
    }

    pub fn prefix(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.digit(i)).collect()
    }

    /// The tail `a_{k+1} a_{k+2} …`.
    pub fn shift(&self, k: usize) -> DigitSeq {
        if k <= self.preperiod.len() {
            return DigitSeq { preperiod: self.preperiod[k..].to_vec(), period: self.period.clone() };
        }
        let mut period = self.period.clone();
        let n = period.len();
        period.rotate_left((k - self.preperiod.len()) % n);
        DigitSeq { preperiod: Vec::new(), period }
    }

    pub fn complement(&self) -> DigitSeq {
        let flip = |v: &[u8]| v.iter().map(|d| 1 - d).collect();
        DigitSeq { preperiod: flip(&self.preperiod), period: flip(&self.period) }
    }

    /// `π_q(a) = Σ a_n q^-n` for rational `q`.
    pub fn value(&self, q: &Rational) -> Rational {
        let inv = q.recip().expect("q > 1");
        let mut scale = Rational::one();
        let mut head = Rational::zero();
        for &d in &self.preperiod {
            scale *= &inv;
            if d == 1 {
                head += &scale;
            }
        }
        let mut block = Rational::zero();
        let mut s = Rational::one();
        for &d in &self.period {
            s *= &inv;
            if d == 1 {
                block += &s;
            }
        }
        head + scale * block / (Rational::one() - s)
    }

    /// Lexicographic comparison; exact, since two eventually periodic
    /// sequences that agree past both preperiods for a common period agree
    /// forever.
    pub fn lex_cmp(&self, other: &DigitSeq) -> Ordering {
        let window = self.preperiod.len().max(other.preperiod.len()) + self.period.len().lcm(&other.period.len());
        (0..window).map(|i| self.digit(i).cmp(&other.digit(i))).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
    }
}

pub fn lex_less(s: &DigitSeq, t: &DigitSeq) -> bool {
    s.lex_cmp(t) == Ordering::Less
}

fn digits_text(d: &[u8]) -> String {
    d.iter().map(|d| char::from(b'0' + d)).collect()
}

impl fmt::Display for DigitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", digits_text(&self.preperiod), digits_text(&self.period))
    }
}

impl fmt::Debug for DigitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DigitSeq({self})")
    }
}

impl FromStr for DigitSeq {
    type Err = QexpError;

    /// `11(01)`, `11(01)∞`, `(10)^∞`; without parentheses the sequence ends
    /// in zeros.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || QexpError::Parse(s.to_string());
        let t = s.trim().trim_end_matches('∞').trim_end_matches("^inf").trim_end_matches('^');
        let bits = |x: &str| -> Result<Vec<u8>, QexpError> {
            x.chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(bad()),
                })
                .collect()
        };
        match t.split_once('(') {
            Some((pre, rest)) => {
                let per = rest.strip_suffix(')').ok_or_else(bad)?;
                DigitSeq::new(bits(pre)?, bits(per)?)
            }
            None => DigitSeq::new(bits(t)?, vec![0]),
        }
    }
}

impl Serialize for DigitSeq {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DigitSeq {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Lazily generated quasi-greedy expansion of 1 in base `q`.
///
/// Remainders `r_k = q r_{k-1} - a_k` are kept as polynomials in `q` reduced
/// modulo its defining polynomial, so a repeated remainder proves the digits
/// periodic from there on.
pub struct QuasiGreedy {
    base: Base,
    modulus: Poly,
    digits: Vec<u8>,
    remainder: Poly,
    seen: HashMap<Poly, usize>,
    cycle: Option<(usize, usize)>,
    /// False for rational bases, whose expansion of 1 is never eventually
    /// periodic (a period would make q an algebraic integer).
    track_cycles: bool,
    budget: usize,
}

impl QuasiGreedy {
    pub fn new(base: &Base, budget: usize) -> QuasiGreedy {
        let one = Poly::constant(Rational::one());
        let mut seen = HashMap::new();
        seen.insert(one.clone(), 0);
        QuasiGreedy {
            modulus: base.modulus(),
            base: base.clone(),
            digits: Vec::new(),
            remainder: one,
            seen,
            cycle: None,
            track_cycles: matches!(base, Base::Algebraic(_)),
            budget,
        }
    }

    pub fn base(&self) -> &Base {
        &self.base
    }

    fn step(&mut self) {
        let scaled = (&Poly::x() * &self.remainder).rem(&self.modulus);
        let one = Poly::constant(Rational::one());
        let digit = u8::from(self.base.sign(&(&scaled - &one)) > 0);
        self.remainder = if digit == 1 { &scaled - &one } else { scaled };
        self.digits.push(digit);
        if !self.track_cycles {
            return;
        }
        let k = self.digits.len();
        if let Some(&j) = self.seen.get(&self.remainder) {
            self.cycle = Some((j, k - j));
        } else {
            self.seen.insert(self.remainder.clone(), k);
        }
    }

    /// Runs until a period is found or the budget is spent; fails at once
    /// for a rational base.
    pub fn run(&mut self) -> Result<DigitSeq, QexpError> {
        while self.track_cycles && self.cycle.is_none() && self.digits.len() < self.budget {
            self.step();
        }
        self.sequence().ok_or_else(|| QexpError::BudgetExhausted { prefix: digits_text(&self.digits) })
    }

    /// The full sequence once a period is known.
    pub fn sequence(&self) -> Option<DigitSeq> {
        let (pre, per) = self.cycle?;
        Some(DigitSeq::new(self.digits[..pre].to_vec(), self.digits[pre..pre + per].to_vec()).expect("binary"))
    }

    pub fn computed(&self) -> &[u8] {
        &self.digits
    }

    /// Digit at 0-based position `i`, computing more digits as needed.
    pub fn digit(&mut self, i: usize) -> Option<u8> {
        while self.cycle.is_none() && self.digits.len() <= i {
            if self.digits.len() >= self.budget {
                return None;
            }
            self.step();
        }
        match self.cycle {
            Some((pre, per)) if i >= pre => Some(self.digits[pre + (i - pre) % per]),
            _ => Some(self.digits[i]),
        }
    }

    pub fn prefix_text(&mut self, n: usize) -> String {
        let d: Vec<u8> = (0..n).map_while(|i| self.digit(i)).collect();
        digits_text(&d)
    }

    /// Compares `s` with the expansion; fails only when they agree on every
    /// digit the budget allows.
    pub fn cmp_seq(&mut self, s: &DigitSeq) -> Result<Ordering, QexpError> {
        let mut i = 0;
        loop {
            if let Some(eta) = self.sequence() {
                return Ok(s.lex_cmp(&eta));
            }
            match self.digit(i) {
                Some(d) => match s.digit(i).cmp(&d) {
                    Ordering::Equal => i += 1,
                    o => return Ok(o),
                },
                None => return Err(QexpError::Undecidable { window: i }),
            }
        }
    }
}

/// The quasi-greedy expansion of 1: the largest infinite expansion.
pub fn quasi_greedy_one(q: &Base, budget: usize) -> Result<DigitSeq, QexpError> {
    QuasiGreedy::new(q, budget).run()
}

/// Uniqueness test: every tail after a 0 and every complemented tail after
/// a 1 must be strictly below the quasi-greedy expansion of 1. Checking one
/// preperiod plus one period of positions covers all tails.
pub fn is_univoque_seq(a: &DigitSeq, eta: &mut QuasiGreedy) -> Decision {
    let mut unknown = false;
    for k in 1..=a.preperiod().len() + a.period().len() {
        let tail = a.shift(k);
        let probe = if a.digit(k - 1) == 0 { tail } else { tail.complement() };
        match eta.cmp_seq(&probe) {
            Ok(Ordering::Less) => {}
            Ok(_) => return Decision::No,
            Err(_) => unknown = true,
        }
    }
    if unknown {
        Decision::Unknown
    } else {
        Decision::Yes
    }
}

/// Number of digit prefixes of length `depth` that extend to an expansion of
/// `x`. Prefixes reaching the same remainder are merged with multiplicity;
/// with more than `frontier_cap` distinct remainders the rest are dropped, so
/// the count is a lower bound in that case.
pub fn count_expansions_bruteforce(x: &Rational, q: &Rational, depth: usize, frontier_cap: usize) -> u64 {
    let top = (q - Rational::one()).recip().expect("q > 1");
    let feasible = |z: &Rational| !z.is_negative() && z <= &top;
    if !feasible(x) {
        return 0;
    }
    let mut frontier: Vec<(Rational, u64)> = vec![(x.clone(), 1)];
    for _ in 0..depth {
        let mut next: HashMap<Rational, u64> = HashMap::new();
        for (z, count) in &frontier {
            let scaled = q * z;
            for d in [0i64, 1] {
                let child = &scaled - Rational::from(d);
                if feasible(&child) {
                    let slot = next.entry(child).or_insert(0);
                    *slot = slot.saturating_add(*count);
                }
            }
        }
        let mut states: Vec<(Rational, u64)> = next.into_iter().collect();
        states.sort();
        states.truncate(frontier_cap);
        frontier = states;
    }
    frontier.iter().fold(0u64, |acc, (_, c)| acc.saturating_add(*c))
}

/// The generator `{(x+1)/q², x/q² + 1/q}` of `K_q`.
pub fn kq_ifs(q: &Base) -> Result<HomogeneousIfs, QexpError> {
    let q = q.require_rational()?;
    let lambda = (q * q).recip()?;
    Ok(HomogeneousIfs::new(lambda.clone(), vec![lambda, q.recip()?]).expect("valid for 1 < q < 2"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KqReport {
    pub q: Base,
    pub verdict: Decision,
    /// Lexicographic maxima of the tails the criterion inspects over `{01,10}^∞`.
    pub extremal_tails: Vec<DigitSeq>,
    pub eta_prefix: String,
    pub eta: Option<DigitSeq>,
}

/// Decides `K_q ⊆ U_q` through the extremal tails of the block language
/// `{01, 10}^∞`: after a 0 the largest tail is `1(10)`, after a 1 the largest
/// complemented tail is `1(10)` as well, and `(10)` is dominated by it.
pub fn verify_kq_in_uq(q: &Base, budget: usize) -> KqReport {
    let extremal_tails: Vec<DigitSeq> = ["1(10)", "(10)"].iter().map(|s| s.parse().expect("literal")).collect();
    let mut eta = QuasiGreedy::new(q, budget);
    let mut verdict = Decision::Yes;
    for t in &extremal_tails {
        match eta.cmp_seq(t) {
            Ok(Ordering::Less) => {}
            Ok(_) => {
                verdict = Decision::No;
                break;
            }
            Err(_) => verdict = Decision::Unknown,
        }
    }
    KqReport { q: q.clone(), verdict, extremal_tails, eta_prefix: eta.prefix_text(24), eta: eta.sequence() }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KqConditionReport {
    pub condition: ConditionReport,
    /// `1 - 2λ` and `λ/(1 - 2λ)`, or `0` and `inf` once `1 - 2λ <= 0`.
    pub closed_form_lower: Rational,
    pub closed_form_upper: Option<Rational>,
    pub above_threshold: bool,
}

/// The pointwise condition on `K_q × K_q`.
pub fn check_kq_condition(
    q: &Base,
    f: &Expr,
    point: (&Point, &Point),
    depth: usize,
) -> Result<KqConditionReport, QexpError> {
    let kq = kq_ifs(q)?;
    let condition = certifier::check_pointwise(&kq, &kq, f, point, depth)?;
    let lambda = kq.ratio();
    let slack = Rational::one() - Rational::from(2) * lambda;
    let (closed_form_lower, closed_form_upper) = if slack.is_positive() {
        (slack.clone(), Some(lambda / &slack))
    } else {
        (Rational::zero(), None)
    };
    Ok(KqConditionReport {
        condition,
        closed_form_lower,
        closed_form_upper,
        above_threshold: q.cmp_qstar() == Ordering::Greater,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UqCertificate {
    pub kq_in_uq: KqReport,
    pub anchor: (String, String),
    pub certificate: Certificate,
}

/// Certifies an interval inside `f(U_q, U_q)` by certifying it inside
/// `f(K_q, K_q)` near a corner of the hull of `K_q`.
pub fn certify_uq_arith(q: &Base, f: &Expr, max_depth: usize) -> Result<UqCertificate, QexpError> {
    let kq_in_uq = verify_kq_in_uq(q, DEFAULT_BUDGET);
    if kq_in_uq.verdict != Decision::Yes {
        return Err(QexpError::NotContained { q: q.to_string(), verdict: kq_in_uq.verdict });
    }
    let kq = kq_ifs(q)?;
    let left = kq.left_code();
    let right = kq.right_code();
    let anchors = [(&left, &right), (&right, &left), (&left, &left), (&right, &right)];
    let mut reasons = Vec::new();
    for (c1, c2) in anchors {
        match certifier::auto_certify(&kq, &kq, f, (c1, c2), max_depth) {
            Ok(certificate) => {
                return Ok(UqCertificate { kq_in_uq, anchor: (c1.to_string(), c2.to_string()), certificate })
            }
            Err(CertifyError::ExhaustedDepth { reasons: r, .. }) => {
                reasons.extend(r.into_iter().map(|(k, msg)| (k, format!("{c1}×{c2}: {msg}"))))
            }
            Err(e) => return Err(e.into()),
        }
    }
    Err(CertifyError::ExhaustedDepth { max_depth, reasons }.into())
}

/// Anchor codes `1^∞` / `2^∞` as used by [`certify_uq_arith`].
pub fn anchor_code(right: bool) -> InfiniteCode {
    InfiniteCode::constant(if right { 2 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{ival, rat};

    fn seq(s: &str) -> DigitSeq {
        s.parse().unwrap()
    }

    fn q(s: &str) -> Base {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_sequences() {
        assert_eq!(seq("11(01)"), seq("1(10)"));
        assert_eq!(seq("11(01)").to_string(), "1(10)");
        assert_eq!(seq("(1010)"), seq("(10)"));
        assert_eq!(seq("0(00)"), seq("(0)"));
        assert_eq!(seq("101"), seq("101(0)"));
        assert_eq!(seq("(01)∞"), seq("(01)"));
        assert_eq!(seq("0(11)").complement(), seq("1(00)"));
        assert_eq!(seq("1(10)").shift(1), seq("(10)"));
        assert_eq!(seq("1(10)").shift(2), seq("(01)"));
    }

    #[test]
    fn lexicographic_order() {
        assert!(lex_less(&seq("(10)"), &seq("11(01)")));
        assert!(!lex_less(&seq("(10)"), &seq("(10)")));
        assert!(lex_less(&seq("0(11)"), &seq("(01)")) || lex_less(&seq("(01)"), &seq("0(11)")));
        assert!(lex_less(&seq("(01)"), &seq("0(11)")));
    }

    #[test]
    fn quasi_greedy_expansions() {
        assert_eq!(quasi_greedy_one(&Base::golden(), 100).unwrap(), seq("(10)"));
        assert_eq!(quasi_greedy_one(&Base::qstar(), 100).unwrap(), seq("11(01)"));
        assert!(matches!(quasi_greedy_one(&q("19/10"), 40), Err(QexpError::BudgetExhausted { .. })));
        let mut eta = QuasiGreedy::new(&q("19/10"), 40);
        assert!(eta.prefix_text(60).starts_with("11101"));
        assert_eq!(eta.computed().len(), 40);
    }

    #[test]
    fn univoque_criterion() {
        let mut eta = QuasiGreedy::new(&q("19/10"), DEFAULT_BUDGET);
        assert_eq!(is_univoque_seq(&seq("(01)"), &mut eta), Decision::Yes);
        assert_eq!(is_univoque_seq(&seq("(0)"), &mut eta), Decision::Yes);
        assert_eq!(is_univoque_seq(&seq("(1)"), &mut eta), Decision::Yes);
        assert_eq!(is_univoque_seq(&seq("(011)"), &mut eta), Decision::Yes);
        assert_eq!(is_univoque_seq(&seq("(01111)"), &mut eta), Decision::No);
        let mut eta = QuasiGreedy::new(&q("3/2"), DEFAULT_BUDGET);
        assert_eq!(is_univoque_seq(&seq("1(0)"), &mut eta), Decision::No);
    }

    #[test]
    fn brute_force_counts() {
        let q19 = rat("19/10");
        assert_eq!(count_expansions_bruteforce(&rat("0"), &q19, 30, 1 << 12), 1);
        let x = seq("(01)").value(&q19);
        assert_eq!(count_expansions_bruteforce(&x, &q19, 30, 1 << 12), 1);
        let q32 = rat("3/2");
        assert!(count_expansions_bruteforce(&q32.recip().unwrap(), &q32, 6, 1 << 12) >= 2);
    }

    #[test]
    fn kq_generator() {
        let k = kq_ifs(&q("19/10")).unwrap();
        assert_eq!(k.ratio(), &rat("100/361"));
        assert_eq!(k.translations(), &[rat("100/361"), rat("10/19")]);
        assert_eq!(k.convex_hull(), ival("100/261", "190/261"));
        assert_eq!(k.kappa(), rat("14490/94221"));
        assert_eq!(k.kappa() / k.hull_length(), rat("161/361"));
        assert!(matches!(kq_ifs(&Base::qstar()), Err(QexpError::IrrationalBase(_))));
    }

    #[test]
    fn kq_inside_uq() {
        assert_eq!(verify_kq_in_uq(&q("19/10"), DEFAULT_BUDGET).verdict, Decision::Yes);
        assert_eq!(verify_kq_in_uq(&q("95/50"), DEFAULT_BUDGET).verdict, Decision::Yes);
        assert_eq!(verify_kq_in_uq(&Base::qstar(), DEFAULT_BUDGET).verdict, Decision::No);
        assert_eq!(verify_kq_in_uq(&q("3/2"), DEFAULT_BUDGET).verdict, Decision::No);
    }

    #[test]
    fn qstar_isolation() {
        let qs = qstar();
        assert!(qs.interval().is_subset_of(&ival("9/5", "181/100")));
        assert_eq!(qs.sign_of(qs.poly()), 0);
        assert_eq!(qs.cmp_rational(&rat("9/5")), Ordering::Greater);
        assert_eq!(q("19/10").cmp_qstar(), Ordering::Greater);
        assert_eq!(q("9/5").cmp_qstar(), Ordering::Less);
        assert_eq!(Base::qstar().cmp_qstar(), Ordering::Equal);
        assert_eq!(Base::golden().cmp_qstar(), Ordering::Less);
    }

    #[test]
    fn base_validation() {
        assert!(matches!("2".parse::<Base>(), Err(QexpError::BaseOutOfRange(_))));
        assert!(matches!("1".parse::<Base>(), Err(QexpError::BaseOutOfRange(_))));
        assert_eq!(q("1.9"), q("19/10"));
    }
}
