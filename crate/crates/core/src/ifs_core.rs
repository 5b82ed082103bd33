//! Homogeneous one-dimensional self-similar sets `K = ∪ (λK + t_i)`.
//!
//! The maps are ordered by translation, so `f_1` fixes the left end `a` of
//! the convex hull and `f_n` fixes the right end `b`. Cylinder words use the
//! digits `1..=n` in that order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exactnum::{AlgebraicReal, NumError, RatInterval, Rational};
use crate::union::IntervalUnion;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IfsError {
    #[error("contraction ratio {0} is not in (0, 1)")]
    BadRatio(String),
    #[error("an IFS needs at least two maps, got {0}")]
    TooFewMaps(usize),
    #[error("duplicate map with translation {0}")]
    DuplicateMap(String),
    #[error("irrational contraction ratio {0} is not supported; IFS data must be rational")]
    IrrationalRatio(String),
    #[error("digit {digit} outside the alphabet 1..={n}")]
    InvalidDigit { digit: u32, n: usize },
    #[error("point {point} is not in the rank-{rank} cover")]
    NotInCover { point: String, rank: usize },
    #[error("enumeration needs {needed} intervals, budget is {budget}")]
    ResourceBudget { needed: u128, budget: u64 },
    #[error("cannot parse word {0:?}")]
    BadWord(String),
    #[error(transparent)]
    Num(#[from] NumError),
}

/// The generator `{x ↦ λx + t_i}` of a homogeneous self-similar set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HomogeneousIfs {
    ratio: Rational,
    translations: Vec<Rational>,
}

/// A finite address `i_1 i_2 … i_k`; the empty word is the convex hull.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct CylinderWord(Vec<u32>);

/// An eventually periodic infinite address `prefix (period)^∞`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct InfiniteCode {
    prefix: Vec<u32>,
    period: Vec<u32>,
}

/// Where to look for a point: an exact scalar, or an address.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Point {
    Scalar(Rational),
    Code(InfiniteCode),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Thickness {
    Finite(Rational),
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Gap {
    /// `i` such that the gap lies between `f_i(b)` and `f_{i+1}(a)`.
    pub index: usize,
    pub length: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapProfile {
    pub hull: RatInterval,
    pub gap_set: Vec<Gap>,
    /// Largest gap, `0` when there is none.
    pub kappa: Rational,
    pub thickness_lb: Thickness,
}

impl HomogeneousIfs {
    pub fn new(ratio: Rational, mut translations: Vec<Rational>) -> Result<Self, IfsError> {
        if !ratio.is_positive() || ratio >= Rational::one() {
            return Err(IfsError::BadRatio(ratio.to_string()));
        }
        if translations.len() < 2 {
            return Err(IfsError::TooFewMaps(translations.len()));
        }
        translations.sort();
        if let Some(w) = translations.windows(2).find(|w| w[0] == w[1]) {
            return Err(IfsError::DuplicateMap(w[0].to_string()));
        }
        Ok(HomogeneousIfs { ratio, translations })
    }

    /// The middle-third Cantor set.
    pub fn cantor() -> Self {
        HomogeneousIfs::new(Rational::frac(1, 3), vec![Rational::zero(), Rational::frac(2, 3)]).expect("valid")
    }

    pub fn ratio(&self) -> &Rational {
        &self.ratio
    }

    pub fn translations(&self) -> &[Rational] {
        &self.translations
    }

    /// Number of maps.
    pub fn len(&self) -> usize {
        self.translations.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn fixed_point(&self, t: &Rational) -> Rational {
        t / (Rational::one() - &self.ratio)
    }

    /// `[a, b]` with `a = t_1/(1-λ)` and `b = t_n/(1-λ)`.
    pub fn convex_hull(&self) -> RatInterval {
        let a = self.fixed_point(&self.translations[0]);
        let b = self.fixed_point(self.translations.last().expect("n >= 2"));
        RatInterval::new(a, b).expect("sorted translations give a <= b")
    }

    pub fn hull_length(&self) -> Rational {
        self.convex_hull().width()
    }

    /// `f_i(x)` with 1-based `i`.
    pub fn apply(&self, i: usize, x: &Rational) -> Rational {
        &self.ratio * x + &self.translations[i - 1]
    }

    /// Rank-1 gaps `f_{i+1}(a) - f_i(b) > 0` and their maximum κ.
    pub fn gap_profile(&self) -> GapProfile {
        let hull = self.convex_hull();
        let gap_set: Vec<Gap> = (1..self.len())
            .filter_map(|i| {
                let length = self.apply(i + 1, hull.lo()) - self.apply(i, hull.hi());
                length.is_positive().then_some(Gap { index: i, length })
            })
            .collect();
        let kappa = gap_set.iter().map(|g| g.length.clone()).max().unwrap_or_else(Rational::zero);
        GapProfile { hull, gap_set, kappa, thickness_lb: self.thickness_lower_bound() }
    }

    pub fn kappa(&self) -> Rational {
        self.gap_profile().kappa
    }

    fn check_word(&self, w: &CylinderWord) -> Result<(), IfsError> {
        match w.0.iter().find(|&&d| d == 0 || d as usize > self.len()) {
            Some(&digit) => Err(IfsError::InvalidDigit { digit, n: self.len() }),
            None => Ok(()),
        }
    }

    /// Offset `Σ λ^{j-1} t_{i_j}` of the composed map `f_w`.
    fn word_offset(&self, w: &CylinderWord) -> Rational {
        let mut offset = Rational::zero();
        let mut scale = Rational::one();
        for &d in &w.0 {
            offset += &(&scale * &self.translations[d as usize - 1]);
            scale *= &self.ratio;
        }
        offset
    }

    pub fn ratio_pow(&self, k: usize) -> Rational {
        self.ratio.pow(k as i64).expect("positive ratio")
    }

    /// `f_w([a, b])`, of length `λ^{|w|}(b - a)`.
    pub fn basic_interval(&self, w: &CylinderWord) -> Result<RatInterval, IfsError> {
        self.check_word(w)?;
        let hull = self.convex_hull();
        let offset = self.word_offset(w);
        let scale = self.ratio_pow(w.len());
        Ok(RatInterval::new(&offset + &scale * hull.lo(), &offset + &scale * hull.hi())?)
    }

    /// Union of all rank-`k` basic intervals, merged.
    ///
    /// Built level by level as `∪_i f_i(cover_{k-1})`, which equals the union
    /// of the `n^k` cylinders but stays small when pieces overlap.
    pub fn level_cover(&self, k: usize, budget: u64) -> Result<IntervalUnion, IfsError> {
        let mut cover = IntervalUnion::from_intervals(vec![self.convex_hull()]);
        for _ in 0..k {
            let needed = cover.len() as u128 * self.len() as u128;
            if needed > budget as u128 {
                return Err(IfsError::ResourceBudget { needed, budget });
            }
            let mut next = Vec::with_capacity(needed as usize);
            for t in &self.translations {
                for iv in cover.intervals() {
                    next.push(
                        RatInterval::new(&self.ratio * iv.lo() + t, &self.ratio * iv.hi() + t).expect("λ > 0 keeps order"),
                    );
                }
            }
            cover = IntervalUnion::from_intervals(next);
        }
        Ok(cover)
    }

    /// A rank-`k` word whose basic interval contains the point.
    pub fn locate(&self, point: &Point, k: usize) -> Result<CylinderWord, IfsError> {
        match point {
            Point::Code(code) => {
                let w = code.truncate(k);
                self.check_word(&w)?;
                Ok(w)
            }
            Point::Scalar(x) => {
                let mut digits = Vec::with_capacity(k);
                let hull = self.convex_hull();
                if self.descend(x, &Rational::zero(), &Rational::one(), &hull, k, &mut digits) {
                    Ok(CylinderWord(digits))
                } else {
                    Err(IfsError::NotInCover { point: x.to_string(), rank: k })
                }
            }
        }
    }

    /// Depth-first search for a chain of nested cylinders containing `x`;
    /// smaller digits are preferred.
    fn descend(
        &self,
        x: &Rational,
        offset: &Rational,
        scale: &Rational,
        hull: &RatInterval,
        remaining: usize,
        digits: &mut Vec<u32>,
    ) -> bool {
        let here = RatInterval::new(offset + scale * hull.lo(), offset + scale * hull.hi()).expect("ordered");
        if !here.contains(x) {
            return false;
        }
        if remaining == 0 {
            return true;
        }
        for (i, t) in self.translations.iter().enumerate() {
            digits.push(i as u32 + 1);
            let child_offset = offset + scale * t;
            let child_scale = scale * &self.ratio;
            if self.descend(x, &child_offset, &child_scale, hull, remaining - 1, digits) {
                return true;
            }
            digits.pop();
        }
        false
    }

    /// Smallest ratio of an adjacent rank-1 bridge to the gap it borders.
    ///
    /// Bridges are the connected components of the rank-1 cover. This equals
    /// Newhouse thickness when all rank-1 gaps have the same length and is a
    /// lower-bound-style proxy otherwise.
    pub fn thickness_lower_bound(&self) -> Thickness {
        let cover = self.level_cover(1, u64::MAX).expect("rank 1 is always within budget");
        let comps = cover.intervals();
        if comps.len() < 2 {
            return Thickness::Infinite;
        }
        let best = comps
            .windows(2)
            .map(|w| {
                let gap = w[1].lo() - w[0].hi();
                let bridge = w[0].width().min(w[1].width());
                bridge / gap
            })
            .min()
            .expect("at least one gap");
        Thickness::Finite(best)
    }

    /// The generator of `{-x : x ∈ K}`; digit `i` becomes `n + 1 - i`.
    pub fn reflect(&self) -> HomogeneousIfs {
        HomogeneousIfs::new(self.ratio.clone(), self.translations.iter().map(|t| -t).collect())
            .expect("reflection preserves validity")
    }

    pub fn reflect_word(&self, w: &CylinderWord) -> CylinderWord {
        let n = self.len() as u32;
        CylinderWord(w.0.iter().map(|&d| n + 1 - d).collect())
    }

    /// Left end code `1^∞`.
    pub fn left_code(&self) -> InfiniteCode {
        InfiniteCode::constant(1)
    }

    /// Right end code `n^∞`.
    pub fn right_code(&self) -> InfiniteCode {
        InfiniteCode::constant(self.len() as u32)
    }
}

impl fmt::Debug for HomogeneousIfs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HomogeneousIfs(ratio={}, translations={:?})", self.ratio, self.translations)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RatioRepr {
    Rational(Rational),
    Algebraic(AlgebraicReal),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IfsRepr {
    ratio: RatioRepr,
    translations: Vec<Rational>,
}

impl Serialize for HomogeneousIfs {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        IfsRepr { ratio: RatioRepr::Rational(self.ratio.clone()), translations: self.translations.clone() }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HomogeneousIfs {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = IfsRepr::deserialize(deserializer)?;
        let ratio = match repr.ratio {
            RatioRepr::Rational(r) => r,
            RatioRepr::Algebraic(a) => a
                .as_rational()
                .ok_or_else(|| serde::de::Error::custom(IfsError::IrrationalRatio(a.to_string())))?,
        };
        HomogeneousIfs::new(ratio, repr.translations).map_err(serde::de::Error::custom)
    }
}

impl CylinderWord {
    pub fn new(digits: Vec<u32>) -> Self {
        CylinderWord(digits)
    }

    pub fn empty() -> Self {
        CylinderWord(Vec::new())
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, d: u32) -> CylinderWord {
        let mut v = self.0.clone();
        v.push(d);
        CylinderWord(v)
    }

    pub fn concat(&self, other: &CylinderWord) -> CylinderWord {
        CylinderWord(self.0.iter().chain(other.0.iter()).copied().collect())
    }

    /// All words of length `k` over `1..=n`, in lexicographic order.
    pub fn all(n: usize, k: usize) -> impl Iterator<Item = CylinderWord> {
        let total = (n as u64).pow(k as u32);
        (0..total).map(move |mut idx| {
            let mut digits = vec![0u32; k];
            for slot in digits.iter_mut().rev() {
                *slot = (idx % n as u64) as u32 + 1;
                idx /= n as u64;
            }
            CylinderWord(digits)
        })
    }
}

fn parse_digits(s: &str) -> Result<Vec<u32>, IfsError> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let bad = || IfsError::BadWord(s.to_string());
    if s.contains(',') {
        s.split(',').map(|d| d.trim().parse::<u32>().map_err(|_| bad())).collect()
    } else {
        s.chars().map(|c| c.to_digit(10).ok_or_else(bad)).collect()
    }
}

fn write_digits(f: &mut fmt::Formatter<'_>, digits: &[u32]) -> fmt::Result {
    if digits.iter().all(|&d| d <= 9) {
        digits.iter().try_for_each(|d| write!(f, "{d}"))
    } else {
        let parts: Vec<String> = digits.iter().map(u32::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for CylinderWord {
    type Err = IfsError;

    /// `"212"`, `"2,1,2"`, or `"()"`/`""` for the empty word.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        Ok(CylinderWord(parse_digits(t)?))
    }
}

impl fmt::Display for CylinderWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "()");
        }
        write_digits(f, &self.0)
    }
}

impl fmt::Debug for CylinderWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CylinderWord({self})")
    }
}

impl Serialize for CylinderWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CylinderWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(CylinderWord(Vec::<u32>::deserialize(deserializer)?))
    }
}

impl InfiniteCode {
    pub fn new(prefix: Vec<u32>, period: Vec<u32>) -> Result<Self, IfsError> {
        if period.is_empty() || prefix.iter().chain(period.iter()).any(|&d| d == 0) {
            return Err(IfsError::BadWord(format!("{prefix:?}({period:?})")));
        }
        Ok(InfiniteCode { prefix, period })
    }

    pub fn constant(d: u32) -> Self {
        InfiniteCode { prefix: Vec::new(), period: vec![d] }
    }

    pub fn digit(&self, i: usize) -> u32 {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    pub fn truncate(&self, k: usize) -> CylinderWord {
        CylinderWord((0..k).map(|i| self.digit(i)).collect())
    }

    /// The code of the reflected point in `reflect(K)` for an `n`-map IFS.
    pub fn reflected(&self, n: usize) -> InfiniteCode {
        let n = n as u32;
        InfiniteCode {
            prefix: self.prefix.iter().map(|&d| n + 1 - d).collect(),
            period: self.period.iter().map(|&d| n + 1 - d).collect(),
        }
    }
}

impl FromStr for InfiniteCode {
    type Err = IfsError;

    /// `"21(2)"` is `2 1 2 2 2 …`; a code without parentheses repeats its
    /// last digit.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_end_matches('∞').trim_end_matches("^inf");
        let (prefix, period) = match t.split_once('(') {
            Some((p, rest)) => {
                let inner = rest.strip_suffix(')').ok_or_else(|| IfsError::BadWord(s.to_string()))?;
                (parse_digits(p.trim_end_matches(','))?, parse_digits(inner)?)
            }
            None => {
                let mut d = parse_digits(t)?;
                let last = d.pop().ok_or_else(|| IfsError::BadWord(s.to_string()))?;
                (d, vec![last])
            }
        };
        InfiniteCode::new(prefix, period)
    }
}

impl fmt::Display for InfiniteCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_digits(f, &self.prefix)?;
        write!(f, "(")?;
        write_digits(f, &self.period)?;
        write!(f, ")")
    }
}

impl Serialize for Thickness {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Thickness::Finite(r) => r.serialize(serializer),
            Thickness::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl fmt::Display for Thickness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Thickness::Finite(r) => write!(f, "{r}"),
            Thickness::Infinite => write!(f, "inf"),
        }
    }
}
