//! Deciding the ratio condition and issuing replayable certificates that a
//! closed interval lies inside `f(K1, K2)`.
//!
//! A rectangle `I × J = f_u([a,b]) × g_v([c,d])` with ranks `p = |u|`,
//! `p' = |v|` and a function increasing in both variables satisfies
//! `f(K1 ∩ I, K2 ∩ J) = f(I, J)` once the images of neighbouring children
//! overlap at every level. Splitting `I × J` into rows (one child of `I`, all
//! children of `J`) needs
//!
//! ```text
//! within a row:   λ^(p+1) (b-a) min ∂x f  >=  λ^p' κ2 max ∂y f
//! across rows:    λ^p' (d-c) min ∂y f     >=  λ^p κ1 max ∂x f
//! ```
//!
//! and the transposed split swaps the roles. Dividing each inequality by the
//! power of λ on its gap side makes the margins depend on `p - p'` only, so
//! they hold for every deeper pair of children as well (enclosures only
//! shrink). Margins are non-strict.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{RatInterval, Rational};
use crate::exprfn::{Expr, ExprError, GradEnclosure, Var};
use crate::ifs_core::{CylinderWord, HomogeneousIfs, IfsError, InfiniteCode, Point};

pub const CERTIFICATE_FORMAT: &str = "fractarith-certificate/1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error("contraction ratios differ: {0} vs {1}")]
    RatioMismatch(String, String),
    #[error("partial derivative in {var:?} is not sign-definite: enclosure {enclosure}")]
    SignIndefinite { var: Var, enclosure: Box<RatInterval> },
    #[error("{orientation} {inequality} margin is negative: {margin}")]
    MarginNegative { orientation: Orientation, inequality: Inequality, margin: Rational },
    #[error("certified corners are not ordered after rounding: {lo} > {hi}")]
    DegenerateCorners { lo: Rational, hi: Rational },
    #[error("no certificate up to depth {max_depth}: {}", format_reasons(.reasons))]
    ExhaustedDepth { max_depth: usize, reasons: Vec<(usize, String)> },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Ifs(#[from] IfsError),
}

fn format_reasons(reasons: &[(usize, String)]) -> String {
    reasons.iter().map(|(k, r)| format!("[{k}] {r}")).collect::<Vec<_>>().join("; ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignCase {
    pub sx: Sign,
    pub sy: Sign,
}

impl SignCase {
    pub fn from_grad(grad: &GradEnclosure) -> Result<SignCase, CertifyError> {
        let sign = |var, iv: &RatInterval| match iv.strict_sign() {
            Some(1) => Ok(Sign::Plus),
            Some(_) => Ok(Sign::Minus),
            None => Err(CertifyError::SignIndefinite { var, enclosure: Box::new(iv.clone()) }),
        };
        Ok(SignCase { sx: sign(Var::X, &grad.dx)?, sy: sign(Var::Y, &grad.dy)? })
    }
}

impl fmt::Display for SignCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |s: Sign| if s == Sign::Plus { '+' } else { '-' };
        write!(f, "({},{})", c(self.sx), c(self.sy))
    }
}

/// Which factor indexes the rows of the chaining argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// Rows are children of `I`; each row chains over the children of `J`.
    #[serde(rename = "rows-x")]
    RowsX,
    /// Rows are children of `J`; each row chains over the children of `I`.
    #[serde(rename = "rows-y")]
    RowsY,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::RowsX => "rows-x",
            Orientation::RowsY => "rows-y",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Inequality {
    /// Bridges the gaps of the second set: `(b-a)·min ∂x f` against `κ2·max ∂y f`.
    #[serde(rename = "m_row")]
    Row,
    /// Bridges the gaps of the first set: `(d-c)·min ∂y f` against `κ1·max ∂x f`.
    #[serde(rename = "m_gap")]
    Gap,
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Inequality::Row => "m_row",
            Inequality::Gap => "m_gap",
        })
    }
}

/// The two chaining slacks of one orientation, normalized as in the module
/// docs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Margins {
    pub m_row: Rational,
    pub m_gap: Rational,
}

impl Margins {
    pub fn hold(&self) -> bool {
        !self.m_row.is_negative() && !self.m_gap.is_negative()
    }

    fn first_violation(&self) -> Option<(Inequality, Rational)> {
        if self.m_row.is_negative() {
            Some((Inequality::Row, self.m_row.clone()))
        } else if self.m_gap.is_negative() {
            Some((Inequality::Gap, self.m_gap.clone()))
        } else {
            None
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub format: String,
    pub ifs1: HomogeneousIfs,
    pub ifs2: HomogeneousIfs,
    pub f: Expr,
    pub word1: CylinderWord,
    pub word2: CylinderWord,
    pub sign_case: SignCase,
    pub grad: GradEnclosure,
    pub orientation: Orientation,
    pub margins: Margins,
    pub transposed_margins: Margins,
    pub certified_interval: RatInterval,
}

/// Upper end of the ratio window; infinite when the second set has no gaps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    Finite(Rational),
    Infinite,
}

impl Bound {
    fn exceeds(&self, x: &Rational) -> bool {
        match self {
            Bound::Finite(b) => x < b,
            Bound::Infinite => true,
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Bound::Finite(r) => r.serialize(serializer),
            Bound::Infinite => serializer.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub word1: CylinderWord,
    pub word2: CylinderWord,
    /// `|∂y f| / |∂x f|` over the rectangle; `None` when `∂x f` may vanish.
    pub ratio_enclosure: Option<RatInterval>,
    pub lower_bound: Rational,
    pub upper_bound: Bound,
    pub holds: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GlobalConditionReport {
    pub scaled_width1: Rational,
    pub kappa1: Rational,
    pub width2: Rational,
    pub kappa2: Rational,
    pub row_condition: bool,
    pub gap_condition: bool,
    pub holds: bool,
}

/// A sign case transformed to both partials positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduced {
    pub f: Expr,
    pub ifs1: HomogeneousIfs,
    pub ifs2: HomogeneousIfs,
    pub reflect_x: bool,
    pub reflect_y: bool,
    pub negate_output: bool,
}

impl Reduced {
    pub fn word1(&self, w: &CylinderWord) -> CylinderWord {
        if self.reflect_x {
            self.ifs1.reflect_word(w)
        } else {
            w.clone()
        }
    }

    pub fn word2(&self, w: &CylinderWord) -> CylinderWord {
        if self.reflect_y {
            self.ifs2.reflect_word(w)
        } else {
            w.clone()
        }
    }

    /// Maps an interval of `f'` values back to values of `f`.
    pub fn map_back(&self, iv: &RatInterval) -> RatInterval {
        if self.negate_output {
            iv.neg()
        } else {
            iv.clone()
        }
    }
}

fn same_ratio(k1: &HomogeneousIfs, k2: &HomogeneousIfs) -> Result<(), CertifyError> {
    if k1.ratio() != k2.ratio() {
        return Err(CertifyError::RatioMismatch(k1.ratio().to_string(), k2.ratio().to_string()));
    }
    Ok(())
}

fn ratio_window(k1: &HomogeneousIfs, k2: &HomogeneousIfs) -> (Rational, Bound) {
    let lower = k1.kappa() / k2.hull_length();
    let kappa2 = k2.kappa();
    let upper = if kappa2.is_zero() {
        Bound::Infinite
    } else {
        Bound::Finite(k1.ratio() * k1.hull_length() / kappa2)
    };
    (lower, upper)
}

/// The pointwise ratio condition, with the ratio enclosed over the rank-`depth`
/// rectangle containing the point.
pub fn check_pointwise(
    k1: &HomogeneousIfs,
    k2: &HomogeneousIfs,
    f: &Expr,
    point: (&Point, &Point),
    depth: usize,
) -> Result<ConditionReport, CertifyError> {
    same_ratio(k1, k2)?;
    let word1 = k1.locate(point.0, depth)?;
    let word2 = k2.locate(point.1, depth)?;
    let grad = f.grad_enclosure(&k1.basic_interval(&word1)?, &k2.basic_interval(&word2)?)?;
    let (lower_bound, upper_bound) = ratio_window(k1, k2);
    let ratio_enclosure = grad.dy.abs().div(&grad.dx.abs()).ok();
    let holds = match &ratio_enclosure {
        None => Verdict::Undecided,
        Some(r) if &lower_bound < r.lo() && upper_bound.exceeds(r.hi()) => Verdict::Yes,
        Some(r) if r.hi() <= &lower_bound || !upper_bound.exceeds(r.lo()) => Verdict::No,
        Some(_) => Verdict::Undecided,
    };
    Ok(ConditionReport { word1, word2, ratio_enclosure, lower_bound, upper_bound, holds })
}

/// The global conditions `λ(b-a) > κ2` and `κ1 < d-c`.
pub fn check_global_conditions(k1: &HomogeneousIfs, k2: &HomogeneousIfs) -> GlobalConditionReport {
    let scaled_width1 = k1.ratio() * k1.hull_length();
    let kappa1 = k1.kappa();
    let width2 = k2.hull_length();
    let kappa2 = k2.kappa();
    let row_condition = scaled_width1 > kappa2;
    let gap_condition = kappa1 < width2;
    GlobalConditionReport {
        holds: row_condition && gap_condition,
        scaled_width1,
        kappa1,
        width2,
        kappa2,
        row_condition,
        gap_condition,
    }
}

pub fn reduce_sign_case(f: &Expr, sign_case: SignCase, k1: &HomogeneousIfs, k2: &HomogeneousIfs) -> Reduced {
    let mut r = Reduced {
        f: f.clone(),
        ifs1: k1.clone(),
        ifs2: k2.clone(),
        reflect_x: false,
        reflect_y: false,
        negate_output: false,
    };
    match (sign_case.sx, sign_case.sy) {
        (Sign::Plus, Sign::Plus) => {}
        (Sign::Minus, Sign::Minus) => {
            r.f = Expr::neg(f.clone());
            r.negate_output = true;
        }
        (Sign::Plus, Sign::Minus) => {
            r.f = f.negate_var(Var::Y);
            r.ifs2 = k2.reflect();
            r.reflect_y = true;
        }
        (Sign::Minus, Sign::Plus) => {
            r.f = f.negate_var(Var::X);
            r.ifs1 = k1.reflect();
            r.reflect_x = true;
        }
    }
    r
}

/// Both orientations' margins for a rectangle with `dx, dy > 0`.
fn orientation_margins(
    k1: &HomogeneousIfs,
    k2: &HomogeneousIfs,
    rank_offset: i64,
    dx: &RatInterval,
    dy: &RatInterval,
) -> (Margins, Margins) {
    let lambda = k1.ratio();
    let lp = |e: i64| lambda.pow(e).expect("positive ratio");
    let (w1, w2) = (k1.hull_length(), k2.hull_length());
    let (kappa1, kappa2) = (k1.kappa(), k2.kappa());
    let row_term = |e: i64| lp(e) * &w1 * dx.lo();
    let gap_term = |e: i64| lp(e) * &w2 * dy.lo();
    let rows_x = Margins {
        m_row: row_term(1 + rank_offset) - &kappa2 * dy.hi(),
        m_gap: gap_term(-rank_offset) - &kappa1 * dx.hi(),
    };
    let rows_y = Margins {
        m_row: row_term(rank_offset) - &kappa2 * dy.hi(),
        m_gap: gap_term(1 - rank_offset) - &kappa1 * dx.hi(),
    };
    (rows_x, rows_y)
}

/// Certifies `f(I, J) ⊆ f(K1, K2)` for `I × J = basic_interval(word1) ×
/// basic_interval(word2)`.
pub fn certify_rectangle(
    k1: &HomogeneousIfs,
    k2: &HomogeneousIfs,
    f: &Expr,
    word1: &CylinderWord,
    word2: &CylinderWord,
) -> Result<Certificate, CertifyError> {
    same_ratio(k1, k2)?;
    let rect = (k1.basic_interval(word1)?, k2.basic_interval(word2)?);
    let grad = f.grad_enclosure(&rect.0, &rect.1)?;
    let sign_case = SignCase::from_grad(&grad)?;

    let red = reduce_sign_case(f, sign_case, k1, k2);
    let (rw1, rw2) = (red.word1(word1), red.word2(word2));
    let (ri, rj) = (red.ifs1.basic_interval(&rw1)?, red.ifs2.basic_interval(&rw2)?);
    let rgrad = red.f.grad_enclosure(&ri, &rj)?;

    let rank_offset = word1.len() as i64 - word2.len() as i64;
    let (rows_x, rows_y) = orientation_margins(&red.ifs1, &red.ifs2, rank_offset, &rgrad.dx, &rgrad.dy);
    let (orientation, margins, transposed_margins) = if rows_x.hold() {
        (Orientation::RowsX, rows_x, rows_y)
    } else if rows_y.hold() {
        (Orientation::RowsY, rows_y, rows_x)
    } else {
        let (inequality, margin) = rows_x.first_violation().expect("a margin is negative");
        return Err(CertifyError::MarginNegative { orientation: Orientation::RowsX, inequality, margin });
    };

    // f' is increasing in both variables, so its range over I' × J' runs
    // between the lower-left and upper-right corners. Irrational corner
    // values are rounded inward.
    let low = red.f.eval_point(ri.lo(), rj.lo())?;
    let high = red.f.eval_point(ri.hi(), rj.hi())?;
    let (lo, hi) = (low.hi().clone(), high.lo().clone());
    if lo > hi {
        return Err(CertifyError::DegenerateCorners { lo, hi });
    }
    let certified_interval = red.map_back(&RatInterval::new(lo, hi).expect("ordered"));

    Ok(Certificate {
        format: CERTIFICATE_FORMAT.to_string(),
        ifs1: k1.clone(),
        ifs2: k2.clone(),
        f: f.clone(),
        word1: word1.clone(),
        word2: word2.clone(),
        sign_case,
        grad,
        orientation,
        margins,
        transposed_margins,
        certified_interval,
    })
}

/// Tries the rank-`k` cylinder pair along the two codes for `k = 0..=max_depth`
/// and returns the first certificate.
pub fn auto_certify(
    k1: &HomogeneousIfs,
    k2: &HomogeneousIfs,
    f: &Expr,
    point: (&InfiniteCode, &InfiniteCode),
    max_depth: usize,
) -> Result<Certificate, CertifyError> {
    same_ratio(k1, k2)?;
    let mut reasons = Vec::new();
    for k in 0..=max_depth {
        match certify_rectangle(k1, k2, f, &point.0.truncate(k), &point.1.truncate(k)) {
            Ok(cert) => return Ok(cert),
            Err(e @ (CertifyError::Ifs(_) | CertifyError::RatioMismatch(..))) => return Err(e),
            Err(e) => reasons.push((k, e.to_string())),
        }
    }
    Err(CertifyError::ExhaustedDepth { max_depth, reasons })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub valid: bool,
    pub first_failure: Option<String>,
}

/// Re-derives every field of the certificate from its inputs.
pub fn replay(cert: &Certificate) -> ReplayReport {
    let fail = |field: &str| ReplayReport { valid: false, first_failure: Some(field.to_string()) };
    if cert.format != CERTIFICATE_FORMAT {
        return fail("format");
    }
    let fresh = match certify_rectangle(&cert.ifs1, &cert.ifs2, &cert.f, &cert.word1, &cert.word2) {
        Ok(c) => c,
        Err(e) => return fail(&format!("certification: {e}")),
    };
    let checks: [(&str, bool); 8] = [
        ("sign_case", fresh.sign_case == cert.sign_case),
        ("grad.rect", fresh.grad.rect == cert.grad.rect),
        ("grad.dx", fresh.grad.dx == cert.grad.dx),
        ("grad.dy", fresh.grad.dy == cert.grad.dy),
        ("orientation", fresh.orientation == cert.orientation),
        ("margins", fresh.margins == cert.margins && cert.margins.hold()),
        ("transposed_margins", fresh.transposed_margins == cert.transposed_margins),
        ("certified_interval", fresh.certified_interval == cert.certified_interval),
    ];
    match checks.iter().find(|(_, ok)| !ok) {
        Some((field, _)) => fail(field),
        None => ReplayReport { valid: true, first_failure: None },
    }
}
