//! Brute-force covers and estimates used as independent oracles.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::certifier::Certificate;
use crate::exactnum::{RatInterval, Rational};
use crate::exprfn::{Expr, ExprError};
use crate::ifs_core::{CylinderWord, HomogeneousIfs, IfsError};
use crate::qexp::{Base, QuasiGreedy, DEFAULT_BUDGET};
use crate::union::IntervalUnion;

/// Default cap on rectangles or tree nodes enumerated by one call.
pub const DEFAULT_RECT_BUDGET: u64 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmpiricsError {
    #[error("enumeration needs {needed} items, budget is {budget}")]
    ResourceBudget { needed: u128, budget: u64 },
    #[error("box counts do not support a fit: {0}")]
    DegenerateFit(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Ifs(#[from] IfsError),
}

/// All words of length `max(rank, |base|)` starting with `base`.
fn extensions(base: &CylinderWord, n: usize, rank: usize) -> Vec<CylinderWord> {
    let extra = rank.saturating_sub(base.len());
    CylinderWord::all(n, extra).map(|tail| base.concat(&tail)).collect()
}

fn enumeration_size(n: usize, extra: usize) -> u128 {
    (n as u128).checked_pow(extra as u32).unwrap_or(u128::MAX)
}

/// Union of interval enclosures of `f` over every rank-`rank` rectangle
/// inside `basic_interval(base.0) × basic_interval(base.1)`.
pub fn image_cover(
    k1: &HomogeneousIfs,
    k2: &HomogeneousIfs,
    f: &Expr,
    base: (&CylinderWord, &CylinderWord),
    rank: usize,
    budget: u64,
) -> Result<IntervalUnion, EmpiricsError> {
    let needed = enumeration_size(k1.len(), rank.saturating_sub(base.0.len()))
        .saturating_mul(enumeration_size(k2.len(), rank.saturating_sub(base.1.len())));
    if needed > budget as u128 {
        return Err(EmpiricsError::ResourceBudget { needed, budget });
    }
    let rows: Vec<RatInterval> =
        extensions(base.0, k1.len(), rank).iter().map(|w| k1.basic_interval(w)).collect::<Result<_, _>>()?;
    let cols: Vec<RatInterval> =
        extensions(base.1, k2.len(), rank).iter().map(|w| k2.basic_interval(w)).collect::<Result<_, _>>()?;
    let pieces: Vec<IntervalUnion> = rows
        .par_iter()
        .map(|i| {
            let images = cols.iter().map(|j| f.eval_interval(i, j)).collect::<Result<Vec<_>, _>>()?;
            Ok(IntervalUnion::from_intervals(images))
        })
        .collect::<Result<_, ExprError>>()?;
    Ok(IntervalUnion::from_intervals(pieces.into_iter().flat_map(Vec::from).collect()))
}

/// Maximal open sub-intervals of `window` missed by `u`, longest first.
pub fn gap_report(u: &IntervalUnion, window: &RatInterval) -> Vec<RatInterval> {
    u.gaps_in(window)
}

struct UqSearch<'a> {
    eta: &'a mut QuasiGreedy,
    depth: usize,
    budget: u64,
    nodes: u64,
    prefixes: Vec<Vec<u8>>,
}

impl UqSearch<'_> {
    /// `active` holds `(complemented, offset)` for every tail still equal to
    /// the matching prefix of η.
    fn descend(&mut self, prefix: &mut Vec<u8>, active: &[(bool, usize)]) -> Result<(), EmpiricsError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(EmpiricsError::ResourceBudget { needed: self.nodes as u128, budget: self.budget });
        }
        if prefix.len() == self.depth {
            self.prefixes.push(prefix.clone());
            return Ok(());
        }
        'digit: for c in [0u8, 1] {
            let mut next = Vec::with_capacity(active.len() + 1);
            for &(flip, j) in active {
                let d = if flip { 1 - c } else { c };
                // beyond the computed window of η the constraint is dropped,
                // which keeps the cover a superset
                let Some(e) = self.eta.digit(j) else { continue };
                match d.cmp(&e) {
                    std::cmp::Ordering::Less => {}
                    std::cmp::Ordering::Equal => next.push((flip, j + 1)),
                    std::cmp::Ordering::Greater => continue 'digit,
                }
            }
            next.push((c == 1, 0));
            prefix.push(c);
            self.descend(prefix, &next)?;
            prefix.pop();
        }
        Ok(())
    }
}

/// Superset of `U_q` from the digit prefixes of length `depth` that do not
/// yet violate the uniqueness criterion.
pub fn uq_cover(q: &Base, depth: usize, budget: u64) -> Result<IntervalUnion, EmpiricsError> {
    let mut eta = QuasiGreedy::new(q, DEFAULT_BUDGET);
    let mut search = UqSearch { eta: &mut eta, depth, budget, nodes: 0, prefixes: Vec::new() };
    search.descend(&mut Vec::new(), &[])?;
    let prefixes = search.prefixes;

    let qi = q.enclosure(&Rational::new(1, num_bigint::BigInt::from(1u8) << 64).expect("nonzero"));
    let (q_lo, q_hi) = (qi.lo().clone(), qi.hi().clone());
    let value = |w: &[u8], base: &Rational| -> Rational {
        let inv = base.recip().expect("q > 1");
        let mut scale = Rational::one();
        let mut s = Rational::zero();
        for &d in w {
            scale *= &inv;
            if d == 1 {
                s += &scale;
            }
        }
        s
    };
    let tail = q_lo.pow(-(depth as i64)).expect("q > 1") / (&q_lo - Rational::one());
    let intervals = prefixes
        .iter()
        .map(|w| RatInterval::new(value(w, &q_hi), value(w, &q_lo) + &tail).expect("ordered"))
        .collect();
    Ok(IntervalUnion::from_intervals(intervals))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimEstimate {
    pub counts: Vec<(usize, u128)>,
    pub slope: f64,
    pub residual: f64,
}

/// Number of boxes of side `size` needed to cover `u`, counting each
/// component separately.
pub fn box_count(u: &IntervalUnion, size: &Rational) -> u128 {
    u.intervals()
        .iter()
        .map(|iv| {
            let boxes = (iv.width() / size).ceil();
            u128::try_from(boxes).unwrap_or(u128::MAX).max(1)
        })
        .sum()
}

/// Least-squares slope of `log N_k` against `k·log(1/λ)` with boxes of side
/// `λ^k · unit`.
pub fn box_dim_estimate(
    covers: &[(usize, IntervalUnion)],
    lambda: &Rational,
    unit: &Rational,
) -> Result<DimEstimate, EmpiricsError> {
    if covers.len() < 3 {
        return Err(EmpiricsError::DegenerateFit(format!("{} ranks, need at least 3", covers.len())));
    }
    let counts: Vec<(usize, u128)> = covers
        .iter()
        .map(|(k, u)| (*k, box_count(u, &(lambda.pow(*k as i64).expect("positive ratio") * unit))))
        .collect();
    if counts.windows(2).all(|w| w[0].1 == w[1].1) {
        return Err(EmpiricsError::DegenerateFit("box counts are constant".into()));
    }
    let scale = -lambda.to_f64().ln();
    let xs: Vec<f64> = counts.iter().map(|(k, _)| *k as f64 * scale).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, n)| (*n as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual =
        (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    if !slope.is_finite() {
        return Err(EmpiricsError::DegenerateFit("non-finite slope".into()));
    }
    Ok(DimEstimate { counts, slope, residual })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub rank: usize,
    pub radius: Rational,
    pub cover_components: usize,
    /// Containment in the cover itself.
    pub contained_in_cover: bool,
    /// Containment in the cover widened by `radius`; the verdict.
    pub contained: bool,
}

/// Checks `certified_interval ⊆ image_cover` widened by
/// `λ^rank · (max|∂x f|·(b-a) + max|∂y f|·(d-c))`.
pub fn oracle_check(cert: &Certificate, rank: usize, budget: u64) -> Result<OracleReport, EmpiricsError> {
    let cover = image_cover(&cert.ifs1, &cert.ifs2, &cert.f, (&cert.word1, &cert.word2), rank, budget)?;
    let radius = cert.ifs1.ratio_pow(rank)
        * (cert.grad.dx.abs().hi() * cert.ifs1.hull_length() + cert.grad.dy.abs().hi() * cert.ifs2.hull_length());
    let contained_in_cover = cover.contains_interval(&cert.certified_interval);
    let contained = cover.inflate(&radius).contains_interval(&cert.certified_interval);
    Ok(OracleReport { rank, radius, cover_components: cover.len(), contained_in_cover, contained })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendRow {
    pub q: String,
    pub estimate: Option<DimEstimate>,
    pub note: Option<String>,
}

/// Box-counting estimates for `U_q · U_q` built from depth-`d` covers of
/// `U_q`, one row per base; printed for inspection only.
pub fn uq_product_trend(bases: &[Base], depths: std::ops::RangeInclusive<usize>, budget: u64) -> Vec<TrendRow> {
    bases
        .par_iter()
        .map(|q| {
            let row = |estimate, note| TrendRow { q: q.to_string(), estimate, note };
            let Some(qr) = q.as_rational() else {
                return row(None, Some("rational base required".into()));
            };
            let mut covers = Vec::new();
            for d in depths.clone() {
                let u = match uq_cover(q, d, budget) {
                    Ok(u) => u,
                    Err(e) => return row(None, Some(e.to_string())),
                };
                let products = u
                    .intervals()
                    .iter()
                    .flat_map(|i| u.intervals().iter().map(move |j| i.mul(j)))
                    .collect();
                covers.push((d, IntervalUnion::from_intervals(products)));
            }
            let lambda = qr.recip().expect("q > 1");
            match box_dim_estimate(&covers, &lambda, &Rational::one()) {
                Ok(est) => row(Some(est), None),
                Err(e) => row(None, Some(e.to_string())),
            }
        })
        .collect()
}

/// `rank,count` rows.
pub fn counts_csv(est: &DimEstimate) -> String {
    let mut s = String::from("rank,count\n");
    for (k, n) in &est.counts {
        let _ = writeln!(s, "{k},{n}");
    }
    s
}

/// Horizontal bar stacks, one row per labelled union.
pub fn union_stack_svg(rows: &[(String, IntervalUnion)]) -> String {
    const WIDTH: f64 = 800.0;
    const ROW: f64 = 24.0;
    const LABEL: f64 = 80.0;
    let hull = rows.iter().filter_map(|(_, u)| u.hull()).reduce(|a, b| a.hull(&b));
    let (lo, hi) = hull.map_or((0.0, 1.0), |h| (h.lo().to_f64(), h.hi().to_f64()));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x = |v: &Rational| LABEL + (v.to_f64() - lo) / span * (WIDTH - LABEL - 10.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{}" font-family="monospace" font-size="12">"#,
        ROW * rows.len() as f64 + 10.0
    );
    for (r, (label, u)) in rows.iter().enumerate() {
        let y = 5.0 + ROW * r as f64;
        let _ = writeln!(s, r#"  <text x="4" y="{:.1}">{label}</text>"#, y + 14.0);
        for iv in u.intervals() {
            let (x0, x1) = (x(iv.lo()), x(iv.hi()));
            let _ = writeln!(
                s,
                r#"  <rect x="{x0:.3}" y="{y:.1}" width="{:.3}" height="{:.1}" fill="black"/>"#,
                (x1 - x0).max(0.5),
                ROW - 8.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
