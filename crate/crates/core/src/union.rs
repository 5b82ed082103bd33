//! Finite unions of closed intervals with exact endpoints.

use serde::{Deserialize, Serialize};

use crate::exactnum::{RatInterval, Rational};

/// Sorted, pairwise-disjoint closed intervals; touching intervals are merged.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<RatInterval>", into = "Vec<RatInterval>")]
pub struct IntervalUnion {
    intervals: Vec<RatInterval>,
}

impl From<Vec<RatInterval>> for IntervalUnion {
    fn from(v: Vec<RatInterval>) -> Self {
        IntervalUnion::from_intervals(v)
    }
}

impl From<IntervalUnion> for Vec<RatInterval> {
    fn from(u: IntervalUnion) -> Self {
        u.intervals
    }
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion::default()
    }

    pub fn from_intervals(mut v: Vec<RatInterval>) -> Self {
        v.sort_by(|a, b| a.lo().cmp(b.lo()).then_with(|| a.hi().cmp(b.hi())));
        let mut out: Vec<RatInterval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo() <= last.hi() => {
                    if iv.hi() > last.hi() {
                        *last = last.hull(&iv);
                    }
                }
                _ => out.push(iv),
            }
        }
        IntervalUnion { intervals: out }
    }

    pub fn intervals(&self) -> &[RatInterval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn hull(&self) -> Option<RatInterval> {
        let first = self.intervals.first()?;
        let last = self.intervals.last()?;
        Some(first.hull(last))
    }

    fn component_index(&self, x: &Rational) -> Option<usize> {
        let idx = self.intervals.partition_point(|iv| iv.hi() < x);
        (idx < self.intervals.len() && self.intervals[idx].lo() <= x).then_some(idx)
    }

    pub fn contains_point(&self, x: &Rational) -> bool {
        self.component_index(x).is_some()
    }

    /// True iff `iv` lies inside a single component.
    pub fn contains_interval(&self, iv: &RatInterval) -> bool {
        self.component_index(iv.lo()).is_some_and(|i| iv.hi() <= self.intervals[i].hi())
    }

    pub fn is_subset_of(&self, other: &IntervalUnion) -> bool {
        self.intervals.iter().all(|iv| other.contains_interval(iv))
    }

    pub fn total_length(&self) -> Rational {
        self.intervals.iter().map(RatInterval::width).sum()
    }

    /// Widen every component by `r` and re-merge.
    pub fn inflate(&self, r: &Rational) -> IntervalUnion {
        IntervalUnion::from_intervals(self.intervals.iter().map(|iv| iv.inflate(r)).collect())
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        IntervalUnion::from_intervals(self.intervals.iter().chain(other.intervals.iter()).cloned().collect())
    }

    /// Maximal open intervals of `window` missed by the union, longest first
    /// (ties by position). Each gap is returned by its closure `[lo, hi]`.
    pub fn gaps_in(&self, window: &RatInterval) -> Vec<RatInterval> {
        let mut gaps = Vec::new();
        let mut cursor = window.lo().clone();
        for iv in &self.intervals {
            if iv.hi() < window.lo() {
                continue;
            }
            if iv.lo() > window.hi() {
                break;
            }
            if iv.lo() > &cursor {
                gaps.push(RatInterval::new(cursor.clone(), iv.lo().clone()).expect("ordered"));
            }
            if iv.hi() > &cursor {
                cursor = iv.hi().clone();
            }
        }
        if &cursor < window.hi() {
            gaps.push(RatInterval::new(cursor, window.hi().clone()).expect("ordered"));
        }
        gaps.sort_by(|a, b| b.width().cmp(&a.width()).then_with(|| a.lo().cmp(b.lo())));
        gaps
    }

    /// One `lo,hi` row per component.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lo,hi\n");
        for iv in &self.intervals {
            s.push_str(&format!("{},{}\n", iv.lo(), iv.hi()));
        }
        s
    }
}
