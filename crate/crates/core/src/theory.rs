//! Closed-form conditions under which a two-region query neighbourhood is
//! classified correctly, plus the schedule coverage check and cost model.
//!
//! Notation: the pattern has background `ib_a` and foreground `if_a`; the
//! query has a region `ib_b` that should read as background and a region
//! `if_b` across the boundary that should read as foreground. With
//! `d_A = if_a - ib_a`, `d_B = if_b - ib_b` and `d_b = ib_b - ib_a`, the
//! spread-free condition is `2 d_b < d_A < 2 d_b + 2 d_B` (mirrored when
//! `d_A < 0`). When it holds, the boundary pixel on the pattern's marked
//! side (the darker region) is labelled contour.

use crate::error::{Error, Result};
use crate::image::Window;
use crate::matcher::Candidates;
use crate::patterns::{reference_neighborhoods, IntensityPair, PatternSchedule, Polarity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TheoryQuery {
    pub ib_a: u8,
    pub if_a: u8,
    pub ib_b: u8,
    pub if_b: u8,
    /// Max minus min background intensity in the pattern.
    pub spread_b_a: u8,
}

impl TheoryQuery {
    pub fn new(ib_a: u8, if_a: u8, ib_b: u8, if_b: u8, spread_b_a: u8) -> Self {
        Self {
            ib_a,
            if_a,
            ib_b,
            if_b,
            spread_b_a,
        }
    }

    pub fn d_a(&self) -> i64 {
        self.if_a as i64 - self.ib_a as i64
    }

    pub fn d_b_region(&self) -> i64 {
        self.if_b as i64 - self.ib_b as i64
    }

    pub fn d_b_shift(&self) -> i64 {
        self.ib_b as i64 - self.ib_a as i64
    }
}

/// Open interval `(lower, upper)` that `d_A` must fall into.
///
/// The spread only tightens a side when the ordering of the four
/// intensities lets the pattern's background extremes reach that side; the
/// eight orderings collapse to these conditional terms.
fn admissible_interval(t: &TheoryQuery) -> (i64, i64) {
    let d_a = t.d_a();
    let d_big = t.d_b_region();
    let d_small = t.d_b_shift();
    let s2 = 2 * t.spread_b_a as i64;
    if d_a > 0 {
        let lower = 2 * d_small + if d_small >= 0 { s2 } else { 0 };
        let upper = 2 * d_small + 2 * d_big - if t.if_b <= t.if_a { s2 } else { 0 };
        (lower, upper)
    } else {
        let upper = 2 * d_small - if t.ib_b <= t.ib_a { s2 } else { 0 };
        let lower = 2 * d_big + 2 * d_small + if t.if_a <= t.if_b { s2 } else { 0 };
        (lower, upper)
    }
}

/// True iff the query boundary is guaranteed to be found: `ib_b` reads as
/// background and `if_b` as foreground. Boundary equalities count as "not
/// guaranteed".
pub fn classification_predicate(t: &TheoryQuery) -> Result<bool> {
    if t.if_b == t.ib_b {
        return Err(Error::DegenerateQuery(t.ib_b));
    }
    let d_a = t.d_a();
    if d_a == 0 {
        return Ok(false);
    }
    let (lower, upper) = admissible_interval(t);
    Ok(lower < d_a && d_a < upper)
}

/// Lower bound on the score gap between the best non-contour and the best
/// contour reference, for `n1` and `n2` pixels in the two partial regions:
/// `n1 d_A (X - d_A) - n2 d_A (Y - d_A)` with `(X, Y)` the interval ends
/// (`X = 2d_B + 2d_b - 2Δ`, `Y = 2d_b + 2Δ` in the primary case).
pub fn delta_s_lower_bound(t: &TheoryQuery, n1: u32, n2: u32) -> i64 {
    let d_a = t.d_a();
    let (lower, upper) = admissible_interval(t);
    let (x, y) = if d_a > 0 { (upper, lower) } else { (lower, upper) };
    n1 as i64 * d_a * (x - d_a) - n2 as i64 * d_a * (y - d_a)
}

/// Query pairs `(ib_b, if_b)` that no schedule entry classifies correctly.
///
/// Only pairs at least `delta_l` apart whose bright side matches the
/// schedule polarity are considered.
pub fn coverage_check(s: &PatternSchedule) -> Vec<(u8, u8)> {
    let dl = s.delta_l as i32;
    let mut uncovered = Vec::new();
    for ib_b in 0..=255u8 {
        for if_b in 0..=255u8 {
            let d = if_b as i32 - ib_b as i32;
            let in_scope = match s.polarity {
                Polarity::Set1 => d >= dl,
                Polarity::Set2 => -d >= dl,
            };
            if !in_scope {
                continue;
            }
            let covered = s.entries.iter().any(|p| {
                let t = TheoryQuery::new(p.bg(), p.fg(), ib_b, if_b, 0);
                classification_predicate(&t).expect("regions differ")
            });
            if !covered {
                uncovered.push((ib_b, if_b));
            }
        }
    }
    uncovered
}

/// Arithmetic operations for a full multi-pattern run: three per window cell
/// (subtract, multiply, accumulate) for every pixel, reference and pattern.
pub fn operation_count(n: u64, m_cols: u64, refs: u64, window: u64, patterns: u64) -> Result<u64> {
    [m_cols, refs, 3, window, window, patterns]
        .iter()
        .try_fold(n, |acc, &f| acc.checked_mul(f))
        .ok_or(Error::Overflow("operation count"))
}

/// One cell of the predicate/matcher comparison grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepPoint {
    pub pattern: IntensityPair,
    pub ib_b: u8,
    pub if_b: u8,
    pub predicate: bool,
    /// Query layouts (out of [`SWEEP_LAYOUTS`]) whose centre was labelled contour.
    pub detected: usize,
    /// Some layout had two references at the same minimal score.
    pub tied: bool,
}

impl SweepPoint {
    /// Matcher and predicate agree on every layout.
    pub fn agrees(&self) -> bool {
        self.detected == if self.predicate { SWEEP_LAYOUTS } else { 0 }
    }
}

/// Straight two-region layouts with the centre on the marked side of the
/// boundary: the twelve contour-centred reference geometries.
pub const SWEEP_LAYOUTS: usize = 12;

/// Runs every pattern against two-region 3×3 queries built from every
/// ordered pair of distinct `grid` intensities. The centre lies in the
/// region that corresponds to the pattern's marked intensity: `ib_b` for
/// dark-background patterns, `if_b` for bright-background ones.
pub fn agreement_sweep(patterns: &[IntensityPair], grid: &[u8]) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::new();
    for &p in patterns {
        let refs = reference_neighborhoods(p, 3)?;
        let candidates = Candidates::from_references(&refs);
        // The contour-centred references give the layouts: cells equal to the
        // centre value are the centre's region.
        let layouts: Vec<Vec<bool>> = refs
            .iter()
            .filter(|r| r.center_is_contour)
            .map(|r| {
                let c = r.window.center();
                r.window.values().iter().map(|&v| v == c).collect()
            })
            .collect();
        debug_assert_eq!(layouts.len(), SWEEP_LAYOUTS);
        for &ib_b in grid {
            for &if_b in grid {
                if ib_b == if_b {
                    continue;
                }
                let predicate = classification_predicate(&TheoryQuery::new(p.bg(), p.fg(), ib_b, if_b, 0))?;
                let mut detected = 0;
                let mut tied = false;
                for layout in &layouts {
                    let (own_value, other) = if p.marked() == p.bg() { (ib_b, if_b) } else { (if_b, ib_b) };
                    let values: Vec<u8> = layout.iter().map(|&own| if own { own_value } else { other }).collect();
                    let q = Window::new(3, values)?;
                    let r = candidates.best(q.values());
                    detected += r.is_contour as usize;
                    tied |= r.tied;
                }
                out.push(SweepPoint {
                    pattern: p,
                    ib_b,
                    if_b,
                    predicate,
                    detected,
                    tied,
                });
            }
        }
    }
    Ok(out)
}
