//! Patch matching: each query pixel takes the contour label of the training
//! neighbourhood closest to its own neighbourhood under the sum of squared
//! intensity differences.
//!
//! Everything in the per-pixel loop is integer arithmetic. Rows are
//! processed in parallel on the ambient rayon pool; each worker owns a
//! disjoint band of the output so the result never depends on scheduling.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{check_window_size, rotate_buffer, ColorImage, GrayImage, Window};
use crate::patterns::{reference_neighborhoods, PatternPair, PatternSchedule, PatternSource, ReferenceNeighborhood};

/// Binary contour mask, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContourMap {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl ContourMap {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: mask.len(),
            });
        }
        Ok(Self {
            width,
            height,
            mask,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            mask: vec![false; width * height],
        }
    }

    /// Nonzero pixels are contour.
    pub fn from_gray(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            mask: img.pixels().iter().map(|&v| v != 0).collect(),
        }
    }

    /// 255 for contour, 0 elsewhere.
    pub fn to_gray(&self) -> GrayImage {
        let px = self.mask.iter().map(|&m| if m { 255 } else { 0 }).collect();
        GrayImage::new(self.width, self.height, px).expect("mask has image size")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.mask[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn same_dims(&self, other: &ContourMap) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Chebyshev dilation by `radius` pixels (a `(2r+1)`-square structuring element).
    pub fn dilate(&self, radius: usize) -> ContourMap {
        let (w, h) = (self.width, self.height);
        let r = radius as isize;
        let mut out = ContourMap::empty(w, h);
        for y in 0..h {
            for x in 0..w {
                if !self.get(x, y) {
                    continue;
                }
                for dy in -r..=r {
                    for dx in -r..=r {
                        let (nx, ny) = (x as isize + dx, y as isize + dy);
                        if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                            out.set(nx as usize, ny as usize, true);
                        }
                    }
                }
            }
        }
        out
    }

    /// `img` in gray with contour pixels painted red.
    pub fn overlay(&self, img: &GrayImage) -> Result<ColorImage> {
        if img.width() != self.width || img.height() != self.height {
            return Err(Error::DimensionMismatch(format!(
                "image {}x{} vs map {}x{}",
                img.width(),
                img.height(),
                self.width,
                self.height
            )));
        }
        let mut out = ColorImage::from_gray(img);
        for (i, _) in self.mask.iter().enumerate().filter(|(_, &m)| m) {
            out.set(i % self.width, i / self.width, [255, 0, 0]);
        }
        Ok(out)
    }

    pub fn rotate90(&self, quarter_turns: i32) -> ContourMap {
        let (width, height, mask) = rotate_buffer(self.width, self.height, &self.mask, quarter_turns);
        ContourMap {
            width,
            height,
            mask,
        }
    }

    pub fn union(&self, other: &ContourMap) -> Result<ContourMap> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn difference(&self, other: &ContourMap) -> Result<ContourMap> {
        self.zip_with(other, |a, b| a && !b)
    }

    fn zip_with(&self, other: &ContourMap, f: impl Fn(bool, bool) -> bool) -> Result<ContourMap> {
        if !self.same_dims(other) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        let mask = self.mask.iter().zip(&other.mask).map(|(&a, &b)| f(a, b)).collect();
        Ok(ContourMap {
            width: self.width,
            height: self.height,
            mask,
        })
    }
}

/// Outcome of matching one query neighbourhood.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatchResult {
    /// Position of the winning candidate in the candidate list.
    pub index: usize,
    /// Sum of squared intensity differences.
    pub score: u32,
    pub is_contour: bool,
    /// Another candidate reached the same minimal score.
    pub tied: bool,
}

/// Sum of squared differences between two equally sized windows.
pub fn similarity(nq: &Window, np: &Window) -> Result<u32> {
    if nq.m() != np.m() {
        return Err(Error::DimensionMismatch(format!(
            "window sizes {} and {}",
            nq.m(),
            np.m()
        )));
    }
    Ok(ssd(nq.values(), np.values()))
}

#[inline(always)]
fn ssd(a: &[u8], b: &[u8]) -> u32 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as i32 - y as i32;
            (d * d) as u32
        })
        .sum()
}

/// Lowest-score reference for `nq`. Ties go to the earliest reference.
pub fn best_match(nq: &Window, refs: &[ReferenceNeighborhood]) -> Result<MatchResult> {
    if refs.is_empty() {
        return Err(Error::EmptyReferences);
    }
    for r in refs {
        if r.window.m() != nq.m() {
            return Err(Error::DimensionMismatch(format!(
                "query window {} vs reference window {}",
                nq.m(),
                r.window.m()
            )));
        }
    }
    Ok(Candidates::from_references(refs).best(nq.values()))
}

/// Flattened candidate windows with their contour labels.
#[derive(Clone, Debug)]
pub(crate) struct Candidates {
    m: usize,
    values: Vec<u8>,
    contour: Vec<bool>,
}

impl Candidates {
    pub(crate) fn from_references(refs: &[ReferenceNeighborhood]) -> Self {
        let m = refs[0].window.m();
        let mut values = Vec::with_capacity(refs.len() * m * m);
        let mut contour = Vec::with_capacity(refs.len());
        for r in refs {
            values.extend_from_slice(r.window.values());
            contour.push(r.center_is_contour);
        }
        Self { m, values, contour }
    }

    /// Distinct windows of an exemplar in row-major order of first
    /// appearance. Later duplicates can never win a first-wins tie-break, so
    /// dropping them leaves the full scan's answer unchanged.
    pub(crate) fn from_exemplar(a: &GrayImage, marked: &ContourMap, m: usize) -> Self {
        let mut seen: HashMap<Vec<u8>, ()> = HashMap::new();
        let mut values = Vec::new();
        let mut contour = Vec::new();
        let mut buf = vec![0u8; m * m];
        for y in 0..a.height() {
            for x in 0..a.width() {
                a.fill_window(x, y, m, &mut buf);
                if seen.insert(buf.clone(), ()).is_none() {
                    values.extend_from_slice(&buf);
                    contour.push(marked.get(x, y));
                }
            }
        }
        Self { m, values, contour }
    }

    pub(crate) fn len(&self) -> usize {
        self.contour.len()
    }

    #[inline]
    pub(crate) fn best(&self, q: &[u8]) -> MatchResult {
        let n = self.m * self.m;
        let mut best = u32::MAX;
        let mut index = 0;
        let mut tied = false;
        for (i, cand) in self.values.chunks_exact(n).enumerate() {
            let s = ssd(q, cand);
            if s < best {
                best = s;
                index = i;
                tied = false;
            } else if s == best {
                tied = true;
            }
        }
        MatchResult {
            index,
            score: best,
            is_contour: self.contour[index],
            tied,
        }
    }

    /// Labels every pixel of `query`; returns (contour mask, tie mask).
    pub(crate) fn label(&self, query: &GrayImage) -> (ContourMap, ContourMap) {
        let (w, h) = (query.width(), query.height());
        let mut mask = vec![false; w * h];
        let mut ties = vec![false; w * h];
        if w > 0 {
            mask.par_chunks_mut(w)
                .zip(ties.par_chunks_mut(w))
                .enumerate()
                .for_each(|(y, (row, tie_row))| {
                    let mut buf = vec![0u8; self.m * self.m];
                    for x in 0..w {
                        query.fill_window(x, y, self.m, &mut buf);
                        let r = self.best(&buf);
                        row[x] = r.is_contour;
                        tie_row[x] = r.tied;
                    }
                });
        }
        (
            ContourMap { width: w, height: h, mask },
            ContourMap {
                width: w,
                height: h,
                mask: ties,
            },
        )
    }
}

/// Contour map plus the pixels whose minimal score was shared by more than
/// one distinct candidate window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Detection {
    pub contours: ContourMap,
    pub ties: ContourMap,
}

/// Classifies every pixel of `query` against `pattern`.
///
/// Artificial patterns are matched through their 26 reference windows;
/// exemplar pairs fall back to a scan of the whole exemplar image.
pub fn detect(query: &GrayImage, pattern: &PatternPair, m: usize) -> Result<ContourMap> {
    Ok(detect_detailed(query, pattern, m)?.contours)
}

pub fn detect_detailed(query: &GrayImage, pattern: &PatternPair, m: usize) -> Result<Detection> {
    check_window_size(m)?;
    let candidates = match pattern.source {
        PatternSource::Artificial(p) => Candidates::from_references(&reference_neighborhoods(p, m)?),
        PatternSource::Exemplar => exemplar_candidates(&pattern.image, &pattern.marked, m)?,
    };
    let (contours, ties) = candidates.label(query);
    Ok(Detection { contours, ties })
}

fn exemplar_candidates(a: &GrayImage, a_marked: &ContourMap, m: usize) -> Result<Candidates> {
    if a.is_empty() {
        return Err(Error::EmptyExemplar);
    }
    if a.width() != a_marked.width() || a.height() != a_marked.height() {
        return Err(Error::DimensionMismatch(format!(
            "exemplar {}x{} vs marking {}x{}",
            a.width(),
            a.height(),
            a_marked.width(),
            a_marked.height()
        )));
    }
    Ok(Candidates::from_exemplar(a, a_marked, m))
}

/// Naive analogy: every neighbourhood of `a` is a candidate, and the query
/// pixel copies the marking of the first (row-major) best match.
pub fn detect_exemplar(a: &GrayImage, a_marked: &ContourMap, b: &GrayImage, m: usize) -> Result<ContourMap> {
    Ok(detect_exemplar_detailed(a, a_marked, b, m)?.contours)
}

pub fn detect_exemplar_detailed(
    a: &GrayImage,
    a_marked: &ContourMap,
    b: &GrayImage,
    m: usize,
) -> Result<Detection> {
    check_window_size(m)?;
    let candidates = exemplar_candidates(a, a_marked, m)?;
    let (contours, ties) = candidates.label(b);
    Ok(Detection { contours, ties })
}

/// Number of distinct candidate windows the naive scan of `a` visits.
pub fn distinct_windows(a: &GrayImage, m: usize) -> Result<usize> {
    check_window_size(m)?;
    if a.is_empty() {
        return Err(Error::EmptyExemplar);
    }
    let marked = ContourMap::empty(a.width(), a.height());
    Ok(Candidates::from_exemplar(a, &marked, m).len())
}

/// One contour map per schedule entry, in schedule order.
pub fn detect_stack(query: &GrayImage, s: &PatternSchedule, m: usize) -> Result<Vec<ContourMap>> {
    check_window_size(m)?;
    s.entries
        .iter()
        .map(|&p| {
            let refs = reference_neighborhoods(p, m)?;
            Ok(Candidates::from_references(&refs).label(query).0)
        })
        .collect()
}
