//! Artificial training patterns.
//!
//! A pattern pair `(A, A')` is a two-intensity image: a uniform background
//! and an octagonal foreground whose border runs in the four directions a
//! 3x3 neighbourhood can resolve (horizontal, vertical and both diagonals).
//! `A'` marks the pixels of the darker region that touch the brighter one:
//! outside the shape for [`Polarity::Set1`] (dark background), inside it for
//! [`Polarity::Set2`] (bright background).
//!
//! Matching against a whole pattern image is wasteful because almost every
//! window in it is uniform. [`reference_neighborhoods`] enumerates the 26
//! distinct windows that carry all of the pattern's information.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{GrayImage, Window};
use crate::matcher::ContourMap;

/// Which side of the intensity range the pattern background sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Polarity {
    /// Background darker than foreground.
    Set1,
    /// Background brighter than foreground.
    Set2,
}

/// Background/foreground intensities of one artificial pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct IntensityPair {
    bg: u8,
    fg: u8,
}

impl IntensityPair {
    pub fn new(bg: u8, fg: u8) -> Result<Self> {
        if bg == fg {
            return Err(Error::EqualIntensities(bg));
        }
        Ok(Self { bg, fg })
    }

    pub fn bg(&self) -> u8 {
        self.bg
    }

    pub fn fg(&self) -> u8 {
        self.fg
    }

    pub fn polarity(&self) -> Polarity {
        if self.bg < self.fg {
            Polarity::Set1
        } else {
            Polarity::Set2
        }
    }

    /// Intensity of the region whose border pixels are marked as contour.
    pub fn marked(&self) -> u8 {
        self.bg.min(self.fg)
    }

    /// Signed foreground/background gap.
    pub fn d_a(&self) -> i32 {
        self.fg as i32 - self.bg as i32
    }

    /// Query intensity separating the two regions, rounded half up.
    pub fn threshold(&self) -> u8 {
        (self.bg as u16 + self.fg as u16).div_ceil(2) as u8
    }
}

/// An ordered list of pattern intensities for one polarity and step size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PatternSchedule {
    pub delta_l: u8,
    pub epsilon: u8,
    pub polarity: Polarity,
    pub entries: Vec<IntensityPair>,
}

impl PatternSchedule {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Same schedule restricted to a sub-range of entries.
    pub fn truncated(&self, n: usize) -> PatternSchedule {
        PatternSchedule {
            entries: self.entries[..n.min(self.entries.len())].to_vec(),
            ..self.clone()
        }
    }
}

const SET1_DL16: [(u8, u8); 14] = [
    (0, 32),
    (0, 64),
    (0, 96),
    (0, 128),
    (0, 160),
    (0, 192),
    (0, 224),
    (64, 192),
    (64, 224),
    (96, 224),
    (128, 224),
    (160, 224),
    (192, 224),
    (208, 240),
];

const SET2_DL16: [(u8, u8); 14] = [
    (255, 224),
    (255, 192),
    (255, 160),
    (255, 128),
    (255, 96),
    (255, 64),
    (255, 32),
    (224, 32),
    (192, 32),
    (160, 32),
    (128, 32),
    (96, 32),
    (64, 32),
    (48, 16),
];

const SET1_DL8: [(u8, u8); 28] = [
    (0, 16),
    (0, 32),
    (0, 48),
    (0, 64),
    (0, 80),
    (0, 96),
    (0, 112),
    (0, 128),
    (0, 144),
    (0, 160),
    (0, 176),
    (0, 192),
    (0, 208),
    (0, 224),
    (0, 240),
    (64, 192),
    (64, 208),
    (64, 224),
    (64, 240),
    (96, 224),
    (96, 240),
    (128, 224),
    (128, 240),
    (160, 224),
    (160, 240),
    (192, 224),
    (192, 240),
    (208, 240),
];

/// Maps a dark-background pair onto its bright-background counterpart by
/// complementing against 256 (clamped to 255). This reproduces 13 of the 14
/// published bright-background pairs at step 16.
fn complement(v: u8) -> u8 {
    (256 - v as u16).min(255) as u8
}

/// Returns the pattern intensities for a step size of 8 or 16.
pub fn schedule(delta_l: u32, polarity: Polarity) -> Result<PatternSchedule> {
    let pairs: Vec<(u8, u8)> = match (delta_l, polarity) {
        (16, Polarity::Set1) => SET1_DL16.to_vec(),
        (16, Polarity::Set2) => SET2_DL16.to_vec(),
        (8, Polarity::Set1) => SET1_DL8.to_vec(),
        (8, Polarity::Set2) => SET1_DL8
            .iter()
            .map(|&(bg, fg)| (complement(bg), complement(fg)))
            .collect(),
        (other, _) => return Err(Error::UnsupportedDeltaL(other)),
    };
    let entries = pairs
        .into_iter()
        .map(|(bg, fg)| IntensityPair::new(bg, fg))
        .collect::<Result<Vec<_>>>()?;
    Ok(PatternSchedule {
        delta_l: delta_l as u8,
        epsilon: 1,
        polarity,
        entries,
    })
}

/// Per-entry query threshold `(bg + fg) / 2`, rounded half up.
pub fn derived_thresholds(s: &PatternSchedule) -> Vec<u8> {
    s.entries.iter().map(IntensityPair::threshold).collect()
}

/// Index into the bright-background step-16 schedule of the pattern that
/// plays the same role as dark-background pattern `i` (both 1-based).
pub fn dual_index(i: usize) -> Result<usize> {
    match i {
        1 => Ok(1),
        2..=14 => Ok(16 - i),
        _ => Err(Error::IndexOutOfRange(i)),
    }
}

/// Where an `(A, A')` exemplar came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PatternSource {
    Artificial(IntensityPair),
    Exemplar,
}

/// Training exemplar: image `A` and its contour marking `A'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternPair {
    pub image: GrayImage,
    pub marked: ContourMap,
    pub source: PatternSource,
}

impl PatternPair {
    /// Wraps a real (image, marking) pair for the naive matching mode.
    pub fn exemplar(image: GrayImage, marked: ContourMap) -> Result<Self> {
        if image.width() != marked.width() || image.height() != marked.height() {
            return Err(Error::DimensionMismatch(format!(
                "exemplar image is {}x{}, marking is {}x{}",
                image.width(),
                image.height(),
                marked.width(),
                marked.height()
            )));
        }
        Ok(Self {
            image,
            marked,
            source: PatternSource::Exemplar,
        })
    }

    pub fn intensities(&self) -> Option<IntensityPair> {
        match self.source {
            PatternSource::Artificial(p) => Some(p),
            PatternSource::Exemplar => None,
        }
    }
}

/// Builds the artificial pattern for `p` on a `canvas`x`canvas` image.
///
/// The foreground is the octagon `max(|u|, |v|) <= 2r - 1, |u| + |v| <= 2s`
/// in doubled centred coordinates, with `r = canvas / 2 - 2` (two background
/// rows/columns of margin) and `s` chosen so that every edge spans at least
/// three pixels.
pub fn synthesize_pattern_pair(p: IntensityPair, canvas: usize) -> Result<PatternPair> {
    if canvas < 16 {
        return Err(Error::CanvasTooSmall(canvas));
    }
    let n = canvas as i64;
    let r = n / 2 - 2;
    let s = ((3 * r + 1) / 2).clamp(r + 1, 2 * r - 4);
    let inside = |x: usize, y: usize| {
        let u = 2 * x as i64 + 1 - n;
        let v = 2 * y as i64 + 1 - n;
        u.abs().max(v.abs()) < 2 * r && u.abs() + v.abs() <= 2 * s
    };
    let image = GrayImage::from_fn(canvas, canvas, |x, y| if inside(x, y) { p.fg } else { p.bg });
    let marked = mark_boundary(&image, p.marked());
    Ok(PatternPair {
        image,
        marked,
        source: PatternSource::Artificial(p),
    })
}

/// Pixels of intensity `marked` with an 8-neighbour of any other intensity.
pub(crate) fn mark_boundary(img: &GrayImage, marked: u8) -> ContourMap {
    let (w, h) = (img.width(), img.height());
    let mut out = ContourMap::empty(w, h);
    for y in 0..h {
        for x in 0..w {
            if img.get(x, y) != marked {
                continue;
            }
            let touches = (-1isize..=1).any(|dy| {
                (-1isize..=1).any(|dx| {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    nx >= 0
                        && ny >= 0
                        && (nx as usize) < w
                        && (ny as usize) < h
                        && img.get(nx as usize, ny as usize) != marked
                })
            });
            out.set(x, y, touches);
        }
    }
    out
}

/// Orientation of the boundary inside a reference window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Direction {
    Horizontal,
    Vertical,
    /// Boundary running top-left to bottom-right.
    Diagonal,
    /// Boundary running bottom-left to top-right.
    AntiDiagonal,
    None,
}

/// One canonical window of a pattern image.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReferenceNeighborhood {
    pub window: Window,
    pub center_is_contour: bool,
    pub direction: Direction,
}

type Side = Box<dyn Fn(i32, i32) -> bool>;

/// Straight splits of a 3x3 window: per direction, the cut positions that
/// leave both sides non-empty. `side(col, row)` is true for the first side.
fn splits_3x3() -> Vec<(Direction, Side)> {
    let mut out: Vec<(Direction, Side)> = Vec::new();
    for k in 0..2 {
        out.push((Direction::Horizontal, Box::new(move |_, r| r <= k)));
    }
    for k in 0..2 {
        out.push((Direction::Vertical, Box::new(move |c, _| c <= k)));
    }
    for k in -2..2 {
        out.push((Direction::Diagonal, Box::new(move |c, r| c - r <= k)));
    }
    for k in 0..4 {
        out.push((Direction::AntiDiagonal, Box::new(move |c, r| c + r <= k)));
    }
    out
}

/// Whether the centre of a two-valued 3x3 window is a marked contour pixel.
fn center_marked(values: &[u8], marked: u8) -> bool {
    values[4] == marked && values.iter().any(|&v| v != marked)
}

/// The 26 reference windows of pattern `p`: 24 straight two-region splits
/// (2 cuts x 2 polarities for each axis direction, 4 cuts x 2 polarities for
/// each diagonal) plus the all-background and all-foreground windows.
///
/// Order is fixed: splits whose centre is not a contour pixel first, then
/// the contour splits, then background and foreground. The matcher breaks
/// score ties by this order, so a tie between a split with a flat centre
/// and a contour split resolves to "no contour" (a query sitting exactly on
/// a threshold is not claimed), while a tie between a contour split and a
/// uniform window resolves to contour. The label never depends on which
/// member of a rotation-closed tie group comes first.
pub fn reference_neighborhoods(p: IntensityPair, m: usize) -> Result<Vec<ReferenceNeighborhood>> {
    if m != 3 {
        return Err(Error::UnsupportedWindow(m));
    }
    let mut contour = Vec::new();
    let mut flat_splits = Vec::new();
    for (direction, side) in splits_3x3() {
        for (first, second) in [(p.bg, p.fg), (p.fg, p.bg)] {
            let mut values = Vec::with_capacity(9);
            for r in 0..3 {
                for c in 0..3 {
                    values.push(if side(c, r) { first } else { second });
                }
            }
            let center_is_contour = center_marked(&values, p.marked());
            let reference = ReferenceNeighborhood {
                window: Window::new(3, values)?,
                center_is_contour,
                direction,
            };
            if center_is_contour {
                contour.push(reference);
            } else {
                flat_splits.push(reference);
            }
        }
    }
    flat_splits.append(&mut contour);
    for v in [p.bg, p.fg] {
        flat_splits.push(ReferenceNeighborhood {
            window: Window::uniform(3, v)?,
            center_is_contour: false,
            direction: Direction::None,
        });
    }
    Ok(flat_splits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashMap, HashSet};

    fn pair(bg: u8, fg: u8) -> IntensityPair {
        IntensityPair::new(bg, fg).unwrap()
    }

    fn tuples(s: &PatternSchedule) -> Vec<(u8, u8)> {
        s.entries.iter().map(|p| (p.bg(), p.fg())).collect()
    }

    #[test]
    fn set1_step16_schedule() {
        let s = schedule(16, Polarity::Set1).unwrap();
        assert_eq!(tuples(&s), SET1_DL16.to_vec());
        assert_eq!(
            derived_thresholds(&s),
            (1..=14).map(|k| 16 * k as u8).collect::<Vec<_>>()
        );
        assert_eq!(s.epsilon, 1);
    }

    #[test]
    fn set2_step16_schedule() {
        let s = schedule(16, Polarity::Set2).unwrap();
        let t = tuples(&s);
        assert_eq!(&t[..3], &[(255, 224), (255, 192), (255, 160)]);
        assert_eq!(t.last(), Some(&(48, 16)));
        assert_eq!(
            derived_thresholds(&s),
            vec![240, 224, 208, 192, 176, 160, 144, 128, 112, 96, 80, 64, 48, 32]
        );
        assert!(s.entries.iter().all(|p| p.polarity() == Polarity::Set2));
    }

    #[test]
    fn step8_schedules() {
        let s = schedule(8, Polarity::Set1).unwrap();
        assert_eq!(s.len(), 28);
        assert_eq!(&tuples(&s)[..2], &[(0, 16), (0, 32)]);
        assert_eq!(tuples(&s).last(), Some(&(208, 240)));
        assert_eq!(
            derived_thresholds(&s),
            (1..=28).map(|k| 8 * k as u8).collect::<Vec<_>>()
        );
        let s2 = schedule(8, Polarity::Set2).unwrap();
        assert_eq!(s2.len(), 28);
        assert!(s2.entries.iter().all(|p| p.bg() > p.fg()));
        assert_eq!(tuples(&s2)[0], (255, 240));
        assert_eq!(tuples(&s2).last(), Some(&(48, 16)));
    }

    #[test]
    fn complement_reproduces_published_bright_schedule() {
        let derived: Vec<(u8, u8)> = SET1_DL16
            .iter()
            .map(|&(b, f)| (complement(b), complement(f)))
            .collect();
        let matches = derived
            .iter()
            .zip(SET2_DL16.iter())
            .filter(|(a, b)| a == b)
            .count();
        assert_eq!(matches, 13);
    }

    #[test]
    fn set1_invariants() {
        for dl in [8, 16] {
            let s = schedule(dl, Polarity::Set1).unwrap();
            let t = derived_thresholds(&s);
            assert!(t.windows(2).all(|w| w[0] < w[1]));
            for p in &s.entries {
                assert!(p.bg() < p.fg());
                assert_eq!((p.bg() as u16 + p.fg() as u16) % 2, 0);
            }
        }
    }

    #[test]
    fn unsupported_delta_l() {
        assert!(matches!(
            schedule(4, Polarity::Set1),
            Err(Error::UnsupportedDeltaL(4))
        ));
    }

    #[test]
    fn midpoint_threshold() {
        assert_eq!(pair(0, 32).threshold(), 16);
        assert_eq!(pair(255, 224).threshold(), 240);
    }

    #[test]
    fn dual_index_table() {
        assert_eq!(dual_index(13).unwrap(), 3);
        assert_eq!(dual_index(8).unwrap(), 8);
        assert_eq!(dual_index(1).unwrap(), 1);
        assert_eq!(dual_index(2).unwrap(), 14);
        for i in 1..=14 {
            assert_eq!(dual_index(dual_index(i).unwrap()).unwrap(), i);
        }
        assert!(dual_index(0).is_err());
        assert!(dual_index(15).is_err());
    }

    #[test]
    fn dual_pairs_share_thresholds_except_first() {
        let s1 = schedule(16, Polarity::Set1).unwrap();
        let s2 = schedule(16, Polarity::Set2).unwrap();
        for i in 2..=14 {
            let j = dual_index(i).unwrap();
            assert_eq!(s1.entries[i - 1].threshold(), s2.entries[j - 1].threshold());
        }
        assert_ne!(s1.entries[0].threshold(), s2.entries[0].threshold());
    }

    #[test]
    fn synthesized_pattern_histogram_and_marking() {
        let pp = synthesize_pattern_pair(pair(0, 224), 32).unwrap();
        let values: HashSet<u8> = pp.image.pixels().iter().copied().collect();
        assert_eq!(values, HashSet::from([0, 224]));
        assert!(pp.marked.count() > 0);
        for (i, &m) in pp.marked.mask().iter().enumerate() {
            if m {
                assert_eq!(pp.image.pixels()[i], 0);
            }
        }

        let pp2 = synthesize_pattern_pair(pair(255, 32), 32).unwrap();
        for (i, &m) in pp2.marked.mask().iter().enumerate() {
            if m {
                assert_eq!(pp2.image.pixels()[i], 32);
            }
        }
    }

    #[test]
    fn marked_pixels_touch_other_region() {
        let pp = synthesize_pattern_pair(pair(64, 192), 40).unwrap();
        let img = &pp.image;
        for y in 0..img.height() {
            for x in 0..img.width() {
                let touches = (-1isize..=1).any(|dy| {
                    (-1isize..=1).any(|dx| {
                        img.get_clamped(x as isize + dx, y as isize + dy) != img.get(x, y)
                    })
                });
                let want = touches && img.get(x, y) == 64;
                assert_eq!(pp.marked.get(x, y), want, "({x}, {y})");
            }
        }
    }

    #[test]
    fn canvas_too_small() {
        assert!(matches!(
            synthesize_pattern_pair(pair(0, 32), 15),
            Err(Error::CanvasTooSmall(15))
        ));
        assert!(synthesize_pattern_pair(pair(0, 32), 16).is_ok());
    }

    #[test]
    fn octagon_has_four_edge_directions() {
        for canvas in [16, 17, 32, 64] {
            let pp = synthesize_pattern_pair(pair(0, 128), canvas).unwrap();
            let img = &pp.image;
            let mut seen = HashSet::new();
            for r in reference_neighborhoods(pair(0, 128), 3).unwrap() {
                if r.direction != Direction::None {
                    seen.insert(r.direction);
                }
            }
            assert_eq!(seen.len(), 4);
            // Uniform background at the corners, uniform foreground at the centre.
            assert_eq!(img.get(0, 0), 0);
            assert_eq!(img.get(canvas / 2, canvas / 2), 128);
        }
    }

    #[test]
    fn twenty_six_distinct_references() {
        for p in [pair(0, 224), pair(255, 32), pair(64, 192)] {
            let refs = reference_neighborhoods(p, 3).unwrap();
            assert_eq!(refs.len(), 26);
            let distinct: HashSet<&Window> = refs.iter().map(|r| &r.window).collect();
            assert_eq!(distinct.len(), 26);
            assert_eq!(refs.iter().filter(|r| r.center_is_contour).count(), 12);
            // Flat-centre splits lead, then contour splits, uniform windows last.
            assert!(refs[..12].iter().all(|r| !r.center_is_contour));
            assert!(refs[12..24].iter().all(|r| r.center_is_contour));
            for r in &refs[24..] {
                assert_eq!(r.direction, Direction::None);
                assert!(!r.center_is_contour);
                assert!(r.window.values().iter().all(|&v| v == r.window.values()[0]));
            }
        }
        assert!(matches!(
            reference_neighborhoods(pair(0, 32), 5),
            Err(Error::UnsupportedWindow(5))
        ));
    }

    #[test]
    fn horizontal_center_row_reference() {
        let refs = reference_neighborhoods(pair(0, 224), 3).unwrap();
        let want = [0, 0, 0, 0, 0, 0, 224, 224, 224];
        let r = refs
            .iter()
            .find(|r| r.window.values() == want)
            .expect("split present");
        assert!(r.center_is_contour);
        assert_eq!(r.direction, Direction::Horizontal);
    }

    /// Independent enumeration: every labelling of a 3x3 grid by a straight
    /// line `a*col + b*row <= k` for the four direction normals.
    fn brute_force_splits(p: IntensityPair) -> HashMap<Vec<u8>, bool> {
        let normals = [(0, 1), (1, 0), (1, -1), (1, 1)];
        let mut out = HashMap::new();
        for (a, b) in normals {
            for k in -6..=6 {
                for (first, second) in [(p.bg(), p.fg()), (p.fg(), p.bg())] {
                    let values: Vec<u8> = (0..9)
                        .map(|i| {
                            let (c, r) = (i % 3, i / 3);
                            if a * c + b * r <= k {
                                first
                            } else {
                                second
                            }
                        })
                        .collect();
                    if values.iter().all(|&v| v == values[0]) {
                        continue;
                    }
                    let marked = p.marked();
                    let contour = values[4] == marked && values.iter().any(|&v| v != marked);
                    out.insert(values, contour);
                }
            }
        }
        out
    }

    #[test]
    fn references_match_brute_force_enumeration() {
        for p in [pair(0, 224), pair(255, 96), pair(96, 32)] {
            let oracle = brute_force_splits(p);
            assert_eq!(oracle.len(), 24);
            let refs = reference_neighborhoods(p, 3).unwrap();
            for r in refs.iter().filter(|r| r.direction != Direction::None) {
                assert_eq!(oracle.get(r.window.values()), Some(&r.center_is_contour));
            }
        }
    }

    #[test]
    fn references_closed_under_rotation() {
        let refs = reference_neighborhoods(pair(0, 160), 3).unwrap();
        let set: HashMap<&Window, bool> = refs
            .iter()
            .map(|r| (&r.window, r.center_is_contour))
            .collect();
        for r in &refs {
            let rotated = r.window.rotate90(1);
            assert_eq!(set.get(&rotated), Some(&r.center_is_contour));
        }
    }

    #[test]
    fn pattern_contains_every_reference_window() {
        for canvas in [16, 24, 33, 64] {
            for p in [pair(0, 96), pair(255, 64)] {
                let pp = synthesize_pattern_pair(p, canvas).unwrap();
                let mut windows: HashMap<Vec<u8>, bool> = HashMap::new();
                let mut buf = [0u8; 9];
                for y in 0..canvas {
                    for x in 0..canvas {
                        pp.image.fill_window(x, y, 3, &mut buf);
                        let marked = pp.marked.get(x, y);
                        if let Some(prev) = windows.insert(buf.to_vec(), marked) {
                            assert_eq!(prev, marked, "window marking is not a function of content");
                        }
                    }
                }
                for r in reference_neighborhoods(p, 3).unwrap() {
                    assert_eq!(
                        windows.get(r.window.values()),
                        Some(&r.center_is_contour),
                        "canvas {canvas} missing {:?}",
                        r.window.values()
                    );
                }
            }
        }
    }

    #[test]
    fn dilated_marking_touches_both_regions() {
        let p = pair(0, 96);
        let pp = synthesize_pattern_pair(p, 32).unwrap();
        let dilated = pp.marked.dilate(1);
        let mut seen = HashSet::new();
        for (i, &d) in dilated.mask().iter().enumerate() {
            if d {
                seen.insert(pp.image.pixels()[i]);
            }
        }
        assert_eq!(seen, HashSet::from([0, 96]));
    }
}
