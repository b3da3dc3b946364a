//! Contour levels: how many consecutive patterns of a schedule agree that a
//! pixel is a contour.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{ColorImage, GrayImage};
use crate::matcher::ContourMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelMap {
    width: usize,
    height: usize,
    levels: Vec<u32>,
}

impl LevelMap {
    pub fn new(width: usize, height: usize, levels: Vec<u32>) -> Result<Self> {
        if levels.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: levels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            levels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.levels[y * self.width + x]
    }

    pub fn max_level(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    /// Pixel counts per level, index = level.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.max_level() as usize + 1];
        for &l in &self.levels {
            h[l as usize] += 1;
        }
        h
    }

    /// Levels as gray values (saturating at 255).
    pub fn to_gray(&self) -> GrayImage {
        let px = self.levels.iter().map(|&l| l.min(255) as u8).collect();
        GrayImage::new(self.width, self.height, px).expect("level map has image size")
    }
}

/// Longest run of consecutive stack entries containing each pixel.
pub fn level_map(stack: &[ContourMap]) -> Result<LevelMap> {
    let first = stack.first().ok_or(Error::InvalidArgument("empty contour stack".into()))?;
    let (w, h) = (first.width(), first.height());
    if let Some(bad) = stack.iter().find(|m| !m.same_dims(first)) {
        return Err(Error::DimensionMismatch(format!(
            "stack maps {}x{} and {}x{}",
            w,
            h,
            bad.width(),
            bad.height()
        )));
    }
    let levels: Vec<u32> = (0..w * h)
        .into_par_iter()
        .map(|i| {
            let (mut best, mut run) = (0u32, 0u32);
            for m in stack {
                if m.mask()[i] {
                    run += 1;
                    best = best.max(run);
                } else {
                    run = 0;
                }
            }
            best
        })
        .collect();
    Ok(LevelMap {
        width: w,
        height: h,
        levels,
    })
}

/// Pixels whose level reaches `l`.
pub fn threshold_level(lm: &LevelMap, l: u32) -> ContourMap {
    let mask = lm.levels.iter().map(|&v| v >= l.max(1)).collect();
    ContourMap::new(lm.width, lm.height, mask).expect("level map has image size")
}

pub const BLACK: [u8; 3] = [0, 0, 0];
pub const RED: [u8; 3] = [255, 0, 0];
pub const GREEN: [u8; 3] = [0, 255, 0];
pub const BLUE: [u8; 3] = [0, 0, 255];
pub const WHITE: [u8; 3] = [255, 255, 255];

/// Level ≥4 black, 3 red, 2 green, 1 blue, anything else white.
pub fn default_bands() -> Vec<(u32, [u8; 3])> {
    vec![(4, BLACK), (3, RED), (2, GREEN), (1, BLUE), (0, WHITE)]
}

/// Paints each pixel with the first band whose minimum level it reaches.
/// Pixels below every band are white.
pub fn render_levels(lm: &LevelMap, bands: &[(u32, [u8; 3])]) -> Result<ColorImage> {
    if bands.windows(2).any(|w| w[0].0 <= w[1].0) {
        return Err(Error::InvalidArgument(
            "bands must be sorted by strictly descending minimum level".into(),
        ));
    }
    let px = lm
        .levels
        .iter()
        .map(|&l| bands.iter().find(|b| l >= b.0).map_or(WHITE, |b| b.1))
        .collect();
    ColorImage::new(lm.width, lm.height, px)
}
