//! Seeded synthetic scenes for tests, benchmarks and the CLI demo inputs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::GrayImage;
use crate::matcher::ContourMap;

/// Region intensities used by the polygon scenes; neighbours differ by 48.
pub const SCENE_LEVELS: [u8; 5] = [24, 72, 120, 168, 216];

/// Vertical step: columns `< split` are `left`, the rest `right`.
pub fn step(width: usize, height: usize, split: usize, left: u8, right: u8) -> GrayImage {
    GrayImage::from_fn(width, height, |x, _| if x < split { left } else { right })
}

/// Convex polygons of random size and orientation over a flat background,
/// all intensities drawn from [`SCENE_LEVELS`].
pub fn polygon_scene(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut levels = SCENE_LEVELS;
    levels.shuffle(&mut rng);
    let mut img = GrayImage::filled(width, height, levels[0]);
    let count = rng.gen_range(1..=3);
    let short = width.min(height) as f64;
    for level in &levels[1..=count] {
        let cx = rng.gen_range(0.25..0.75) * width as f64;
        let cy = rng.gen_range(0.25..0.75) * height as f64;
        let radius = rng.gen_range(0.15..0.35) * short;
        let sides = rng.gen_range(3..=7);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let verts: Vec<(f64, f64)> = (0..sides)
            .map(|k| {
                let a = phase + k as f64 * std::f64::consts::TAU / sides as f64;
                (cx + radius * a.cos(), cy + radius * a.sin())
            })
            .collect();
        fill_convex(&mut img, &verts, *level);
    }
    img
}

fn fill_convex(img: &mut GrayImage, verts: &[(f64, f64)], value: u8) {
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let inside = (0..verts.len()).all(|i| {
                let (ax, ay) = verts[i];
                let (bx, by) = verts[(i + 1) % verts.len()];
                (bx - ax) * (py - ay) - (by - ay) * (px - ax) >= 0.0
            });
            if inside {
                img.set(x, y, value);
            }
        }
    }
}

/// Parallel stripes along one of the four window directions, with random
/// intensities and widths. Every 3×3 window sees at most two stripes:
/// axis stripes are at least 2 pixels wide, diagonal stripes at least 4
/// diagonal index steps.
pub fn stripe_scene(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let direction = rng.gen_range(0..4);
    let index = |x: usize, y: usize| -> usize {
        match direction {
            0 => y,
            1 => x,
            2 => x + height - y,
            _ => x + y,
        }
    };
    let span = width + height + 1;
    let min_width = if direction < 2 { 2 } else { 4 };
    let mut band = Vec::with_capacity(span);
    let mut prev: Option<u8> = None;
    while band.len() < span {
        let mut v = rng.gen();
        while Some(v) == prev {
            v = rng.gen();
        }
        prev = Some(v);
        let w = rng.gen_range(min_width..min_width + 6);
        band.extend(std::iter::repeat_n(v, w));
    }
    GrayImage::from_fn(width, height, |x, y| band[index(x, y)])
}

/// Thin random segments (255) on black, for mask-matching tests.
pub fn random_lines(width: usize, height: usize, count: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = GrayImage::filled(width, height, 0);
    for _ in 0..count {
        let (mut x0, mut y0) = (rng.gen_range(0..width) as i64, rng.gen_range(0..height) as i64);
        let (x1, y1) = (rng.gen_range(0..width) as i64, rng.gen_range(0..height) as i64);
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = ((x1 - x0).signum(), (y1 - y0).signum());
        let mut err = dx + dy;
        loop {
            img.set(x0 as usize, y0 as usize, 255);
            if x0 == x1 && y0 == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x0 += sx;
            }
            if e2 <= dx {
                err += dx;
                y0 += sy;
            }
        }
    }
    img
}

/// Uniform noise.
pub fn noise(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(width, height, |_, _| rng.gen())
}

/// Dark side of every intensity edge: pixels with a strictly brighter 8-neighbour.
pub fn dark_side_edges(img: &GrayImage) -> ContourMap {
    let (w, h) = (img.width(), img.height());
    let mut out = ContourMap::empty(w, h);
    for y in 0..h {
        for x in 0..w {
            let v = img.get(x, y);
            let edge = (-1isize..=1).any(|dy| {
                (-1isize..=1).any(|dx| {
                    let (nx, ny) = (x as isize + dx, y as isize + dy);
                    nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h && img.get(nx as usize, ny as usize) > v
                })
            });
            out.set(x, y, edge);
        }
    }
    out
}

/// Twenty scenes: four axis-aligned steps followed by polygon scenes.
pub fn benchmark_suite(width: usize, height: usize, seed: u64) -> Vec<GrayImage> {
    let horizontal = |split: usize, top: u8, bottom: u8| {
        GrayImage::from_fn(width, height, |_, y| if y < split { top } else { bottom })
    };
    let mut out = vec![
        step(width, height, width / 2, SCENE_LEVELS[0], SCENE_LEVELS[4]),
        step(width, height, width / 3, SCENE_LEVELS[3], SCENE_LEVELS[1]),
        horizontal(height / 2, SCENE_LEVELS[1], SCENE_LEVELS[2]),
        horizontal(height / 3, SCENE_LEVELS[4], SCENE_LEVELS[3]),
    ];
    out.extend((0..16).map(|i| polygon_scene(width, height, seed.wrapping_add(i))));
    out
}
