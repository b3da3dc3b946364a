//! Raster types and the neighbourhood window extraction used by the matcher.
//!
//! All images are row-major. Neighbourhoods that reach past the frame use
//! replicate padding: the coordinate is clamped to the nearest valid pixel.

use crate::error::{Error, Result};

/// 8-bit single-channel raster.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: u8) {
        self.pixels[y * self.width + x] = value;
    }

    /// Pixel lookup with replicate padding.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.pixels[cy * self.width + cx]
    }

    /// Copies the `m`x`m` neighbourhood centred on `(x, y)` into `out`
    /// without bounds checks on the centre. `out` must hold `m * m` values.
    #[inline]
    pub(crate) fn fill_window(&self, x: usize, y: usize, m: usize, out: &mut [u8]) {
        let w = (m / 2) as isize;
        let (x, y) = (x as isize, y as isize);
        let mut i = 0;
        for dy in -w..=w {
            for dx in -w..=w {
                out[i] = self.get_clamped(x + dx, y + dy);
                i += 1;
            }
        }
    }

    /// Lossless rotation by `quarter_turns` x 90 degrees counter-clockwise
    /// (as displayed, with rows running downwards).
    ///
    /// A counter-clockwise quarter turn sends source pixel `(x, y)` to
    /// `(y, width - 1 - x)`, so the top-right corner becomes the top-left one.
    pub fn rotate90(&self, quarter_turns: i32) -> GrayImage {
        let (width, height, pixels) =
            rotate_buffer(self.width, self.height, &self.pixels, quarter_turns);
        GrayImage {
            width,
            height,
            pixels,
        }
    }
}

/// Row-major RGB raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![rgb; width * height],
        }
    }

    /// Gray image promoted to RGB, used as the base of overlays.
    pub fn from_gray(img: &GrayImage) -> Self {
        Self {
            width: img.width,
            height: img.height,
            pixels: img.pixels.iter().map(|&v| [v, v, v]).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        self.pixels[y * self.width + x] = rgb;
    }
}

/// Luminance conversion with the 0.299/0.587/0.114 weights, rounded half up.
pub fn to_gray(img: &ColorImage) -> GrayImage {
    let pixels = img.pixels.iter().map(|&rgb| luma(rgb)).collect();
    GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

#[inline]
fn luma([r, g, b]: [u8; 3]) -> u8 {
    // Integer weights in thousandths keep the rounding exact.
    let acc = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((acc + 500) / 1000).min(255) as u8
}

/// An `m`x`m` neighbourhood of intensities, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    m: usize,
    values: Vec<u8>,
}

impl Window {
    pub fn new(m: usize, values: Vec<u8>) -> Result<Self> {
        check_window_size(m)?;
        if values.len() != m * m {
            return Err(Error::BufferSize {
                expected: m * m,
                actual: values.len(),
            });
        }
        Ok(Self { m, values })
    }

    pub fn uniform(m: usize, value: u8) -> Result<Self> {
        Self::new(m, vec![value; m * m])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Half-width `(m - 1) / 2`.
    pub fn half_width(&self) -> usize {
        (self.m - 1) / 2
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.values[row * self.m + col]
    }

    pub fn center(&self) -> u8 {
        let w = self.half_width();
        self.get(w, w)
    }

    pub fn rotate90(&self, quarter_turns: i32) -> Window {
        let (_, _, values) = rotate_buffer(self.m, self.m, &self.values, quarter_turns);
        Window { m: self.m, values }
    }
}

pub(crate) fn check_window_size(m: usize) -> Result<()> {
    if m < 3 || m.is_multiple_of(2) {
        return Err(Error::InvalidWindow(m));
    }
    Ok(())
}

/// The `m`x`m` neighbourhood of `(x, y)` with replicate padding.
pub fn window_at(img: &GrayImage, x: usize, y: usize, m: usize) -> Result<Window> {
    check_window_size(m)?;
    if x >= img.width || y >= img.height {
        return Err(Error::OutOfBounds {
            x,
            y,
            width: img.width,
            height: img.height,
        });
    }
    let mut values = vec![0; m * m];
    img.fill_window(x, y, m, &mut values);
    Ok(Window { m, values })
}

pub(crate) fn rotate_buffer<T: Copy>(
    width: usize,
    height: usize,
    src: &[T],
    quarter_turns: i32,
) -> (usize, usize, Vec<T>) {
    match quarter_turns.rem_euclid(4) {
        0 => (width, height, src.to_vec()),
        1 => {
            // dst(x', y') = src(W - 1 - y', x')
            let mut dst = Vec::with_capacity(src.len());
            for yd in 0..width {
                for xd in 0..height {
                    dst.push(src[xd * width + (width - 1 - yd)]);
                }
            }
            (height, width, dst)
        }
        2 => {
            let mut dst = src.to_vec();
            dst.reverse();
            (width, height, dst)
        }
        _ => {
            // dst(x', y') = src(y', H - 1 - x')
            let mut dst = Vec::with_capacity(src.len());
            for yd in 0..width {
                for xd in 0..height {
                    dst.push(src[(height - 1 - xd) * width + yd]);
                }
            }
            (height, width, dst)
        }
    }
}
