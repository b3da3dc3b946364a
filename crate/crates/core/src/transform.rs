//! Geometric resampling used by the invariance measurements.
//!
//! Angles are in degrees, counter-clockwise as displayed (y pointing down),
//! agreeing with [`GrayImage::rotate90`]. Images are resampled bilinearly
//! with a replicated border; masks are moved pixel by pixel to the nearest
//! destination so that contour counts are preserved as far as possible.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::matcher::ContourMap;

fn quarter_turns(angle: f64) -> Option<i32> {
    let q = angle / 90.0;
    (q == q.round()).then(|| q.round().rem_euclid(4.0) as i32)
}

fn check_angle(angle: f64) -> Result<()> {
    if angle.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("rotation angle {angle}")))
    }
}

/// Size of the canvas that holds a `w`×`h` frame rotated by `angle`.
pub fn rotated_size(w: usize, h: usize, angle: f64) -> (usize, usize) {
    if let Some(q) = quarter_turns(angle) {
        return if q % 2 == 0 { (w, h) } else { (h, w) };
    }
    let (s, c) = angle.to_radians().sin_cos();
    let (s, c) = (s.abs(), c.abs());
    let fit = |v: f64| ((v - 1e-9).ceil() as usize).max(1);
    (fit(w as f64 * c + h as f64 * s), fit(w as f64 * s + h as f64 * c))
}

struct Rotation {
    sin: f64,
    cos: f64,
    src_c: (f64, f64),
    dst_c: (f64, f64),
}

impl Rotation {
    fn new(w: usize, h: usize, angle: f64) -> (Self, usize, usize) {
        let (dw, dh) = rotated_size(w, h, angle);
        let (sin, cos) = angle.to_radians().sin_cos();
        let r = Rotation {
            sin,
            cos,
            src_c: ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0),
            dst_c: ((dw as f64 - 1.0) / 2.0, (dh as f64 - 1.0) / 2.0),
        };
        (r, dw, dh)
    }

    fn forward(&self, x: f64, y: f64) -> (f64, f64) {
        let (dx, dy) = (x - self.src_c.0, y - self.src_c.1);
        (
            self.dst_c.0 + dx * self.cos + dy * self.sin,
            self.dst_c.1 - dx * self.sin + dy * self.cos,
        )
    }

    fn inverse(&self, x: f64, y: f64) -> (f64, f64) {
        let (dx, dy) = (x - self.dst_c.0, y - self.dst_c.1);
        (
            self.src_c.0 + dx * self.cos - dy * self.sin,
            self.src_c.1 + dx * self.sin + dy * self.cos,
        )
    }
}

fn bilinear(img: &GrayImage, x: f64, y: f64) -> u8 {
    let (x0, y0) = (x.floor(), y.floor());
    let (tx, ty) = (x - x0, y - y0);
    let (x0, y0) = (x0 as isize, y0 as isize);
    let p = |dx: isize, dy: isize| img.get_clamped(x0 + dx, y0 + dy) as f64;
    let top = p(0, 0) * (1.0 - tx) + p(1, 0) * tx;
    let bottom = p(0, 1) * (1.0 - tx) + p(1, 1) * tx;
    (top * (1.0 - ty) + bottom * ty).round().clamp(0.0, 255.0) as u8
}

/// Rotates about the image centre onto an enlarged canvas. Multiples of 90°
/// are exact pixel permutations.
pub fn rotate_image(img: &GrayImage, angle: f64) -> Result<GrayImage> {
    check_angle(angle)?;
    if let Some(q) = quarter_turns(angle) {
        return Ok(img.rotate90(q));
    }
    if img.is_empty() {
        return Err(Error::InvalidArgument("cannot rotate an empty image".into()));
    }
    let (rot, dw, dh) = Rotation::new(img.width(), img.height(), angle);
    Ok(GrayImage::from_fn(dw, dh, |x, y| {
        let (sx, sy) = rot.inverse(x as f64, y as f64);
        bilinear(img, sx, sy)
    }))
}

/// Moves every contour pixel to the nearest pixel of the rotated canvas.
pub fn rotate_mask(mask: &ContourMap, angle: f64) -> Result<ContourMap> {
    check_angle(angle)?;
    if let Some(q) = quarter_turns(angle) {
        return Ok(mask.rotate90(q));
    }
    let (rot, dw, dh) = Rotation::new(mask.width(), mask.height(), angle);
    let mut out = ContourMap::empty(dw, dh);
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                let (fx, fy) = rot.forward(x as f64, y as f64);
                let (rx, ry) = (fx.round(), fy.round());
                if rx >= 0.0 && ry >= 0.0 && (rx as usize) < dw && (ry as usize) < dh {
                    out.set(rx as usize, ry as usize, true);
                }
            }
        }
    }
    Ok(out)
}

fn check_factor(factor: f64) -> Result<()> {
    if factor > 0.0 && factor <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("scale factor {factor} outside (0, 1]")))
    }
}

pub fn scaled_size(w: usize, h: usize, factor: f64) -> (usize, usize) {
    let s = |v: usize| ((v as f64 * factor).round() as usize).max(1);
    (s(w), s(h))
}

/// Bilinear downscaling with pixel-centre alignment. `factor == 1` is the identity.
pub fn scale_image(img: &GrayImage, factor: f64) -> Result<GrayImage> {
    check_factor(factor)?;
    if img.is_empty() {
        return Err(Error::InvalidArgument("cannot scale an empty image".into()));
    }
    let (dw, dh) = scaled_size(img.width(), img.height(), factor);
    let (kx, ky) = (img.width() as f64 / dw as f64, img.height() as f64 / dh as f64);
    Ok(GrayImage::from_fn(dw, dh, |x, y| {
        bilinear(img, (x as f64 + 0.5) * kx - 0.5, (y as f64 + 0.5) * ky - 0.5)
    }))
}

/// Nearest-pixel forward mapping of a mask onto the downscaled grid.
pub fn scale_mask(mask: &ContourMap, factor: f64) -> Result<ContourMap> {
    check_factor(factor)?;
    let (w, h) = (mask.width(), mask.height());
    let (dw, dh) = scaled_size(w, h, factor);
    let mut out = ContourMap::empty(dw, dh);
    if w == 0 || h == 0 {
        return Ok(out);
    }
    let (kx, ky) = (dw as f64 / w as f64, dh as f64 / h as f64);
    for y in 0..h {
        for x in 0..w {
            if mask.get(x, y) {
                let tx = ((x as f64 + 0.5) * kx - 0.5).round().clamp(0.0, (dw - 1) as f64);
                let ty = ((y as f64 + 0.5) * ky - 0.5).round().clamp(0.0, (dh - 1) as f64);
                out.set(tx as usize, ty as usize, true);
            }
        }
    }
    Ok(out)
}
