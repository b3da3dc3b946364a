//! Netpbm codecs: PGM (P2/P5) and PPM (P3/P6).
//!
//! Headers accept arbitrary whitespace and `#` comments. Samples with a
//! maxval below 255 are rescaled with `round(v * 255 / maxval)`; maxvals
//! above 255 are rejected. Writers always emit binary P5/P6 with maxval 255.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{to_gray, ColorImage, GrayImage};

/// A decoded netpbm raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pnm {
    Gray(GrayImage),
    Color(ColorImage),
}

impl Pnm {
    pub fn into_gray(self) -> GrayImage {
        match self {
            Pnm::Gray(g) => g,
            Pnm::Color(c) => to_gray(&c),
        }
    }
}

/// Loads a PGM or PPM file as a gray image. Color input goes through [`to_gray`].
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(decode(&bytes)?.into_gray())
}

pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_gray(img)).map_err(|e| Error::io(path, e))
}

pub fn save_color(img: &ColorImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_color(img)).map_err(|e| Error::io(path, e))
}

pub fn encode_gray(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn encode_color(img: &ColorImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.reserve(img.pixels().len() * 3);
    for px in img.pixels() {
        out.extend_from_slice(px);
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Pnm> {
    let mut cur = Cursor { bytes, pos: 0 };
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::Format {
            offset: 0,
            message: "missing 'P' magic".into(),
        });
    }
    let kind = bytes[1];
    cur.pos = 2;
    let (channels, ascii) = match kind {
        b'2' => (1, true),
        b'5' => (1, false),
        b'3' => (3, true),
        b'6' => (3, false),
        other => {
            return Err(Error::Format {
                offset: 1,
                message: format!("unsupported magic P{}", other as char),
            })
        }
    };
    let width = cur.header_number()? as usize;
    let height = cur.header_number()? as usize;
    let maxval_offset = cur.pos;
    let maxval = cur.header_number()?;
    if maxval == 0 {
        return Err(Error::Format {
            offset: maxval_offset,
            message: "maxval must be positive".into(),
        });
    }
    if maxval > 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }

    let count = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::Format {
            offset: maxval_offset,
            message: "image dimensions overflow".into(),
        })?;

    let samples = if ascii {
        let mut samples = Vec::with_capacity(count);
        for _ in 0..count {
            cur.skip_whitespace_and_comments();
            let offset = cur.pos;
            let v = cur.ascii_sample(count, samples.len())?;
            samples.push(scale_sample(v, maxval, offset)?);
        }
        samples
    } else {
        // Exactly one whitespace byte separates the header from binary data.
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => {
                return Err(Error::Format {
                    offset: cur.pos,
                    message: "expected whitespace after maxval".into(),
                })
            }
        }
        let data = &bytes[cur.pos..];
        if data.len() < count {
            return Err(Error::Truncated {
                offset: cur.pos,
                expected: count,
                found: data.len(),
            });
        }
        data[..count]
            .iter()
            .enumerate()
            .map(|(i, &v)| scale_sample(v as u32, maxval, cur.pos + i))
            .collect::<Result<Vec<u8>>>()?
    };

    if channels == 1 {
        Ok(Pnm::Gray(GrayImage::new(width, height, samples)?))
    } else {
        let px = samples.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        Ok(Pnm::Color(ColorImage::new(width, height, px)?))
    }
}

fn scale_sample(v: u32, maxval: u32, offset: usize) -> Result<u8> {
    if v > maxval {
        return Err(Error::Format {
            offset,
            message: format!("sample {v} exceeds maxval {maxval}"),
        });
    }
    if maxval == 255 {
        return Ok(v as u8);
    }
    Ok(((v * 255 * 2 + maxval) / (2 * maxval)) as u8)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Option<Result<u32>> {
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        let digits = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        Some(digits.parse::<u32>().map_err(|_| Error::Format {
            offset: start,
            message: format!("number {digits} out of range"),
        }))
    }

    fn header_number(&mut self) -> Result<u32> {
        // Header fields must be separated from what precedes them.
        let before = self.pos;
        self.skip_whitespace_and_comments();
        if self.pos == before {
            return Err(Error::Format {
                offset: self.pos,
                message: "expected whitespace in header".into(),
            });
        }
        let offset = self.pos;
        match self.number() {
            Some(r) => r,
            None if offset >= self.bytes.len() => Err(Error::Format {
                offset,
                message: "unexpected end of header".into(),
            }),
            None => Err(Error::Format {
                offset,
                message: format!("expected a number, found byte {:#04x}", self.bytes[offset]),
            }),
        }
    }

    fn ascii_sample(&mut self, expected: usize, found: usize) -> Result<u32> {
        self.skip_whitespace_and_comments();
        let offset = self.pos;
        match self.number() {
            Some(r) => r,
            None if offset >= self.bytes.len() => Err(Error::Truncated {
                offset,
                expected,
                found,
            }),
            None => Err(Error::Format {
                offset,
                message: format!("expected a sample, found byte {:#04x}", self.bytes[offset]),
            }),
        }
    }
}
