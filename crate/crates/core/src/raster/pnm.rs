//! Binary PBM (`P4`) and binary PGM (`P5`) reading and writing.
//!
//! P4 bits set to 1 are foreground. P5 samples `>= 128` are foreground
//! regardless of the declared maxval. Writers emit a single `\n` after the
//! last header field.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

const P5_THRESHOLD: u8 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PnmFormat {
    /// Packed bitmap, eight pixels per byte, MSB first, rows byte-aligned.
    P4,
    /// 8-bit graymap, foreground written as 255.
    P5,
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
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

    fn field(&mut self, name: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.bytes.get(self.pos) {
                None => Error::Parse(format!("header ends before {name}")),
                Some(&b) => Error::Parse(format!("expected {name}, found byte 0x{b:02x}")),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::Parse(format!("{name} out of range")))
    }

    /// Consumes the single whitespace byte separating the header from the
    /// raster.
    fn end(&mut self) -> Result<usize> {
        match self.bytes.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => Ok(self.pos + 1),
            Some(&b) => Err(Error::Parse(format!(
                "expected whitespace after header, found byte 0x{b:02x}"
            ))),
            None => Err(Error::Truncated {
                expected: 1,
                found: 0,
            }),
        }
    }
}

/// Decodes a P4 or P5 image into a binary mask.
pub fn load_pgm(bytes: &[u8]) -> Result<BinaryMask> {
    let format = match bytes.get(..2) {
        Some(b"P4") => PnmFormat::P4,
        Some(b"P5") => PnmFormat::P5,
        _ => return Err(Error::Parse("missing P4/P5 magic".into())),
    };
    let mut header = Header { bytes, pos: 2 };
    match bytes.get(2) {
        Some(b) if b.is_ascii_whitespace() || *b == b'#' => {}
        _ => return Err(Error::Parse("missing whitespace after magic".into())),
    }
    let width = header.field("width")?;
    let height = header.field("height")?;
    if width == 0 || height == 0 {
        return Err(Error::Parse(format!("zero dimension {width}x{height}")));
    }
    if format == PnmFormat::P5 {
        let maxval = header.field("maxval")?;
        if !(1..=255).contains(&maxval) {
            return Err(Error::Parse(format!("unsupported maxval {maxval}")));
        }
    }
    let start = header.end()?;
    let payload = &bytes[start..];
    let pixel_count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Parse("image dimensions overflow".into()))?;

    let pixels = match format {
        PnmFormat::P5 => {
            if payload.len() < pixel_count {
                return Err(Error::Truncated {
                    expected: pixel_count,
                    found: payload.len(),
                });
            }
            payload[..pixel_count]
                .iter()
                .map(|&v| (v >= P5_THRESHOLD) as u8)
                .collect()
        }
        PnmFormat::P4 => {
            let stride = width.div_ceil(8);
            let expected = stride * height;
            if payload.len() < expected {
                return Err(Error::Truncated {
                    expected,
                    found: payload.len(),
                });
            }
            let mut pixels = Vec::with_capacity(pixel_count);
            for row in payload[..expected].chunks_exact(stride) {
                pixels.extend((0..width).map(|x| (row[x / 8] >> (7 - x % 8)) & 1));
            }
            pixels
        }
    };
    BinaryMask::from_pixels(width, height, pixels)
}

/// Encodes a mask as P4 or P5.
pub fn save_pgm(mask: &BinaryMask, format: PnmFormat) -> Vec<u8> {
    let (width, height) = mask.dims();
    match format {
        PnmFormat::P5 => {
            let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
            out.extend(mask.pixels().iter().map(|&p| if p != 0 { 255 } else { 0 }));
            out
        }
        PnmFormat::P4 => {
            let mut out = format!("P4\n{width} {height}\n").into_bytes();
            let stride = width.div_ceil(8);
            for row in mask.pixels().chunks_exact(width) {
                let mut packed = vec![0u8; stride];
                for (x, &p) in row.iter().enumerate() {
                    packed[x / 8] |= p << (7 - x % 8);
                }
                out.extend_from_slice(&packed);
            }
            out
        }
    }
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    load_pgm(&bytes).map_err(|e| e.in_file(&path.display().to_string()))
}

pub fn write_mask(path: impl AsRef<Path>, mask: &BinaryMask, format: PnmFormat) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, save_pgm(mask, format)).map_err(|e| Error::io(path, e))
}
