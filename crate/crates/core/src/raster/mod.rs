//! Mask representations and the raster primitives the rest of the crate is
//! built on.

mod distance;
mod draw;
mod patch;
mod pnm;

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

pub use distance::{distance_transform, DistanceMap};
pub use draw::{disk_offsets, draw_bridge, stamp_bridge, stamp_disk};
pub use patch::{tile_patches, PatchGrid, Rect};
pub use pnm::{load_pgm, read_mask, save_pgm, write_mask, PnmFormat};

/// Pixel coordinate, `x` to the right and `y` downward.
///
/// Ordering is raster order: by row, then by column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Point {
    pub x: usize,
    pub y: usize,
}

impl Point {
    pub const fn new(x: usize, y: usize) -> Self {
        Point { x, y }
    }

    /// Squared Euclidean distance to `other`.
    pub fn dist_sq(self, other: Point) -> u64 {
        let dx = self.x.abs_diff(other.x) as u64;
        let dy = self.y.abs_diff(other.y) as u64;
        dx * dx + dy * dy
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Rectangular foreground/background grid stored row-major, one byte per
/// pixel holding exactly 0 or 1.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl BinaryMask {
    /// All-background mask.
    ///
    /// Panics if either dimension is zero.
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        BinaryMask {
            width,
            height,
            pixels: vec![0; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!(
                "mask dimensions must be positive, got {width}x{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Shape(format!(
                "{width}x{height} mask needs {} pixels, got {}",
                width * height,
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|&&p| p > 1) {
            return Err(Error::Domain(format!(
                "mask pixel value {bad} is not 0 or 1"
            )));
        }
        Ok(BinaryMask {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut mask = BinaryMask::new(width, height);
        for y in 0..height {
            for x in 0..width {
                mask.pixels[y * width + x] = f(x, y) as u8;
            }
        }
        mask
    }

    /// Parses rows of `#` (foreground) and `.` (background). Whitespace
    /// around rows is ignored; all rows must have equal length.
    pub fn from_ascii(art: &str) -> Result<Self> {
        let rows: Vec<&str> = art
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut pixels = Vec::with_capacity(width * height);
        for row in &rows {
            if row.len() != width {
                return Err(Error::Shape("ragged ascii mask".into()));
            }
            for c in row.bytes() {
                match c {
                    b'#' => pixels.push(1),
                    b'.' => pixels.push(0),
                    other => {
                        return Err(Error::Parse(format!(
                            "unexpected character {:?} in ascii mask",
                            other as char
                        )))
                    }
                }
            }
        }
        BinaryMask::from_pixels(width, height, pixels)
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
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x] != 0
    }

    #[inline]
    pub fn at(&self, p: Point) -> bool {
        self.get(p.x, p.y)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.pixels[y * self.width + x] = value as u8;
    }

    /// Value at signed coordinates; anything outside the image is background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.get(x as usize, y as usize)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x < self.width && p.y < self.height
    }

    /// Number of foreground pixels.
    pub fn count(&self) -> usize {
        self.pixels.iter().map(|&p| p as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.iter().all(|&p| p == 0)
    }

    /// Foreground pixels in raster order.
    pub fn foreground(&self) -> impl Iterator<Item = Point> + '_ {
        let w = self.width;
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0)
            .map(move |(i, _)| Point::new(i % w, i / w))
    }

    /// True when every foreground pixel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.pixels.iter().zip(&other.pixels).all(|(&a, &b)| a <= b)
    }

    /// Number of pixels foreground in both masks. Dimensions must agree.
    pub fn intersection_count(&self, other: &BinaryMask) -> usize {
        debug_assert_eq!(self.dims(), other.dims());
        self.pixels
            .iter()
            .zip(&other.pixels)
            .map(|(&a, &b)| (a & b) as usize)
            .sum()
    }

    pub(crate) fn check_same_shape(&self, other: &BinaryMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Shape(format!(
                "mask dimensions differ: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMask {}x{}", self.width, self.height)?;
        if self.width * self.height <= 64 * 64 {
            for row in self.pixels.chunks(self.width) {
                let line: String = row
                    .iter()
                    .map(|&p| if p != 0 { '#' } else { '.' })
                    .collect();
                writeln!(f, "{line}")?;
            }
        }
        Ok(())
    }
}

/// Rectangular grid of reals in `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SoftMask {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl SoftMask {
    pub fn zeros(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        SoftMask {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(Error::Shape(format!(
                "{width}x{height} soft mask needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!(
                "soft mask value {bad} outside [0, 1]"
            )));
        }
        Ok(SoftMask {
            width,
            height,
            values,
        })
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
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub(crate) fn from_raw(width: usize, height: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), width * height);
        SoftMask {
            width,
            height,
            values,
        }
    }

    pub(crate) fn check_same_shape(&self, other: &SoftMask) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Shape(format!(
                "soft mask dimensions differ: {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        Ok(())
    }
}

impl From<&BinaryMask> for SoftMask {
    fn from(mask: &BinaryMask) -> Self {
        SoftMask {
            width: mask.width,
            height: mask.height,
            values: mask.pixels.iter().map(|&p| p as f64).collect(),
        }
    }
}
