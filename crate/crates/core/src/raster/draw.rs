use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Point};

/// Offsets `(dx, dy)` with `dx^2 + dy^2 <= radius^2`.
pub fn disk_offsets(radius: u32) -> Vec<(i64, i64)> {
    let r = radius as i64;
    let mut offsets = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                offsets.push((dx, dy));
            }
        }
    }
    offsets
}

/// Sets every in-image pixel within `radius` of `center`.
pub fn stamp_disk(mask: &mut BinaryMask, center: Point, radius: u32, value: bool) {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    for (dx, dy) in disk_offsets(radius) {
        let (x, y) = (center.x as i64 + dx, center.y as i64 + dy);
        if x >= 0 && y >= 0 && x < w && y < h {
            mask.set(x as usize, y as usize, value);
        }
    }
}

/// Pixels of the Bresenham segment from `p` to `q`, both ends included.
pub(crate) fn bresenham(p: Point, q: Point) -> Vec<Point> {
    let (mut x, mut y) = (p.x as i64, p.y as i64);
    let (x1, y1) = (q.x as i64, q.y as i64);
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let sx = if x < x1 { 1 } else { -1 };
    let sy = if y < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut line = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        line.push(Point::new(x as usize, y as usize));
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    line
}

/// In-place variant of [`draw_bridge`].
pub fn stamp_bridge(mask: &mut BinaryMask, p: Point, q: Point, radius: u32) -> Result<()> {
    for end in [p, q] {
        if !mask.contains(end) {
            return Err(Error::Bounds(format!(
                "bridge endpoint {end} outside {}x{} image",
                mask.width(),
                mask.height()
            )));
        }
    }
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let disk = disk_offsets(radius);
    for c in bresenham(p, q) {
        for &(dx, dy) in &disk {
            let (x, y) = (c.x as i64 + dx, c.y as i64 + dy);
            if x >= 0 && y >= 0 && x < w && y < h {
                mask.set(x as usize, y as usize, true);
            }
        }
    }
    Ok(())
}

/// Returns `mask` plus every pixel within `radius` of the Bresenham segment
/// from `p` to `q`.
pub fn draw_bridge(mask: &BinaryMask, p: Point, q: Point, radius: u32) -> Result<BinaryMask> {
    let mut out = mask.clone();
    stamp_bridge(&mut out, p, q, radius)?;
    Ok(out)
}
