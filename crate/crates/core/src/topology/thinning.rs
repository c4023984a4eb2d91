//! Zhang-Suen thinning.
//!
//! Each pass evaluates the two sub-iterations in parallel over a snapshot,
//! as in the original formulation. Only contour pixels are examined: the
//! worklist starts with every foreground pixel that touches background and
//! grows with the foreground neighbors of each deleted pixel.

use crate::raster::BinaryMask;

// Neighbor bits: P2 (N) is bit 0, continuing clockwise to P9 (NW) at bit 7.
const P2: u8 = 1;
const P4: u8 = 1 << 2;
const P6: u8 = 1 << 4;
const P8: u8 = 1 << 6;

const fn deletable(code: u8, second: bool) -> bool {
    let b = code.count_ones();
    if b < 2 || b > 6 {
        return false;
    }
    let mut transitions = 0;
    let mut i = 0;
    while i < 8 {
        let here = (code >> i) & 1;
        let next = (code >> ((i + 1) % 8)) & 1;
        if here == 0 && next == 1 {
            transitions += 1;
        }
        i += 1;
    }
    if transitions != 1 {
        return false;
    }
    let (first_triple, second_triple) = if second {
        (P2 | P4 | P8, P2 | P6 | P8)
    } else {
        (P2 | P4 | P6, P4 | P6 | P8)
    };
    code & first_triple != first_triple && code & second_triple != second_triple
}

const fn build_table(second: bool) -> [bool; 256] {
    let mut table = [false; 256];
    let mut code = 0;
    while code < 256 {
        table[code] = deletable(code as u8, second);
        code += 1;
    }
    table
}

static TABLES: [[bool; 256]; 2] = [build_table(false), build_table(true)];

/// Thins `mask` to a one-pixel-wide skeleton by Zhang-Suen sub-iterations
/// run to a fixpoint. The result is a subset of the input.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let pw = w + 2;
    let mut grid = vec![0u8; pw * (h + 2)];
    for (y, row) in mask.pixels().chunks_exact(w).enumerate() {
        grid[(y + 1) * pw + 1..(y + 1) * pw + 1 + w].copy_from_slice(row);
    }

    let pw_i = pw as isize;
    let offsets: [isize; 8] = [-pw_i, -pw_i + 1, 1, pw_i + 1, pw_i, pw_i - 1, -1, -pw_i - 1];
    let code_at = |grid: &[u8], i: usize| -> u8 {
        let mut code = 0u8;
        for (bit, &off) in offsets.iter().enumerate() {
            code |= grid[(i as isize + off) as usize] << bit;
        }
        code
    };

    let mut queued = vec![false; grid.len()];
    let mut worklist: Vec<usize> = Vec::new();
    for y in 1..=h {
        for x in 1..=w {
            let i = y * pw + x;
            if grid[i] == 1 && code_at(&grid, i) != 0xff {
                queued[i] = true;
                worklist.push(i);
            }
        }
    }

    let mut doomed = Vec::new();
    loop {
        let mut changed = false;
        for table in &TABLES {
            doomed.clear();
            doomed.extend(
                worklist
                    .iter()
                    .copied()
                    .filter(|&i| table[code_at(&grid, i) as usize]),
            );
            if doomed.is_empty() {
                continue;
            }
            changed = true;
            for &i in &doomed {
                grid[i] = 0;
            }
            for &i in &doomed {
                for &off in &offsets {
                    let j = (i as isize + off) as usize;
                    if grid[j] == 1 && !queued[j] {
                        queued[j] = true;
                        worklist.push(j);
                    }
                }
            }
            worklist.retain(|&i| grid[i] == 1);
        }
        if !changed {
            break;
        }
    }

    let mut pixels = Vec::with_capacity(w * h);
    for y in 1..=h {
        pixels.extend_from_slice(&grid[y * pw + 1..y * pw + 1 + w]);
    }
    BinaryMask::from_pixels(w, h, pixels).expect("thinning preserves shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::stamp_bridge;
    use crate::raster::Point;
    use crate::topology::{count_components, Connectivity};

    /// Direct transcription of the sub-iteration rules without worklists or
    /// lookup tables.
    fn naive_zhang_suen(mask: &BinaryMask) -> BinaryMask {
        let mut m = mask.clone();
        let (w, h) = m.dims();
        loop {
            let mut changed = false;
            for step in 0..2 {
                let snapshot = m.clone();
                let p = |x: usize, y: usize, dx: i64, dy: i64| {
                    snapshot.get_signed(x as i64 + dx, y as i64 + dy) as u8
                };
                for y in 0..h {
                    for x in 0..w {
                        if !snapshot.get(x, y) {
                            continue;
                        }
                        let n = [
                            p(x, y, 0, -1),
                            p(x, y, 1, -1),
                            p(x, y, 1, 0),
                            p(x, y, 1, 1),
                            p(x, y, 0, 1),
                            p(x, y, -1, 1),
                            p(x, y, -1, 0),
                            p(x, y, -1, -1),
                        ];
                        let b: u8 = n.iter().sum();
                        let a = (0..8).filter(|&i| n[i] == 0 && n[(i + 1) % 8] == 1).count();
                        let (p2, p4, p6, p8) = (n[0], n[2], n[4], n[6]);
                        let cond = if step == 0 {
                            p2 * p4 * p6 == 0 && p4 * p6 * p8 == 0
                        } else {
                            p2 * p4 * p8 == 0 && p2 * p6 * p8 == 0
                        };
                        if (2..=6).contains(&b) && a == 1 && cond {
                            m.set(x, y, false);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return m;
            }
        }
    }

    #[test]
    fn thin_line_unchanged() {
        let m = BinaryMask::from_fn(12, 5, |x, y| y == 2 && (1..11).contains(&x));
        assert_eq!(skeletonize(&m), m);
    }

    #[test]
    fn empty_stays_empty() {
        let m = BinaryMask::new(6, 6);
        assert_eq!(skeletonize(&m), m);
    }

    #[test]
    fn filled_square_collapses_to_center() {
        // Hand trace of the rules on a 5x5 block: the first pass strips the
        // south/east side and then the north/west side, leaving a 3x3
        // block minus its NW and SE corners; the second pass reduces that to
        // the center pixel.
        let m = BinaryMask::from_fn(5, 5, |_, _| true);
        let expected = BinaryMask::from_fn(5, 5, |x, y| x == 2 && y == 2);
        assert_eq!(skeletonize(&m), expected);
    }

    #[test]
    fn two_by_two_block_vanishes() {
        // Known Zhang-Suen pathology: every pixel of a 2x2 block satisfies
        // the first sub-iteration.
        let m = BinaryMask::from_fn(4, 4, |x, y| (1..3).contains(&x) && (1..3).contains(&y));
        assert!(skeletonize(&m).is_empty());
    }

    #[test]
    fn matches_direct_rules_and_is_idempotent() {
        let mut state = 99u64;
        for case in 0..200 {
            let (w, h) = (3 + case % 29, 3 + (case * 11) % 26);
            let density = 3 + (case % 7) as u64;
            let m = BinaryMask::from_fn(w, h, |_, _| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 33) % 10 < density
            });
            let s = skeletonize(&m);
            assert_eq!(s, naive_zhang_suen(&m), "case {case}");
            assert!(s.is_subset_of(&m));
            assert_eq!(skeletonize(&s), s);
        }
    }

    #[test]
    fn thick_strokes_keep_component_count() {
        let mut m = BinaryMask::new(80, 60);
        stamp_bridge(&mut m, Point::new(5, 5), Point::new(70, 50), 3).unwrap();
        stamp_bridge(&mut m, Point::new(5, 55), Point::new(30, 40), 2).unwrap();
        let s = skeletonize(&m);
        assert_eq!(
            count_components(&s, Connectivity::Eight),
            count_components(&m, Connectivity::Eight)
        );
    }
}
