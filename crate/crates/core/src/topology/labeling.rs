//! Two-pass connected-component labeling with a union-find over
//! provisional labels.

use crate::raster::{BinaryMask, Rect};
use crate::topology::Connectivity;

/// Per-pixel component labels. 0 is background; components are numbered
/// `1..=component_count` in the raster order of their first pixel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub component_count: usize,
}

impl LabelMap {
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }
}

/// Reusable buffers for repeated labeling of small regions.
#[derive(Default, Debug)]
pub struct LabelScratch {
    labels: Vec<u32>,
    parent: Vec<u32>,
}

#[inline]
fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let grand = parent[parent[x as usize] as usize];
        parent[x as usize] = grand;
        x = grand;
    }
    x
}

#[inline]
fn union(parent: &mut [u32], a: u32, b: u32) -> u32 {
    let ra = find(parent, a);
    let rb = find(parent, b);
    // The smaller provisional label wins so roots stay at the
    // earliest-created label.
    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
    parent[hi as usize] = lo;
    lo
}

/// First pass over `rect`. Leaves provisional labels in `scratch.labels`
/// (rect-local, row-major) and the forest in `scratch.parent`; returns the
/// number of provisional labels created.
fn first_pass(
    mask: &BinaryMask,
    rect: Rect,
    conn: Connectivity,
    scratch: &mut LabelScratch,
) -> u32 {
    let (rw, rh) = (rect.w, rect.h);
    let stride = mask.width();
    let px = mask.pixels();
    scratch.labels.clear();
    scratch.labels.resize(rw * rh, 0);
    scratch.parent.clear();
    scratch.parent.push(0);
    let labels = &mut scratch.labels;
    let parent = &mut scratch.parent;
    let eight = conn == Connectivity::Eight;

    let mut next = 1u32;
    for y in 0..rh {
        let row = (rect.y0 + y) * stride + rect.x0;
        for x in 0..rw {
            if px[row + x] == 0 {
                continue;
            }
            let mut current = 0u32;
            let mut visit = |l: u32, current: &mut u32| {
                if l == 0 {
                    return;
                }
                *current = if *current == 0 {
                    find(parent, l)
                } else {
                    union(parent, *current, l)
                };
            };
            if x > 0 {
                visit(labels[y * rw + x - 1], &mut current);
            }
            if y > 0 {
                let up = (y - 1) * rw + x;
                visit(labels[up], &mut current);
                if eight {
                    if x > 0 {
                        visit(labels[up - 1], &mut current);
                    }
                    if x + 1 < rw {
                        visit(labels[up + 1], &mut current);
                    }
                }
            }
            if current == 0 {
                current = next;
                parent.push(next);
                next += 1;
            }
            labels[y * rw + x] = current;
        }
    }
    next - 1
}

/// Number of connected components inside `rect` of `mask`, treating pixels
/// outside the rectangle as background.
pub fn count_components_in(
    mask: &BinaryMask,
    rect: Rect,
    conn: Connectivity,
    scratch: &mut LabelScratch,
) -> usize {
    let created = first_pass(mask, rect, conn, scratch);
    (1..=created)
        .filter(|&l| scratch.parent[l as usize] == l)
        .count()
}

pub fn count_components(mask: &BinaryMask, conn: Connectivity) -> usize {
    let rect = Rect {
        x0: 0,
        y0: 0,
        w: mask.width(),
        h: mask.height(),
    };
    count_components_in(mask, rect, conn, &mut LabelScratch::default())
}

pub fn connected_components(mask: &BinaryMask, conn: Connectivity) -> LabelMap {
    let (w, h) = mask.dims();
    let mut scratch = LabelScratch::default();
    let rect = Rect { x0: 0, y0: 0, w, h };
    let created = first_pass(mask, rect, conn, &mut scratch);
    let LabelScratch {
        mut labels,
        mut parent,
    } = scratch;

    let mut remap = vec![0u32; created as usize + 1];
    let mut count = 0u32;
    for l in labels.iter_mut() {
        if *l == 0 {
            continue;
        }
        let root = find(&mut parent, *l) as usize;
        if remap[root] == 0 {
            count += 1;
            remap[root] = count;
        }
        *l = remap[root];
    }

    LabelMap {
        width: w,
        height: h,
        labels,
        component_count: count as usize,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::VecDeque;

    /// Flood-fill reference labeling.
    fn bfs_labels(mask: &BinaryMask, conn: Connectivity) -> (Vec<u32>, usize) {
        let (w, h) = mask.dims();
        let mut labels = vec![0u32; w * h];
        let mut count = 0;
        let offsets: &[(i64, i64)] = match conn {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[
                (1, 0),
                (-1, 0),
                (0, 1),
                (0, -1),
                (1, 1),
                (1, -1),
                (-1, 1),
                (-1, -1),
            ],
        };
        for start in 0..w * h {
            if mask.pixels()[start] == 0 || labels[start] != 0 {
                continue;
            }
            count += 1;
            labels[start] = count;
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                let (x, y) = ((i % w) as i64, (i / w) as i64);
                for &(dx, dy) in offsets {
                    let (nx, ny) = (x + dx, y + dy);
                    if mask.get_signed(nx, ny) {
                        let j = ny as usize * w + nx as usize;
                        if labels[j] == 0 {
                            labels[j] = count;
                            queue.push_back(j);
                        }
                    }
                }
            }
        }
        (labels, count as usize)
    }

    #[test]
    fn empty_mask_has_no_components() {
        let m = BinaryMask::new(9, 4);
        assert_eq!(
            connected_components(&m, Connectivity::Eight).component_count,
            0
        );
        assert_eq!(count_components(&m, Connectivity::Four), 0);
    }

    #[test]
    fn diagonal_touch() {
        let m = BinaryMask::from_ascii("#.\n.#").unwrap();
        assert_eq!(count_components(&m, Connectivity::Eight), 1);
        assert_eq!(count_components(&m, Connectivity::Four), 2);
    }

    #[test]
    fn u_shape_merges_late() {
        let m = BinaryMask::from_ascii(
            "
            #.#.#
            #.#.#
            #####
            ",
        )
        .unwrap();
        let lm = connected_components(&m, Connectivity::Four);
        assert_eq!(lm.component_count, 1);
        assert!(lm.labels.iter().all(|&l| l <= 1));
    }

    #[test]
    fn labels_follow_first_pixel_order() {
        let m = BinaryMask::from_ascii(
            "
            ...#.
            #..#.
            #....
            ",
        )
        .unwrap();
        let lm = connected_components(&m, Connectivity::Eight);
        assert_eq!(lm.get(3, 0), 1);
        assert_eq!(lm.get(0, 1), 2);
    }

    #[test]
    fn region_count_ignores_outside() {
        let m = BinaryMask::from_ascii(
            "
            ####
            #..#
            #..#
            ",
        )
        .unwrap();
        let mut scratch = LabelScratch::default();
        let lower = Rect {
            x0: 0,
            y0: 1,
            w: 4,
            h: 2,
        };
        assert_eq!(
            count_components_in(&m, lower, Connectivity::Eight, &mut scratch),
            2
        );
        assert_eq!(count_components(&m, Connectivity::Eight), 1);
    }

    #[test]
    fn agrees_with_flood_fill() {
        let mut state = 7u64;
        for case in 0..300 {
            let (w, h) = (1 + case % 23, 1 + (case * 7) % 31);
            let density = (case % 10) as u64;
            let m = BinaryMask::from_fn(w, h, |_, _| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 33) % 10 < density
            });
            for conn in [Connectivity::Four, Connectivity::Eight] {
                let lm = connected_components(&m, conn);
                let (oracle, count) = bfs_labels(&m, conn);
                assert_eq!(lm.component_count, count);
                // BFS also numbers components by first raster pixel.
                assert_eq!(lm.labels, oracle);
            }
        }
    }
}
