//! Seeded synthesis of fragmented vessel masks.
//!
//! Disks centered on the skeleton of an intact mask are cleared one at a
//! time. A cut is kept only if it strictly increases the number of
//! 8-connected components and does not touch an earlier cut, so every kept
//! cut is a genuine disconnection a repair step has to close.

mod rng;
pub mod shapes;

pub use rng::SeededRng;

use crate::error::{Error, Result};
use crate::raster::{disk_offsets, stamp_disk, BinaryMask, Point};
use crate::topology::{count_components, skeletonize, Connectivity};

/// Attempts allowed per requested break.
pub const ATTEMPTS_PER_BREAK: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FragmentParams {
    pub breaks: usize,
    pub min_radius: u32,
    pub max_radius: u32,
    pub seed: u64,
}

impl Default for FragmentParams {
    fn default() -> Self {
        FragmentParams {
            breaks: 3,
            min_radius: 2,
            max_radius: 5,
            seed: 0,
        }
    }
}

impl FragmentParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_radius < 1 || self.min_radius > self.max_radius {
            return Err(Error::Domain(format!(
                "break radii must satisfy 1 <= min <= max, got {}..{}",
                self.min_radius, self.max_radius
            )));
        }
        Ok(())
    }
}

/// One accepted cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BreakRecord {
    pub center: Point,
    pub radius: u32,
    pub components_before: usize,
    pub components_after: usize,
}

/// Cuts up to `params.breaks` disconnections into `gt`.
///
/// Each attempt draws a skeleton pixel and then a radius from the seeded
/// generator, in that order, so output depends only on `(gt, params)`.
pub fn generate_breaks(
    gt: &BinaryMask,
    params: &FragmentParams,
) -> Result<(BinaryMask, Vec<BreakRecord>)> {
    params.validate()?;
    if gt.is_empty() {
        return Err(Error::EmptyInput(
            "ground-truth mask has no foreground".into(),
        ));
    }
    let mut mask = gt.clone();
    let mut records = Vec::new();
    if params.breaks == 0 {
        return Ok((mask, records));
    }

    let candidates: Vec<Point> = skeletonize(gt).foreground().collect();
    if candidates.is_empty() {
        return Ok((mask, records));
    }
    let count = u32::try_from(candidates.len())
        .map_err(|_| Error::Domain("skeleton too large to sample".into()))?;
    let radius_span = params.max_radius - params.min_radius + 1;

    let mut rng = SeededRng::new(params.seed);
    let mut cut = BinaryMask::new(gt.width(), gt.height());
    let mut components = count_components(&mask, Connectivity::Eight);
    let (w, h) = (gt.width() as i64, gt.height() as i64);

    for _ in 0..ATTEMPTS_PER_BREAK * params.breaks {
        if records.len() == params.breaks {
            break;
        }
        let center = candidates[rng.below(count) as usize];
        let radius = params.min_radius + rng.below(radius_span);

        let overlaps = disk_offsets(radius).into_iter().any(|(dx, dy)| {
            let (x, y) = (center.x as i64 + dx, center.y as i64 + dy);
            x >= 0 && y >= 0 && x < w && y < h && cut.get(x as usize, y as usize)
        });
        if overlaps {
            continue;
        }

        let mut trial = mask.clone();
        stamp_disk(&mut trial, center, radius, false);
        let after = count_components(&trial, Connectivity::Eight);
        if after > components {
            records.push(BreakRecord {
                center,
                radius,
                components_before: components,
                components_after: after,
            });
            stamp_disk(&mut cut, center, radius, true);
            mask = trial;
            components = after;
        }
    }
    Ok((mask, records))
}

/// Union of the disks of `records`, i.e. the region a repair step would have
/// to fill back in.
pub fn break_region_mask(
    records: &[BreakRecord],
    width: usize,
    height: usize,
) -> Result<BinaryMask> {
    let mut mask = BinaryMask::new(width, height);
    for r in records {
        if !mask.contains(r.center) {
            return Err(Error::Bounds(format!(
                "break center {} outside {width}x{height} image",
                r.center
            )));
        }
        stamp_disk(&mut mask, r.center, r.radius, true);
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::dice;
    use crate::raster::{save_pgm, stamp_bridge, PnmFormat};

    fn straight_line() -> BinaryMask {
        let mut m = BinaryMask::new(50, 9);
        stamp_bridge(&mut m, Point::new(5, 4), Point::new(44, 4), 0).unwrap();
        m
    }

    #[test]
    fn zero_breaks_is_identity() {
        let gt = straight_line();
        let params = FragmentParams {
            breaks: 0,
            ..Default::default()
        };
        let (out, records) = generate_breaks(&gt, &params).unwrap();
        assert_eq!(out, gt);
        assert!(records.is_empty());
    }

    #[test]
    fn one_cut_on_a_path() {
        let gt = straight_line();
        let params = FragmentParams {
            breaks: 1,
            min_radius: 2,
            max_radius: 2,
            seed: 9,
        };
        let (out, records) = generate_breaks(&gt, &params).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(count_components(&out, Connectivity::Eight), 2);
        assert_eq!(records[0].components_before, 1);
        assert_eq!(records[0].components_after, 2);
        assert_eq!(out.count(), gt.count() - 5);
    }

    #[test]
    fn invalid_inputs() {
        let gt = straight_line();
        let bad = FragmentParams {
            min_radius: 4,
            max_radius: 3,
            ..Default::default()
        };
        assert!(matches!(generate_breaks(&gt, &bad), Err(Error::Domain(_))));
        let zero = FragmentParams {
            min_radius: 0,
            ..Default::default()
        };
        assert!(matches!(generate_breaks(&gt, &zero), Err(Error::Domain(_))));
        assert!(matches!(
            generate_breaks(&BinaryMask::new(4, 4), &FragmentParams::default()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn fixed_seed_output_is_frozen() {
        let gt = &shapes::base_shapes()[6].1;
        let params = FragmentParams {
            breaks: 3,
            seed: 42,
            ..Default::default()
        };
        let (a, ra) = generate_breaks(gt, &params).unwrap();
        let (b, rb) = generate_breaks(gt, &params).unwrap();
        assert_eq!(save_pgm(&a, PnmFormat::P4), save_pgm(&b, PnmFormat::P4));
        assert_eq!(ra, rb);
    }

    #[test]
    fn invariants_over_shapes_and_seeds() {
        for (name, gt) in shapes::base_shapes() {
            for seed in 0..8 {
                let params = FragmentParams {
                    breaks: 3,
                    seed,
                    ..Default::default()
                };
                let (out, records) = generate_breaks(&gt, &params).unwrap();
                assert!(out.is_subset_of(&gt), "{name}/{seed}");
                let skeleton = skeletonize(&gt);
                for r in &records {
                    assert!(skeleton.at(r.center));
                    assert!(r.components_after > r.components_before);
                    assert!((2..=5).contains(&r.radius));
                }
                for pair in records.windows(2) {
                    assert_eq!(pair[0].components_after, pair[1].components_before);
                }
                if let Some(last) = records.last() {
                    assert_eq!(
                        count_components(&out, Connectivity::Eight),
                        last.components_after
                    );
                    assert!(dice(&out, &gt).unwrap() < 1.0);
                }
                let region = break_region_mask(&records, gt.width(), gt.height()).unwrap();
                let area: usize = records.iter().map(|r| disk_offsets(r.radius).len()).sum();
                // Disks never overlap, but may be clipped at the border.
                assert!(region.count() <= area);
            }
        }
    }

    #[test]
    fn region_mask_cases() {
        assert!(break_region_mask(&[], 8, 8).unwrap().is_empty());
        let rec = |x, y, r| BreakRecord {
            center: Point::new(x, y),
            radius: r,
            components_before: 1,
            components_after: 2,
        };
        let one = break_region_mask(&[rec(5, 5, 1)], 11, 11).unwrap();
        assert_eq!(
            one.foreground().collect::<Vec<_>>(),
            vec![
                Point::new(5, 4),
                Point::new(4, 5),
                Point::new(5, 5),
                Point::new(6, 5),
                Point::new(5, 6)
            ]
        );
        let two = break_region_mask(&[rec(3, 3, 2), rec(12, 8, 3)], 20, 20).unwrap();
        assert_eq!(two.count(), disk_offsets(2).len() + disk_offsets(3).len());
        assert!(matches!(
            break_region_mask(&[rec(20, 0, 1)], 20, 20),
            Err(Error::Bounds(_))
        ));
    }
}
