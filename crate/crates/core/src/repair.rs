//! Rule-based reconnection of broken vessels.
//!
//! Skeleton tips are paired when they are close and both point at each
//! other; matched pairs are joined by a bridge as wide as the local vessel.
//! Tips that are near but not mutually aligned, such as the ends of two
//! side-by-side vessels, are left apart.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::raster::{distance_transform, stamp_bridge, BinaryMask};
use crate::topology::{find_endpoints, skeletonize, Endpoint};

/// How bridge thickness is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WidthMode {
    /// Rounded mean distance-transform value at the two tips.
    DistanceTransform,
    Fixed(u32),
}

impl std::str::FromStr for WidthMode {
    type Err = Error;

    /// `dt` or `fixed:R`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "dt" {
            return Ok(WidthMode::DistanceTransform);
        }
        s.strip_prefix("fixed:")
            .and_then(|r| r.parse().ok())
            .map(WidthMode::Fixed)
            .ok_or_else(|| Error::Domain(format!("width must be dt or fixed:R, got {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RepairParams {
    /// Largest bridgeable gap in pixels.
    pub d_max: f64,
    /// Minimum alignment cosine required of both tips.
    pub cos_min: f64,
    pub width_mode: WidthMode,
}

impl Default for RepairParams {
    fn default() -> Self {
        RepairParams {
            d_max: 20.0,
            cos_min: 0.5,
            width_mode: WidthMode::DistanceTransform,
        }
    }
}

impl RepairParams {
    pub fn validate(&self) -> Result<()> {
        if self.d_max.is_nan() || self.d_max <= 0.0 {
            return Err(Error::Domain(format!(
                "d_max must be positive, got {}",
                self.d_max
            )));
        }
        if !(-1.0..=1.0).contains(&self.cos_min) {
            return Err(Error::Domain(format!(
                "cos_min must lie in [-1, 1], got {}",
                self.cos_min
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BridgeProposal {
    pub a: Endpoint,
    pub b: Endpoint,
    /// Euclidean distance between the tips.
    pub gap: f64,
    /// Smaller of the two alignment cosines.
    pub score: f64,
}

/// A proposal that was drawn, with the radius used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bridge {
    pub proposal: BridgeProposal,
    pub radius: u32,
}

/// Alignment cosines of tip `a` toward `b` and of `b` toward `a`.
fn alignment(a: &Endpoint, b: &Endpoint) -> (f64, f64) {
    let dx = b.position.x as f64 - a.position.x as f64;
    let dy = b.position.y as f64 - a.position.y as f64;
    let norm = dx.hypot(dy);
    let (ux, uy) = (dx / norm, dy / norm);
    (a.direction.dot((ux, uy)), b.direction.dot((-ux, -uy)))
}

/// Greedy one-to-one matching of mutually aligned tips in ascending gap
/// order; ties go to the higher score, then to the raster order of the
/// first tip.
pub fn pair_endpoints_of(endpoints: &[Endpoint], params: &RepairParams) -> Vec<BridgeProposal> {
    let d_max_sq = params.d_max * params.d_max;
    // (squared gap, proposal); the first tip of each pair precedes the
    // second in raster order because `endpoints` is raster-ordered.
    let mut candidates: Vec<(u64, usize, usize, BridgeProposal)> = Vec::new();
    for (i, a) in endpoints.iter().enumerate() {
        for (j, b) in endpoints.iter().enumerate().skip(i + 1) {
            let gap_sq = a.position.dist_sq(b.position);
            if gap_sq as f64 > d_max_sq {
                continue;
            }
            let (cos_a, cos_b) = alignment(a, b);
            let score = cos_a.min(cos_b);
            if score < params.cos_min {
                continue;
            }
            candidates.push((
                gap_sq,
                i,
                j,
                BridgeProposal {
                    a: *a,
                    b: *b,
                    gap: (gap_sq as f64).sqrt(),
                    score,
                },
            ));
        }
    }
    candidates.sort_by(|x, y| {
        x.0.cmp(&y.0)
            .then_with(|| y.3.score.partial_cmp(&x.3.score).unwrap_or(Ordering::Equal))
            .then_with(|| x.1.cmp(&y.1))
            .then_with(|| x.2.cmp(&y.2))
    });

    let mut used = vec![false; endpoints.len()];
    let mut accepted = Vec::new();
    for (_, i, j, proposal) in candidates {
        if used[i] || used[j] {
            continue;
        }
        used[i] = true;
        used[j] = true;
        accepted.push(proposal);
    }
    accepted
}

/// Accepted bridge proposals for the skeleton tips of `pred`.
pub fn pair_endpoints(pred: &BinaryMask, params: &RepairParams) -> Vec<BridgeProposal> {
    pair_endpoints_of(&find_endpoints(&skeletonize(pred)), params)
}

/// Result of [`repair_mask`].
#[derive(Clone, Debug, PartialEq)]
pub struct RepairOutcome {
    pub mask: BinaryMask,
    pub bridges: Vec<Bridge>,
}

/// Draws a bridge for every accepted proposal. The output contains `pred`,
/// and its component count is never higher.
pub fn repair_mask(pred: &BinaryMask, params: &RepairParams) -> Result<RepairOutcome> {
    params.validate()?;
    let proposals = pair_endpoints(pred, params);
    let mut mask = pred.clone();
    if proposals.is_empty() {
        return Ok(RepairOutcome {
            mask,
            bridges: Vec::new(),
        });
    }
    let mut dt = None;
    let mut bridges = Vec::with_capacity(proposals.len());
    for proposal in proposals {
        let (p, q) = (proposal.a.position, proposal.b.position);
        let radius = match params.width_mode {
            WidthMode::Fixed(r) => r,
            WidthMode::DistanceTransform => {
                let dt = dt.get_or_insert_with(|| distance_transform(pred));
                ((dt.get(p.x, p.y) + dt.get(q.x, q.y)) / 2.0).round() as u32
            }
        };
        stamp_bridge(&mut mask, p, q, radius)?;
        bridges.push(Bridge { proposal, radius });
    }
    Ok(RepairOutcome { mask, bridges })
}
