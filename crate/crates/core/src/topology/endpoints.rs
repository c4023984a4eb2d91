use crate::error::{Error, Result};
use crate::raster::{BinaryMask, Point};
use crate::topology::NEIGHBORS_8;

/// Walk depth used when estimating tip directions.
pub const DEFAULT_DIRECTION_DEPTH: usize = 5;

/// Unit vector in image coordinates (`y` grows downward). The zero vector
/// marks a tip whose direction could not be estimated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    pub dx: f64,
    pub dy: f64,
}

impl Direction {
    pub const INVALID: Direction = Direction { dx: 0.0, dy: 0.0 };

    pub fn is_valid(&self) -> bool {
        self.dx != 0.0 || self.dy != 0.0
    }

    pub fn dot(&self, other: (f64, f64)) -> f64 {
        self.dx * other.0 + self.dy * other.1
    }
}

/// A skeleton tip and the outward direction of the vessel there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Endpoint {
    pub position: Point,
    pub direction: Direction,
}

fn skeleton_neighbors(skeleton: &BinaryMask, p: Point) -> impl Iterator<Item = Point> + '_ {
    NEIGHBORS_8.iter().filter_map(move |&(dx, dy)| {
        let (x, y) = (p.x as i64 + dx, p.y as i64 + dy);
        skeleton
            .get_signed(x, y)
            .then(|| Point::new(x as usize, y as usize))
    })
}

/// Number of skeleton pixels in the 8-neighborhood of `p`.
pub fn skeleton_degree(skeleton: &BinaryMask, p: Point) -> usize {
    skeleton_neighbors(skeleton, p).count()
}

fn is_orthogonal(a: Point, b: Point) -> bool {
    a.x == b.x || a.y == b.y
}

fn check_tip(skeleton: &BinaryMask, tip: Point) -> Result<()> {
    if !skeleton.contains(tip) || !skeleton.at(tip) {
        return Err(Error::Contract(format!("{tip} is not a skeleton pixel")));
    }
    let degree = skeleton_degree(skeleton, tip);
    if degree > 1 {
        return Err(Error::Contract(format!(
            "{tip} has {degree} skeleton neighbors, not a tip"
        )));
    }
    Ok(())
}

/// Follows the skeleton inward from `tip` for up to `steps` pixels and
/// returns where the walk ended. The walk stops early when the path ends or
/// forks.
///
/// Two unvisited candidates that touch each other are a staircase corner
/// rather than a fork; the walk takes the orthogonal one and picks up the
/// other on the next step.
pub fn walk_inward(skeleton: &BinaryMask, tip: Point, steps: usize) -> Result<Point> {
    check_tip(skeleton, tip)?;
    let mut visited = vec![tip];
    let mut current = tip;
    for _ in 0..steps {
        let candidates: Vec<Point> = skeleton_neighbors(skeleton, current)
            .filter(|p| !visited.contains(p))
            .collect();
        let next = match candidates[..] {
            [only] => only,
            [a, b] if a.x.abs_diff(b.x) <= 1 && a.y.abs_diff(b.y) <= 1 => {
                if is_orthogonal(current, a) {
                    a
                } else {
                    b
                }
            }
            _ => break,
        };
        visited.push(next);
        current = next;
    }
    Ok(current)
}

/// Outward direction at `tip`: the unit vector from the end of a
/// `depth`-step inward walk back to the tip. A walk that cannot leave the
/// tip gives [`Direction::INVALID`].
pub fn endpoint_direction(skeleton: &BinaryMask, tip: Point, depth: usize) -> Result<Direction> {
    let end = walk_inward(skeleton, tip, depth)?;
    if end == tip {
        return Ok(Direction::INVALID);
    }
    let dx = tip.x as f64 - end.x as f64;
    let dy = tip.y as f64 - end.y as f64;
    let norm = dx.hypot(dy);
    Ok(Direction {
        dx: dx / norm,
        dy: dy / norm,
    })
}

/// Every skeleton pixel with exactly one skeleton 8-neighbor, in raster
/// order.
pub fn find_endpoints(skeleton: &BinaryMask) -> Vec<Endpoint> {
    skeleton
        .foreground()
        .filter(|&p| skeleton_degree(skeleton, p) == 1)
        .map(|p| Endpoint {
            position: p,
            direction: endpoint_direction(skeleton, p, DEFAULT_DIRECTION_DEPTH)
                .expect("degree-one pixel is a valid tip"),
        })
        .collect()
}
