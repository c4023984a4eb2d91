//! Connected components, thinning and skeleton endpoints.

mod endpoints;
mod labeling;
mod thinning;

pub use endpoints::{
    endpoint_direction, find_endpoints, skeleton_degree, walk_inward, Direction, Endpoint,
    DEFAULT_DIRECTION_DEPTH,
};
pub use labeling::{
    connected_components, count_components, count_components_in, LabelMap, LabelScratch,
};
pub use thinning::skeletonize;

use crate::error::Error;

/// Foreground adjacency used for labeling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self, Error> {
        match value {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(Error::Domain(format!(
                "connectivity must be 4 or 8, got {other}"
            ))),
        }
    }
}

impl Connectivity {
    pub fn as_u8(self) -> u8 {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// The 8 neighbor offsets in clockwise order starting north.
pub(crate) const NEIGHBORS_8: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];
