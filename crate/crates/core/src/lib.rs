//! Topology-aware evaluation and repair of binary vessel masks.
//!
//! The crate is organised bottom-up:
//!
//! * [`raster`]: mask types, PNM I/O, patch tiling, bridge rasterization and
//!   the exact Euclidean distance transform.
//! * [`topology`]: connected-component labeling, Zhang-Suen thinning and
//!   skeleton endpoint analysis.
//! * [`metrics`]: Dice, IoU, clDice, patch-normalized Betti-0 error, MSE,
//!   soft-clDice loss and report aggregation.
//! * [`kernels`]: reference adapter math (GELU bottleneck adapters) with
//!   analytic gradients and a finite-difference checker.
//! * [`fragment`]: seeded synthesis of broken vessel masks from intact ones.
//! * [`repair`]: endpoint pairing and bridge drawing that reconnects broken
//!   vessels while leaving genuine separations alone.
//! * [`harness`]: directory-level evaluation and fragment/repair pipelines
//!   with CSV and markdown reports.

pub mod error;
pub mod fragment;
pub mod harness;
pub mod kernels;
pub mod metrics;
pub mod raster;
pub mod repair;
pub mod topology;

pub use error::{Error, Result};
pub use raster::{BinaryMask, Point, SoftMask};
pub use topology::Connectivity;
