//! Core math for quantifying how anchor placement shapes range-based
//! localization accuracy on the plane.
//!
//! The crate provides four building blocks:
//!
//! * [`geometry`]: planar points, anchor sets, rectangular regions, and
//!   trajectories, including a Hilbert space-filling traversal generator.
//! * [`gdop`]: anchor-pair and multi-anchor geometric dilution of precision,
//!   vulnerability rasters over a region, optimal-anchor-pair maps, and
//!   placement scores averaged over regions or trajectories.
//! * [`noise`]: seeded, reproducible range-noise models and the noisy
//!   distance-measurement simulator.
//! * [`localizers`]: three position estimators: linearized least squares,
//!   fixed-step gradient descent, and a two-phase method that picks the best
//!   anchor pair, intersects the two range circles in closed form, and
//!   disambiguates against a reference point.
//!
//! Everything here is pure and deterministic: no IO, no global state, no
//! wall-clock access. Float math goes through `libm`, and randomness through
//! ChaCha12 streams, so identical inputs give bit-identical results across
//! platforms. The crate is `no_std` (with `alloc`); file formats, experiment
//! harnesses, and the CLI live in the companion `anchorlab` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod gdop;
pub mod geometry;
pub mod localizers;
pub mod noise;

pub use error::Error;
pub use gdop::{
    lvt_grid, multi_gdop, multi_gdop_at, osap_map, pair_gdop, pair_gdop_from_distances,
    pair_gdop_matrix, region_score, trajectory_score, LvtGrid, MultiGdop, OsapMap, PlacementScore,
    ScoreDomain, MIN_GDOP,
};
pub use geometry::{
    distance, hilbert_cell_path, hilbert_trajectory, Anchor, AnchorSet, Point2D, Region,
    Trajectory,
};
pub use localizers::{
    gdm_solve, lsm_solve, tplm_solve, Estimate, GdmConfig, LsmConfig, Method, SolveStatus,
};
pub use noise::{draw_noise, measure, NoiseKind, NoiseModel, NoiseSampler, RangeSample};

/// Crate-wide result type.
pub type Result<T> = core::result::Result<T, Error>;
