//! Position estimators for one epoch of range measurements.
//!
//! Three methods, all pure functions of their inputs:
//!
//! * [`lsm_solve`]: linearized least squares on pairwise-differenced circle
//!   equations. Cheap, closed form, and the conventional source of the
//!   initial value for the other two.
//! * [`gdm_solve`]: fixed-step gradient descent on the squared
//!   circle-residual objective.
//! * [`tplm_solve`]: two phases. Pick the anchor pair with the best
//!   measured-distance GDOP, intersect its two range circles in closed form,
//!   then keep the candidate closer to a reference point.

mod gdm;
mod lsm;
mod tplm;

pub use gdm::{gdm_solve, objective as gdm_objective, gradient as gdm_gradient};
pub use lsm::lsm_solve;
pub use tplm::tplm_solve;

use crate::error::Error;
use crate::geometry::{AnchorSet, Point2D};
use crate::noise::RangeSample;
use crate::Result;
use alloc::format;
use core::time::Duration;

/// Which estimator produced an [`Estimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Lsm,
    Gdm,
    Tplm,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Lsm, Method::Gdm, Method::Tplm];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Lsm => "lsm",
            Method::Gdm => "gdm",
            Method::Tplm => "tplm",
        }
    }
}

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Met its convergence / closed-form contract.
    Converged,
    /// Iteration budget exhausted with a finite iterate (gradient descent).
    MaxIterations,
    /// Objective or iterate left the finite range; the estimate carries the
    /// last finite iterate.
    Diverged,
}

/// A position estimate with solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub position: Point2D,
    pub method: Method,
    pub status: SolveStatus,
    /// Iterations actually run (gradient descent; 0 for closed forms).
    pub iterations: u32,
    /// Winning anchor pair of the selection phase (two-phase method only).
    pub chosen_pair: Option<(u32, u32)>,
    /// Two-phase method: the circle-intersection radicand went negative
    /// under noise and was clamped to the tangent point.
    pub radicand_clamped: bool,
    /// Wall time of the solve, when captured by a timing caller. The core
    /// solvers never measure time themselves.
    pub elapsed: Option<Duration>,
}

impl Estimate {
    pub(crate) fn new(position: Point2D, method: Method) -> Self {
        Self {
            position,
            method,
            status: SolveStatus::Converged,
            iterations: 0,
            chosen_pair: None,
            radicand_clamped: false,
            elapsed: None,
        }
    }

    /// Euclidean error against a known true position.
    pub fn error_to(&self, truth: Point2D) -> f64 {
        self.position.distance_to(truth)
    }
}

/// Configuration for the least-squares solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsmConfig {
    /// Relative tolerance on the normal-equation determinant below which the
    /// anchor geometry counts as rank deficient.
    pub cond_tolerance: f64,
}

impl Default for LsmConfig {
    fn default() -> Self {
        Self { cond_tolerance: 1e-12 }
    }
}

/// Configuration for the gradient-descent solver. Defaults match the
/// reference experiment setup: step 1e-5, termination 1e-3 on the step norm,
/// at most 100 iterations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdmConfig {
    /// Step size eta.
    pub step: f64,
    /// Terminate once the iterate moves less than this (meters).
    pub termination: f64,
    pub max_iters: u32,
}

impl Default for GdmConfig {
    fn default() -> Self {
        Self {
            step: 1e-5,
            termination: 1e-3,
            max_iters: 100,
        }
    }
}

impl GdmConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.step) || !positive(self.termination) || self.max_iters == 0 {
            return Err(Error::InvalidInput(format!(
                "gradient descent config needs step > 0, termination > 0, max_iters >= 1; \
                 got ({}, {}, {})",
                self.step, self.termination, self.max_iters
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_sample(anchors: &AnchorSet, sample: &RangeSample) -> Result<()> {
    if sample.distances.len() != anchors.len() {
        return Err(Error::InvalidInput(format!(
            "sample carries {} distances for {} anchors",
            sample.distances.len(),
            anchors.len()
        )));
    }
    if sample.distances.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::InvalidInput(
            "sample distances must be finite and non-negative".into(),
        ));
    }
    Ok(())
}
