//! Gradient-descent localization.
//!
//! Minimizes the mean squared circle residual
//! `f(p) = (1/m) * sum_i ((p - p_i)-(p - p_i) - dhat_i^2)^2` with the
//! fixed-step update `p <- p - eta * grad f(p)`.
//!
//! The 1/m scaling matters: it keeps the step size's stability region
//! independent of the anchor count, and with the reference step 1e-5 it is
//! what keeps the iteration stable across a 100 x 100 workspace. Without it
//! the eta * lambda stability product exceeds 2 near the region corners and
//! the iteration oscillates into overflow.

use super::{check_sample, Estimate, GdmConfig, Method, SolveStatus};
use crate::error::Error;
use crate::geometry::{AnchorSet, Point2D};
use crate::noise::RangeSample;
use crate::Result;

/// Mean squared circle residual at `p`.
pub fn objective(anchors: &AnchorSet, distances: &[f64], p: Point2D) -> f64 {
    let mut sum = 0.0;
    for (a, &d) in anchors.anchors().iter().zip(distances) {
        let dx = p.x - a.position.x;
        let dy = p.y - a.position.y;
        let r = dx * dx + dy * dy - d * d;
        sum += r * r;
    }
    sum / anchors.len() as f64
}

/// Analytic gradient of [`objective`]:
/// `(4/m) * sum_i (p - p_i) * ((p - p_i)-(p - p_i) - dhat_i^2)`.
pub fn gradient(anchors: &AnchorSet, distances: &[f64], p: Point2D) -> (f64, f64) {
    let (mut gx, mut gy) = (0.0f64, 0.0f64);
    for (a, &d) in anchors.anchors().iter().zip(distances) {
        let dx = p.x - a.position.x;
        let dy = p.y - a.position.y;
        let r = dx * dx + dy * dy - d * d;
        gx += 4.0 * dx * r;
        gy += 4.0 * dy * r;
    }
    let m = anchors.len() as f64;
    (gx / m, gy / m)
}

/// Runs the descent from `init` (conventionally the least-squares estimate)
/// until the step norm drops below the termination threshold or the
/// iteration budget runs out.
///
/// A non-finite iterate ends the solve with [`SolveStatus::Diverged`] and
/// the last finite iterate as the position; that is a result, not an error,
/// so callers can count and exclude divergences explicitly.
pub fn gdm_solve(
    anchors: &AnchorSet,
    sample: &RangeSample,
    init: Point2D,
    cfg: &GdmConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    check_sample(anchors, sample)?;
    if !init.is_finite() {
        return Err(Error::InvalidInput("initial point must be finite".into()));
    }

    let mut p = init;
    let mut est = Estimate::new(p, Method::Gdm);
    for iter in 0..cfg.max_iters {
        let (gx, gy) = gradient(anchors, &sample.distances, p);
        let next = Point2D::new(p.x - cfg.step * gx, p.y - cfg.step * gy);
        if !next.is_finite() {
            est.position = p;
            est.status = SolveStatus::Diverged;
            est.iterations = iter;
            return Ok(est);
        }
        let step = next.distance_to(p);
        p = next;
        if step < cfg.termination {
            est.position = p;
            est.status = SolveStatus::Converged;
            est.iterations = iter + 1;
            return Ok(est);
        }
    }
    est.position = p;
    est.status = SolveStatus::MaxIterations;
    est.iterations = cfg.max_iters;
    Ok(est)
}
