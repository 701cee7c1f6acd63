//! Two-phase localization.
//!
//! Phase one scores every anchor pair by the pair GDOP computed from the
//! measured distances (the selection needs no position estimate, since the
//! closed form is a pure function of the distance triple) and keeps the
//! minimizer, lowest id pair on ties. Phase two intersects the two range
//! circles of the winning pair in a frame aligned with the inter-anchor
//! axis:
//!
//! ```text
//! u = (d^2 + dhat_i^2 - dhat_j^2) / (2 d)        d = |p_j - p_i|
//! v = sqrt(dhat_i^2 - u^2)
//! ```
//!
//! and maps `(u, +/-v)` back through the proper rotation whose cosine and
//! sine are the components of `(p_j - p_i) / d` (the full-quadrant angle of
//! the axis, robust for vertical pairs). Of the two mirror candidates the
//! one closer to the reference point wins; ties keep the positive-v
//! candidate. A negative radicand (disjoint circles under noise) clamps `v`
//! to zero, which lands on the least-residual point on the axis, and is
//! flagged on the estimate.

use super::{check_sample, Estimate, Method};
use crate::error::Error;
use crate::gdop::pair_gdop_from_distances;
use crate::geometry::{AnchorSet, Point2D};
use crate::noise::RangeSample;
use crate::Result;

/// Runs both phases. Needs `m >= 2` anchors (with exactly two, the selection
/// phase is trivial) and a finite reference point, conventionally the
/// least-squares estimate for the same sample.
pub fn tplm_solve(anchors: &AnchorSet, sample: &RangeSample, reference: Point2D) -> Result<Estimate> {
    check_sample(anchors, sample)?;
    if !reference.is_finite() {
        return Err(Error::InvalidInput("reference point must be finite".into()));
    }

    // Phase one: optimal anchor pair by measured-distance GDOP. Pairs with a
    // zero measured distance cannot be scored or intersected and are skipped.
    let d = &sample.distances;
    let mut best = f64::INFINITY;
    let mut best_pair: Option<(usize, usize)> = None;
    for (i, j) in anchors.pairs() {
        if d[i] <= 0.0 || d[j] <= 0.0 {
            continue;
        }
        let g = pair_gdop_from_distances(d[i], d[j], anchors.pair_distance(i, j))?;
        if best_pair.is_none() || g < best {
            best = g;
            best_pair = Some((i, j));
        }
    }
    let (i, j) = best_pair.ok_or_else(|| {
        Error::DegenerateGeometry("no usable anchor pair (zero measured distances)".into())
    })?;

    // Phase two: closed-form intersection of the two range circles.
    let p_i = anchors.position(i);
    let p_j = anchors.position(j);
    let axis = anchors.pair_distance(i, j);
    let (cos_t, sin_t) = ((p_j.x - p_i.x) / axis, (p_j.y - p_i.y) / axis);
    let u = (axis * axis + d[i] * d[i] - d[j] * d[j]) / (2.0 * axis);
    let radicand = d[i] * d[i] - u * u;
    let clamped = radicand < 0.0;
    let v = libm::sqrt(radicand.max(0.0));

    let candidate = |s: f64| {
        Point2D::new(
            p_i.x + cos_t * u - sin_t * s,
            p_i.y + sin_t * u + cos_t * s,
        )
    };
    let plus = candidate(v);
    let minus = candidate(-v);
    let position = if minus.distance_to(reference) < plus.distance_to(reference) {
        minus
    } else {
        plus
    };

    let mut est = Estimate::new(position, Method::Tplm);
    est.chosen_pair = Some((anchors.id(i), anchors.id(j)));
    est.radicand_clamped = clamped;
    Ok(est)
}
