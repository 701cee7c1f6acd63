//! Linearized least-squares localization.
//!
//! Differencing the squared circle equation of anchor k against anchor 1
//! removes the quadratic term in the unknown position and leaves the linear
//! system `A p = M` with rows `2 (p_k - p_1)` and right-hand side
//! `dhat_1^2 - dhat_k^2 + r_k^2 - r_1^2` (`r` = anchor distance from the
//! origin). The 2x2 normal equations `A^T A p = A^T M` solve it directly.

use super::{check_sample, Estimate, LsmConfig, Method};
use crate::error::Error;
use crate::geometry::{AnchorSet, Point2D};
use crate::noise::RangeSample;
use crate::Result;
use alloc::format;

/// Solves the linearized system. Needs at least three anchors not all on
/// one line; the result doubles as the initializer for gradient descent and
/// the reference point for the two-phase method.
pub fn lsm_solve(anchors: &AnchorSet, sample: &RangeSample, cfg: &LsmConfig) -> Result<Estimate> {
    if anchors.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "least squares needs at least 3 anchors, got {}",
            anchors.len()
        )));
    }
    if cfg.cond_tolerance.is_nan() || cfg.cond_tolerance <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "conditioning tolerance must be positive, got {}",
            cfg.cond_tolerance
        )));
    }
    check_sample(anchors, sample)?;

    let p1 = anchors.position(0);
    let r1 = p1.x * p1.x + p1.y * p1.y;
    let d1 = sample.distances[0];

    // Accumulate A^T A and A^T M without materializing A.
    let (mut g11, mut g12, mut g22) = (0.0f64, 0.0f64, 0.0f64);
    let (mut b1, mut b2) = (0.0f64, 0.0f64);
    for (k, a) in anchors.anchors().iter().enumerate().skip(1) {
        let ax = 2.0 * (a.position.x - p1.x);
        let ay = 2.0 * (a.position.y - p1.y);
        let rk = a.position.x * a.position.x + a.position.y * a.position.y;
        let dk = sample.distances[k];
        let m = d1 * d1 - dk * dk + rk - r1;
        g11 += ax * ax;
        g12 += ax * ay;
        g22 += ay * ay;
        b1 += ax * m;
        b2 += ay * m;
    }

    let det = g11 * g22 - g12 * g12;
    if det.is_nan() || det <= cfg.cond_tolerance * g11 * g22 {
        return Err(Error::DegenerateGeometry(
            "normal equations are rank deficient (collinear anchors)".into(),
        ));
    }
    let x = (g22 * b1 - g12 * b2) / det;
    let y = (g11 * b2 - g12 * b1) / det;
    Ok(Estimate::new(Point2D::new(x, y), Method::Lsm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::RangeSample;
    use approx::assert_relative_eq;

    fn pt(x: f64, y: f64) -> Point2D {
        Point2D::new(x, y)
    }

    fn ap1() -> AnchorSet {
        AnchorSet::from_positions(&[pt(0.0, 100.0), pt(0.0, 0.0), pt(100.0, 0.0)]).unwrap()
    }

    #[test]
    fn exact_distances_recover_the_point() {
        let s = ap1();
        let truth = pt(50.0, 50.0);
        let sample = RangeSample::exact(&s, truth, 0);
        let est = lsm_solve(&s, &sample, &LsmConfig::default()).unwrap();
        assert_relative_eq!(est.position.x, truth.x, epsilon = 1e-9);
        assert_relative_eq!(est.position.y, truth.y, epsilon = 1e-9);
    }

    #[test]
    fn collinear_anchors_are_rejected() {
        let s =
            AnchorSet::from_positions(&[pt(0.0, 0.0), pt(50.0, 0.0), pt(100.0, 0.0)]).unwrap();
        let sample = RangeSample::exact(&s, pt(10.0, 10.0), 0);
        assert!(matches!(
            lsm_solve(&s, &sample, &LsmConfig::default()),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn two_anchors_are_rejected() {
        let s = AnchorSet::from_positions(&[pt(0.0, 0.0), pt(100.0, 0.0)]).unwrap();
        let sample = RangeSample::exact(&s, pt(10.0, 10.0), 0);
        assert!(lsm_solve(&s, &sample, &LsmConfig::default()).is_err());
    }

    #[test]
    fn sample_length_mismatch_is_rejected() {
        let s = ap1();
        let sample = RangeSample::new(0, alloc::vec![1.0, 2.0], None);
        assert!(lsm_solve(&s, &sample, &LsmConfig::default()).is_err());
    }
}
