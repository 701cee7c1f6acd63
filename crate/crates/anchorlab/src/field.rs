//! Field-test support: the GPS-to-local planar transform and range-log
//! replay through the localizers.

use crate::experiments::{timed_solve, MethodSet};
use crate::{HarnessError, Result};
use anchorlab_core::geometry::{AnchorSet, Point2D};
use anchorlab_core::localizers::{
    gdm_solve, lsm_solve, tplm_solve, GdmConfig, LsmConfig, SolveStatus,
};
use anchorlab_core::noise::RangeSample;

/// Default gap threshold between log samples, in seconds. The ranging setup
/// this format comes from samples at roughly 2 Hz, so a 3 s hole means at
/// least half a dozen missed epochs, i.e. an occlusion rather than jitter.
pub const DEFAULT_GAP_THRESHOLD: f64 = 3.0;

/// Planar calibration of GPS coordinates: scale longitude/latitude offsets
/// about an origin, then rotate by `rotation` (radians, clockwise) into the
/// local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoTransform {
    pub origin_lon: f64,
    pub origin_lat: f64,
    /// Meters per degree of longitude.
    pub scale_lon: f64,
    /// Meters per degree of latitude.
    pub scale_lat: f64,
    /// Rotation angle in radians.
    pub rotation: f64,
}

impl GeoTransform {
    pub fn new(
        origin_lon: f64,
        origin_lat: f64,
        scale_lon: f64,
        scale_lat: f64,
        rotation: f64,
    ) -> Result<Self> {
        if !(scale_lon > 0.0 && scale_lat > 0.0) || !rotation.is_finite() {
            return Err(HarnessError::invalid(format!(
                "geo transform needs positive scales and a finite rotation, \
                 got scales ({scale_lon}, {scale_lat}), rotation {rotation}"
            )));
        }
        Ok(Self { origin_lon, origin_lat, scale_lon, scale_lat, rotation })
    }
}

/// Maps a GPS coordinate to local meters.
///
/// The rotation is applied clockwise (`x' = cos a * x + sin a * y`,
/// `y' = -sin a * x + cos a * y`); this is the orientation that reproduces
/// the calibration anchor positions of the field setup to a few millimeters,
/// while the counter-clockwise convention misses by tens of meters.
pub fn geo_to_local(t: &GeoTransform, lon: f64, lat: f64) -> Point2D {
    let dx = (lon - t.origin_lon) * t.scale_lon;
    let dy = (lat - t.origin_lat) * t.scale_lat;
    let (sin_a, cos_a) = t.rotation.sin_cos();
    Point2D::new(cos_a * dx + sin_a * dy, -sin_a * dx + cos_a * dy)
}

/// One log epoch: a timestamp in seconds, measured distances in anchor
/// order, and optionally the true position.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRecord {
    pub time: f64,
    pub distances: Vec<f64>,
    pub truth: Option<Point2D>,
    /// Set when the gap to the previous record exceeds the log's threshold.
    pub gap_before: bool,
}

/// An ordered range-measurement log with gap markers.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldLog {
    records: Vec<LogRecord>,
    anchor_count: usize,
    gap_threshold: f64,
    skipped_rows: usize,
}

impl FieldLog {
    /// Builds a log from `(time, distances, truth)` rows. Rows must share
    /// one anchor count; rows with decreasing timestamps are dropped and
    /// counted as skipped. Gap markers are set against `gap_threshold`.
    pub fn from_rows(
        rows: Vec<(f64, Vec<f64>, Option<Point2D>)>,
        gap_threshold: f64,
        already_skipped: usize,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(HarnessError::invalid("log has no usable rows"));
        }
        let anchor_count = rows[0].1.len();
        if anchor_count < 2 {
            return Err(HarnessError::invalid("log rows need at least 2 distances"));
        }
        let mut records: Vec<LogRecord> = Vec::with_capacity(rows.len());
        let mut skipped = already_skipped;
        let mut last_time = f64::NEG_INFINITY;
        for (time, distances, truth) in rows {
            if distances.len() != anchor_count
                || !time.is_finite()
                || time < last_time
                || distances.iter().any(|d| !d.is_finite() || *d < 0.0)
            {
                skipped += 1;
                continue;
            }
            let gap_before = last_time.is_finite() && time - last_time > gap_threshold;
            records.push(LogRecord { time, distances, truth, gap_before });
            last_time = time;
        }
        if records.is_empty() {
            return Err(HarnessError::invalid("log has no usable rows"));
        }
        Ok(Self { records, anchor_count, gap_threshold, skipped_rows: skipped })
    }

    pub fn records(&self) -> &[LogRecord] {
        &self.records
    }

    pub fn anchor_count(&self) -> usize {
        self.anchor_count
    }

    pub fn gap_threshold(&self) -> f64 {
        self.gap_threshold
    }

    /// Rows dropped during parsing or ordering checks.
    pub fn skipped_rows(&self) -> usize {
        self.skipped_rows
    }

    /// Indices of records that start after a sampling gap.
    pub fn gaps(&self) -> Vec<usize> {
        self.records
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.gap_before.then_some(i))
            .collect()
    }
}

/// Restored positions for one log epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayPoint {
    pub time: f64,
    pub gap_before: bool,
    pub truth: Option<Point2D>,
    pub lsm: Option<Point2D>,
    pub gdm: Option<Point2D>,
    pub tplm: Option<Point2D>,
}

/// Replay outcome: per-epoch restored positions plus failure counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutcome {
    pub points: Vec<ReplayPoint>,
    pub lsm_failures: u64,
    pub gdm_failures: u64,
    pub tplm_failures: u64,
    /// Total wall time per method, seconds.
    pub lsm_seconds: f64,
    pub gdm_seconds: f64,
    pub tplm_seconds: f64,
}

/// Runs the requested localizers over every log epoch, with no noise
/// injection (the log already carries whatever noise the field produced).
/// Epochs after a gap are processed like any other; nothing is interpolated.
pub fn replay(
    log: &FieldLog,
    anchors: &AnchorSet,
    methods: MethodSet,
    gdm: &GdmConfig,
    lsm: &LsmConfig,
) -> Result<ReplayOutcome> {
    if log.anchor_count() != anchors.len() {
        return Err(HarnessError::invalid(format!(
            "log carries {} distances per epoch but the anchor set has {}",
            log.anchor_count(),
            anchors.len()
        )));
    }
    let mut out = ReplayOutcome {
        points: Vec::with_capacity(log.records().len()),
        lsm_failures: 0,
        gdm_failures: 0,
        tplm_failures: 0,
        lsm_seconds: 0.0,
        gdm_seconds: 0.0,
        tplm_seconds: 0.0,
    };
    for (idx, rec) in log.records().iter().enumerate() {
        let sample = RangeSample::new(idx as u64, rec.distances.clone(), rec.truth);
        let reference = match timed_solve(|| lsm_solve(anchors, &sample, lsm)) {
            Ok(est) => {
                out.lsm_seconds += est.elapsed.unwrap_or_default().as_secs_f64();
                Some(est)
            }
            Err(_) => {
                out.lsm_failures += 1;
                None
            }
        };
        let mut point = ReplayPoint {
            time: rec.time,
            gap_before: rec.gap_before,
            truth: rec.truth,
            lsm: None,
            gdm: None,
            tplm: None,
        };
        if let Some(reference) = reference {
            if methods.lsm {
                point.lsm = Some(reference.position);
            }
            if methods.gdm {
                match timed_solve(|| gdm_solve(anchors, &sample, reference.position, gdm)) {
                    Ok(est) if est.status != SolveStatus::Diverged => {
                        out.gdm_seconds += est.elapsed.unwrap_or_default().as_secs_f64();
                        point.gdm = Some(est.position);
                    }
                    _ => out.gdm_failures += 1,
                }
            }
            if methods.tplm {
                match timed_solve(|| tplm_solve(anchors, &sample, reference.position)) {
                    Ok(est) => {
                        out.tplm_seconds += est.elapsed.unwrap_or_default().as_secs_f64();
                        point.tplm = Some(est.position);
                    }
                    Err(_) => out.tplm_failures += 1,
                }
            }
        } else {
            out.gdm_failures += methods.gdm as u64;
            out.tplm_failures += methods.tplm as u64;
        }
        out.points.push(point);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use anchorlab_core::geometry::Anchor;
    use approx::assert_relative_eq;

    /// Calibration parameters of the field setup.
    fn field_transform() -> GeoTransform {
        GeoTransform::new(-74.476069, 40.537808, 84719.0, 111045.0, 0.381583).unwrap()
    }

    #[test]
    fn origin_maps_to_origin() {
        let t = field_transform();
        let p = geo_to_local(&t, t.origin_lon, t.origin_lat);
        assert_eq!(p, Point2D::new(0.0, 0.0));
    }

    #[test]
    fn identity_rotation_and_unit_scales_are_pure_offsets() {
        let t = GeoTransform::new(10.0, 20.0, 1.0, 1.0, 0.0).unwrap();
        let p = geo_to_local(&t, 10.5, 19.25);
        assert_relative_eq!(p.x, 0.5, epsilon = 1e-12);
        assert_relative_eq!(p.y, -0.75, epsilon = 1e-12);
    }

    #[test]
    fn calibration_rows_map_within_a_decimeter() {
        let t = field_transform();
        let rows = [
            (-74.475585, 40.538468, 65.345179, 52.75145),
            (-74.475287, 40.53856, 92.580022, 52.83239),
            (-74.475186, 40.538294, 89.52274, 22.232383),
        ];
        for (lon, lat, x, y) in rows {
            let p = geo_to_local(&t, lon, lat);
            let resid = p.distance_to(Point2D::new(x, y));
            assert!(resid < 0.1, "residual {resid} for ({lon}, {lat})");
        }
    }

    #[test]
    fn transform_rejects_bad_scales() {
        assert!(GeoTransform::new(0.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(GeoTransform::new(0.0, 0.0, 1.0, -2.0, 0.0).is_err());
    }

    fn field_anchors() -> AnchorSet {
        let t = field_transform();
        AnchorSet::new(vec![
            Anchor::new(4, geo_to_local(&t, -74.475585, 40.538468)),
            Anchor::new(5, geo_to_local(&t, -74.475287, 40.53856)),
            Anchor::new(6, geo_to_local(&t, -74.475186, 40.538294)),
        ])
        .unwrap()
    }

    #[test]
    fn zero_noise_replay_recovers_the_path() {
        let anchors = field_anchors();
        let path: Vec<Point2D> = (0..50)
            .map(|i| Point2D::new(40.0 + 0.8 * i as f64, 30.0 + 0.3 * i as f64))
            .collect();
        let rows: Vec<(f64, Vec<f64>, Option<Point2D>)> = path
            .iter()
            .enumerate()
            .map(|(i, p)| (i as f64 * 0.5, anchors.true_distances(*p), Some(*p)))
            .collect();
        let log = FieldLog::from_rows(rows, DEFAULT_GAP_THRESHOLD, 0).unwrap();
        let out = replay(
            &log,
            &anchors,
            MethodSet::ALL,
            &GdmConfig::default(),
            &LsmConfig::default(),
        )
        .unwrap();
        assert_eq!(out.points.len(), path.len());
        for (pt, truth) in out.points.iter().zip(&path) {
            assert!(pt.lsm.unwrap().distance_to(*truth) < 1e-6);
            assert!(pt.tplm.unwrap().distance_to(*truth) < 1e-6);
            assert!(pt.gdm.unwrap().distance_to(*truth) < 2e-3);
        }
        assert_eq!(out.lsm_failures + out.gdm_failures + out.tplm_failures, 0);
    }

    #[test]
    fn gap_markers_follow_the_threshold() {
        let anchors = field_anchors();
        let p = Point2D::new(50.0, 40.0);
        let d = anchors.true_distances(p);
        let rows = vec![
            (0.0, d.clone(), None),
            (0.5, d.clone(), None),
            (10.5, d.clone(), None), // 10 s hole
            (11.0, d.clone(), None),
        ];
        let log = FieldLog::from_rows(rows, DEFAULT_GAP_THRESHOLD, 0).unwrap();
        assert_eq!(log.gaps(), vec![2]);
        assert_eq!(log.records().len(), 4);
        let out = replay(
            &log,
            &anchors,
            MethodSet::ALL,
            &GdmConfig::default(),
            &LsmConfig::default(),
        )
        .unwrap();
        assert_eq!(out.points.len(), 4);
        assert!(out.points[2].gap_before);
        assert!(out.points[2].lsm.is_some(), "gap epochs still get solved");
    }

    #[test]
    fn out_of_order_rows_are_skipped() {
        let anchors = field_anchors();
        let p = Point2D::new(50.0, 40.0);
        let d = anchors.true_distances(p);
        let rows = vec![
            (0.0, d.clone(), None),
            (1.0, d.clone(), None),
            (0.5, d.clone(), None), // goes backward
        ];
        let log = FieldLog::from_rows(rows, DEFAULT_GAP_THRESHOLD, 0).unwrap();
        assert_eq!(log.records().len(), 2);
        assert_eq!(log.skipped_rows(), 1);
    }

    #[test]
    fn geo_to_local_is_injective() {
        let t = field_transform();
        // the map is linear in (lon, lat) about the origin; distinct inputs
        // on a small grid must stay distinct
        let mut seen = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                let p = geo_to_local(
                    &t,
                    t.origin_lon + i as f64 * 1e-4,
                    t.origin_lat + j as f64 * 1e-4,
                );
                assert!(!seen.contains(&(p.x.to_bits(), p.y.to_bits())));
                seen.push((p.x.to_bits(), p.y.to_bits()));
            }
        }
    }

    /// Replaying a log built from the harness's own measurement stream must
    /// reproduce the harness's restored trajectory exactly.
    #[test]
    fn replay_matches_the_traversal_harness() {
        use crate::experiments::{run_traversal, ExperimentSpec};
        use anchorlab_core::geometry::Trajectory;
        use anchorlab_core::noise::NoiseModel;

        let anchors = field_anchors();
        let path: Vec<Point2D> = (0..120)
            .map(|i| Point2D::new(10.0 + 0.6 * i as f64, 20.0 + 0.4 * i as f64))
            .collect();
        let trajectory = Trajectory::new(path.clone()).unwrap();
        let noise = NoiseModel::gaussian(0.3, 31).unwrap();

        let mut spec = ExperimentSpec::new(anchors.clone(), trajectory, noise);
        spec.record_restored = true;
        let harness = run_traversal(&spec).unwrap();
        let restored = harness.restored.unwrap();

        // identical samples: repetition 0 reads substream 0 in point order
        let mut sampler = noise.substream(0);
        let rows: Vec<(f64, Vec<f64>, Option<Point2D>)> = path
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let s = sampler.measure(&anchors, *p, i as u64).unwrap();
                (i as f64, s.distances, Some(*p))
            })
            .collect();
        let log = FieldLog::from_rows(rows, DEFAULT_GAP_THRESHOLD, 0).unwrap();
        let replayed = replay(
            &log,
            &anchors,
            MethodSet::ALL,
            &GdmConfig::default(),
            &LsmConfig::default(),
        )
        .unwrap();

        for (a, b) in restored.iter().zip(&replayed.points) {
            assert_eq!(a.lsm, b.lsm);
            assert_eq!(a.gdm, b.gdm);
            assert_eq!(a.tplm, b.tplm);
        }
    }

    #[test]
    fn replay_rejects_anchor_count_mismatch() {
        let anchors = field_anchors();
        let rows = vec![(0.0, vec![10.0, 20.0], None)];
        let log = FieldLog::from_rows(rows, DEFAULT_GAP_THRESHOLD, 0).unwrap();
        assert!(replay(
            &log,
            &anchors,
            MethodSet::ALL,
            &GdmConfig::default(),
            &LsmConfig::default()
        )
        .is_err());
    }
}
