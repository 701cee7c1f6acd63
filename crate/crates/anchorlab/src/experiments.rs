//! Traversal benchmarks, noise-level sweeps, and random-anchor-placement
//! studies.
//!
//! A traversal run visits every trajectory point, draws one noisy range
//! sample per point, and feeds the same sample to each requested estimator
//! (gradient descent is initialized from the least-squares estimate, the
//! two-phase method uses it as its reference). Each method runs as its own
//! pass over the pre-drawn samples so per-method wall time is measured in
//! one block instead of per call.
//!
//! Reproducibility: repetition `k` of a run consumes substream `k` of the
//! spec's noise model. The placement study derives an independent noise seed
//! per placement and draws placement coordinates from a dedicated stream
//! family, so no stream is ever shared between purposes.

use crate::{HarnessError, Result};
use anchorlab_core::geometry::{AnchorSet, Point2D, Region, Trajectory};
use anchorlab_core::localizers::{
    gdm_solve, lsm_solve, tplm_solve, Estimate, GdmConfig, LsmConfig, Method, SolveStatus,
};
use anchorlab_core::noise::{derive_seed, unit_f64, NoiseKind, NoiseModel, RangeSample};
use anchorlab_core::trajectory_score;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use std::time::Instant;

/// Which estimators a run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodSet {
    pub lsm: bool,
    pub gdm: bool,
    pub tplm: bool,
}

impl MethodSet {
    pub const ALL: MethodSet = MethodSet { lsm: true, gdm: true, tplm: true };

    /// Parses a comma list like `lsm,gdm,tplm`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut set = MethodSet { lsm: false, gdm: false, tplm: false };
        for part in s.split(',') {
            match part.trim().to_ascii_lowercase().as_str() {
                "lsm" => set.lsm = true,
                "gdm" => set.gdm = true,
                "tplm" => set.tplm = true,
                other => {
                    return Err(HarnessError::invalid(format!(
                        "unknown method '{other}' (expected lsm, gdm, tplm)"
                    )))
                }
            }
        }
        if set == (MethodSet { lsm: false, gdm: false, tplm: false }) {
            return Err(HarnessError::invalid("empty method set"));
        }
        Ok(set)
    }

    pub fn contains(&self, m: Method) -> bool {
        match m {
            Method::Lsm => self.lsm,
            Method::Gdm => self.gdm,
            Method::Tplm => self.tplm,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Method> + '_ {
        Method::ALL.into_iter().filter(|m| self.contains(*m))
    }
}

/// One traversal benchmark: anchors, path, noise, repetitions, methods.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub anchors: AnchorSet,
    pub trajectory: Trajectory,
    pub noise: NoiseModel,
    pub repetitions: u32,
    pub methods: MethodSet,
    pub gdm: GdmConfig,
    pub lsm: LsmConfig,
    /// Keep the estimate sequence of the first repetition for plotting.
    pub record_restored: bool,
}

impl ExperimentSpec {
    pub fn new(anchors: AnchorSet, trajectory: Trajectory, noise: NoiseModel) -> Self {
        Self {
            anchors,
            trajectory,
            noise,
            repetitions: 1,
            methods: MethodSet::ALL,
            gdm: GdmConfig::default(),
            lsm: LsmConfig::default(),
            record_restored: false,
        }
    }
}

/// Error statistics for one method over a whole run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodStats {
    pub method: Method,
    /// Mean Euclidean error over all non-failed points of all repetitions.
    pub mean: f64,
    /// Sample standard deviation of the same errors.
    pub std: f64,
    /// Mean wall time spent in this method's solves, per traversal.
    pub seconds_per_traversal: f64,
    /// Fastest single traversal. Scheduling noise only ever adds time, so
    /// this is the robust estimate for speed comparisons.
    pub min_seconds_per_traversal: f64,
    /// Points that entered the statistics.
    pub samples: u64,
    /// Hard failures (solver error or divergence), excluded from the stats.
    pub failures: u64,
}

#[derive(Debug, Clone, Default)]
struct Accumulator {
    sum: f64,
    sumsq: f64,
    n: u64,
    failures: u64,
    rep_seconds: Vec<f64>,
}

impl Accumulator {
    fn push(&mut self, err: f64) {
        self.sum += err;
        self.sumsq += err * err;
        self.n += 1;
    }

    fn stats(&self, method: Method) -> MethodStats {
        let mean = if self.n > 0 { self.sum / self.n as f64 } else { 0.0 };
        let std = if self.n > 1 {
            ((self.sumsq - self.sum * self.sum / self.n as f64) / (self.n - 1) as f64)
                .max(0.0)
                .sqrt()
        } else {
            0.0
        };
        let total: f64 = self.rep_seconds.iter().sum();
        MethodStats {
            method,
            mean,
            std,
            seconds_per_traversal: total / self.rep_seconds.len().max(1) as f64,
            min_seconds_per_traversal: self
                .rep_seconds
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min),
            samples: self.n,
            failures: self.failures,
        }
    }
}

/// Per-point restored positions of the first repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct RestoredPoint {
    pub index: usize,
    pub truth: Point2D,
    pub lsm: Option<Point2D>,
    pub gdm: Option<Point2D>,
    pub tplm: Option<Point2D>,
}

/// Everything a traversal run produces.
#[derive(Debug, Clone)]
pub struct TraversalOutcome {
    pub stats: Vec<MethodStats>,
    pub restored: Option<Vec<RestoredPoint>>,
    /// Trajectory points skipped because they coincide with an anchor.
    pub skipped_points: u64,
}

impl TraversalOutcome {
    pub fn stats_for(&self, m: Method) -> Option<&MethodStats> {
        self.stats.iter().find(|s| s.method == m)
    }
}

/// Runs the traversal benchmark described by `spec`.
pub fn run_traversal(spec: &ExperimentSpec) -> Result<TraversalOutcome> {
    if spec.repetitions == 0 {
        return Err(HarnessError::invalid("repetitions must be >= 1"));
    }
    if spec.anchors.len() < 3 {
        return Err(HarnessError::invalid(
            "traversal runs need at least 3 anchors (least squares is the common reference)",
        ));
    }
    spec.gdm.validate().map_err(HarnessError::Core)?;

    let mut acc_lsm = Accumulator::default();
    let mut acc_gdm = Accumulator::default();
    let mut acc_tplm = Accumulator::default();
    let mut skipped_points = 0u64;
    let mut restored: Option<Vec<RestoredPoint>> = None;

    for rep in 0..spec.repetitions {
        let mut sampler = spec.noise.substream(rep as u64);
        let mut samples: Vec<(usize, RangeSample)> =
            Vec::with_capacity(spec.trajectory.len());
        for (idx, &p) in spec.trajectory.points().iter().enumerate() {
            match sampler.measure(&spec.anchors, p, idx as u64) {
                Ok(s) => samples.push((idx, s)),
                Err(_) => skipped_points += 1,
            }
        }

        // Least squares always runs: it is the initializer and reference for
        // the other two. It only enters the statistics when requested.
        let t0 = Instant::now();
        let lsm_results: Vec<Result<Estimate>> = samples
            .iter()
            .map(|(_, s)| lsm_solve(&spec.anchors, s, &spec.lsm).map_err(HarnessError::Core))
            .collect();
        acc_lsm.rep_seconds.push(t0.elapsed().as_secs_f64());
        if spec.methods.lsm {
            for ((_, s), r) in samples.iter().zip(&lsm_results) {
                match r {
                    Ok(est) => acc_lsm.push(est.error_to(s.truth.unwrap())),
                    Err(_) => acc_lsm.failures += 1,
                }
            }
        }

        let gdm_results: Vec<Option<Estimate>> = if spec.methods.gdm {
            let t0 = Instant::now();
            let out: Vec<Option<Estimate>> = samples
                .iter()
                .zip(&lsm_results)
                .map(|((_, s), init)| match init {
                    Ok(est) => gdm_solve(&spec.anchors, s, est.position, &spec.gdm).ok(),
                    Err(_) => None,
                })
                .collect();
            acc_gdm.rep_seconds.push(t0.elapsed().as_secs_f64());
            for ((_, s), r) in samples.iter().zip(&out) {
                match r {
                    Some(est) if est.status != SolveStatus::Diverged => {
                        acc_gdm.push(est.error_to(s.truth.unwrap()))
                    }
                    _ => acc_gdm.failures += 1,
                }
            }
            out
        } else {
            Vec::new()
        };

        let tplm_results: Vec<Option<Estimate>> = if spec.methods.tplm {
            let t0 = Instant::now();
            let out: Vec<Option<Estimate>> = samples
                .iter()
                .zip(&lsm_results)
                .map(|((_, s), reference)| match reference {
                    Ok(est) => tplm_solve(&spec.anchors, s, est.position).ok(),
                    Err(_) => None,
                })
                .collect();
            acc_tplm.rep_seconds.push(t0.elapsed().as_secs_f64());
            for ((_, s), r) in samples.iter().zip(&out) {
                match r {
                    Some(est) => acc_tplm.push(est.error_to(s.truth.unwrap())),
                    None => acc_tplm.failures += 1,
                }
            }
            out
        } else {
            Vec::new()
        };

        if rep == 0 && spec.record_restored {
            let mut points = Vec::with_capacity(samples.len());
            for (k, (idx, s)) in samples.iter().enumerate() {
                points.push(RestoredPoint {
                    index: *idx,
                    truth: s.truth.unwrap(),
                    lsm: if spec.methods.lsm {
                        lsm_results[k].as_ref().ok().map(|e| e.position)
                    } else {
                        None
                    },
                    gdm: gdm_results.get(k).and_then(|r| {
                        r.as_ref()
                            .filter(|e| e.status != SolveStatus::Diverged)
                            .map(|e| e.position)
                    }),
                    tplm: tplm_results.get(k).and_then(|r| r.as_ref().map(|e| e.position)),
                });
            }
            restored = Some(points);
        }
    }

    let mut stats = Vec::new();
    if spec.methods.lsm {
        stats.push(acc_lsm.stats(Method::Lsm));
    }
    if spec.methods.gdm {
        stats.push(acc_gdm.stats(Method::Gdm));
    }
    if spec.methods.tplm {
        stats.push(acc_tplm.stats(Method::Tplm));
    }
    Ok(TraversalOutcome { stats, restored, skipped_points })
}

/// One cell of a noise sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub anchors: String,
    pub kind: NoiseKind,
    pub level: f64,
    pub method: Method,
    pub mean: f64,
    pub std: f64,
}

/// Runs the traversal benchmark over a grid of (anchor set, noise family,
/// noise level) cells. Every cell uses the same seed, so curves across
/// levels share their underlying randomness and compare smoothly.
#[allow(clippy::too_many_arguments)]
pub fn noise_sweep(
    anchor_sets: &[(String, AnchorSet)],
    trajectory: &Trajectory,
    levels: &[f64],
    kinds: &[NoiseKind],
    methods: MethodSet,
    repetitions: u32,
    seed: u64,
    gdm: GdmConfig,
) -> Result<Vec<SweepPoint>> {
    if levels.is_empty() {
        return Err(HarnessError::invalid("sweep needs at least one noise level"));
    }
    let mut out = Vec::new();
    for &kind in kinds {
        for &level in levels {
            for (name, anchors) in anchor_sets {
                let noise = NoiseModel::new(kind, level, seed).map_err(HarnessError::Core)?;
                let mut spec =
                    ExperimentSpec::new(anchors.clone(), trajectory.clone(), noise);
                spec.repetitions = repetitions;
                spec.methods = methods;
                spec.gdm = gdm;
                let run = run_traversal(&spec)?;
                for s in &run.stats {
                    out.push(SweepPoint {
                        anchors: name.clone(),
                        kind,
                        level,
                        method: s.method,
                        mean: s.mean,
                        std: s.std,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Where random placements are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementArea {
    /// The whole traversal region.
    Full,
    /// The upper half of the traversal region.
    UpperHalf,
}

impl PlacementArea {
    pub fn region(&self, traversal: &Region) -> Region {
        match self {
            PlacementArea::Full => *traversal,
            PlacementArea::UpperHalf => Region::new(
                Point2D::new(traversal.min().x, 0.5 * (traversal.min().y + traversal.max().y)),
                traversal.max(),
            )
            .expect("upper half of a valid region is valid"),
        }
    }
}

/// A random-anchor-placement study.
#[derive(Debug, Clone)]
pub struct RgapSpec {
    pub anchor_count: usize,
    pub area: PlacementArea,
    pub placements: usize,
    pub noise_kind: NoiseKind,
    pub noise_level: f64,
    pub seed: u64,
    pub traversal_region: Region,
    pub trajectory: Trajectory,
    pub methods: MethodSet,
    pub gdm: GdmConfig,
}

/// One placement: its anchors, its trajectory score, and its traversal
/// error statistics.
#[derive(Debug, Clone)]
pub struct RgapRow {
    pub placement: usize,
    pub anchors: AnchorSet,
    pub score: f64,
    pub stats: Vec<MethodStats>,
}

impl RgapRow {
    pub fn stats_for(&self, m: Method) -> Option<&MethodStats> {
        self.stats.iter().find(|s| s.method == m)
    }
}

/// All placements of a study plus the collinear-redraw count.
#[derive(Debug, Clone)]
pub struct RgapStudy {
    pub rows: Vec<RgapRow>,
    pub redraws: u64,
}

impl RgapStudy {
    pub fn scores(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.score).collect()
    }

    pub fn mean_score(&self) -> f64 {
        self.rows.iter().map(|r| r.score).sum::<f64>() / self.rows.len() as f64
    }

    pub fn errors(&self, m: Method) -> Vec<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.stats_for(m).map(|s| s.mean))
            .collect()
    }

    pub fn mean_error(&self, m: Method) -> Option<f64> {
        let errs = self.errors(m);
        if errs.is_empty() {
            None
        } else {
            Some(errs.iter().sum::<f64>() / errs.len() as f64)
        }
    }
}

// Stream family tag for placement coordinates; measurement noise seeds come
// from derive_seed(seed, placement_index) instead, so the two never collide.
const PLACEMENT_COORD_TAG: u64 = u64::MAX;

/// Runs the placement study: draws placements uniformly at random (redrawing
/// all-collinear ones), scores each against the trajectory, and benchmarks
/// all three estimators on it.
pub fn rgap_study(spec: &RgapSpec) -> Result<RgapStudy> {
    if spec.anchor_count < 3 {
        return Err(HarnessError::invalid("placement study needs m >= 3"));
    }
    if spec.placements == 0 {
        return Err(HarnessError::invalid("placement study needs at least 1 placement"));
    }
    let area = spec.area.region(&spec.traversal_region);
    let coord_seed = derive_seed(spec.seed, PLACEMENT_COORD_TAG);

    let results: Vec<Result<(RgapRow, u64)>> = (0..spec.placements)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha12Rng::seed_from_u64(coord_seed);
            rng.set_stream(j as u64);
            let mut redraws = 0u64;
            let anchors = loop {
                let positions: Vec<Point2D> = (0..spec.anchor_count)
                    .map(|_| {
                        Point2D::new(
                            area.min().x + area.width() * unit_f64(rng.next_u64()),
                            area.min().y + area.height() * unit_f64(rng.next_u64()),
                        )
                    })
                    .collect();
                match AnchorSet::from_positions(&positions) {
                    Ok(set) if !set.is_collinear(1e-9) => break set,
                    _ => redraws += 1,
                }
            };
            let score = trajectory_score(&anchors, &spec.trajectory)
                .map_err(HarnessError::Core)?
                .value;
            let noise = NoiseModel::new(
                spec.noise_kind,
                spec.noise_level,
                derive_seed(spec.seed, j as u64),
            )
            .map_err(HarnessError::Core)?;
            let mut run_spec =
                ExperimentSpec::new(anchors.clone(), spec.trajectory.clone(), noise);
            run_spec.methods = spec.methods;
            run_spec.gdm = spec.gdm;
            let outcome = run_traversal(&run_spec)?;
            Ok((
                RgapRow { placement: j, anchors, score, stats: outcome.stats },
                redraws,
            ))
        })
        .collect();

    let mut rows = Vec::with_capacity(spec.placements);
    let mut redraws = 0u64;
    for r in results {
        let (row, rd) = r?;
        redraws += rd;
        rows.push(row);
    }
    Ok(RgapStudy { rows, redraws })
}

/// Spearman rank correlation with average ranks on ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "spearman needs paired samples");
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    cov / (vx.sqrt() * vy.sqrt())
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("NaN in rank input"));
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Runs `solve` and stamps its wall time onto the estimate.
pub fn timed_solve(solve: impl FnOnce() -> anchorlab_core::Result<Estimate>) -> anchorlab_core::Result<Estimate> {
    let t0 = Instant::now();
    let mut est = solve()?;
    est.elapsed = Some(t0.elapsed());
    Ok(est)
}
