//! Acceptance suite: one test per exit criterion, each printing a PASS line
//! with the measured values (visible with `--nocapture`).
//!
//! Criteria 1-2 pin the deterministic placement scores; criterion 3 the
//! stochastic benchmark windows; criterion 4 the relative solver speed;
//! criterion 5 the random-placement study; criterion 6 the deterministic
//! property bundle; criterion 7 the field-replay substitute and the
//! GPS-transform calibration.

use anchorlab::experiments::{
    rgap_study, run_traversal, spearman, ExperimentSpec, MethodSet, PlacementArea, RgapSpec,
    TraversalOutcome,
};
use anchorlab::field::{geo_to_local, replay, FieldLog, GeoTransform, DEFAULT_GAP_THRESHOLD};
use anchorlab::formats;
use anchorlab_core::geometry::{hilbert_trajectory, Anchor, AnchorSet, Point2D, Region, Trajectory};
use anchorlab_core::localizers::{
    gdm_gradient, gdm_objective, gdm_solve, lsm_solve, tplm_solve, GdmConfig, LsmConfig, Method,
};
use anchorlab_core::noise::{unit_f64, NoiseModel};
use anchorlab_core::{
    distance, multi_gdop_at, osap_map, pair_gdop, pair_gdop_matrix, region_score,
    trajectory_score, MIN_GDOP,
};
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};
use std::sync::OnceLock;
use std::time::Instant;

/// Fresh seed for the stochastic benchmark runs (criteria 3-4).
const BENCH_SEED: u64 = 11;
/// Seed for the random-placement study (criterion 5).
const RGAP_SEED: u64 = 5;

fn pt(x: f64, y: f64) -> Point2D {
    Point2D::new(x, y)
}

fn region100() -> Region {
    Region::from_bounds(0.0, 0.0, 100.0, 100.0).unwrap()
}

fn ap1() -> AnchorSet {
    AnchorSet::from_positions(&[pt(0.0, 100.0), pt(0.0, 0.0), pt(100.0, 0.0)]).unwrap()
}

fn ap2() -> AnchorSet {
    AnchorSet::from_positions(&[pt(0.0, 100.0), pt(7.0, 50.0), pt(3.0, 40.0)]).unwrap()
}

fn ht() -> &'static Trajectory {
    static HT: OnceLock<Trajectory> = OnceLock::new();
    HT.get_or_init(|| hilbert_trajectory(6, &region100(), 8190).unwrap())
}

fn bench(anchors: AnchorSet, sigma: f64) -> TraversalOutcome {
    let noise = NoiseModel::gaussian(sigma, BENCH_SEED).unwrap();
    let mut spec = ExperimentSpec::new(anchors, ht().clone(), noise);
    spec.repetitions = 10;
    spec.methods = MethodSet::ALL;
    run_traversal(&spec).unwrap()
}

fn ap1_s03() -> &'static TraversalOutcome {
    static RUN: OnceLock<TraversalOutcome> = OnceLock::new();
    RUN.get_or_init(|| bench(ap1(), 0.3))
}

fn ap2_s03() -> &'static TraversalOutcome {
    static RUN: OnceLock<TraversalOutcome> = OnceLock::new();
    RUN.get_or_init(|| bench(ap2(), 0.3))
}

fn ap2_s10() -> &'static TraversalOutcome {
    static RUN: OnceLock<TraversalOutcome> = OnceLock::new();
    RUN.get_or_init(|| bench(ap2(), 1.0))
}

fn mean_of(run: &TraversalOutcome, m: Method) -> f64 {
    run.stats_for(m).unwrap().mean
}

#[test]
fn criterion_1_region_scores() {
    let t0 = Instant::now();
    let s1 = region_score(&ap1(), &region100()).unwrap().value;
    let s2 = region_score(&ap2(), &region100()).unwrap().value;
    let elapsed = t0.elapsed().as_secs_f64();
    assert!(
        (s1 - 1.501).abs() <= 0.010,
        "AP1 region score {s1} not within 1.501 +/- 0.010"
    );
    assert!(
        (s2 - 2.615).abs() <= 0.030,
        "AP2 region score {s2} not within 2.615 +/- 0.030"
    );
    assert!(elapsed <= 30.0, "region scores took {elapsed:.1}s (limit 30s)");
    println!(
        "criterion 1 PASS: region scores AP1 {s1:.4} (1.501 +/- 0.010), \
         AP2 {s2:.4} (2.615 +/- 0.030), {elapsed:.3}s"
    );
}

#[test]
fn criterion_2_trajectory_scores() {
    let t1 = trajectory_score(&ap1(), ht()).unwrap().value;
    let t2 = trajectory_score(&ap2(), ht()).unwrap().value;
    let r1 = region_score(&ap1(), &region100()).unwrap().value;
    assert!(
        (t1 - 1.499).abs() <= 0.05,
        "AP1 trajectory score {t1} not within 1.499 +/- 0.05"
    );
    assert!(
        (t2 - 2.622).abs() <= 0.08,
        "AP2 trajectory score {t2} not within 2.622 +/- 0.08"
    );
    let rel = (r1 - t1).abs() / r1;
    assert!(rel < 0.01, "AP1 region/trajectory gap {rel:.4} >= 1%");
    println!(
        "criterion 2 PASS: trajectory scores AP1 {t1:.4}, AP2 {t2:.4}, \
         region-vs-trajectory gap {:.4}%",
        rel * 100.0
    );
}

#[test]
fn criterion_3_benchmark_windows() {
    let a1 = ap1_s03();
    let lsm1 = mean_of(a1, Method::Lsm);
    let gdm1 = mean_of(a1, Method::Gdm);
    let tplm1 = mean_of(a1, Method::Tplm);
    assert!((0.37..=0.47).contains(&lsm1), "AP1 s0.3 LSM ave {lsm1}");
    assert!((0.32..=0.42).contains(&gdm1), "AP1 s0.3 GDM ave {gdm1}");
    assert!((0.35..=0.45).contains(&tplm1), "AP1 s0.3 TPLM ave {tplm1}");

    let a2 = ap2_s10();
    let lsm2 = mean_of(a2, Method::Lsm);
    let gdm2 = mean_of(a2, Method::Gdm);
    let tplm2 = mean_of(a2, Method::Tplm);
    assert!((11.5..=15.5).contains(&lsm2), "AP2 s1.0 LSM ave {lsm2}");
    assert!((2.0..=4.0).contains(&gdm2), "AP2 s1.0 GDM ave {gdm2}");
    assert!((2.0..=3.5).contains(&tplm2), "AP2 s1.0 TPLM ave {tplm2}");

    // ordering at both AP2 noise levels
    let a2lo = ap2_s03();
    assert!(
        mean_of(a2lo, Method::Tplm) < mean_of(a2lo, Method::Lsm),
        "AP2 s0.3 ordering"
    );
    assert!(tplm2 < lsm2, "AP2 s1.0 ordering");

    println!(
        "criterion 3 PASS: AP1 s0.3 lsm/gdm/tplm {lsm1:.3}/{gdm1:.3}/{tplm1:.3}; \
         AP2 s1.0 {lsm2:.2}/{gdm2:.2}/{tplm2:.2}; TPLM < LSM on AP2 at both levels"
    );
}

/// The >=10x wall-time ratio is asserted on the clustered placement, where
/// the descent actually spends its iteration budget. On the right-angle
/// placement at low noise the descent
/// converges after ~15 steps and only the strict ordering is meaningful.
#[test]
fn criterion_4_relative_speed() {
    // fastest-traversal times: robust against scheduler noise, which can
    // only inflate a measurement
    let mut ratios = Vec::new();
    for (name, run) in [("AP2 s0.3", ap2_s03()), ("AP2 s1.0", ap2_s10())] {
        let gdm = run.stats_for(Method::Gdm).unwrap().min_seconds_per_traversal;
        let tplm = run.stats_for(Method::Tplm).unwrap().min_seconds_per_traversal;
        assert!(
            tplm < gdm / 10.0,
            "{name}: TPLM {tplm:.5}s vs GDM {gdm:.5}s per traversal (need >=10x)"
        );
        ratios.push(gdm / tplm);
    }
    let a1 = ap1_s03();
    let gdm1 = a1.stats_for(Method::Gdm).unwrap().min_seconds_per_traversal;
    let tplm1 = a1.stats_for(Method::Tplm).unwrap().min_seconds_per_traversal;
    assert!(tplm1 < gdm1, "AP1 s0.3: TPLM not faster than GDM");
    println!(
        "criterion 4 PASS: GDM/TPLM per-traversal ratios {:.1}x and {:.1}x on AP2, \
         ordering holds on AP1 ({:.1}x)",
        ratios[0],
        ratios[1],
        gdm1 / tplm1
    );
}

#[test]
fn criterion_5_random_placement_study() {
    let table_full = [2.05, 1.69, 1.53, 1.48];
    let mut full_means = Vec::new();
    let mut half_means = Vec::new();
    let mut worst_rho: f64 = 1.0;
    for (mi, m) in (3..=6).enumerate() {
        let mut spec = RgapSpec {
            anchor_count: m,
            area: PlacementArea::Full,
            placements: 100,
            noise_kind: anchorlab_core::NoiseKind::Gaussian,
            noise_level: 0.3,
            seed: RGAP_SEED,
            traversal_region: region100(),
            trajectory: ht().clone(),
            methods: MethodSet::ALL,
            gdm: GdmConfig::default(),
        };
        let full = rgap_study(&spec).unwrap();
        spec.area = PlacementArea::UpperHalf;
        let half = rgap_study(&spec).unwrap();

        let fm = full.mean_score();
        let hm = half.mean_score();
        assert!(
            (fm - table_full[mi]).abs() <= 0.15,
            "m={m}: full-area mean score {fm:.3} not within {} +/- 0.15",
            table_full[mi]
        );
        assert!(hm > fm, "m={m}: half-area mean {hm:.3} <= full-area mean {fm:.3}");
        for method in [Method::Lsm, Method::Gdm, Method::Tplm] {
            let rho = spearman(&full.scores(), &full.errors(method));
            assert!(
                rho > 0.0,
                "m={m}: spearman(score, {} error) = {rho:.3} not positive",
                method.name()
            );
            worst_rho = worst_rho.min(rho);
        }
        full_means.push(fm);
        half_means.push(hm);
    }
    for w in full_means.windows(2) {
        assert!(w[1] < w[0], "full-area mean scores not strictly decreasing: {full_means:?}");
    }
    for w in half_means.windows(2) {
        assert!(w[1] < w[0], "half-area mean scores not strictly decreasing: {half_means:?}");
    }
    println!(
        "criterion 5 PASS: full means {:?} (table {:?} +/- 0.15), half means {:?}, \
         min spearman {:.3}",
        full_means
            .iter()
            .map(|v| (v * 1000.0).round() / 1000.0)
            .collect::<Vec<_>>(),
        table_full,
        half_means
            .iter()
            .map(|v| (v * 1000.0).round() / 1000.0)
            .collect::<Vec<_>>(),
        worst_rho
    );
}

struct Gen(ChaCha12Rng);

impl Gen {
    fn new(seed: u64) -> Self {
        Gen(ChaCha12Rng::seed_from_u64(seed))
    }

    fn unit(&mut self) -> f64 {
        unit_f64(self.0.next_u64())
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    fn point(&mut self, lo: f64, hi: f64) -> Point2D {
        pt(self.range(lo, hi), self.range(lo, hi))
    }

    /// A clearly non-degenerate (point, anchor, anchor) triple.
    fn pair_config(&mut self) -> (Point2D, Point2D, Point2D) {
        loop {
            let p = self.point(-100.0, 200.0);
            let a = self.point(-100.0, 200.0);
            let b = self.point(-100.0, 200.0);
            let (da, db) = (distance(p, a), distance(p, b));
            if da < 1.0 || db < 1.0 || distance(a, b) < 1.0 {
                continue;
            }
            let u = ((a.x - p.x) / da, (a.y - p.y) / da);
            let v = ((b.x - p.x) / db, (b.y - p.y) / db);
            if (u.0 * v.1 - u.1 * v.0).abs() > 1e-3 {
                return (p, a, b);
            }
        }
    }

    /// A well-conditioned random placement and a point away from anchors.
    fn placement(&mut self, m: usize) -> (AnchorSet, Point2D) {
        loop {
            let positions: Vec<Point2D> = (0..m).map(|_| self.point(0.0, 100.0)).collect();
            let Ok(set) = AnchorSet::from_positions(&positions) else { continue };
            if set.is_collinear(1e-2) {
                continue;
            }
            let p = self.point(0.0, 100.0);
            if positions.iter().any(|a| distance(*a, p) < 1.0) {
                continue;
            }
            return (set, p);
        }
    }
}

#[test]
fn criterion_6_property_bundle() {
    // distance-driven closed form vs matrix route, floor, similarity invariance
    let mut gen = Gen::new(0xACCE97);
    for _ in 0..10_000 {
        let (p, a, b) = gen.pair_config();
        let (da, db) = (distance(p, a), distance(p, b));
        let closed = pair_gdop(a, b, da, db).unwrap();
        let matrix = pair_gdop_matrix(p, a, b).unwrap();
        assert!(closed >= MIN_GDOP * (1.0 - 1e-12), "floor violated: {closed}");
        assert!(
            ((closed - matrix) / matrix).abs() <= 1e-9,
            "routes disagree: {closed} vs {matrix}"
        );

        let (tx, ty) = (gen.range(-300.0, 300.0), gen.range(-300.0, 300.0));
        let angle = gen.range(0.0, core::f64::consts::TAU);
        let scale = gen.range(0.1, 10.0);
        let (s, c) = angle.sin_cos();
        let map = |q: Point2D| pt(scale * (c * q.x - s * q.y) + tx, scale * (s * q.x + c * q.y) + ty);
        let (pm, am, bm) = (map(p), map(a), map(b));
        let mapped = pair_gdop(am, bm, distance(pm, am), distance(pm, bm)).unwrap();
        assert!(
            ((closed - mapped) / closed).abs() <= 1e-9,
            "similarity invariance broke: {closed} vs {mapped}"
        );
    }

    // zero-noise consistency of the three localizers
    let mut gen = Gen::new(0xC0715);
    for k in 0..300 {
        let (set, truth) = gen.placement(3 + (k % 3));
        let sample = anchorlab_core::RangeSample::exact(&set, truth, 0);
        let lsm = lsm_solve(&set, &sample, &LsmConfig::default()).unwrap();
        assert!(lsm.error_to(truth) <= 1e-9, "LSM error {}", lsm.error_to(truth));
        let cfg = GdmConfig::default();
        let gdm = gdm_solve(&set, &sample, lsm.position, &cfg).unwrap();
        assert!(gdm.error_to(truth) <= cfg.termination, "GDM error {}", gdm.error_to(truth));
        let tplm = tplm_solve(&set, &sample, lsm.position).unwrap();
        assert!(tplm.error_to(truth) <= 1e-9, "TPLM error {}", tplm.error_to(truth));
    }

    // TPLM candidates satisfy both circle equations and mirror across the axis
    let mut gen = Gen::new(0x791);
    let mut checked = 0;
    while checked < 1000 {
        let (set, truth) = gen.placement(3);
        let model = NoiseModel::gaussian(0.5, gen.0.next_u64()).unwrap();
        let sample = model.sampler().measure(&set, truth, 0).unwrap();
        let est = tplm_solve(&set, &sample, truth).unwrap();
        if est.radicand_clamped {
            continue;
        }
        checked += 1;
        let (ia, ib) = est.chosen_pair.unwrap();
        let find = |id: u32| set.anchors().iter().find(|a| a.id == id).unwrap().position;
        let (pa, pb) = (find(ia), find(ib));
        let (da, db) = (sample.distances[ia as usize], sample.distances[ib as usize]);
        assert!((distance(est.position, pa) - da).abs() <= 1e-9 * da.max(1.0));
        assert!((distance(est.position, pb) - db).abs() <= 1e-9 * db.max(1.0));

        let axis = distance(pa, pb);
        let (ux, uy) = ((pb.x - pa.x) / axis, (pb.y - pa.y) / axis);
        let reflect = |q: Point2D| {
            let (wx, wy) = (q.x - pa.x, q.y - pa.y);
            let along = wx * ux + wy * uy;
            pt(
                q.x - 2.0 * (wx - along * ux),
                q.y - 2.0 * (wy - along * uy),
            )
        };
        let mirrored = tplm_solve(&set, &sample, reflect(truth)).unwrap();
        assert!(
            distance(mirrored.position, reflect(est.position)) <= 1e-9 * axis.max(1.0),
            "candidates are not mirror images"
        );
    }

    // analytic gradient vs central differences
    let mut gen = Gen::new(0x6D);
    for _ in 0..1000 {
        let (set, p) = gen.placement(4);
        let model = NoiseModel::gaussian(0.5, gen.0.next_u64()).unwrap();
        let sample = model.sampler().measure(&set, p, 0).unwrap();
        let (gx, gy) = gdm_gradient(&set, &sample.distances, p);
        let h = 1e-6;
        let fd_x = (gdm_objective(&set, &sample.distances, pt(p.x + h, p.y))
            - gdm_objective(&set, &sample.distances, pt(p.x - h, p.y)))
            / (2.0 * h);
        let fd_y = (gdm_objective(&set, &sample.distances, pt(p.x, p.y + h))
            - gdm_objective(&set, &sample.distances, pt(p.x, p.y - h)))
            / (2.0 * h);
        let scale = gx.abs().max(gy.abs()).max(1.0);
        assert!((gx - fd_x).abs() <= 1e-5 * scale, "gx {gx} vs fd {fd_x}");
        assert!((gy - fd_y).abs() <= 1e-5 * scale, "gy {gy} vs fd {fd_y}");
    }

    // OSAP map reflection symmetry across the (0,0)-(100,100) diagonal: the
    // reflection exchanges the two corner anchors (ids 0 and 2)
    let set = ap1();
    let map = osap_map(&set, &region100(), 101, 101, None).unwrap();
    let swap = |id: u32| match id {
        0 => 2,
        2 => 0,
        other => other,
    };
    for iy in 0..101 {
        for ix in 0..101 {
            let here = map.get(ix, iy);
            let there = map.get(iy, ix);
            match (here, there) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    let mut mapped = (swap(b.0), swap(b.1));
                    if mapped.0 > mapped.1 {
                        mapped = (mapped.1, mapped.0);
                    }
                    if mapped != a {
                        // exact tie: both pairs must carry the same gdop here
                        let p = pt(
                            region100().node_x(101, ix),
                            region100().node_y(101, iy),
                        );
                        let g = |pair: (u32, u32)| {
                            let find = |id: u32| {
                                set.anchors().iter().find(|x| x.id == id).unwrap().position
                            };
                            let (pa, pb) = (find(pair.0), find(pair.1));
                            pair_gdop(pa, pb, distance(p, pa), distance(p, pb)).unwrap()
                        };
                        assert_eq!(
                            g(a).to_bits(),
                            g(mapped).to_bits(),
                            "asymmetry at ({ix},{iy}): {a:?} vs {mapped:?}"
                        );
                    }
                    // the winning gdop value itself is symmetric bit-for-bit
                    let va = multi_gdop_at(&set, pt(ix as f64, iy as f64)).unwrap().value;
                    let vb = multi_gdop_at(&set, pt(iy as f64, ix as f64)).unwrap().value;
                    assert_eq!(va.to_bits(), vb.to_bits());
                }
                _ => panic!("reflection changed evaluability at ({ix},{iy})"),
            }
        }
    }

    println!(
        "criterion 6 PASS: 1e4 route agreements and invariances, 300 zero-noise \
         consistencies, 1e3 circle/mirror and gradient checks, OSAP reflection symmetry"
    );
}

fn field_transform() -> GeoTransform {
    GeoTransform::new(-74.476069, 40.537808, 84719.0, 111045.0, 0.381583).unwrap()
}

const FIELD_ROWS: [(f64, f64, f64, f64); 3] = [
    (-74.475585, 40.538468, 65.345179, 52.75145),
    (-74.475287, 40.53856, 92.580022, 52.83239),
    (-74.475186, 40.538294, 89.52274, 22.232383),
];

fn field_anchors() -> AnchorSet {
    let t = field_transform();
    AnchorSet::new(
        FIELD_ROWS
            .iter()
            .enumerate()
            .map(|(k, (lon, lat, _, _))| Anchor::new(4 + k as u32, geo_to_local(&t, *lon, *lat)))
            .collect(),
    )
    .unwrap()
}

#[test]
fn criterion_7_field_substitute() {
    // transform calibration against the surveyed anchor rows
    let t = field_transform();
    let mut worst = 0.0f64;
    for (lon, lat, x, y) in FIELD_ROWS {
        let p = geo_to_local(&t, lon, lat);
        worst = worst.max(p.distance_to(pt(x, y)));
    }
    assert!(worst < 0.1, "calibration residual {worst:.3} m >= 0.1 m");

    // synthetic walk through the testbed area
    let anchors = field_anchors();
    let path: Vec<Point2D> = (0..2000)
        .map(|i| {
            let s = i as f64 / 1999.0;
            pt(
                5.0 + 90.0 * s,
                50.0 + 45.0 * (s * 12.0).sin() * (1.0 - s) + 40.0 * s * (s * 5.0).cos().abs() - 20.0,
            )
        })
        .collect();

    // zero noise: every method recovers the path through a CSV round trip
    let rows: Vec<(f64, Vec<f64>, Option<Point2D>)> = path
        .iter()
        .enumerate()
        .map(|(i, p)| (i as f64 * 0.5, anchors.true_distances(*p), Some(*p)))
        .collect();
    let log = FieldLog::from_rows(rows, DEFAULT_GAP_THRESHOLD, 0).unwrap();
    let mut buf = Vec::new();
    formats::write_log_csv(&mut buf, &log).unwrap();
    let log = formats::parse_log_csv(std::str::from_utf8(&buf).unwrap(), DEFAULT_GAP_THRESHOLD)
        .unwrap();
    let clean = replay(
        &log,
        &anchors,
        MethodSet::ALL,
        &GdmConfig::default(),
        &LsmConfig::default(),
    )
    .unwrap();
    for (p, truth) in clean.points.iter().zip(&path) {
        assert!(p.lsm.unwrap().distance_to(*truth) <= 1e-6);
        assert!(p.tplm.unwrap().distance_to(*truth) <= 1e-6);
        assert!(p.gdm.unwrap().distance_to(*truth) <= 2e-3);
    }

    // sigma = 0.3: the two-phase method beats least squares on this geometry
    let model = NoiseModel::gaussian(0.3, BENCH_SEED).unwrap();
    let mut sampler = model.sampler();
    let noisy_rows: Vec<(f64, Vec<f64>, Option<Point2D>)> = path
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let s = sampler.measure(&anchors, *p, i as u64).unwrap();
            (i as f64 * 0.5, s.distances, Some(*p))
        })
        .collect();
    let noisy_log = FieldLog::from_rows(noisy_rows, DEFAULT_GAP_THRESHOLD, 0).unwrap();
    let noisy = replay(
        &noisy_log,
        &anchors,
        MethodSet::ALL,
        &GdmConfig::default(),
        &LsmConfig::default(),
    )
    .unwrap();
    let mean_err = |pick: fn(&anchorlab::field::ReplayPoint) -> Option<Point2D>| {
        let errs: Vec<f64> = noisy
            .points
            .iter()
            .filter_map(|p| Some(pick(p)?.distance_to(p.truth?)))
            .collect();
        errs.iter().sum::<f64>() / errs.len() as f64
    };
    let lsm_err = mean_err(|p| p.lsm);
    let tplm_err = mean_err(|p| p.tplm);
    assert!(
        tplm_err < lsm_err,
        "TPLM {tplm_err:.3} not below LSM {lsm_err:.3} at sigma 0.3"
    );

    println!(
        "criterion 7 PASS: calibration residual {worst:.4} m, zero-noise replay exact, \
         sigma 0.3 replay TPLM {tplm_err:.3} < LSM {lsm_err:.3}"
    );
}
