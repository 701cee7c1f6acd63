//! Geometric dilution of precision and placement-impact quantification.
//!
//! The anchor-pair GDOP at a point measures how strongly ranging noise from
//! that pair inflates position error. With the angle `gamma` subtended at the
//! point by the two anchor bearings it equals `sqrt(2) / |sin gamma|`: the
//! floor `sqrt(2)` at perpendicular bearings, unbounded as the geometry turns
//! collinear. Two algebraic routes are provided and cross-checked:
//!
//! * [`pair_gdop`] evaluates the closed form driven purely by the three
//!   distances (law of cosines), which also works on measured ranges;
//! * [`pair_gdop_matrix`] builds the direction-cosine matrix `h` and returns
//!   `sqrt(tr((h^T h)^-1))`.
//!
//! The multi-anchor GDOP is the minimum pair GDOP over all anchor pairs; the
//! minimizing pair is the optimally selected anchor pair (OSAP). Rasterizing
//! the multi-anchor GDOP over a region gives the least-vulnerability
//! tomography ([`lvt_grid`]); averaging it over a region or a trajectory
//! gives the placement scores ([`region_score`], [`trajectory_score`]) that
//! rank anchor placements without simulating any noise.
//!
//! Infinite GDOP is represented by the `f64::INFINITY` sentinel, which is
//! distinguishable from every finite value; degenerate whole-set geometry is
//! additionally flagged. All functions are pure; grid cells are evaluated in
//! a fixed row-major order so results are reproducible bit-for-bit.

use crate::error::Error;
use crate::geometry::{AnchorSet, Point2D, Region, Trajectory};
use crate::noise::NoiseModel;
use crate::Result;
use alloc::format;
use alloc::vec::Vec;

/// Floor of the pair GDOP, reached at perpendicular bearings.
pub const MIN_GDOP: f64 = core::f64::consts::SQRT_2;

/// Threshold on `1 - cos^2` (equivalently `sin^2` of the bearing separation,
/// or `det(h^T h)`) below which the geometry counts as collinear and the
/// GDOP becomes the infinity sentinel. Sized to separate true degeneracy
/// from float rounding.
pub const COLLINEARITY_EPS: f64 = 1e-12;

/// Anchor-pair GDOP from the two point-to-anchor distances and the anchor
/// positions (closed form).
///
/// Works for measured distances as well as true ones; nothing here needs the
/// point itself. Returns the infinity sentinel on (near-)collinear geometry.
pub fn pair_gdop(p_i: Point2D, p_j: Point2D, d_i: f64, d_j: f64) -> Result<f64> {
    pair_gdop_from_distances(d_i, d_j, p_i.distance_to(p_j))
}

/// Closed-form pair GDOP from the raw distance triple.
pub fn pair_gdop_from_distances(d_i: f64, d_j: f64, inter_anchor: f64) -> Result<f64> {
    if !d_i.is_finite() || !d_j.is_finite() || d_i <= 0.0 || d_j <= 0.0 {
        return Err(Error::Singularity(format!(
            "pair GDOP needs positive finite distances, got {d_i} and {d_j}"
        )));
    }
    if !inter_anchor.is_finite() || inter_anchor < 0.0 {
        return Err(Error::InvalidInput(format!(
            "inter-anchor distance must be finite and non-negative, got {inter_anchor}"
        )));
    }
    // Law of cosines: cos of the angle subtended at the point.
    let c = (d_i * d_i + d_j * d_j - inter_anchor * inter_anchor) / (2.0 * d_i * d_j);
    let sin2 = 1.0 - c * c;
    if sin2 < COLLINEARITY_EPS {
        return Ok(f64::INFINITY);
    }
    Ok(libm::sqrt(2.0 / sin2))
}

/// Anchor-pair GDOP via the direction-cosine matrix: `sqrt(tr((h^T h)^-1))`.
///
/// Independent route used to cross-check [`pair_gdop`]; the two agree to
/// 1e-9 relative on non-degenerate geometry.
pub fn pair_gdop_matrix(p: Point2D, p_i: Point2D, p_j: Point2D) -> Result<f64> {
    let d_i = p.distance_to(p_i);
    let d_j = p.distance_to(p_j);
    if d_i == 0.0 || d_j == 0.0 {
        return Err(Error::Singularity(
            "evaluation point coincides with an anchor".into(),
        ));
    }
    // Rows of h: unit bearing vectors anchor -> point.
    let (a1, a2) = ((p.x - p_i.x) / d_i, (p.y - p_i.y) / d_i);
    let (b1, b2) = ((p.x - p_j.x) / d_j, (p.y - p_j.y) / d_j);
    let g11 = a1 * a1 + b1 * b1;
    let g12 = a1 * a2 + b1 * b2;
    let g22 = a2 * a2 + b2 * b2;
    let det = g11 * g22 - g12 * g12; // = sin^2 of the bearing separation
    if det < COLLINEARITY_EPS {
        return Ok(f64::INFINITY);
    }
    Ok(libm::sqrt((g11 + g22) / det))
}

/// Result of the optimal-anchor-pair selection at one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiGdop {
    /// Minimum pair GDOP over all anchor pairs (may be the infinity sentinel).
    pub value: f64,
    /// Ids of the winning pair, lowest-id pair on ties.
    pub pair: (u32, u32),
    /// True when every pair is collinear, i.e. no finite GDOP exists.
    pub degenerate: bool,
}

/// Multi-anchor GDOP from per-anchor distances: the minimum pair GDOP over
/// all pairs, with the winning pair reported.
///
/// Distances may be measured ones; this is exactly the selection the
/// two-phase localizer runs. Ties break to the lowest id pair.
pub fn multi_gdop(anchors: &AnchorSet, distances: &[f64]) -> Result<MultiGdop> {
    if distances.len() != anchors.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} distances, got {}",
            anchors.len(),
            distances.len()
        )));
    }
    let mut best = f64::INFINITY;
    let mut best_pair: Option<(usize, usize)> = None;
    for (i, j) in anchors.pairs() {
        let g = pair_gdop_from_distances(distances[i], distances[j], anchors.pair_distance(i, j))?;
        if best_pair.is_none() || g < best {
            best = g;
            best_pair = Some((i, j));
        }
    }
    let (i, j) = best_pair.expect("anchor sets always have at least one pair");
    Ok(MultiGdop {
        value: best,
        pair: (anchors.id(i), anchors.id(j)),
        degenerate: !best.is_finite(),
    })
}

/// Multi-anchor GDOP at a point, using true distances.
pub fn multi_gdop_at(anchors: &AnchorSet, p: Point2D) -> Result<MultiGdop> {
    multi_gdop(anchors, &anchors.true_distances(p))
}

/// Rasterized multi-anchor GDOP over a region: the least-vulnerability
/// tomography. Troughs are noise-resilient areas, peaks are vulnerable ones.
#[derive(Debug, Clone, PartialEq)]
pub struct LvtGrid {
    region: Region,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl LvtGrid {
    pub fn region(&self) -> Region {
        self.region
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Value at grid node `(ix, iy)`; infinite at singular nodes.
    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// Row-major values, y-major: index `iy * nx + ix`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Minimum and maximum over finite cells, if any cell is finite.
    pub fn finite_range(&self) -> Option<(f64, f64)> {
        let mut range: Option<(f64, f64)> = None;
        for &v in &self.values {
            if v.is_finite() {
                let (lo, hi) = range.get_or_insert((v, v));
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        range
    }
}

/// Evaluates the multi-anchor GDOP on an `nx x ny` node grid spanning
/// `region`. Nodes coinciding with an anchor get the infinity sentinel.
pub fn lvt_grid(anchors: &AnchorSet, region: &Region, nx: usize, ny: usize) -> Result<LvtGrid> {
    check_grid(nx, ny)?;
    let mut values = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let p = Point2D::new(region.node_x(nx, ix), region.node_y(ny, iy));
            let v = match multi_gdop_at(anchors, p) {
                Ok(g) => g.value,
                Err(Error::Singularity(_)) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            values.push(v);
        }
    }
    Ok(LvtGrid {
        region: *region,
        nx,
        ny,
        values,
    })
}

/// What a placement score averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreDomain {
    Region,
    Trajectory,
}

/// Average multi-anchor GDOP over a region or a trajectory. Lower is better;
/// the floor is `sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementScore {
    pub value: f64,
    pub domain: ScoreDomain,
    /// Samples that needed special handling: for a region, nodes evaluated
    /// at a nudged position (singular or infinite at the node itself); for a
    /// trajectory, samples skipped outright.
    pub irregular: usize,
}

/// Number of grid nodes per axis used by [`region_score`]: 100 x 100
/// sub-areas, i.e. 10,000 trapezium cells.
pub const REGION_SCORE_NODES: usize = 101;

/// Average multi-anchor GDOP over `region`, estimated with the trapezium
/// rule on the standard 10,000-sub-area decomposition.
pub fn region_score(anchors: &AnchorSet, region: &Region) -> Result<PlacementScore> {
    region_score_with_grid(anchors, region, REGION_SCORE_NODES, REGION_SCORE_NODES)
}

/// Trapezium-rule region score on a caller-chosen node grid.
///
/// Integrand samples at nodes where the GDOP is undefined (node on an
/// anchor) or infinite are taken at the node nudged by half the smallest
/// grid spacing toward the region centroid, which keeps the sum finite
/// without giving those isolated nodes outsized weight.
///
/// When every anchor lies on one line, the GDOP is infinite along that whole
/// line and the score integral diverges wherever the line crosses the
/// region; that case is an error. A collinear placement whose line misses
/// the region (e.g. a distant anchor pair) still has a finite, well-defined
/// score.
pub fn region_score_with_grid(
    anchors: &AnchorSet,
    region: &Region,
    nx: usize,
    ny: usize,
) -> Result<PlacementScore> {
    check_grid(nx, ny)?;
    if let Some((origin, dir)) = collinear_axis(anchors) {
        if line_crosses_region(origin, dir, region) {
            return Err(Error::DegenerateGeometry(
                "all anchors are collinear and their line crosses the region; \
                 the score integral diverges"
                    .into(),
            ));
        }
    }
    let hx = region.width() / (nx - 1) as f64;
    let hy = region.height() / (ny - 1) as f64;
    let nudge = 0.5 * hx.min(hy);
    let centroid = region.centroid();
    let mut irregular = 0usize;
    let mut sum = 0.0f64;
    for iy in 0..ny {
        let wy = if iy == 0 || iy == ny - 1 { 0.5 } else { 1.0 };
        for ix in 0..nx {
            let wx = if ix == 0 || ix == nx - 1 { 0.5 } else { 1.0 };
            let p = Point2D::new(region.node_x(nx, ix), region.node_y(ny, iy));
            let value = match multi_gdop_at(anchors, p) {
                Ok(g) if g.value.is_finite() => g.value,
                _ => {
                    irregular += 1;
                    let q = nudge_toward(p, centroid, nudge);
                    match multi_gdop_at(anchors, q) {
                        Ok(g) => g.value,
                        Err(_) => f64::INFINITY,
                    }
                }
            };
            sum += wx * wy * value;
        }
    }
    let integral = sum * hx * hy;
    Ok(PlacementScore {
        value: integral / region.area(),
        domain: ScoreDomain::Region,
        irregular,
    })
}

/// Average multi-anchor GDOP over the trajectory's sample points (plain
/// arithmetic mean). Samples sitting exactly on an anchor, or where every
/// pair is collinear, are skipped and counted; errors if nothing remains.
pub fn trajectory_score(anchors: &AnchorSet, trajectory: &Trajectory) -> Result<PlacementScore> {
    let mut sum = 0.0f64;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for &p in trajectory.points() {
        match multi_gdop_at(anchors, p) {
            Ok(g) if g.value.is_finite() => {
                sum += g.value;
                used += 1;
            }
            _ => skipped += 1,
        }
    }
    if used == 0 {
        return Err(Error::DegenerateGeometry(
            "every trajectory sample is singular for this placement".into(),
        ));
    }
    Ok(PlacementScore {
        value: sum / used as f64,
        domain: ScoreDomain::Trajectory,
        irregular: skipped,
    })
}

/// Per-cell winner of the optimal-anchor-pair selection over a region.
#[derive(Debug, Clone, PartialEq)]
pub struct OsapMap {
    region: Region,
    nx: usize,
    ny: usize,
    /// Winning pair ids per node, row-major; `None` where no pair could be
    /// evaluated (node on an anchor).
    winners: Vec<Option<(u32, u32)>>,
    /// All id pairs in selection order; winner indices refer into this.
    pairs: Vec<(u32, u32)>,
}

impl OsapMap {
    pub fn region(&self) -> Region {
        self.region
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn get(&self, ix: usize, iy: usize) -> Option<(u32, u32)> {
        self.winners[iy * self.nx + ix]
    }

    pub fn winners(&self) -> &[Option<(u32, u32)>] {
        &self.winners
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// Index of a winner within [`Self::pairs`].
    pub fn pair_index(&self, pair: (u32, u32)) -> Option<usize> {
        self.pairs.iter().position(|&p| p == pair)
    }

    /// Number of distinct pairs that win at least one node.
    pub fn distinct_winners(&self) -> usize {
        self.pairs
            .iter()
            .filter(|&&p| self.winners.contains(&Some(p)))
            .count()
    }
}

/// Builds the OSAP map of `region` on an `nx x ny` node grid.
///
/// With `noise = None` selection runs on true distances. With a model,
/// distances are perturbed once per node (fresh offsets per anchor, nodes in
/// row-major order on the model's default substream) before selection,
/// which is what roughens the borders between pair areas.
pub fn osap_map(
    anchors: &AnchorSet,
    region: &Region,
    nx: usize,
    ny: usize,
    noise: Option<&NoiseModel>,
) -> Result<OsapMap> {
    check_grid(nx, ny)?;
    let mut sampler = noise.map(|m| m.sampler());
    let mut winners = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            let p = Point2D::new(region.node_x(nx, ix), region.node_y(ny, iy));
            let mut distances = anchors.true_distances(p);
            if let Some(s) = sampler.as_mut() {
                for d in distances.iter_mut() {
                    *d = (*d + s.draw()).max(0.0);
                }
            }
            if distances.iter().any(|&d| d <= 0.0) {
                winners.push(None);
                continue;
            }
            winners.push(Some(multi_gdop(anchors, &distances)?.pair));
        }
    }
    let pairs = anchors
        .pairs()
        .map(|(i, j)| (anchors.id(i), anchors.id(j)))
        .collect();
    Ok(OsapMap {
        region: *region,
        nx,
        ny,
        winners,
        pairs,
    })
}

fn check_grid(nx: usize, ny: usize) -> Result<()> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput(format!(
            "grid must be at least 2x2 nodes, got {nx}x{ny}"
        )));
    }
    Ok(())
}

/// The common line of an all-collinear placement, as (origin, direction),
/// or `None` when the anchors span the plane. Two anchors always define one.
fn collinear_axis(anchors: &AnchorSet) -> Option<(Point2D, Point2D)> {
    if anchors.len() > 2 && !anchors.is_collinear(COLLINEARITY_EPS) {
        return None;
    }
    let origin = anchors.position(0);
    // farthest anchor from the origin gives the best-conditioned direction
    let far = anchors
        .anchors()
        .iter()
        .map(|a| a.position)
        .max_by(|a, b| {
            origin
                .distance_to(*a)
                .partial_cmp(&origin.distance_to(*b))
                .unwrap()
        })
        .unwrap();
    let len = origin.distance_to(far);
    Some((
        origin,
        Point2D::new((far.x - origin.x) / len, (far.y - origin.y) / len),
    ))
}

/// Whether the infinite line through `origin` along `dir` meets the region:
/// true unless every corner lies strictly on one side.
fn line_crosses_region(origin: Point2D, dir: Point2D, region: &Region) -> bool {
    let corners = [
        region.min(),
        Point2D::new(region.max().x, region.min().y),
        region.max(),
        Point2D::new(region.min().x, region.max().y),
    ];
    let side = |c: Point2D| dir.x * (c.y - origin.y) - dir.y * (c.x - origin.x);
    let mut pos = false;
    let mut neg = false;
    for c in corners {
        let s = side(c);
        pos |= s >= 0.0;
        neg |= s <= 0.0;
    }
    pos && neg
}

fn nudge_toward(p: Point2D, target: Point2D, step: f64) -> Point2D {
    let d = p.distance_to(target);
    if d == 0.0 {
        return Point2D::new(p.x + step, p.y);
    }
    Point2D::new(
        p.x + step * (target.x - p.x) / d,
        p.y + step * (target.y - p.y) / d,
    )
}
