//! Planar primitives: points, anchor sets, rectangular regions, and
//! piecewise-linear trajectories.
//!
//! Coordinates are abstract meters. Everything is 2D; there is no geodesy
//! here (the GPS-to-local transform lives in the companion crate).

mod hilbert;

pub use hilbert::{hilbert_cell_path, hilbert_trajectory, hilbert_vertices};

use crate::error::Error;
use crate::Result;
use alloc::format;
use alloc::vec::Vec;

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance_to(&self, other: Point2D) -> f64 {
        distance(*self, other)
    }
}

/// Euclidean distance between two points.
pub fn distance(a: Point2D, b: Point2D) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    libm::sqrt(dx * dx + dy * dy)
}

/// An anchor: a node at a known, fixed position, identified by a stable id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub id: u32,
    pub position: Point2D,
}

impl Anchor {
    pub const fn new(id: u32, position: Point2D) -> Self {
        Self { id, position }
    }
}

/// An ordered set of at least two anchors with unique ids and pairwise
/// distinct positions.
///
/// Anchors are kept sorted by id, so pair enumeration order (and every
/// "lowest pair ids" tie-break built on it) is independent of input order.
/// Inter-anchor distances are precomputed once; they are in the hot path of
/// pair selection.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    anchors: Vec<Anchor>,
    pair_distances: Vec<f64>,
}

impl AnchorSet {
    pub fn new(mut anchors: Vec<Anchor>) -> Result<Self> {
        if anchors.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "anchor set needs at least 2 anchors, got {}",
                anchors.len()
            )));
        }
        for a in &anchors {
            if !a.position.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "anchor {} has non-finite position",
                    a.id
                )));
            }
        }
        anchors.sort_by_key(|a| a.id);
        for w in anchors.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::InvalidInput(format!("duplicate anchor id {}", w[0].id)));
            }
        }
        for i in 0..anchors.len() {
            for j in (i + 1)..anchors.len() {
                if anchors[i].position == anchors[j].position {
                    return Err(Error::InvalidInput(format!(
                        "anchors {} and {} share a position",
                        anchors[i].id, anchors[j].id
                    )));
                }
            }
        }
        let m = anchors.len();
        let mut pair_distances = Vec::with_capacity(m * (m - 1) / 2);
        for i in 0..m {
            for j in (i + 1)..m {
                pair_distances.push(distance(anchors[i].position, anchors[j].position));
            }
        }
        Ok(Self { anchors, pair_distances })
    }

    /// Builds a set from bare positions, assigning ids `0..n` in order.
    pub fn from_positions(positions: &[Point2D]) -> Result<Self> {
        Self::new(
            positions
                .iter()
                .enumerate()
                .map(|(i, &p)| Anchor::new(i as u32, p))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees len >= 2
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn position(&self, index: usize) -> Point2D {
        self.anchors[index].position
    }

    pub fn id(&self, index: usize) -> u32 {
        self.anchors[index].id
    }

    /// Precomputed distance between anchors `i` and `j` (indices, `i < j`).
    pub fn pair_distance(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < j && j < self.anchors.len());
        let m = self.anchors.len();
        self.pair_distances[i * (2 * m - i - 1) / 2 + (j - i - 1)]
    }

    /// Enumerates index pairs `(i, j)` with `i < j` in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.anchors.len();
        (0..m).flat_map(move |i| ((i + 1)..m).map(move |j| (i, j)))
    }

    /// True distances from `p` to every anchor, in anchor order.
    pub fn true_distances(&self, p: Point2D) -> Vec<f64> {
        self.anchors.iter().map(|a| distance(p, a.position)).collect()
    }

    /// Whether all anchors lie on one line, up to a relative tolerance on the
    /// determinant of the position scatter matrix.
    pub fn is_collinear(&self, tol: f64) -> bool {
        let p0 = self.anchors[0].position;
        let (mut g11, mut g12, mut g22) = (0.0, 0.0, 0.0);
        for a in &self.anchors[1..] {
            let dx = a.position.x - p0.x;
            let dy = a.position.y - p0.y;
            g11 += dx * dx;
            g12 += dx * dy;
            g22 += dy * dy;
        }
        let det = g11 * g22 - g12 * g12;
        let scale = g11 + g22;
        det <= tol * scale * scale
    }
}

/// An axis-aligned rectangle with strictly positive area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    min: Point2D,
    max: Point2D,
}

impl Region {
    pub fn new(min: Point2D, max: Point2D) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidInput("region corners must be finite".into()));
        }
        if !(max.x > min.x && max.y > min.y) {
            return Err(Error::InvalidInput(format!(
                "region max corner ({}, {}) must exceed min corner ({}, {}) in both axes",
                max.x, max.y, min.x, min.y
            )));
        }
        Ok(Self { min, max })
    }

    pub fn from_bounds(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        Self::new(Point2D::new(xmin, ymin), Point2D::new(xmax, ymax))
    }

    pub fn min(&self) -> Point2D {
        self.min
    }

    pub fn max(&self) -> Point2D {
        self.max
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn centroid(&self) -> Point2D {
        Point2D::new(
            0.5 * (self.min.x + self.max.x),
            0.5 * (self.min.y + self.max.y),
        )
    }

    pub fn contains(&self, p: Point2D) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// x coordinate of node `ix` on an `nx`-node grid spanning the region.
    pub fn node_x(&self, nx: usize, ix: usize) -> f64 {
        debug_assert!(nx >= 2 && ix < nx);
        self.min.x + self.width() * ix as f64 / (nx - 1) as f64
    }

    /// y coordinate of node `iy` on an `ny`-node grid spanning the region.
    pub fn node_y(&self, ny: usize, iy: usize) -> f64 {
        debug_assert!(ny >= 2 && iy < ny);
        self.min.y + self.height() * iy as f64 / (ny - 1) as f64
    }
}

/// An ordered sequence of points connected piecewise-linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    points: Vec<Point2D>,
}

impl Trajectory {
    /// Accepts any sequence of two or more finite points. A trajectory of
    /// zero arc length (all points equal) is constructible (scoring treats
    /// it as a repeated sample) but cannot be resampled.
    pub fn new(points: Vec<Point2D>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "trajectory needs at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "trajectory contains non-finite point ({}, {})",
                p.x, p.y
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees len >= 2
    }

    pub fn first(&self) -> Point2D {
        self.points[0]
    }

    pub fn last(&self) -> Point2D {
        *self.points.last().unwrap()
    }

    /// Sum of segment lengths.
    pub fn arc_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| distance(w[0], w[1]))
            .sum()
    }

    /// Reverses the point order in place.
    pub fn reverse(&mut self) {
        self.points.reverse();
    }

    /// Resamples to exactly `count` points spaced uniformly by arc length
    /// along the original polyline. The first and last points are preserved
    /// exactly.
    pub fn resample(&self, count: usize) -> Result<Trajectory> {
        if count < 2 {
            return Err(Error::InvalidInput(format!(
                "resample target must be at least 2 points, got {count}"
            )));
        }
        let mut cumulative = Vec::with_capacity(self.points.len());
        cumulative.push(0.0f64);
        for w in self.points.windows(2) {
            let last = *cumulative.last().unwrap();
            cumulative.push(last + distance(w[0], w[1]));
        }
        let total = *cumulative.last().unwrap();
        if total <= 0.0 {
            return Err(Error::InvalidInput(
                "cannot resample a zero-length trajectory".into(),
            ));
        }

        let mut out = Vec::with_capacity(count);
        out.push(self.points[0]);
        let mut seg = 0usize;
        for k in 1..count - 1 {
            let target = total * k as f64 / (count - 1) as f64;
            while seg + 2 < cumulative.len() && cumulative[seg + 1] <= target {
                seg += 1;
            }
            let seg_len = cumulative[seg + 1] - cumulative[seg];
            let t = if seg_len > 0.0 {
                (target - cumulative[seg]) / seg_len
            } else {
                0.0
            };
            let a = self.points[seg];
            let b = self.points[seg + 1];
            out.push(Point2D::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
        }
        out.push(*self.points.last().unwrap());
        Trajectory::new(out)
    }
}
