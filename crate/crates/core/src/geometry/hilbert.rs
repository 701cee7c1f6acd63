//! Hilbert space-filling traversal curves.
//!
//! The order-`k` curve visits every cell of a `2^k x 2^k` grid exactly once.
//! Scaled into a region through the cell centers it yields a traversal path
//! whose sample statistics approximate area statistics, which is exactly what
//! the placement scores exploit.

use super::{Point2D, Region, Trajectory};
use crate::error::Error;
use crate::Result;
use alloc::format;
use alloc::vec::Vec;

/// Largest accepted curve order; 4^12 vertices is already ~16.8M points.
pub const MAX_ORDER: u32 = 12;

/// Index along the curve -> (x, y) cell coordinates on the `n x n` grid.
/// Standard iterative construction.
fn d2xy(order: u32, d: u64) -> (u32, u32) {
    let n = 1u64 << order;
    let mut t = d;
    let (mut x, mut y) = (0u64, 0u64);
    let mut s = 1u64;
    while s < n {
        let rx = 1 & (t / 2);
        let ry = 1 & (t ^ rx);
        if ry == 0 {
            if rx == 1 {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            core::mem::swap(&mut x, &mut y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
        s *= 2;
    }
    (x as u32, y as u32)
}

/// Cell coordinates of the order-`order` curve, in traversal order.
///
/// The y axis is flipped from the textbook construction so that the curve
/// starts in the upper-left cell of the grid.
pub fn hilbert_vertices(order: u32) -> Result<Vec<(u32, u32)>> {
    if order == 0 || order > MAX_ORDER {
        return Err(Error::InvalidInput(format!(
            "hilbert order must be in 1..={MAX_ORDER}, got {order}"
        )));
    }
    let n = 1u32 << order;
    let count = (n as u64) * (n as u64);
    let mut out = Vec::with_capacity(count as usize);
    for d in 0..count {
        let (x, y) = d2xy(order, d);
        out.push((x, n - 1 - y));
    }
    Ok(out)
}

/// The raw 4^order-vertex traversal through the cell centers of `region`.
///
/// The first vertex is the center of the upper-left grid cell; consecutive
/// vertices are one cell apart, so every segment has the same length.
pub fn hilbert_cell_path(order: u32, region: &Region) -> Result<Trajectory> {
    let vertices = hilbert_vertices(order)?;
    let n = (1u32 << order) as f64;
    let (w, h) = (region.width(), region.height());
    let min = region.min();
    let points = vertices
        .into_iter()
        .map(|(x, y)| {
            Point2D::new(
                min.x + (x as f64 + 0.5) * w / n,
                min.y + (y as f64 + 0.5) * h / n,
            )
        })
        .collect();
    Trajectory::new(points)
}

/// An order-`order` Hilbert traversal of `region`, resampled uniformly by
/// arc length to exactly `resample_to` points.
pub fn hilbert_trajectory(order: u32, region: &Region, resample_to: usize) -> Result<Trajectory> {
    hilbert_cell_path(order, region)?.resample(resample_to)
}
