//! Vantage sets for radial projections: rectifiable carriers of the
//! parameter measure, here circles and segments with normalized arc length.

use crate::error::{Error, Result};
use crate::geom::{BBox, Point};
use std::f64::consts::TAU;

/// Where radial projections are taken from. The parameter measure is
/// normalized arc length on the carrier.
#[derive(Debug, Clone)]
pub enum VantageSet {
    Circle { center: Point, radius: f64 },
    Segment { from: Point, to: Point },
}

impl VantageSet {
    pub fn circle(center: Point, radius: f64) -> Result<VantageSet> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!(
                "circle radius {radius} must be positive"
            )));
        }
        if center.dim() != 2 {
            return Err(Error::invalid("vantage circles live in the plane"));
        }
        Ok(VantageSet::Circle { center, radius })
    }

    pub fn segment(from: Point, to: Point) -> Result<VantageSet> {
        if from.dim() != 2 || to.dim() != 2 {
            return Err(Error::invalid("vantage segments live in the plane"));
        }
        if from.dist(&to) == 0.0 {
            return Err(Error::invalid("vantage segment has zero length"));
        }
        Ok(VantageSet::Segment { from, to })
    }

    /// Total arc length of the carrier.
    pub fn length(&self) -> f64 {
        match self {
            VantageSet::Circle { radius, .. } => TAU * radius,
            VantageSet::Segment { from, to } => from.dist(to),
        }
    }

    /// Point at arc-length position `s` in [0, length); circles start at
    /// angle 0 and run counterclockwise.
    pub fn point_at(&self, s: f64) -> Point {
        match self {
            VantageSet::Circle { center, radius } => {
                let ang = s / radius;
                Point::new2(
                    center.x() + radius * ang.cos(),
                    center.y() + radius * ang.sin(),
                )
            }
            VantageSet::Segment { from, to } => {
                let t = s / from.dist(to);
                Point::new2(
                    from.x() + t * (to.x() - from.x()),
                    from.y() + t * (to.y() - from.y()),
                )
            }
        }
    }

    /// Midpoint quadrature along the carrier: `n` equally spaced vantage
    /// points, each carrying weight 1/n of the normalized measure.
    pub fn grid(&self, n: usize) -> Vec<Point> {
        let len = self.length();
        (0..n)
            .map(|i| self.point_at((i as f64 + 0.5) * len / n as f64))
            .collect()
    }

    /// Smallest distance from the carrier to an axis-aligned box; used to
    /// validate that radial projections stay Lipschitz on the box.
    pub fn min_dist_to_bbox(&self, b: &BBox, samples: usize) -> f64 {
        self.grid(samples)
            .iter()
            .map(|p| b.dist_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }
}
