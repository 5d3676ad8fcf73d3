//! Points, bounding boxes, and the grid-aligned set representations used
//! throughout the crate.

pub mod arc;
pub mod cells;
pub mod interval;
pub mod raster;

pub use arc::ArcUnion;
pub use cells::{dilate, CellSet};
pub use interval::IntervalUnion;
pub use raster::{
    minkowski_sum_raster, raster_area, sweep_area_2d, sweep_volume_3d, union_measure, Band2Fn,
    BandFn, Raster, SampleBand,
};

use crate::error::{Error, Result};

/// A point in dimension 2 or 3. The third coordinate is zero in dimension 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    dim: u8,
    xs: [f64; 3],
}

impl Point {
    pub fn new2(x: f64, y: f64) -> Point {
        Point {
            dim: 2,
            xs: [x, y, 0.0],
        }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Point {
        Point {
            dim: 3,
            xs: [x, y, z],
        }
    }

    pub fn checked(self) -> Result<Point> {
        if self.xs.iter().all(|c| c.is_finite()) {
            Ok(self)
        } else {
            Err(Error::invalid(format!(
                "non-finite point coordinates {:?}",
                self.xs
            )))
        }
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn x(&self) -> f64 {
        self.xs[0]
    }

    pub fn y(&self) -> f64 {
        self.xs[1]
    }

    pub fn z(&self) -> f64 {
        self.xs[2]
    }

    pub fn coord(&self, axis: usize) -> f64 {
        self.xs[axis]
    }

    pub fn coords(&self) -> &[f64] {
        &self.xs[..self.dim as usize]
    }

    pub fn dist(&self, other: &Point) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim.max(other.dim) as usize {
            let d = self.xs[i] - other.xs[i];
            s += d * d;
        }
        s.sqrt()
    }
}

/// Axis-aligned box, closed on all sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub dim: u8,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl BBox {
    pub fn new(dim: u8, lo: [f64; 3], hi: [f64; 3]) -> Result<BBox> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::invalid(format!("dimension {dim} not supported")));
        }
        for a in 0..dim as usize {
            if !(lo[a].is_finite() && hi[a].is_finite() && lo[a] <= hi[a]) {
                return Err(Error::invalid(format!(
                    "degenerate box bounds on axis {a}: [{}, {}]",
                    lo[a], hi[a]
                )));
            }
        }
        Ok(BBox { dim, lo, hi })
    }

    pub fn new2(lo: [f64; 2], hi: [f64; 2]) -> Result<BBox> {
        BBox::new(2, [lo[0], lo[1], 0.0], [hi[0], hi[1], 0.0])
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim as usize).all(|a| self.lo[a] <= p.xs[a] && p.xs[a] <= self.hi[a])
    }

    pub fn center(&self) -> Point {
        let c = [
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
            0.5 * (self.lo[2] + self.hi[2]),
        ];
        Point {
            dim: self.dim,
            xs: c,
        }
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn diameter(&self) -> f64 {
        let mut s = 0.0;
        for a in 0..self.dim as usize {
            let d = self.extent(a);
            s += d * d;
        }
        s.sqrt()
    }

    pub fn pad(&self, margin: f64) -> BBox {
        let mut out = *self;
        for a in 0..self.dim as usize {
            out.lo[a] -= margin;
            out.hi[a] += margin;
        }
        out
    }

    /// Euclidean distance from the box to a point (zero inside).
    pub fn dist_to_point(&self, p: &Point) -> f64 {
        let mut s = 0.0;
        for a in 0..self.dim as usize {
            let d = (self.lo[a] - p.xs[a]).max(p.xs[a] - self.hi[a]).max(0.0);
            s += d * d;
        }
        s.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances_match_hand_values() {
        let p = Point::new2(0.0, 0.0);
        let q = Point::new2(3.0, 4.0);
        assert_eq!(p.dist(&q), 5.0);
        let b = BBox::new2([1.0, 1.0], [2.0, 2.0]).unwrap();
        assert_eq!(b.dist_to_point(&Point::new2(1.5, 1.5)), 0.0);
        assert_eq!(b.dist_to_point(&Point::new2(0.0, 1.5)), 1.0);
    }

    #[test]
    fn non_finite_points_are_rejected() {
        assert!(Point::new2(f64::NAN, 0.0).checked().is_err());
        assert!(Point::new2(1.0, 2.0).checked().is_ok());
    }
}
