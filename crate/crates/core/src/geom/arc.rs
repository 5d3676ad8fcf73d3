//! Finite unions of arcs on the unit circle, angles in [0, 2π).

use crate::error::{Error, Result};
use std::f64::consts::TAU;

/// Stored as sorted disjoint sub-intervals of [0, 2π]; an arc crossing the
/// branch point is split on insertion. Total measure never exceeds 2π.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArcUnion {
    inner: super::IntervalUnion,
}

impl ArcUnion {
    pub fn new() -> ArcUnion {
        ArcUnion {
            inner: super::IntervalUnion::new(),
        }
    }

    /// Inserts the arc swept counterclockwise from `lo` to `hi` (radians,
    /// any branch). A sweep of 2π or more fills the whole circle.
    pub fn insert(&mut self, lo: f64, hi: f64) -> Result<()> {
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite arc endpoints [{lo}, {hi}]"
            )));
        }
        if hi < lo {
            return Err(Error::invalid(format!("reversed arc [{lo}, {hi}]")));
        }
        if hi - lo >= TAU {
            self.inner.insert(0.0, TAU)?;
            return Ok(());
        }
        let start = lo.rem_euclid(TAU);
        let end = start + (hi - lo);
        if end <= TAU {
            self.inner.insert(start, end)?;
        } else {
            self.inner.insert(start, TAU)?;
            self.inner.insert(0.0, end - TAU)?;
        }
        Ok(())
    }

    pub fn measure(&self) -> f64 {
        self.inner.measure().min(TAU)
    }

    pub fn components(&self) -> &[(f64, f64)] {
        self.inner.components()
    }

    /// Component count on the circle: components touching across the branch
    /// point 0 ~ 2π count as one.
    pub fn component_count(&self) -> usize {
        let c = self.inner.components();
        let n = c.len();
        if n >= 2 && c[0].0 <= 0.0 && c[n - 1].1 >= TAU {
            n - 1
        } else {
            n
        }
    }

    pub fn is_empty(&self) -> bool {
        self.inner.is_empty()
    }

    pub fn contains(&self, angle: f64) -> bool {
        self.inner.contains(angle.rem_euclid(TAU))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn plain_arc_measure() {
        let mut a = ArcUnion::new();
        a.insert(0.5, 1.5).unwrap();
        assert_relative_eq!(a.measure(), 1.0);
        assert_eq!(a.component_count(), 1);
    }

    #[test]
    fn wrapping_arc_is_split_but_counts_once() {
        let mut a = ArcUnion::new();
        a.insert(TAU - 0.25, TAU + 0.25).unwrap();
        assert_relative_eq!(a.measure(), 0.5, epsilon = 1e-12);
        assert_eq!(a.components().len(), 2);
        assert_eq!(a.component_count(), 1);
        assert!(a.contains(0.1));
        assert!(a.contains(-0.1));
        assert!(!a.contains(1.0));
    }

    #[test]
    fn full_circle_saturates_at_tau() {
        let mut a = ArcUnion::new();
        a.insert(1.0, 1.0 + TAU + 5.0).unwrap();
        assert_relative_eq!(a.measure(), TAU);
        a.insert(0.0, 1.0).unwrap();
        assert_relative_eq!(a.measure(), TAU);
    }

    #[test]
    fn negative_angles_normalize() {
        let mut a = ArcUnion::new();
        a.insert(-0.5, 0.5).unwrap();
        assert_relative_eq!(a.measure(), 1.0, epsilon = 1e-12);
        assert_eq!(a.component_count(), 1);
    }
}
