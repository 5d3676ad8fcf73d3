//! Grid-aligned cell sets: finite unions of half-open grid squares/cubes of a
//! common side length, with anchors stored as exact integer grid indices.

use crate::error::{Error, Result};
use crate::geom::{BBox, Point};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Hard ceiling on cells produced by any constructor in this module.
pub const CELL_CAP: usize = 8_000_000;

/// A finite set of axis-aligned cells of equal side length whose lower-left
/// corners lie on the `side`-grid. Anchors are kept sorted and deduplicated,
/// so two cell sets over the same grid are equal iff their anchor lists are.
///
/// All coordinates derive from `index * side`; for dyadic sides this is exact
/// in floating point, and for any rational side it is consistent across the
/// whole crate (the same product is computed everywhere).
#[derive(Debug, Clone, PartialEq)]
pub struct CellSet {
    dim: u8,
    side: f64,
    anchors: Vec<[i64; 3]>,
}

impl CellSet {
    /// `anchors` are grid indices (not coordinates); the z entry must be 0 in
    /// dimension 2. Duplicates are merged.
    pub fn new(dim: u8, side: f64, anchors: Vec<[i64; 3]>) -> Result<CellSet> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::invalid(format!(
                "cell dimension {dim} not supported"
            )));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::invalid(format!(
                "cell side must be positive, got {side}"
            )));
        }
        if anchors.len() > CELL_CAP {
            return Err(Error::ResourceLimit(format!(
                "cell count {} exceeds cap {CELL_CAP}",
                anchors.len()
            )));
        }
        let mut anchors = anchors;
        if dim == 2 && anchors.iter().any(|a| a[2] != 0) {
            return Err(Error::invalid("2-d cell set with nonzero third index"));
        }
        anchors.sort_unstable();
        anchors.dedup();
        Ok(CellSet { dim, side, anchors })
    }

    pub fn empty(dim: u8, side: f64) -> Result<CellSet> {
        CellSet::new(dim, side, Vec::new())
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn count(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn anchors(&self) -> &[[i64; 3]] {
        &self.anchors
    }

    /// Lebesgue measure: disjoint interiors make this exact.
    pub fn measure(&self) -> f64 {
        self.anchors.len() as f64 * self.side.powi(self.dim as i32)
    }

    /// Lower-left corner of the cell at `anchor`.
    pub fn corner(&self, anchor: [i64; 3]) -> Point {
        let s = self.side;
        match self.dim {
            2 => Point::new2(anchor[0] as f64 * s, anchor[1] as f64 * s),
            _ => Point::new3(
                anchor[0] as f64 * s,
                anchor[1] as f64 * s,
                anchor[2] as f64 * s,
            ),
        }
    }

    pub fn center(&self, anchor: [i64; 3]) -> Point {
        let s = self.side;
        let c = |i: i64| (i as f64 + 0.5) * s;
        match self.dim {
            2 => Point::new2(c(anchor[0]), c(anchor[1])),
            _ => Point::new3(c(anchor[0]), c(anchor[1]), c(anchor[2])),
        }
    }

    pub fn bbox(&self) -> Result<BBox> {
        if self.anchors.is_empty() {
            return Err(Error::invalid("bounding box of an empty cell set"));
        }
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for a in &self.anchors {
            for k in 0..3 {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(a[k]);
            }
        }
        let s = self.side;
        BBox::new(
            self.dim,
            [lo[0] as f64 * s, lo[1] as f64 * s, lo[2] as f64 * s],
            [
                (hi[0] + 1) as f64 * s,
                (hi[1] + 1) as f64 * s,
                (hi[2] + 1) as f64 * s,
            ],
        )
    }

    /// Index range of anchors along one axis, inclusive.
    pub fn index_range(&self, axis: usize) -> Option<(i64, i64)> {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for a in &self.anchors {
            lo = lo.min(a[axis]);
            hi = hi.max(a[axis]);
        }
        if self.anchors.is_empty() {
            None
        } else {
            Some((lo, hi))
        }
    }

    /// Membership with cells treated as closed boxes.
    pub fn contains_point(&self, p: &Point) -> bool {
        let s = self.side;
        self.anchors.iter().any(|a| {
            (0..self.dim as usize).all(|k| {
                let lo = a[k] as f64 * s;
                p.coord(k) >= lo && p.coord(k) <= lo + s
            })
        })
    }

    /// True when every cell of `self` is contained in some cell of `coarser`
    /// (requires the coarser side to be an integer multiple of this side).
    pub fn nested_in(&self, coarser: &CellSet) -> bool {
        let ratio = coarser.side / self.side;
        let m = ratio.round() as i64;
        if m < 1 || (ratio - m as f64).abs() > 1e-9 * ratio {
            return false;
        }
        let set: BTreeSet<&[i64; 3]> = coarser.anchors.iter().collect();
        self.anchors
            .iter()
            .all(|a| set.contains(&[a[0].div_euclid(m), a[1].div_euclid(m), a[2].div_euclid(m)]))
    }

    pub fn to_json(&self) -> CellSetJson {
        let s = self.side;
        CellSetJson {
            dim: self.dim,
            side: s,
            anchors: self
                .anchors
                .iter()
                .map(|a| {
                    let mut v = vec![a[0] as f64 * s, a[1] as f64 * s];
                    if self.dim == 3 {
                        v.push(a[2] as f64 * s);
                    }
                    v
                })
                .collect(),
        }
    }

    pub fn from_json(json: &CellSetJson) -> Result<CellSet> {
        if !(json.side.is_finite() && json.side > 0.0) {
            return Err(Error::invalid("cell side must be positive"));
        }
        let mut anchors = Vec::with_capacity(json.anchors.len());
        for coords in &json.anchors {
            if coords.len() != json.dim as usize {
                return Err(Error::invalid(format!(
                    "anchor arity {} does not match dim {}",
                    coords.len(),
                    json.dim
                )));
            }
            let mut a = [0i64; 3];
            for (k, &c) in coords.iter().enumerate() {
                let idx = (c / json.side).round();
                if (c - idx * json.side).abs() > 1e-9 * json.side.max(c.abs()) {
                    return Err(Error::invalid(format!(
                        "anchor coordinate {c} is not a multiple of side {}",
                        json.side
                    )));
                }
                a[k] = idx as i64;
            }
            anchors.push(a);
        }
        CellSet::new(json.dim, json.side, anchors)
    }
}

/// Serialization mirror: `{dim, side, anchors: [[x, y], ...]}` with anchors
/// as coordinates of lower-left corners.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellSetJson {
    pub dim: u8,
    pub side: f64,
    pub anchors: Vec<Vec<f64>>,
}

/// Closed `r`-neighborhood of a cell set, overapproximated on a refined grid.
///
/// The output side is `side / 2^k`, refined until it is at most `r / 16`
/// (or `side`, whichever is smaller); a refined cell is included iff its
/// Euclidean distance to some input cell is at most `r`. The result covers
/// the exact r-neighborhood and is contained in the (r·√dim + 2·side)-
/// neighborhood.
pub fn dilate(cells: &CellSet, r: f64) -> Result<CellSet> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid(format!(
            "dilation radius must be positive, got {r}"
        )));
    }
    let dim = cells.dim();
    let side = cells.side();
    let mut k = 0u32;
    while side / f64::powi(2.0, k as i32) > r / 16.0 && k < 40 {
        k += 1;
    }
    let m = 1i64 << k;
    let sub = side / m as f64;

    // Candidate window in refined-grid units around each input cell.
    let reach = (r / sub).ceil() as i64 + 1;
    let per_axis = (m + 2 * reach + 1) as usize;
    let budget = cells.count().saturating_mul(per_axis.pow(dim as u32));
    if budget > 200_000_000 {
        return Err(Error::ResourceLimit(format!(
            "dilation would scan {budget} candidate cells"
        )));
    }

    let r2 = r * r;
    // Axis gap between refined cell [j, j+1] and input cell [b, b+m], in grid units.
    let gap = |j: i64, b: i64| -> f64 {
        let g = (b - (j + 1)).max(j - (b + m)).max(0);
        g as f64 * sub
    };

    let mut out: BTreeSet<[i64; 3]> = BTreeSet::new();
    for a in cells.anchors() {
        let base = [a[0] * m, a[1] * m, a[2] * m];
        let zs = if dim == 3 {
            (base[2] - reach)..=(base[2] + m + reach - 1)
        } else {
            0..=0
        };
        for z in zs {
            let gz = if dim == 3 { gap(z, base[2]) } else { 0.0 };
            if gz * gz > r2 {
                continue;
            }
            for x in (base[0] - reach)..=(base[0] + m + reach - 1) {
                let gx = gap(x, base[0]);
                let rem = r2 - gz * gz - gx * gx;
                if rem < 0.0 {
                    continue;
                }
                for y in (base[1] - reach)..=(base[1] + m + reach - 1) {
                    let gy = gap(y, base[1]);
                    if gy * gy <= rem {
                        out.insert([x, y, z]);
                    }
                }
            }
        }
        if out.len() > CELL_CAP {
            return Err(Error::ResourceLimit(format!(
                "dilation output exceeds cap {CELL_CAP}"
            )));
        }
    }
    CellSet::new(dim, sub, out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit_square() -> CellSet {
        CellSet::new(2, 1.0, vec![[0, 0, 0]]).unwrap()
    }

    #[test]
    fn anchors_sort_and_dedup() {
        let c = CellSet::new(2, 0.25, vec![[3, 0, 0], [0, 0, 0], [3, 0, 0]]).unwrap();
        assert_eq!(c.anchors(), &[[0, 0, 0], [3, 0, 0]]);
        assert_eq!(c.count(), 2);
        assert_eq!(c.measure(), 2.0 * 0.0625);
    }

    #[test]
    fn json_round_trip_preserves_the_set() {
        let c = CellSet::new(2, 0.25, vec![[0, 0, 0], [3, 3, 0]]).unwrap();
        let j = c.to_json();
        let back = CellSet::from_json(&j).unwrap();
        assert_eq!(c, back);
        let text = serde_json::to_string(&j).unwrap();
        let parsed: CellSetJson = serde_json::from_str(&text).unwrap();
        assert_eq!(CellSet::from_json(&parsed).unwrap(), c);
    }

    #[test]
    fn misaligned_json_anchor_is_rejected() {
        let j = CellSetJson {
            dim: 2,
            side: 0.25,
            anchors: vec![vec![0.1, 0.0]],
        };
        assert!(CellSet::from_json(&j).is_err());
    }

    /// Tube formula oracle: the r-neighborhood of a unit square has area
    /// 1 + 4r + πr²; the overapproximation may exceed it only by a thin
    /// boundary layer.
    #[test]
    fn dilated_unit_square_matches_tube_formula() {
        let r = 0.25;
        let d = dilate(&unit_square(), r).unwrap();
        let exact = 1.0 + 4.0 * r + PI * r * r;
        let upper = (1.0 + 2.0 * 0.3 * std::f64::consts::SQRT_2).powi(2);
        assert!(d.measure() >= exact, "cover must dominate the exact area");
        assert!(d.measure() <= upper, "{} > {upper}", d.measure());
        let slack = d.side() * std::f64::consts::SQRT_2 * (4.0 + 2.0 * PI * r);
        assert!(
            d.measure() <= exact + slack,
            "{} vs {exact} + {slack}",
            d.measure()
        );
    }

    #[test]
    fn touching_squares_dilate_to_a_connected_tube() {
        let two = CellSet::new(2, 1.0, vec![[0, 0, 0], [1, 0, 0]]).unwrap();
        let r = 0.1;
        let d = dilate(&two, r).unwrap();
        let exact = 2.0 + 6.0 * r + PI * r * r;
        assert!(d.measure() >= exact);
        assert!(
            (d.measure() - exact) / exact < 0.05,
            "area {} deviates more than 5% from {exact}",
            d.measure()
        );
        // Connectivity witness: anchors along the shared edge are present.
        let (xlo, xhi) = d.index_range(0).unwrap();
        for x in xlo..=xhi {
            assert!(
                d.anchors().iter().any(|a| a[0] == x),
                "gap in dilated tube at column {x}"
            );
        }
    }

    #[test]
    fn dilation_rejects_nonpositive_radius() {
        assert!(dilate(&unit_square(), 0.0).is_err());
        assert!(dilate(&unit_square(), -1.0).is_err());
        assert!(dilate(&unit_square(), f64::NAN).is_err());
    }

    #[test]
    fn empty_input_dilates_to_empty() {
        let e = CellSet::empty(2, 1.0).unwrap();
        let d = dilate(&e, 0.5).unwrap();
        assert!(d.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Monotonicity: growing r grows the neighborhood.
        #[test]
        fn dilation_is_monotone_in_radius(
            anchors in prop::collection::vec((-3i64..4, -3i64..4), 1..5),
            r1 in 0.05f64..0.4,
            extra in 0.05f64..0.4,
        ) {
            let cells = CellSet::new(
                2, 0.5,
                anchors.iter().map(|&(x, y)| [x, y, 0]).collect(),
            ).unwrap();
            let small = dilate(&cells, r1).unwrap();
            let big = dilate(&cells, r1 + extra).unwrap();
            prop_assert!(big.measure() >= small.measure() - 1e-12);
        }

        /// Coverage: the dilation contains every point at distance <= r,
        /// sampled via perturbed cell corners.
        #[test]
        fn dilation_covers_nearby_points(
            anchors in prop::collection::vec((-3i64..4, -3i64..4), 1..5),
            r in 0.05f64..0.5,
            dx in -1.0f64..1.0,
            dy in -1.0f64..1.0,
        ) {
            let cells = CellSet::new(
                2, 0.5,
                anchors.iter().map(|&(x, y)| [x, y, 0]).collect(),
            ).unwrap();
            let d = dilate(&cells, r).unwrap();
            let base = cells.corner(cells.anchors()[0]);
            let norm = (dx * dx + dy * dy).sqrt().max(1e-12);
            let p = Point::new2(
                base.x() + dx / norm * r * 0.99,
                base.y() + dy / norm * r * 0.99,
            );
            prop_assert!(d.contains_point(&p));
        }
    }
}
