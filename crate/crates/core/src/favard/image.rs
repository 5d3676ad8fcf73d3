//! Images of cell sets under single maps of a family, as explicit interval
//! or arc unions, plus visibility from a point.
//!
//! Every per-cell image is exact: the extrema of each map over a closed
//! cell are analytic (separable corners for linear maps, window extrema for
//! profiles, corner directions for the radial span), so the only
//! approximation anywhere in an estimate is the cell cover of the set
//! itself. The resolution argument is kept as a validated part of the
//! contract and echoed into estimates for provenance.

use crate::error::{Error, Result};
use crate::family::{FamilyKind, ParamPoint, ProjectionFamily};
use crate::geom::{ArcUnion, CellSet, IntervalUnion, Point};

/// The image of a set under one map of a family.
#[derive(Debug, Clone)]
pub enum ImageSet {
    Line(IntervalUnion),
    Circle(ArcUnion),
}

impl ImageSet {
    pub fn measure(&self) -> f64 {
        match self {
            ImageSet::Line(u) => u.measure(),
            ImageSet::Circle(a) => a.measure(),
        }
    }

    pub fn component_count(&self) -> usize {
        match self {
            ImageSet::Line(u) => u.component_count(),
            ImageSet::Circle(a) => a.component_count(),
        }
    }
}

/// Image of the cells under the map at parameter `alpha`. For partial maps
/// (curve and surface sweeps) cells outside the window contribute nothing
/// and partially covered cells contribute the image of their covered part.
pub fn image_set(
    family: &ProjectionFamily,
    alpha: &ParamPoint,
    cells: &CellSet,
    resolution: f64,
) -> Result<ImageSet> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::invalid(format!(
            "resolution {resolution} must be positive"
        )));
    }
    let side = cells.side();
    match family.kind() {
        FamilyKind::Orthogonal => {
            let theta = alpha.scalar()?;
            let (c, s) = (theta.cos(), theta.sin());
            let mut ivs = Vec::with_capacity(cells.count());
            for a in cells.anchors() {
                let x = a[0] as f64 * side;
                let y = a[1] as f64 * side;
                // Linear map: extrema at the corners, min/max separable.
                let vx = (x * c).min((x + side) * c);
                let wx = (x * c).max((x + side) * c);
                let vy = (y * s).min((y + side) * s);
                let wy = (y * s).max((y + side) * s);
                ivs.push((vx + vy, wx + wy));
            }
            Ok(ImageSet::Line(IntervalUnion::from_intervals(ivs)?))
        }
        FamilyKind::Curve { spec, .. } => {
            let lambda = alpha.scalar()?;
            let mut ivs = Vec::new();
            for a in cells.anchors() {
                let a1 = a[0] as f64 * side;
                let a2 = a[1] as f64 * side;
                if let Some((m, mx)) = spec.range_extrema(lambda - a1 - side, lambda - a1) {
                    ivs.push((a2 + m, a2 + side + mx));
                }
            }
            Ok(ImageSet::Line(IntervalUnion::from_intervals(ivs)?))
        }
        FamilyKind::Line { slope, interval } => {
            let lambda = alpha.scalar()?;
            let mut ivs = Vec::new();
            for a in cells.anchors() {
                let a1 = a[0] as f64 * side;
                let a2 = a[1] as f64 * side;
                let lo = (lambda - a1 - side).max(interval.0);
                let hi = (lambda - a1).min(interval.1);
                if lo > hi {
                    continue;
                }
                let (m, mx) = if *slope >= 0.0 {
                    (slope * lo, slope * hi)
                } else {
                    (slope * hi, slope * lo)
                };
                ivs.push((a2 + m, a2 + side + mx));
            }
            Ok(ImageSet::Line(IntervalUnion::from_intervals(ivs)?))
        }
        FamilyKind::Surface { spec } => {
            let ParamPoint::Planar(a1, a2) = alpha else {
                return Err(Error::invalid("surface maps take planar parameters"));
            };
            if cells.dim() != 3 {
                return Err(Error::invalid("surface images need 3-d cells"));
            }
            let mut ivs = Vec::new();
            for a in cells.anchors() {
                let cx = a[0] as f64 * side;
                let cy = a[1] as f64 * side;
                let cz = a[2] as f64 * side;
                let xw = (a1 - cx - side, a1 - cx);
                let yw = (a2 - cy - side, a2 - cy);
                if let Some((m, mx)) = spec.rect_extrema(xw, yw) {
                    ivs.push((cz + m, cz + side + mx));
                }
            }
            Ok(ImageSet::Line(IntervalUnion::from_intervals(ivs)?))
        }
        FamilyKind::Radial { vantage, .. } => {
            let s = alpha.scalar()?;
            let a = vantage.point_at(s);
            Ok(ImageSet::Circle(radial_image(&a, cells)?))
        }
    }
}

/// Measure of the image of the cells under the map at `alpha`.
pub fn image_measure(
    family: &ProjectionFamily,
    alpha: &ParamPoint,
    cells: &CellSet,
    resolution: f64,
) -> Result<f64> {
    Ok(image_set(family, alpha, cells, resolution)?.measure())
}

/// Directions from `a` hitting the cells, as an arc union.
fn radial_image(a: &Point, cells: &CellSet) -> Result<ArcUnion> {
    let side = cells.side();
    let mut arcs = ArcUnion::new();
    for anchor in cells.anchors() {
        let (lo, hi) = cell_direction_span(a, cells, *anchor, side)?;
        arcs.insert(lo, hi)?;
    }
    Ok(arcs)
}

/// Exact angular span of one closed cell seen from `a`. Errors when `a`
/// touches the cell.
fn cell_direction_span(
    a: &Point,
    cells: &CellSet,
    anchor: [i64; 3],
    side: f64,
) -> Result<(f64, f64)> {
    let x0 = anchor[0] as f64 * side;
    let y0 = anchor[1] as f64 * side;
    let dist = {
        let dx = (x0 - a.x()).max(a.x() - (x0 + side)).max(0.0);
        let dy = (y0 - a.y()).max(a.y() - (y0 + side)).max(0.0);
        (dx * dx + dy * dy).sqrt()
    };
    if dist <= 0.0 {
        return Err(Error::MapUndefined(format!(
            "vantage point ({}, {}) touches the cell at ({x0}, {y0})",
            a.x(),
            a.y()
        )));
    }
    // The direction of p - a rotates monotonically as p moves along any
    // straight segment avoiding `a`, so the span over a convex cell is
    // attained at its corners. Measuring relative to the center direction
    // keeps the wrap-around branch out of the comparison: the whole span is
    // under pi wide because the cell sits in a half-plane missing `a`.
    let center = cells.center(anchor);
    let base = (center.y() - a.y()).atan2(center.x() - a.x());
    let mut rel_lo = 0.0f64;
    let mut rel_hi = 0.0f64;
    for (px, py) in [
        (x0, y0),
        (x0 + side, y0),
        (x0, y0 + side),
        (x0 + side, y0 + side),
    ] {
        let ang = (py - a.y()).atan2(px - a.x());
        let mut rel = ang - base;
        if rel > std::f64::consts::PI {
            rel -= std::f64::consts::TAU;
        } else if rel < -std::f64::consts::PI {
            rel += std::f64::consts::TAU;
        }
        rel_lo = rel_lo.min(rel);
        rel_hi = rel_hi.max(rel);
    }
    Ok((base + rel_lo, base + rel_hi))
}

/// Angular measure of the directions from which `a` sees the cells.
pub fn visibility(a: &Point, cells: &CellSet, resolution: f64) -> Result<f64> {
    Ok(visibility_set(a, cells, resolution)?.measure())
}

pub fn visibility_set(a: &Point, cells: &CellSet, resolution: f64) -> Result<ArcUnion> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::invalid(format!(
            "resolution {resolution} must be positive"
        )));
    }
    if cells.dim() != 2 || a.dim() != 2 {
        return Err(Error::invalid("visibility is measured in the plane"));
    }
    radial_image(a, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{CurveSpec, SurfaceSpec, VantageSet};
    use crate::fractal::four_corner_cantor;
    use approx::assert_relative_eq;
    use num_rational::Ratio;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn k(n: u32) -> CellSet {
        four_corner_cantor(Ratio::new(1, 4), n).unwrap()
    }

    #[test]
    fn horizontal_shadow_of_the_first_generation_is_one_half() {
        // At theta = 0 the four corner cells of side 1/4 project to
        // [0, 1/4] and [3/4, 1]: total length 1/2, two components.
        let f = ProjectionFamily::orthogonal();
        let img = image_set(&f, &ParamPoint::Scalar(0.0), &k(1), 1e-3).unwrap();
        assert_relative_eq!(img.measure(), 0.5, epsilon = 1e-12);
        assert_eq!(img.component_count(), 2);
    }

    #[test]
    fn diagonal_shadow_of_the_full_square_is_the_diameter() {
        let f = ProjectionFamily::orthogonal();
        let img = image_measure(&f, &ParamPoint::Scalar(FRAC_PI_4), &k(0), 1e-3).unwrap();
        assert_relative_eq!(img, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn quarter_cantor_shadows_never_exceed_projection_of_the_square() {
        let f = ProjectionFamily::orthogonal();
        let cells = k(3);
        for i in 0..16 {
            let theta = PI * i as f64 / 16.0;
            let m = image_measure(&f, &ParamPoint::Scalar(theta), &cells, 1e-3).unwrap();
            let square = theta.cos().abs() + theta.sin().abs();
            assert!(m <= square + 1e-12);
            assert!(m > 0.0);
        }
    }

    #[test]
    fn curve_image_of_a_single_cell_is_the_swept_window() {
        // Parabola gamma = -t^2/2 on [-1, 1]; cell [0, 1/4]^2, lambda = 1/2:
        // window t in [1/4, 1/2], gamma decreasing there: extrema
        // [gamma(1/2), gamma(1/4)] = [-1/8, -1/32].
        let spec = CurveSpec::parabola(-1.0, (-1.0, 1.0)).unwrap();
        let f = ProjectionFamily::curve(spec).unwrap();
        let cells = CellSet::new(2, 0.25, vec![[0, 0, 0]]).unwrap();
        let img = image_set(&f, &ParamPoint::Scalar(0.5), &cells, 1e-3).unwrap();
        let ImageSet::Line(u) = img else { panic!() };
        assert_eq!(u.component_count(), 1);
        let (lo, hi) = u.components()[0];
        assert_relative_eq!(lo, -0.125, epsilon = 1e-12);
        assert_relative_eq!(hi, 0.25 - 0.03125, epsilon = 1e-12);
    }

    #[test]
    fn curve_image_skips_cells_outside_the_window() {
        let spec = CurveSpec::parabola(-1.0, (-1.0, 1.0)).unwrap();
        let f = ProjectionFamily::curve(spec).unwrap();
        // Cell at x in [2, 2.25]: lambda - x in [-2.25, -2], outside [-1, 1].
        let cells = CellSet::new(2, 0.25, vec![[8, 0, 0]]).unwrap();
        let img = image_measure(&f, &ParamPoint::Scalar(0.0), &cells, 1e-3).unwrap();
        assert_eq!(img, 0.0);
    }

    #[test]
    fn partially_covered_cells_contribute_their_covered_part() {
        // Unit cell [0,1]^2, window [lambda - 1, lambda] with lambda = 1.7
        // clips to t in [0.7, 1]: the image is still nonempty.
        let spec = CurveSpec::parabola(-1.0, (-1.0, 1.0)).unwrap();
        let f = ProjectionFamily::curve(spec).unwrap();
        let cells = CellSet::new(2, 1.0, vec![[0, 0, 0]]).unwrap();
        let img = image_set(&f, &ParamPoint::Scalar(1.7), &cells, 1e-3).unwrap();
        let ImageSet::Line(u) = img else { panic!() };
        let (lo, hi) = u.components()[0];
        assert_relative_eq!(lo, -0.5, epsilon = 1e-12); // gamma(1)
        assert_relative_eq!(hi, 1.0 - 0.245, epsilon = 1e-12); // 1 + gamma(0.7)
    }

    #[test]
    fn surface_image_of_a_cube_matches_the_radial_extrema() {
        let spec = SurfaceSpec::paraboloid(1.0, 3.0).unwrap();
        let f = ProjectionFamily::surface(spec).unwrap();
        let cells = CellSet::new(3, 0.5, vec![[0, 0, 0]]).unwrap();
        // alpha = (0, 0): window s in [-0.5, 0]^2, nearest point the origin
        // corner, farthest (-0.5, -0.5).
        let img = image_set(&f, &ParamPoint::Planar(0.0, 0.0), &cells, 1e-3).unwrap();
        let ImageSet::Line(u) = img else { panic!() };
        let (lo, hi) = u.components()[0];
        assert_relative_eq!(lo, 0.0, epsilon = 1e-12);
        assert_relative_eq!(hi, 0.5 + 0.25 / 3.0, epsilon = 1e-12); // side + f(sqrt(.5))/3
    }

    #[test]
    fn visibility_of_a_single_cell_matches_the_exact_span() {
        // Unit cell seen from (2, 0.5): the span is the angle subtended by
        // the corners (1, 0) and (1, 1): 2 atan(0.5 / 1). The span is exact,
        // so the resolution knob must not move it.
        let cells = CellSet::new(2, 1.0, vec![[0, 0, 0]]).unwrap();
        let a = Point::new2(2.0, 0.5);
        let exact = 2.0 * (0.5f64 / 1.0).atan();
        let coarse = visibility(&a, &cells, 0.05).unwrap();
        let fine = visibility(&a, &cells, 1e-4).unwrap();
        assert_relative_eq!(coarse, exact, epsilon = 1e-12);
        assert_relative_eq!(fine, exact, epsilon = 1e-12);
    }

    #[test]
    fn visibility_of_the_square_from_far_away_shrinks_like_its_diameter() {
        let cells = k(0);
        let a = Point::new2(100.5, 0.5);
        let v = visibility(&a, &cells, 1e-3).unwrap();
        // Roughly diameter / distance.
        assert!(v > 0.5 / 100.0 && v < 2.0 / 100.0, "v = {v}");
    }

    #[test]
    fn visibility_decreases_with_generation() {
        let a = Point::new2(3.0, 2.0);
        let mut last = f64::INFINITY;
        for n in 0..4 {
            let v = visibility(&a, &k(n), 1e-4).unwrap();
            assert!(v <= last + 1e-9, "n = {n}: {v} vs {last}");
            last = v;
        }
    }

    #[test]
    fn vantage_point_inside_the_set_is_an_error() {
        let cells = k(0);
        let a = Point::new2(0.5, 0.5);
        assert!(matches!(
            visibility(&a, &cells, 1e-3),
            Err(Error::MapUndefined(_))
        ));
    }

    #[test]
    fn radial_image_agrees_with_visibility_at_the_same_vantage() {
        let vantage = VantageSet::circle(Point::new2(0.5, 0.5), 4.0).unwrap();
        let visible = crate::geom::BBox::new2([0.0, 0.0], [1.0, 1.0]).unwrap();
        let f = ProjectionFamily::radial(vantage.clone(), visible).unwrap();
        let cells = k(2);
        // Arc position pi maps to the vantage point at angle pi/4... use s=0:
        let a = vantage.point_at(0.0);
        let via_family = image_measure(&f, &ParamPoint::Scalar(0.0), &cells, 1e-4).unwrap();
        let direct = visibility(&a, &cells, 1e-4).unwrap();
        assert_relative_eq!(via_family, direct, epsilon = 1e-12);
    }

    #[test]
    fn wrapped_arcs_are_measured_once() {
        // Cells straddling the negative x-axis from the origin's right side:
        // angles near +-pi wrap; the union must not double count.
        let cells = CellSet::new(2, 1.0, vec![[-3, -1, 0], [-3, 0, 0]]).unwrap();
        let a = Point::new2(0.0, 0.0);
        let v = visibility(&a, &cells, 1e-4).unwrap();
        // Supporting rays touch the corners (-2, 1) and (-2, -1); the arc
        // through pi between them has length 2 atan(1/2).
        let span = 2.0 * (0.5f64).atan();
        assert_relative_eq!(v, span, max_relative = 1e-3);
        let set = visibility_set(&a, &cells, 1e-4).unwrap();
        assert_eq!(set.component_count(), 1);
    }
}
