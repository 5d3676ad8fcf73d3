//! Average projected length: three estimators with different error sources,
//! decay tables over generations or radii, directional shadows, and the
//! energy product bound.
//!
//! Conventions shared by all estimators:
//! * `value` is the un-normalized quantity: the parameter integral of the
//!   image length over every offset that meets the set, which by Fubini
//!   equals the area (volume) of the corresponding neighborhood `E + Γ`.
//! * `psi_averaged` is the probability-average over the family's parameter
//!   interval `A` when the family carries one, or `value` divided by the
//!   sweep support for the area-based estimators. The two agree for
//!   families whose maps are total on the set.

pub mod boxdim;
pub mod image;

pub use boxdim::{
    box_dimension_1d, box_dimension_spans, projected_dimension, ProjectedDimensionReport,
};
pub use image::{image_measure, image_set, visibility, visibility_set, ImageSet};

use crate::error::{Error, Result};
use crate::family::{CurveSpec, FamilyKind, ParamPoint, ProjectionFamily, SurfaceSpec, VantageSet};
use crate::fit::{fit_decay, DecayModel, FitResult};
use crate::geom::{sweep_area_2d, sweep_volume_3d, BBox, CellSet, IntervalUnion};
use crate::measure::{riesz_energy, CellMeasure};
use crate::rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Which estimator produced a length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateMethod {
    ParameterIntegral,
    Minkowski,
    Buffon,
}

impl std::fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EstimateMethod::ParameterIntegral => "parameter-integral",
            EstimateMethod::Minkowski => "minkowski",
            EstimateMethod::Buffon => "buffon",
        };
        f.write_str(s)
    }
}

/// One length estimate with its provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LengthEstimate {
    /// Un-normalized: neighborhood area, or the parameter integral over the
    /// full offset support.
    pub value: f64,
    /// Probability-averaged companion (see module docs); `None` when the
    /// family has no meaningful scalar average.
    pub psi_averaged: Option<f64>,
    pub method: EstimateMethod,
    /// Spatial or parameter discretization scale; 0 for pure Monte Carlo.
    pub resolution: f64,
    /// One standard error, for stochastic estimators.
    pub error_bar: Option<f64>,
    pub seed: Option<u64>,
}

/// A swept shape `Γ`: the graph used by the area-based estimators.
#[derive(Debug, Clone)]
pub enum SweepShape {
    Curve(CurveSpec),
    /// Straight graph `t -> slope * t`; the degenerate comparison case.
    Line {
        slope: f64,
        interval: (f64, f64),
    },
    Surface(SurfaceSpec),
}

impl SweepShape {
    fn x_extent(&self) -> Result<(f64, f64)> {
        match self {
            SweepShape::Curve(spec) => Ok(spec.interval()),
            SweepShape::Line { slope, interval } => {
                if slope.abs() > 1.0 || !(interval.1 > interval.0) {
                    return Err(Error::invalid("bad line shape"));
                }
                Ok(*interval)
            }
            SweepShape::Surface(_) => Err(Error::invalid("surface shapes have planar extent")),
        }
    }

    /// Graph extrema over the window `[u, v]` clipped to the domain.
    fn band(&self, u: f64, v: f64) -> Option<(f64, f64)> {
        match self {
            SweepShape::Curve(spec) => spec.range_extrema(u, v),
            SweepShape::Line { slope, interval } => {
                let lo = u.max(interval.0);
                let hi = v.min(interval.1);
                if lo > hi {
                    return None;
                }
                let (a, b) = (slope * lo, slope * hi);
                Some(if a <= b { (a, b) } else { (b, a) })
            }
            SweepShape::Surface(_) => None,
        }
    }

    /// Value range of the graph over its whole domain.
    fn global_range(&self) -> Result<(f64, f64)> {
        match self {
            SweepShape::Curve(spec) => {
                let (l1, l2) = spec.interval();
                spec.range_extrema(l1, l2)
                    .ok_or_else(|| Error::invalid("empty curve domain"))
            }
            SweepShape::Line { slope, interval } => {
                let (a, b) = (slope * interval.0, slope * interval.1);
                Ok(if a <= b { (a, b) } else { (b, a) })
            }
            SweepShape::Surface(spec) => Ok((spec.profile(0.0), spec.profile(spec.radius()))),
        }
    }
}

fn support_span(cells: &CellSet, axis: usize, extent: (f64, f64)) -> Result<(f64, f64)> {
    let (lo, hi) = cells
        .index_range(axis)
        .ok_or_else(|| Error::invalid("empty cell set"))?;
    let side = cells.side();
    Ok((
        lo as f64 * side + extent.0,
        (hi + 1) as f64 * side + extent.1,
    ))
}

/// Tight bounding box of `E + Γ`, the raw support every estimator integrates
/// over, before any sampling padding.
fn sweep_support(shape: &SweepShape, cells: &CellSet) -> Result<BBox> {
    match shape {
        SweepShape::Surface(spec) => {
            if cells.dim() != 3 {
                return Err(Error::invalid("surface sweeps need 3-d cells"));
            }
            let l = spec.radius();
            let (sx0, sx1) = support_span(cells, 0, (-l, l))?;
            let (sy0, sy1) = support_span(cells, 1, (-l, l))?;
            let (g0, g1) = shape.global_range()?;
            let (sz0, sz1) = support_span(cells, 2, (g0, g1))?;
            BBox::new(3, [sx0, sy0, sz0], [sx1, sy1, sz1])
        }
        _ => {
            if cells.dim() != 2 {
                return Err(Error::invalid("planar sweeps need 2-d cells"));
            }
            let extent = shape.x_extent()?;
            let (sx0, sx1) = support_span(cells, 0, extent)?;
            let (g0, g1) = shape.global_range()?;
            let (sy0, sy1) = support_span(cells, 1, (g0, g1))?;
            BBox::new2([sx0, sy0], [sx1, sy1])
        }
    }
}

/// The reference box `buffon_mc` drops into when none is given: the support
/// of `E + Γ` padded by one cell side. Exposed so drivers can record the box
/// alongside the estimate.
pub fn buffon_reference_box(shape: &SweepShape, cells: &CellSet) -> Result<BBox> {
    Ok(sweep_support(shape, cells)?.pad(cells.side()))
}

/// Average image length by trapezoid quadrature over the parameter space.
///
/// `psi_averaged` integrates against the family's probability measure on its
/// parameter interval; `value` integrates the image length over every offset
/// whose map meets the set (for sweep families this is the parameter support
/// extended by the footprint of the set, making `value` the exact area of
/// `E + Γ` up to quadrature error).
pub fn favard_parameter_integral(
    family: &ProjectionFamily,
    cells: &CellSet,
    param_nodes: usize,
    resolution: f64,
) -> Result<LengthEstimate> {
    if param_nodes < 2 {
        return Err(Error::invalid("need at least two parameter nodes"));
    }
    if cells.is_empty() {
        return Err(Error::invalid("empty cell set"));
    }
    let quad = family.psi_trapezoid(param_nodes)?;
    let psi_avg = weighted_image_sum(family, cells, &quad, resolution)?;

    let value = match family.kind() {
        FamilyKind::Orthogonal | FamilyKind::Radial { .. } => psi_avg * family.param_measure(),
        FamilyKind::Curve { .. } | FamilyKind::Line { .. } => {
            // Same trapezoid rule, stretched over the full offset support at
            // matching node density; the image vanishes at both ends.
            let (lo, hi) = family.support_interval(cells)?;
            let (plo, phi) = family.param_interval()?;
            let density = param_nodes as f64 / (phi - plo);
            let n = (((hi - lo) * density).ceil() as usize).max(2);
            let steps = n as f64;
            let nodes: Vec<(ParamPoint, f64)> = (0..=n)
                .map(|i| {
                    let t = lo + (hi - lo) * i as f64 / steps;
                    let w = if i == 0 || i == n { 0.5 } else { 1.0 } * (hi - lo) / steps;
                    (ParamPoint::Scalar(t), w)
                })
                .collect();
            weighted_image_sum(family, cells, &nodes, resolution)?
        }
        FamilyKind::Surface { spec } => {
            let l = spec.radius();
            let side = cells.side();
            let (ix_lo, ix_hi) = cells.index_range(0).unwrap();
            let (iy_lo, iy_hi) = cells.index_range(1).unwrap();
            let x0 = ix_lo as f64 * side - l;
            let x1 = (ix_hi + 1) as f64 * side + l;
            let y0 = iy_lo as f64 * side - l;
            let y1 = (iy_hi + 1) as f64 * side + l;
            // Match the node density of the disk quadrature.
            let r = l / 3.0;
            let density = param_nodes as f64 / (std::f64::consts::PI * r * r);
            let nx = (((x1 - x0) * (y1 - y0) * density).sqrt().ceil() as usize).max(2);
            let (wx, wy) = ((x1 - x0) / nx as f64, (y1 - y0) / nx as f64);
            let mut nodes = Vec::with_capacity(nx * nx);
            for i in 0..nx {
                for j in 0..nx {
                    nodes.push((
                        ParamPoint::Planar(x0 + (i as f64 + 0.5) * wx, y0 + (j as f64 + 0.5) * wy),
                        wx * wy,
                    ));
                }
            }
            weighted_image_sum(family, cells, &nodes, resolution)?
        }
    };

    Ok(LengthEstimate {
        value,
        psi_averaged: Some(psi_avg),
        method: EstimateMethod::ParameterIntegral,
        resolution,
        error_bar: None,
        seed: None,
    })
}

fn weighted_image_sum(
    family: &ProjectionFamily,
    cells: &CellSet,
    nodes: &[(ParamPoint, f64)],
    resolution: f64,
) -> Result<f64> {
    let terms: Vec<Result<f64>> = nodes
        .par_iter()
        .map(|(alpha, w)| Ok(w * image_measure(family, alpha, cells, resolution)?))
        .collect();
    let mut sum = 0.0;
    for t in terms {
        sum += t?;
    }
    Ok(sum)
}

/// Area of the neighborhood `E + Γ` by a column sweep at the given pixel
/// pitch. The per-column bands are exact, so the only error is the one-sided
/// pixel overcount, which shrinks linearly with the pitch.
pub fn favard_minkowski(shape: &SweepShape, cells: &CellSet, pitch: f64) -> Result<LengthEstimate> {
    match shape {
        SweepShape::Surface(spec) => {
            if cells.dim() != 3 {
                return Err(Error::invalid("surface sweeps need 3-d cells"));
            }
            let l = spec.radius();
            let extent = ((-l, l), (-l, l));
            let band2 = |xw: (f64, f64), yw: (f64, f64)| spec.rect_extrema(xw, yw);
            let value = sweep_volume_3d(cells, extent, &band2, pitch)?;
            let (x0, x1) = support_span(cells, 0, (-l, l))?;
            let (y0, y1) = support_span(cells, 1, (-l, l))?;
            let base = (x1 - x0) * (y1 - y0);
            Ok(LengthEstimate {
                value,
                psi_averaged: Some(value / base),
                method: EstimateMethod::Minkowski,
                resolution: pitch,
                error_bar: None,
                seed: None,
            })
        }
        _ => {
            if cells.dim() != 2 {
                return Err(Error::invalid("planar sweeps need 2-d cells"));
            }
            let extent = shape.x_extent()?;
            let band = |u: f64, v: f64| shape.band(u, v);
            let value = sweep_area_2d(cells, extent, &band, pitch)?;
            let (lo, hi) = support_span(cells, 0, extent)?;
            Ok(LengthEstimate {
                value,
                psi_averaged: Some(value / (hi - lo)),
                method: EstimateMethod::Minkowski,
                resolution: pitch,
                error_bar: None,
                seed: None,
            })
        }
    }
}

/// Area of `E + Γ` by rejection sampling of a reference box containing it.
/// `sample_box` defaults to the exact support box padded by one cell side;
/// a caller-provided box must still contain the support. Deterministic for
/// a fixed seed at any thread count: drops are dealt to fixed batches with
/// one generator stream per batch, and the hit counts are integers.
pub fn buffon_mc(
    shape: &SweepShape,
    cells: &CellSet,
    drops: usize,
    sample_box: Option<&BBox>,
    seed: u64,
) -> Result<LengthEstimate> {
    if drops == 0 {
        return Err(Error::invalid("need at least one drop"));
    }
    if cells.is_empty() {
        return Err(Error::invalid("empty cell set"));
    }
    let side = cells.side();
    let anchors = cells.anchors();

    const BATCH: usize = 8192;
    let batches = drops.div_ceil(BATCH);

    match shape {
        SweepShape::Surface(spec) => {
            let support = sweep_support(shape, cells)?;
            let base = (support.hi[0] - support.lo[0]) * (support.hi[1] - support.lo[1]);
            let reference = resolve_sample_box(sample_box, &support, side)?;
            let ([x0, y0, z0], [x1, y1, z1]) = (reference.lo, reference.hi);
            let vol = (x1 - x0) * (y1 - y0) * (z1 - z0);
            let hit = |u: f64, v: f64, w: f64| {
                anchors.iter().any(|a| {
                    let cx = a[0] as f64 * side;
                    let cy = a[1] as f64 * side;
                    let cz = a[2] as f64 * side;
                    spec.rect_extrema((u - cx - side, u - cx), (v - cy - side, v - cy))
                        .is_some_and(|(m, mx)| w >= cz + m && w <= cz + side + mx)
                })
            };
            let counts: Vec<u64> = (0..batches)
                .into_par_iter()
                .map(|b| {
                    let mut r = rng::stream(seed, b as u64);
                    let n = BATCH.min(drops - b * BATCH);
                    let mut c = 0u64;
                    for _ in 0..n {
                        let u = r.gen_range(x0..=x1);
                        let v = r.gen_range(y0..=y1);
                        let w = r.gen_range(z0..=z1);
                        if hit(u, v, w) {
                            c += 1;
                        }
                    }
                    c
                })
                .collect();
            let hits: u64 = counts.iter().sum();
            finish_buffon(hits, drops, vol, base, seed)
        }
        _ => {
            let support = sweep_support(shape, cells)?;
            let base = support.hi[0] - support.lo[0];
            let reference = resolve_sample_box(sample_box, &support, side)?;
            let (x0, y0) = (reference.lo[0], reference.lo[1]);
            let (x1, y1) = (reference.hi[0], reference.hi[1]);
            let area = (x1 - x0) * (y1 - y0);
            let hit = |u: f64, v: f64| {
                anchors.iter().any(|a| {
                    let cx = a[0] as f64 * side;
                    let cy = a[1] as f64 * side;
                    shape
                        .band(u - cx - side, u - cx)
                        .is_some_and(|(m, mx)| v >= cy + m && v <= cy + side + mx)
                })
            };
            let counts: Vec<u64> = (0..batches)
                .into_par_iter()
                .map(|b| {
                    let mut r = rng::stream(seed, b as u64);
                    let n = BATCH.min(drops - b * BATCH);
                    let mut c = 0u64;
                    for _ in 0..n {
                        let u = r.gen_range(x0..=x1);
                        let v = r.gen_range(y0..=y1);
                        if hit(u, v) {
                            c += 1;
                        }
                    }
                    c
                })
                .collect();
            let hits: u64 = counts.iter().sum();
            finish_buffon(hits, drops, area, base, seed)
        }
    }
}

// Default: the support box padded by one cell side. A caller box must cover
// the support, or drops would systematically miss part of `E + Γ`.
fn resolve_sample_box(given: Option<&BBox>, support: &BBox, side: f64) -> Result<BBox> {
    match given {
        None => Ok(support.pad(side)),
        Some(b) => {
            if b.dim != support.dim {
                return Err(Error::invalid("sample box dimension mismatch"));
            }
            for k in 0..support.dim as usize {
                if b.lo[k] > support.lo[k] + 1e-12 || b.hi[k] < support.hi[k] - 1e-12 {
                    return Err(Error::invalid(format!(
                        "sample box [{}, {}] does not cover the support [{}, {}] on axis {k}",
                        b.lo[k], b.hi[k], support.lo[k], support.hi[k]
                    )));
                }
            }
            Ok(*b)
        }
    }
}

fn finish_buffon(
    hits: u64,
    drops: usize,
    box_measure: f64,
    support: f64,
    seed: u64,
) -> Result<LengthEstimate> {
    let p = hits as f64 / drops as f64;
    let value = box_measure * p;
    let se = box_measure * (p * (1.0 - p) / drops as f64).sqrt();
    Ok(LengthEstimate {
        value,
        psi_averaged: Some(value / support),
        method: EstimateMethod::Buffon,
        resolution: 0.0,
        error_bar: Some(se),
        seed: Some(seed),
    })
}

/// Un-normalized integral of the visibility over a vantage carrier, with the
/// normalized average alongside.
pub fn visibility_integral(
    vantage: &VantageSet,
    cells: &CellSet,
    vantage_nodes: usize,
    resolution: f64,
) -> Result<LengthEstimate> {
    if vantage_nodes == 0 {
        return Err(Error::invalid("need at least one vantage node"));
    }
    let pts = vantage.grid(vantage_nodes);
    let terms: Vec<Result<f64>> = pts
        .par_iter()
        .map(|a| visibility(a, cells, resolution))
        .collect();
    let mut sum = 0.0;
    for t in terms {
        sum += t?;
    }
    let len = vantage.length();
    let avg = sum / vantage_nodes as f64;
    Ok(LengthEstimate {
        value: avg * len,
        psi_averaged: Some(avg),
        method: EstimateMethod::ParameterIntegral,
        resolution,
        error_bar: None,
        seed: None,
    })
}

/// One row of a decay table: the driving quantity (a scale or a generation's
/// cell side) and the estimate made there.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayRow {
    pub x: f64,
    pub label: String,
    pub estimate: LengthEstimate,
}

/// Estimates across a sweep of generations or radii, ready for a decay fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayTable {
    /// What is decaying, e.g. "psi-averaged projected length".
    pub quantity: String,
    pub rows: Vec<DecayRow>,
}

impl DecayTable {
    pub fn new(quantity: impl Into<String>) -> DecayTable {
        DecayTable {
            quantity: quantity.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, x: f64, label: impl Into<String>, estimate: LengthEstimate) {
        self.rows.push(DecayRow {
            x,
            label: label.into(),
            estimate,
        });
    }

    /// Fit the configured decay model to (x, y) where y is the ψ-averaged
    /// value when available (`use_psi`) or the raw value.
    pub fn fit(&self, model: DecayModel, use_psi: bool) -> Result<FitResult> {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.x).collect();
        let ys: Vec<f64> = self
            .rows
            .iter()
            .map(|r| {
                if use_psi {
                    r.estimate.psi_averaged.unwrap_or(r.estimate.value)
                } else {
                    r.estimate.value
                }
            })
            .collect();
        fit_decay(&xs, &ys, model)
    }
}

/// Outcome of the product bound `favard x energy >= floor`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub s: f64,
    pub energy: f64,
    pub favard: f64,
    pub product: f64,
    pub floor: f64,
    pub passed: bool,
}

/// Check the compensation law: sets that are hard to see (small average
/// projected length) must be energetically spread out (large `I_s`), so the
/// product stays above a floor. A zero average with positive mass cannot be
/// explained by the law and is reported as an inconsistency.
pub fn energy_lower_bound_check(
    family: &ProjectionFamily,
    mu: &CellMeasure,
    s: f64,
    estimate: &LengthEstimate,
    floor: f64,
) -> Result<LowerBoundReport> {
    let favard = estimate
        .psi_averaged
        .ok_or_else(|| Error::invalid("the product bound needs a psi-averaged estimate"))?;
    if !(floor > 0.0) {
        return Err(Error::invalid("floor must be positive"));
    }
    for anchor in mu.support().anchors() {
        let c = mu.support().center(*anchor);
        if !family.contains(&c) {
            return Err(Error::invalid(format!(
                "measure support leaves the admissible domain at {c:?}"
            )));
        }
    }
    if mu.mass() > 0.0 && !(favard > 0.0) {
        return Err(Error::Inconsistency(format!(
            "positive mass with zero average projected length (favard = {favard})"
        )));
    }
    let energy = riesz_energy(mu, s)?;
    let product = favard * energy;
    Ok(LowerBoundReport {
        s,
        energy,
        favard,
        product,
        floor,
        passed: product >= floor,
    })
}

/// Shadow of a cell set along integer direction data: the values of the
/// functional `n · (x, y)` over the set, computed corner-exactly so touching
/// cell shadows merge instead of leaving spurious gaps.
#[derive(Debug, Clone)]
pub struct ShadowReport {
    /// Union in functional units.
    pub union: IntervalUnion,
    pub component_count: usize,
    /// Length after dividing by |n|: the measure of the orthogonal
    /// projection onto the normal direction.
    pub measure: f64,
    pub normal: (i64, i64),
}

pub fn directional_shadow(cells: &CellSet, normal: (i64, i64)) -> Result<ShadowReport> {
    if normal == (0, 0) {
        return Err(Error::invalid("normal direction must be nonzero"));
    }
    if cells.dim() != 2 {
        return Err(Error::invalid("directional shadows live in the plane"));
    }
    let side = cells.side();
    let (n0, n1) = normal;
    let min_b = n0.min(0) + n1.min(0);
    let max_b = n0.max(0) + n1.max(0);
    let mut union = IntervalUnion::new();
    for a in cells.anchors() {
        // Integer corner functional: products are exact in f64 for any
        // realistic grid, so adjacent shadows share identical endpoints.
        let c = n0 * a[0] + n1 * a[1];
        union.insert(((c + min_b) as f64) * side, ((c + max_b) as f64) * side)?;
    }
    let norm = ((n0 * n0 + n1 * n1) as f64).sqrt();
    Ok(ShadowReport {
        component_count: union.component_count(),
        measure: union.measure() / norm,
        union,
        normal,
    })
}
