//! Parametrized families of maps to a line or circle, with a probability
//! measure on the parameter space.
//!
//! Four families are provided: orthogonal projections (angles with the
//! uniform measure on [0, pi)), radial projections from a rectifiable
//! vantage set, sweeps along a strictly convex curve graph, and sweeps along
//! a convex rotational surface graph. Each family knows its admissible
//! domain, its parameter quadrature, and how to evaluate a single map
//! strictly (points outside the domain of a partial map are an error, not a
//! silent skip).

pub mod curve;
pub mod transversality;
pub mod vantage;

pub use curve::{
    decompose_curve, Concavity, CurvePiece, CurveSpec, DecomposedPiece, RealFn, SurfaceSpec,
};
pub use transversality::{
    transversality_estimate, tube_condition_check, DeltaStats, TransversalityOptions,
    TransversalityReport, TubeReport,
};
pub use vantage::VantageSet;

use crate::error::{Error, Result};
use crate::geom::{BBox, CellSet, Point};
use crate::rng;
use rand::Rng;
use std::f64::consts::PI;

/// Target space of a family: an affine line or the unit circle of
/// directions, where distances wrap modulo 2π.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Codomain {
    Line,
    Circle,
}

/// A point in parameter space: an angle, an arc-length position, a sweep
/// offset, or a planar offset for surface families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamPoint {
    Scalar(f64),
    Planar(f64, f64),
}

impl ParamPoint {
    pub fn scalar(self) -> Result<f64> {
        match self {
            ParamPoint::Scalar(v) => Ok(v),
            ParamPoint::Planar(..) => Err(Error::invalid("expected a scalar parameter")),
        }
    }
}

#[derive(Clone, Debug)]
pub enum FamilyKind {
    /// Angle θ in [0, π); maps are x·cosθ + y·sinθ.
    Orthogonal,
    /// Arc-length position on the vantage carrier; maps are direction angles.
    Radial { vantage: VantageSet, visible: BBox },
    /// Sweep offset λ in A = [L1 + h, L2]; maps are a2 + γ(λ - a1).
    Curve { spec: CurveSpec, transversal: bool },
    /// Straight-line sweeps, kept for counterexamples; never transversal.
    Line { slope: f64, interval: (f64, f64) },
    /// Planar offset α in the disk of radius L/3; maps are a3 + γ(α - a_xy).
    Surface { spec: SurfaceSpec },
}

/// A family of maps `Φ_α` from the admissible domain to a line or circle,
/// carrying a probability measure ψ on its parameter space.
#[derive(Clone, Debug)]
pub struct ProjectionFamily {
    name: String,
    kind: FamilyKind,
    omega: BBox,
    codomain: Codomain,
    /// Parameter dimension.
    m: u8,
    /// Uniform Lipschitz bound of (α, x) -> Φ_α(x) on the admissible domain.
    lipschitz: f64,
}

impl ProjectionFamily {
    /// Orthogonal projections of the plane onto lines through the origin.
    pub fn orthogonal() -> ProjectionFamily {
        let big = 1e12;
        ProjectionFamily {
            name: "orthogonal".into(),
            kind: FamilyKind::Orthogonal,
            omega: BBox::new2([-big, -big], [big, big]).unwrap(),
            codomain: Codomain::Line,
            m: 1,
            lipschitz: 1.0,
        }
    }

    /// Radial projections from a vantage carrier onto directions. The
    /// visible box must keep a positive distance from the carrier.
    pub fn radial(vantage: VantageSet, visible: BBox) -> Result<ProjectionFamily> {
        if visible.dim != 2 {
            return Err(Error::invalid("radial families live in the plane"));
        }
        let d = vantage.min_dist_to_bbox(&visible, 4096);
        if !(d > 0.0) {
            return Err(Error::invalid(
                "vantage set touches the visible box; radial maps degenerate",
            ));
        }
        Ok(ProjectionFamily {
            name: "radial".into(),
            kind: FamilyKind::Radial { vantage, visible },
            omega: visible,
            codomain: Codomain::Circle,
            m: 1,
            lipschitz: 1.0 / d,
        })
    }

    /// Sweeps along a strictly convex curve graph. With I = [L1, L2] and
    /// h = (L2 - L1)/2, the admissible domain is Ω = [0, h]^2 and the
    /// parameter interval is A = [L1 + h, L2], so every map is total on Ω.
    pub fn curve(spec: CurveSpec) -> Result<ProjectionFamily> {
        let (l1, l2) = spec.interval();
        let h = 0.5 * (l2 - l1);
        if !(h > 0.0) {
            return Err(Error::invalid("curve interval has no interior"));
        }
        let omega = BBox::new2([0.0, 0.0], [h, h])?;
        let name = format!("curve[{}]", spec.name());
        Ok(ProjectionFamily {
            name,
            kind: FamilyKind::Curve {
                spec,
                transversal: true,
            },
            omega,
            codomain: Codomain::Line,
            m: 1,
            lipschitz: 2f64.sqrt(),
        })
    }

    /// Straight-line sweeps `a2 + slope·(λ - a1)` on the same domain layout
    /// as curve sweeps. The derivative of the slope is zero, so this family
    /// fails every transversality bound; it exists to demonstrate that.
    pub fn line(slope: f64, interval: (f64, f64)) -> Result<ProjectionFamily> {
        if slope.abs() > 1.0 || !slope.is_finite() {
            return Err(Error::invalid("line slope must lie in [-1, 1]"));
        }
        let (l1, l2) = interval;
        let h = 0.5 * (l2 - l1);
        if !(h > 0.0) || !l1.is_finite() || !l2.is_finite() {
            return Err(Error::invalid("bad line sweep interval"));
        }
        Ok(ProjectionFamily {
            name: format!("line(slope={slope})"),
            kind: FamilyKind::Line { slope, interval },
            omega: BBox::new2([0.0, 0.0], [h, h])?,
            codomain: Codomain::Line,
            m: 1,
            lipschitz: (1.0 + slope * slope).sqrt(),
        })
    }

    /// Sweeps along a convex rotational surface graph over the disk of
    /// radius L. Parameters run over the disk of radius L/3 and the
    /// admissible domain is the ball of radius L/3, so the radial offset
    /// stays within [0, L] and every map is total.
    pub fn surface(spec: SurfaceSpec) -> Result<ProjectionFamily> {
        let l = spec.radius();
        let r = l / 3.0;
        let omega = BBox::new(3, [-r, -r, -r], [r, r, r])?;
        let name = format!("surface[{}]", spec.name());
        Ok(ProjectionFamily {
            name,
            kind: FamilyKind::Surface { spec },
            omega,
            codomain: Codomain::Line,
            m: 1,
            lipschitz: 3f64.sqrt(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn codomain(&self) -> Codomain {
        self.codomain
    }

    /// Dimension of the parameter set A: 1 for sweeps driven by a scalar,
    /// 2 for the surface family's parameter disk.
    pub fn param_dim(&self) -> u8 {
        match self.kind {
            FamilyKind::Surface { .. } => 2,
            _ => 1,
        }
    }

    /// Dimension of the codomain the maps land in. Every family here
    /// projects to a line or a circle, so this is 1; it is the exponent m
    /// in the transversality bound.
    pub fn codomain_dim(&self) -> u8 {
        self.m
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Axis-aligned hull of the admissible domain. For surface families the
    /// true domain is the inscribed ball; use `contains` for membership.
    pub fn omega(&self) -> &BBox {
        &self.omega
    }

    /// Membership in the admissible domain.
    pub fn contains(&self, p: &Point) -> bool {
        match &self.kind {
            FamilyKind::Surface { spec } => {
                p.dim() == 3 && {
                    let r = spec.radius() / 3.0;
                    (p.x() * p.x() + p.y() * p.y() + p.z() * p.z()).sqrt() <= r
                }
            }
            _ => p.dim() == 2 && self.omega.contains(p),
        }
    }

    /// Parameter interval [lo, hi) for scalar families.
    pub fn param_interval(&self) -> Result<(f64, f64)> {
        match &self.kind {
            FamilyKind::Orthogonal => Ok((0.0, PI)),
            FamilyKind::Radial { vantage, .. } => Ok((0.0, vantage.length())),
            FamilyKind::Curve { spec, .. } => {
                let (l1, l2) = spec.interval();
                Ok((l1 + 0.5 * (l2 - l1), l2))
            }
            FamilyKind::Line { interval, .. } => {
                let (l1, l2) = interval;
                Ok((l1 + 0.5 * (l2 - l1), *l2))
            }
            FamilyKind::Surface { .. } => Err(Error::invalid(
                "surface parameters are planar, not an interval",
            )),
        }
    }

    /// Total mass of the un-normalized parameter measure (interval length,
    /// carrier length, or disk area); ψ is this measure normalized to 1.
    pub fn param_measure(&self) -> f64 {
        match &self.kind {
            FamilyKind::Orthogonal => PI,
            FamilyKind::Radial { vantage, .. } => vantage.length(),
            FamilyKind::Curve { .. } | FamilyKind::Line { .. } => {
                let (lo, hi) = self.param_interval().unwrap();
                hi - lo
            }
            FamilyKind::Surface { spec } => {
                let r = spec.radius() / 3.0;
                PI * r * r
            }
        }
    }

    /// Deterministic ψ-quadrature: parameter nodes and weights summing to 1.
    /// Scalar families use the midpoint rule with `n` nodes; surface
    /// families use an equal-area polar grid with about `n` nodes.
    pub fn psi_quadrature(&self, n: usize) -> Result<Vec<(ParamPoint, f64)>> {
        if n == 0 {
            return Err(Error::invalid("quadrature needs at least one node"));
        }
        match &self.kind {
            FamilyKind::Surface { spec } => {
                let r = spec.radius() / 3.0;
                let nr = (n as f64).sqrt().ceil() as usize;
                let nphi = nr;
                let w = 1.0 / (nr * nphi) as f64;
                let mut out = Vec::with_capacity(nr * nphi);
                for i in 0..nr {
                    // Equal-area radial bands: rho = r sqrt((i + 1/2) / nr).
                    let rho = r * ((i as f64 + 0.5) / nr as f64).sqrt();
                    for j in 0..nphi {
                        let phi = (j as f64 + 0.5) / nphi as f64 * std::f64::consts::TAU;
                        out.push((ParamPoint::Planar(rho * phi.cos(), rho * phi.sin()), w));
                    }
                }
                Ok(out)
            }
            _ => {
                let (lo, hi) = self.param_interval()?;
                let w = 1.0 / n as f64;
                Ok((0..n)
                    .map(|i| {
                        let t = lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
                        (ParamPoint::Scalar(t), w)
                    })
                    .collect())
            }
        }
    }

    /// Trapezoid ψ-quadrature with `n` nodes, weights summing to 1. Angle
    /// and circle-vantage parameters are periodic, where the trapezoid rule
    /// degenerates to equal weights on a uniform grid including the left
    /// endpoint; non-periodic intervals take half weights at both ends.
    /// Surface families keep the equal-area polar grid: the disk has no
    /// distinguished endpoints to halve.
    pub fn psi_trapezoid(&self, n: usize) -> Result<Vec<(ParamPoint, f64)>> {
        if n < 2 {
            return Err(Error::invalid(
                "trapezoid quadrature needs at least two nodes",
            ));
        }
        let periodic = match &self.kind {
            FamilyKind::Orthogonal => true,
            FamilyKind::Radial { vantage, .. } => matches!(vantage, VantageSet::Circle { .. }),
            FamilyKind::Surface { .. } => return self.psi_quadrature(n),
            _ => false,
        };
        let (lo, hi) = self.param_interval()?;
        if periodic {
            let w = 1.0 / n as f64;
            Ok((0..n)
                .map(|i| (ParamPoint::Scalar(lo + (hi - lo) * i as f64 / n as f64), w))
                .collect())
        } else {
            let steps = (n - 1) as f64;
            Ok((0..n)
                .map(|i| {
                    let t = lo + (hi - lo) * i as f64 / steps;
                    let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 } / steps;
                    (ParamPoint::Scalar(t), w)
                })
                .collect())
        }
    }

    /// Stratified ψ-samples: one uniform draw per equal-measure stratum.
    /// Returns the achieved sample count (surface grids round down to a
    /// square number).
    pub fn psi_stratified(&self, n: usize, rng: &mut impl Rng) -> Result<Vec<ParamPoint>> {
        if n == 0 {
            return Err(Error::invalid("need at least one sample"));
        }
        match &self.kind {
            FamilyKind::Surface { spec } => {
                let r = spec.radius() / 3.0;
                let nr = (n as f64).sqrt().floor().max(1.0) as usize;
                let nphi = nr;
                let mut out = Vec::with_capacity(nr * nphi);
                for i in 0..nr {
                    for j in 0..nphi {
                        let u: f64 = rng.gen();
                        let v: f64 = rng.gen();
                        let rho = r * ((i as f64 + u) / nr as f64).sqrt();
                        let phi = (j as f64 + v) / nphi as f64 * std::f64::consts::TAU;
                        out.push(ParamPoint::Planar(rho * phi.cos(), rho * phi.sin()));
                    }
                }
                Ok(out)
            }
            _ => {
                let (lo, hi) = self.param_interval()?;
                let w = (hi - lo) / n as f64;
                Ok((0..n)
                    .map(|i| {
                        let u: f64 = rng.gen();
                        ParamPoint::Scalar(lo + (i as f64 + u) * w)
                    })
                    .collect())
            }
        }
    }

    /// Uniform point of the admissible domain (rejection-sampled into the
    /// ball for surface families).
    pub fn sample_omega(&self, rng: &mut impl Rng) -> Point {
        loop {
            let x = rng.gen_range(self.omega.lo[0]..=self.omega.hi[0]);
            let y = rng.gen_range(self.omega.lo[1]..=self.omega.hi[1]);
            let p = match &self.kind {
                FamilyKind::Surface { .. } => {
                    let z = rng.gen_range(self.omega.lo[2]..=self.omega.hi[2]);
                    Point::new3(x, y, z)
                }
                _ => Point::new2(x, y),
            };
            if self.contains(&p) {
                return p;
            }
        }
    }

    /// Evaluate the map at parameter α on point p. Partial maps (curve and
    /// surface sweeps outside Ω) report which point fell outside which map
    /// rather than guessing.
    pub fn project(&self, alpha: &ParamPoint, p: &Point) -> Result<f64> {
        match (&self.kind, alpha) {
            (FamilyKind::Orthogonal, ParamPoint::Scalar(theta)) => {
                Ok(p.x() * theta.cos() + p.y() * theta.sin())
            }
            (FamilyKind::Radial { vantage, .. }, ParamPoint::Scalar(s)) => {
                let a = vantage.point_at(*s);
                let dx = p.x() - a.x();
                let dy = p.y() - a.y();
                if dx == 0.0 && dy == 0.0 {
                    return Err(Error::MapUndefined(format!(
                        "point ({}, {}) coincides with the vantage point at arc position {s}",
                        p.x(),
                        p.y()
                    )));
                }
                Ok(dy.atan2(dx))
            }
            (FamilyKind::Curve { spec, .. }, ParamPoint::Scalar(l)) => {
                let t = l - p.x();
                let (l1, l2) = spec.interval();
                if t < l1 - 1e-12 || t > l2 + 1e-12 {
                    return Err(Error::MapUndefined(format!(
                        "sweep offset {l} puts x = {} at curve parameter {t}, outside [{l1}, {l2}]",
                        p.x()
                    )));
                }
                Ok(p.y() + spec.eval(t.clamp(l1, l2)))
            }
            (FamilyKind::Line { slope, interval }, ParamPoint::Scalar(l)) => {
                let t = l - p.x();
                if t < interval.0 - 1e-12 || t > interval.1 + 1e-12 {
                    return Err(Error::MapUndefined(format!(
                        "sweep offset {l} puts x = {} outside the line window",
                        p.x()
                    )));
                }
                Ok(p.y() + slope * t)
            }
            (FamilyKind::Surface { spec }, ParamPoint::Planar(a1, a2)) => {
                let sx = a1 - p.x();
                let sy = a2 - p.y();
                let r = (sx * sx + sy * sy).sqrt();
                if r > spec.radius() + 1e-12 {
                    return Err(Error::MapUndefined(format!(
                        "offset ({a1}, {a2}) puts ({}, {}) at radial distance {r}, beyond {}",
                        p.x(),
                        p.y(),
                        spec.radius()
                    )));
                }
                Ok(p.z() + spec.profile(r.min(spec.radius())))
            }
            _ => Err(Error::invalid("parameter shape does not match the family")),
        }
    }

    /// Distance in the codomain; circles wrap modulo 2π.
    pub fn codist(&self, a: f64, b: f64) -> f64 {
        match self.codomain {
            Codomain::Line => (a - b).abs(),
            Codomain::Circle => {
                let d = (a - b).rem_euclid(std::f64::consts::TAU);
                d.min(std::f64::consts::TAU - d)
            }
        }
    }

    /// Parameter range over which maps can meet the given cells at all: for
    /// sweep families this extends the parameter interval by the support of
    /// the cells, so integrating the image measure over it equals the area
    /// of the corresponding neighborhood. For angle and vantage families it
    /// is the parameter interval itself.
    pub fn support_interval(&self, cells: &CellSet) -> Result<(f64, f64)> {
        let window = match &self.kind {
            FamilyKind::Curve { spec, .. } => Some(spec.interval()),
            FamilyKind::Line { interval, .. } => Some(*interval),
            _ => None,
        };
        match window {
            Some((l1, l2)) => {
                let (ix_lo, ix_hi) = cells
                    .index_range(0)
                    .ok_or_else(|| Error::invalid("empty cell set has no support"))?;
                let side = cells.side();
                Ok((ix_lo as f64 * side + l1, (ix_hi + 1) as f64 * side + l2))
            }
            None => self.param_interval(),
        }
    }

    /// Sampled modulus-of-continuity probe. Evaluates the map on a grid of
    /// parameters crossed with sampled domain points and returns
    /// `(point_ratio, param_ratio)`: the largest observed
    /// `|Φ_α(x) - Φ_α(y)| / |x - y|` and the largest
    /// `|Φ_α(x) - Φ_β(x)| / |α - β|` over adjacent grid parameters. The
    /// first must stay below the recorded Lipschitz constant; both certify
    /// joint continuity at the probed scale.
    pub fn continuity_probe(&self, grid: usize, seed: u64) -> Result<(f64, f64)> {
        if grid < 4 {
            return Err(Error::invalid(
                "continuity probe needs a grid of at least 4",
            ));
        }
        let mut rng = rng::stream(seed, 0);
        let points: Vec<Point> = (0..64).map(|_| self.sample_omega(&mut rng)).collect();
        let nodes = self.psi_quadrature(grid)?;
        let mut point_ratio = 0.0f64;
        let mut param_ratio = 0.0f64;
        for (i, (alpha, _)) in nodes.iter().enumerate() {
            let values: Vec<f64> = points
                .iter()
                .map(|p| self.project(alpha, p))
                .collect::<Result<_>>()?;
            for j in 1..points.len() {
                let d = points[j - 1].dist(&points[j]);
                if d > 1e-9 {
                    let dv = self.codist(values[j - 1], values[j]);
                    point_ratio = point_ratio.max(dv / d);
                }
            }
            if i + 1 < nodes.len() {
                let (beta, _) = &nodes[i + 1];
                let da = param_dist(alpha, beta);
                if da > 1e-12 {
                    for (p, v) in points.iter().zip(&values) {
                        let w = self.project(beta, p)?;
                        param_ratio = param_ratio.max(self.codist(*v, w) / da);
                    }
                }
            }
        }
        Ok((point_ratio, param_ratio))
    }
}

fn param_dist(a: &ParamPoint, b: &ParamPoint) -> f64 {
    match (a, b) {
        (ParamPoint::Scalar(x), ParamPoint::Scalar(y)) => (x - y).abs(),
        (ParamPoint::Planar(x1, y1), ParamPoint::Planar(x2, y2)) => {
            ((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt()
        }
        _ => f64::INFINITY,
    }
}
