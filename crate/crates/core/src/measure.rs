//! Measures on cell sets, Riesz energies, pushforwards, and the
//! Frostman-style regularity probe.
//!
//! A `CellMeasure` is a probability measure that is uniform within each cell
//! of its support and carries one weight per cell. Quadrature discretizes
//! each cell into `order^dim` equal subcells sampled at their midpoints; the
//! diagonal of the double integral in the energy is replaced, per point, by
//! the exact self-energy of a uniform subcell, so refining the order
//! converges to the energy of the continuous measure instead of dropping the
//! near-diagonal mass.

use crate::error::{Error, Result};
use crate::geom::{CellSet, Point};
use crate::rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Probability measure with cell-wise uniform density.
#[derive(Debug, Clone)]
pub struct CellMeasure {
    support: CellSet,
    weights: Vec<f64>,
    quadrature_order: u32,
}

/// One quadrature node: location, weight, and the side of the subcell the
/// node represents (used by the energy self-term).
#[derive(Debug, Clone, Copy)]
pub struct QuadNode {
    pub point: Point,
    pub weight: f64,
    pub subcell_side: f64,
}

impl CellMeasure {
    /// Attach explicit per-cell weights. Weights must be nonnegative, finite,
    /// and sum to 1 within 1e-12.
    pub fn new(support: CellSet, weights: Vec<f64>, quadrature_order: u32) -> Result<CellMeasure> {
        if support.is_empty() {
            return Err(Error::invalid("a measure needs a nonempty support"));
        }
        if weights.len() != support.count() {
            return Err(Error::invalid(format!(
                "{} weights for {} cells",
                weights.len(),
                support.count()
            )));
        }
        if quadrature_order == 0 || quadrature_order > 64 {
            return Err(Error::invalid("quadrature order must be in 1..=64"));
        }
        let mut total = 0.0;
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::invalid(format!("bad weight {w}")));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "weights sum to {total}, expected 1 within 1e-12"
            )));
        }
        Ok(CellMeasure {
            support,
            weights,
            quadrature_order,
        })
    }

    /// The natural measure: equal weight on every cell.
    pub fn equidistributed(support: CellSet, quadrature_order: u32) -> Result<CellMeasure> {
        let n = support.count();
        if n == 0 {
            return Err(Error::invalid("a measure needs a nonempty support"));
        }
        let w = 1.0 / n as f64;
        CellMeasure::new(support, vec![w; n], quadrature_order)
    }

    pub fn support(&self) -> &CellSet {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn quadrature_order(&self) -> u32 {
        self.quadrature_order
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn with_order(&self, quadrature_order: u32) -> Result<CellMeasure> {
        CellMeasure::new(self.support.clone(), self.weights.clone(), quadrature_order)
    }

    /// Midpoint quadrature nodes in deterministic order: cells in anchor
    /// order, subcells row-major. `order^dim` nodes per cell.
    pub fn quadrature_nodes(&self) -> Vec<QuadNode> {
        let dim = self.support.dim() as usize;
        let o = self.quadrature_order as usize;
        let side = self.support.side();
        let sub = side / o as f64;
        let per_cell = o.pow(dim as u32);
        let mut nodes = Vec::with_capacity(self.support.count() * per_cell);
        for (anchor, &w) in self.support.anchors().iter().zip(&self.weights) {
            let w_pt = w / per_cell as f64;
            let base = [
                anchor[0] as f64 * side,
                anchor[1] as f64 * side,
                anchor[2] as f64 * side,
            ];
            let kz = if dim == 3 { o } else { 1 };
            for iz in 0..kz {
                for iy in 0..o {
                    for ix in 0..o {
                        let x = base[0] + (ix as f64 + 0.5) * sub;
                        let y = base[1] + (iy as f64 + 0.5) * sub;
                        let point = if dim == 3 {
                            let z = base[2] + (iz as f64 + 0.5) * sub;
                            Point::new3(x, y, z)
                        } else {
                            Point::new2(x, y)
                        };
                        nodes.push(QuadNode {
                            point,
                            weight: w_pt,
                            subcell_side: sub,
                        });
                    }
                }
            }
        }
        nodes
    }

    /// Mass inside the closed ball B(center, r), measured on the quadrature.
    pub fn ball_mass(&self, center: &Point, r: f64) -> f64 {
        self.quadrature_nodes()
            .iter()
            .filter(|n| n.point.dist(center) <= r)
            .map(|n| n.weight)
            .sum()
    }
}

/// Options for `riesz_energy_with`.
#[derive(Debug, Clone, Copy)]
pub struct EnergyOptions {
    /// Include the per-node subcell self-energy. Disable to get the bare
    /// off-diagonal pair sum.
    pub include_self: bool,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        EnergyOptions { include_self: true }
    }
}

/// Riesz s-energy of the measure, `I_s = ∬ |x-y|^{-s} dμ dμ`, with the
/// diagonal handled by exact subcell self-energies.
pub fn riesz_energy(mu: &CellMeasure, s: f64) -> Result<f64> {
    riesz_energy_with(mu, s, EnergyOptions::default())
}

pub fn riesz_energy_with(mu: &CellMeasure, s: f64, opts: EnergyOptions) -> Result<f64> {
    let dim = mu.support().dim();
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::invalid(format!(
            "energy exponent {s} must be positive"
        )));
    }
    if opts.include_self && s >= dim as f64 {
        return Err(Error::invalid(format!(
            "self-energy diverges for s = {s} >= dimension {dim}"
        )));
    }
    let nodes = mu.quadrature_nodes();
    let pts: Vec<[f64; 3]> = nodes
        .iter()
        .map(|n| {
            [
                n.point.x(),
                n.point.y(),
                if dim == 3 { n.point.z() } else { 0.0 },
            ]
        })
        .collect();
    let ws: Vec<f64> = nodes.iter().map(|n| n.weight).collect();

    // Off-diagonal pair sum, i < j doubled. Rows are processed in fixed-size
    // chunks and the per-chunk sums combined in index order, so the result
    // does not depend on the thread count.
    const ROW_CHUNK: usize = 64;
    let n = pts.len();
    let chunk_sums: Vec<f64> = (0..n.div_ceil(ROW_CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * ROW_CHUNK;
            let hi = (lo + ROW_CHUNK).min(n);
            let mut acc = 0.0;
            for i in lo..hi {
                let pi = pts[i];
                let wi = ws[i];
                if wi == 0.0 {
                    continue;
                }
                let mut row = 0.0;
                for j in (i + 1)..n {
                    let dx = pi[0] - pts[j][0];
                    let dy = pi[1] - pts[j][1];
                    let dz = pi[2] - pts[j][2];
                    let r2 = dx * dx + dy * dy + dz * dz;
                    row += ws[j] * kernel(r2, s);
                }
                acc += 2.0 * wi * row;
            }
            acc
        })
        .collect();
    let mut energy: f64 = chunk_sums.iter().sum();

    if opts.include_self {
        let c = self_energy_constant(s, dim)?;
        let mut diag = 0.0;
        for node in &nodes {
            diag += node.weight * node.weight * c / node.subcell_side.powf(s);
        }
        energy += diag;
    }
    if !energy.is_finite() {
        return Err(Error::Inconsistency(
            "energy overflowed; coincident quadrature nodes with positive weight".into(),
        ));
    }
    Ok(energy)
}

#[inline]
fn kernel(r2: f64, s: f64) -> f64 {
    if s == 1.0 {
        1.0 / r2.sqrt()
    } else if s == 2.0 {
        1.0 / r2
    } else {
        r2.powf(-0.5 * s)
    }
}

/// Self-energy constant of the uniform unit cube: the s-energy of a uniform
/// unit-mass cell of side `l` equals `c(s, dim) / l^s`.
///
/// dim 1 is closed form; dims 2 and 3 integrate
/// `2^dim ∫_{[0,1]^dim} Π(1-u_k) |u|^{-s} du` over dyadic shells with tensor
/// Gauss-Legendre panels (the integrand is smooth on each shell).
pub fn self_energy_constant(s: f64, dim: u8) -> Result<f64> {
    if !(s > 0.0 && s < dim as f64) {
        return Err(Error::invalid(format!(
            "self-energy constant needs 0 < s < {dim}, got {s}"
        )));
    }
    match dim {
        1 => Ok(2.0 / ((1.0 - s) * (2.0 - s))),
        2 | 3 => Ok(cube_difference_integral(s, dim) * (1u32 << dim) as f64),
        _ => Err(Error::invalid(format!("dimension {dim} not supported"))),
    }
}

/// `∫_{[0,1]^dim} Π(1-u_k) (Σ u_k^2)^{-s/2} du` by dyadic shells.
fn cube_difference_integral(s: f64, dim: u8) -> f64 {
    let (nodes, weights) = gauss_legendre(16);
    let shells: u32 = 48;
    let mut total = 0.0;
    for j in 0..shells {
        let h = 0.5f64.powi(j as i32 + 1);
        // [0, 2h]^dim minus [0, h]^dim as axis-aligned boxes.
        let boxes: Vec<[[f64; 2]; 3]> = match dim {
            2 => vec![
                [[h, 2.0 * h], [0.0, 2.0 * h], [0.0, 0.0]],
                [[0.0, h], [h, 2.0 * h], [0.0, 0.0]],
            ],
            _ => vec![
                [[h, 2.0 * h], [0.0, 2.0 * h], [0.0, 2.0 * h]],
                [[0.0, h], [h, 2.0 * h], [0.0, 2.0 * h]],
                [[0.0, h], [0.0, h], [h, 2.0 * h]],
            ],
        };
        for b in boxes {
            total += gl_box(&nodes, &weights, dim, b, s);
        }
    }
    total
}

fn gl_box(nodes: &[f64], weights: &[f64], dim: u8, b: [[f64; 2]; 3], s: f64) -> f64 {
    let map = |k: usize, t: f64| -> (f64, f64) {
        let (lo, hi) = (b[k][0], b[k][1]);
        (0.5 * (hi - lo) * t + 0.5 * (hi + lo), 0.5 * (hi - lo))
    };
    let mut sum = 0.0;
    for (i, &ti) in nodes.iter().enumerate() {
        let (x, jx) = map(0, ti);
        for (j, &tj) in nodes.iter().enumerate() {
            let (y, jy) = map(1, tj);
            if dim == 2 {
                let f = (1.0 - x) * (1.0 - y) * (x * x + y * y).powf(-0.5 * s);
                sum += weights[i] * weights[j] * jx * jy * f;
            } else {
                for (k, &tk) in nodes.iter().enumerate() {
                    let (z, jz) = map(2, tk);
                    let f =
                        (1.0 - x) * (1.0 - y) * (1.0 - z) * (x * x + y * y + z * z).powf(-0.5 * s);
                    sum += weights[i] * weights[j] * weights[k] * jx * jy * jz * f;
                }
            }
        }
    }
    sum
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..64 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Legendre P_n and its derivative at x.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Pushforward of a cell measure under a real-valued map: a purely atomic
/// measure on the line, one atom per quadrature node, sorted by position.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PushforwardMeasure1D {
    /// (position, mass) pairs sorted by position.
    pub atoms: Vec<(f64, f64)>,
    /// Values on the circle are reported modulo 2π when set.
    pub circle: bool,
}

impl PushforwardMeasure1D {
    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// Mass of the closed interval [lo, hi].
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.0 >= lo && a.0 <= hi)
            .map(|a| a.1)
            .sum()
    }
}

pub fn pushforward(
    mu: &CellMeasure,
    map: impl Fn(&Point) -> Result<f64>,
    circle: bool,
) -> Result<PushforwardMeasure1D> {
    let mut atoms = Vec::new();
    for node in mu.quadrature_nodes() {
        let v = map(&node.point)?;
        if !v.is_finite() {
            return Err(Error::Inconsistency(format!(
                "map produced {v} at {:?}",
                node.point
            )));
        }
        atoms.push((v, node.weight));
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(PushforwardMeasure1D { atoms, circle })
}

/// Empirical growth report for `μ(B(x, r)) <= C r^t` over sampled pairs.
///
/// `constant` is the largest sampled ratio `μ(B(x,r)) / r^t` (the empirical
/// Frostman constant); `max_violation_ratio` is that maximum divided by the
/// median sampled ratio, a dispersion score that stays small when the growth
/// law holds uniformly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrostmanReport {
    pub exponent: f64,
    pub constant: f64,
    pub max_violation_ratio: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Sample centers near the support and radii log-uniform between one cell
/// side and the support diameter.
pub fn frostman_check(
    mu: &CellMeasure,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<FrostmanReport> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!(
            "growth exponent {t} must be positive"
        )));
    }
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let support = mu.support();
    let bbox = support.bbox()?;
    let side = support.side();
    let diam = bbox.diameter().max(side);
    let sample_box = bbox.pad(side);
    let nodes = mu.quadrature_nodes();
    let dim = support.dim();

    let mut ratios = Vec::with_capacity(samples);
    for k in 0..samples {
        let mut r = rng::stream(seed, k as u64);
        let x = sample_box_point(&mut r, &sample_box, dim);
        let lr = r.gen_range(side.ln()..=diam.ln());
        let radius = lr.exp();
        let mass: f64 = nodes
            .iter()
            .filter(|n| n.point.dist(&x) <= radius)
            .map(|n| n.weight)
            .sum();
        ratios.push(mass / radius.powf(t));
    }
    let constant = ratios.iter().cloned().fold(0.0f64, f64::max);
    let mut positive: Vec<f64> = ratios.iter().cloned().filter(|&v| v > 0.0).collect();
    positive.sort_by(f64::total_cmp);
    let median = if positive.is_empty() {
        0.0
    } else {
        positive[positive.len() / 2]
    };
    let max_violation_ratio = if median > 0.0 {
        constant / median
    } else {
        f64::INFINITY
    };
    Ok(FrostmanReport {
        exponent: t,
        constant,
        max_violation_ratio,
        samples,
        seed,
    })
}

fn sample_box_point(r: &mut impl Rng, b: &crate::geom::BBox, dim: u8) -> Point {
    let coord = |r: &mut dyn FnMut() -> f64, lo: f64, hi: f64| {
        if hi > lo {
            lo + (hi - lo) * r()
        } else {
            lo
        }
    };
    let mut unit = || r.gen::<f64>();
    let x = coord(&mut unit, b.lo[0], b.hi[0]);
    let y = coord(&mut unit, b.lo[1], b.hi[1]);
    if dim == 3 {
        let z = coord(&mut unit, b.lo[2], b.hi[2]);
        Point::new3(x, y, z)
    } else {
        Point::new2(x, y)
    }
}

/// Ball-averaged companion measure at scale `r`.
#[derive(Debug, Clone)]
pub struct AuxiliaryMeasure {
    pub measure: CellMeasure,
    /// Greedily selected ball centers, in selection order.
    pub centers: Vec<Point>,
    /// μ-mass of each selected ball (before normalization).
    pub ball_mass: Vec<f64>,
    pub radius: f64,
}

/// Replace μ by a normalized sum of uniform measures on disjoint balls of
/// radius `r` centered at quadrature nodes of positive mass, chosen greedily
/// in node order. Each ball is realized as the cells of a refined grid whose
/// centers it contains, so the result lives within distance `2r` of the
/// original support.
pub fn auxiliary_measure(
    mu: &CellMeasure,
    r: f64,
    quadrature_order: u32,
) -> Result<AuxiliaryMeasure> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("ball radius {r} must be positive")));
    }
    let support = mu.support();
    let dim = support.dim();
    let side = support.side();
    let nodes = mu.quadrature_nodes();

    // Greedy maximal 2r-separated centers => disjoint balls.
    let mut centers: Vec<Point> = Vec::new();
    for node in &nodes {
        if node.weight == 0.0 {
            continue;
        }
        if centers.iter().all(|c| c.dist(&node.point) >= 2.0 * r) {
            centers.push(node.point);
        }
    }
    if centers.is_empty() {
        return Err(Error::invalid("measure has no mass to average"));
    }

    let ball_mass: Vec<f64> = centers
        .iter()
        .map(|c| {
            nodes
                .iter()
                .filter(|n| n.point.dist(c) <= r)
                .map(|n| n.weight)
                .sum()
        })
        .collect();
    let tau: f64 = ball_mass.iter().sum();
    if tau <= 0.0 {
        return Err(Error::Inconsistency("selected balls carry no mass".into()));
    }

    // Refine the grid until the subcell side is at most r/4.
    let mut k = 0u32;
    while side / (1u64 << k) as f64 > r / 4.0 {
        k += 1;
        if k > 40 {
            return Err(Error::ResourceLimit(format!(
                "ball radius {r} needs more than 2^40-fold refinement of side {side}"
            )));
        }
    }
    let sub = side / (1u64 << k) as f64;

    // Cells whose centers lie in each ball, accumulated with uniform weight.
    let mut acc: std::collections::BTreeMap<[i64; 3], f64> = std::collections::BTreeMap::new();
    let reach = (r / sub).ceil() as i64 + 1;
    for (c, &mass) in centers.iter().zip(&ball_mass) {
        if mass == 0.0 {
            continue;
        }
        let base = [
            (c.x() / sub).floor() as i64,
            (c.y() / sub).floor() as i64,
            if dim == 3 {
                (c.z() / sub).floor() as i64
            } else {
                0
            },
        ];
        let mut inside: Vec<[i64; 3]> = Vec::new();
        let zr = if dim == 3 { -reach..=reach } else { 0..=0 };
        for dz in zr {
            for dy in -reach..=reach {
                for dx in -reach..=reach {
                    let a = [base[0] + dx, base[1] + dy, base[2] + dz];
                    let center = if dim == 3 {
                        Point::new3(
                            (a[0] as f64 + 0.5) * sub,
                            (a[1] as f64 + 0.5) * sub,
                            (a[2] as f64 + 0.5) * sub,
                        )
                    } else {
                        Point::new2((a[0] as f64 + 0.5) * sub, (a[1] as f64 + 0.5) * sub)
                    };
                    if center.dist(c) <= r {
                        inside.push(a);
                    }
                }
            }
        }
        if inside.is_empty() {
            return Err(Error::Inconsistency(
                "ball captured no refined cells".into(),
            ));
        }
        let w = mass / tau / inside.len() as f64;
        for a in inside {
            *acc.entry(a).or_insert(0.0) += w;
        }
    }

    let anchors: Vec<[i64; 3]> = acc.keys().cloned().collect();
    let mut weights: Vec<f64> = acc.values().cloned().collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let cells = CellSet::new(dim, sub, anchors)?;
    let measure = CellMeasure::new(cells, weights, quadrature_order)?;
    Ok(AuxiliaryMeasure {
        measure,
        centers,
        ball_mass,
        radius: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::{four_corner_cantor, linear_cantor};
    use approx::assert_relative_eq;
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn kn(n: u32, order: u32) -> CellMeasure {
        CellMeasure::equidistributed(four_corner_cantor(Ratio::new(1, 4), n).unwrap(), order)
            .unwrap()
    }

    #[test]
    fn quadrature_nodes_tile_the_cells() {
        let mu = kn(1, 2);
        let nodes = mu.quadrature_nodes();
        assert_eq!(nodes.len(), 4 * 4);
        let mass: f64 = nodes.iter().map(|n| n.weight).sum();
        assert_relative_eq!(mass, 1.0, epsilon = 1e-12);
        // First cell [0, 1/4]^2 at order 2: midpoints at 1/16 and 3/16.
        assert_relative_eq!(nodes[0].point.x(), 1.0 / 16.0);
        assert_relative_eq!(nodes[1].point.x(), 3.0 / 16.0);
        assert_relative_eq!(nodes[0].subcell_side, 1.0 / 8.0);
    }

    #[test]
    fn self_energy_constant_dim1_matches_closed_form() {
        // 2 / ((1-s)(2-s)) at s = 1/2: 2 / (0.5 * 1.5) = 8/3.
        assert_relative_eq!(
            self_energy_constant(0.5, 1).unwrap(),
            8.0 / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn self_energy_constant_dim2_matches_direct_grid() {
        // Independent oracle: brute midpoint quadrature of
        // 4 ∫∫ (1-u)(1-v) (u^2+v^2)^{-s/2} du dv on a graded grid.
        let s = 1.0;
        let mut acc = 0.0;
        let m = 400;
        for j in 0..60 {
            let h = 0.5f64.powi(j + 1);
            for (x0, x1, y0, y1) in [(h, 2.0 * h, 0.0, 2.0 * h), (0.0, h, h, 2.0 * h)] {
                let (dx, dy) = ((x1 - x0) / m as f64, (y1 - y0) / m as f64);
                for a in 0..m {
                    let u = x0 + (a as f64 + 0.5) * dx;
                    for b in 0..m {
                        let v = y0 + (b as f64 + 0.5) * dy;
                        acc += dx * dy * (1.0 - u) * (1.0 - v) / (u * u + v * v).powf(0.5 * s);
                    }
                }
            }
        }
        let oracle = 4.0 * acc;
        let c = self_energy_constant(s, 2).unwrap();
        assert_relative_eq!(c, oracle, max_relative = 1e-6);
        // Sanity: exceeds the kernel value at the mean separation.
        assert!(c > 1.0 && c < 4.0, "c = {c}");
    }

    #[test]
    fn self_energy_constant_rejects_divergent_exponents() {
        assert!(self_energy_constant(1.0, 1).is_err());
        assert!(self_energy_constant(2.0, 2).is_err());
        assert!(self_energy_constant(0.0, 2).is_err());
    }

    #[test]
    fn energy_of_single_cell_scales_exactly_with_side() {
        // I_s of a uniform cell of side l is c(s, 2) / l^s; halving the side
        // doubles the s = 1 energy.
        let c1 = CellSet::new(2, 0.5, vec![[0, 0, 0]]).unwrap();
        let c2 = CellSet::new(2, 0.25, vec![[0, 0, 0]]).unwrap();
        for order in [1u32, 4] {
            let e1 = riesz_energy(
                &CellMeasure::equidistributed(c1.clone(), order).unwrap(),
                1.0,
            )
            .unwrap();
            let e2 = riesz_energy(
                &CellMeasure::equidistributed(c2.clone(), order).unwrap(),
                1.0,
            )
            .unwrap();
            assert_relative_eq!(e2 / e1, 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn energy_of_single_cell_matches_constant_at_any_order() {
        // At order 1 a lone cell is a single node whose self-term is the
        // exact cell energy c(s, 2) / side^s. Higher orders replace it with
        // a midpoint pair sum over subcells plus exact subcell self-terms;
        // the midpoint rule underestimates the convex kernel on adjacent
        // subcell pairs, an error that shrinks like 1/order.
        let cell = CellSet::new(2, 1.0, vec![[0, 0, 0]]).unwrap();
        let c = self_energy_constant(1.0, 2).unwrap();
        let e1 =
            riesz_energy(&CellMeasure::equidistributed(cell.clone(), 1).unwrap(), 1.0).unwrap();
        assert_relative_eq!(e1, c, epsilon = 1e-12);
        let e2 =
            riesz_energy(&CellMeasure::equidistributed(cell.clone(), 2).unwrap(), 1.0).unwrap();
        let e4 =
            riesz_energy(&CellMeasure::equidistributed(cell.clone(), 4).unwrap(), 1.0).unwrap();
        let e8 = riesz_energy(&CellMeasure::equidistributed(cell, 8).unwrap(), 1.0).unwrap();
        assert!(
            e2 < e4 && e4 < e8 && e8 < c,
            "monotone from below: {e2} {e4} {e8} vs {c}"
        );
        assert!((e8 - c).abs() <= (e4 - c).abs(), "refinement converges");
        assert_relative_eq!(e8, c, max_relative = 4e-2);
    }

    #[test]
    fn two_distant_cells_reduce_to_the_point_interaction() {
        // Mass 1/2 each at separation ~1: off-diagonal sum 2*(1/2)(1/2)/1.
        let side = 1.0 / 1024.0;
        let cells = CellSet::new(2, side, vec![[0, 0, 0], [1024, 0, 0]]).unwrap();
        let mu = CellMeasure::equidistributed(cells, 1).unwrap();
        let e = riesz_energy_with(
            &mu,
            1.0,
            EnergyOptions {
                include_self: false,
            },
        )
        .unwrap();
        assert_relative_eq!(e, 0.5, max_relative = 1e-3);
    }

    #[test]
    fn dyadic_scaling_halves_energy_exactly_at_s_one() {
        // K_{n+1} of the quarter system is K_n scaled by 1/4 in four copies;
        // here test pure scaling: the same anchor pattern on a grid half as
        // fine has exactly 2^s the energy (s = 1, dyadic arithmetic).
        let a = CellSet::new(2, 0.25, vec![[0, 0, 0], [3, 0, 0], [0, 3, 0]]).unwrap();
        let b = CellSet::new(2, 0.125, vec![[0, 0, 0], [3, 0, 0], [0, 3, 0]]).unwrap();
        let ea = riesz_energy(&CellMeasure::equidistributed(a, 2).unwrap(), 1.0).unwrap();
        let eb = riesz_energy(&CellMeasure::equidistributed(b, 2).unwrap(), 1.0).unwrap();
        assert_eq!(eb, 2.0 * ea, "bit-exact dyadic scaling");
    }

    #[test]
    fn energy_grows_with_generation_roughly_linearly() {
        let e: Vec<f64> = (1..=4)
            .map(|n| riesz_energy(&kn(n, 1), 1.0).unwrap())
            .collect();
        for w in e.windows(2) {
            assert!(w[1] > w[0]);
        }
        // Consecutive increments of an affine-in-n sequence are constant.
        let d1 = e[1] - e[0];
        let d2 = e[2] - e[1];
        let d3 = e[3] - e[2];
        assert!(
            (d2 - d3).abs() < 0.2 * d2.abs(),
            "increments stabilize: {e:?}"
        );
        assert!((d1 - d3).abs() < 0.4 * d3.abs());
    }

    #[test]
    fn doubling_the_order_moves_energy_less_than_two_percent() {
        // Stability of I_1 under order doubling, checked from order 2 up.
        // Order 1 is excluded deliberately: its per-cell value is exact (one
        // node, exact self-term), so the 1 -> 2 step re-introduces the
        // midpoint underestimate and moves by ~3%.
        for n in 1..=4u32 {
            for o in [2u32, 4] {
                let ea = riesz_energy(&kn(n, o), 1.0).unwrap();
                let eb = riesz_energy(&kn(n, 2 * o), 1.0).unwrap();
                assert!(
                    (eb - ea).abs() / ea < 0.02,
                    "n = {n}, order {o} -> {}: {ea} vs {eb}",
                    2 * o
                );
            }
        }
    }

    #[test]
    fn linear_cantor_half_energy_is_finite_and_stable() {
        let c = linear_cantor(Ratio::new(1, 4), 4).unwrap();
        let mu = CellMeasure::equidistributed(c, 2).unwrap();
        let e = riesz_energy(&mu, 0.5).unwrap();
        assert!(e.is_finite() && e > 0.0);
    }

    #[test]
    fn energy_rejects_bad_exponents() {
        let mu = kn(1, 1);
        assert!(riesz_energy(&mu, 0.0).is_err());
        assert!(riesz_energy(&mu, 2.0).is_err(), "s = dim diverges");
        assert!(
            riesz_energy_with(
                &mu,
                2.5,
                EnergyOptions {
                    include_self: false
                }
            )
            .is_ok(),
            "bare pair sum is fine for any positive s"
        );
    }

    #[test]
    fn weights_must_sum_to_one() {
        let cells = four_corner_cantor(Ratio::new(1, 4), 1).unwrap();
        assert!(CellMeasure::new(cells.clone(), vec![0.5, 0.5, 0.5, 0.5], 1).is_err());
        assert!(CellMeasure::new(cells.clone(), vec![0.25; 3], 1).is_err());
        assert!(CellMeasure::new(cells, vec![0.25; 4], 1).is_ok());
    }

    #[test]
    fn pushforward_preserves_mass_and_sorts_atoms() {
        let mu = kn(2, 2);
        let pf = pushforward(&mu, |p| Ok(p.x() + p.y()), false).unwrap();
        assert_relative_eq!(pf.mass(), 1.0, epsilon = 1e-9);
        assert!(pf.atoms.windows(2).all(|w| w[0].0 <= w[1].0));
        // 16 cells at order 2 carry 4 nodes each.
        assert_eq!(pf.atoms.len(), 64);
    }

    #[test]
    fn frostman_constant_stays_bounded_on_the_quarter_cantor() {
        // The natural measure has linear growth: mu(B(x, r)) <= C r with a
        // uniform C across generations.
        for n in [2u32, 4] {
            let mu = kn(n, 1);
            let rep = frostman_check(&mu, 1.0, 400, 7).unwrap();
            assert!(rep.constant <= 8.0, "n = {n}: constant {}", rep.constant);
            assert!(rep.constant > 0.2, "n = {n}: constant {}", rep.constant);
        }
    }

    #[test]
    fn frostman_flags_the_wrong_exponent() {
        // Against t = 1.5 the same measure blows up as r shrinks.
        let mu = kn(4, 1);
        let weak = frostman_check(&mu, 1.0, 400, 11).unwrap();
        let strong = frostman_check(&mu, 1.5, 400, 11).unwrap();
        assert!(strong.constant > 4.0 * weak.constant);
    }

    #[test]
    fn auxiliary_measure_is_a_probability_near_the_support() {
        let mu = kn(2, 1);
        let aux = auxiliary_measure(&mu, 0.1, 1).unwrap();
        assert_relative_eq!(aux.measure.mass(), 1.0, epsilon = 1e-9);
        // Balls are 2r-separated.
        for i in 0..aux.centers.len() {
            for j in 0..i {
                assert!(aux.centers[i].dist(&aux.centers[j]) >= 0.2 - 1e-12);
            }
        }
        // Support stays within 2r of the original set.
        let orig = mu.support();
        for anchor in aux.measure.support().anchors() {
            let c = aux.measure.support().center(*anchor);
            let near = orig.anchors().iter().any(|a| {
                let cc = orig.center(*a);
                cc.dist(&c) <= 2.0 * 0.1 + orig.side()
            });
            assert!(near, "cell at {c:?} far from the support");
        }
    }

    #[test]
    fn auxiliary_measure_smooths_the_energy() {
        // Ball averaging cannot raise the energy much; at matching scales it
        // stays comparable.
        let mu = kn(3, 1);
        let e = riesz_energy(&mu, 1.0).unwrap();
        let aux = auxiliary_measure(&mu, 0.05, 1).unwrap();
        let ea = riesz_energy(&aux.measure, 1.0).unwrap();
        assert!(ea < 2.0 * e, "averaged {ea} vs original {e}");
        assert!(ea > 0.2 * e);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn energy_is_monotone_in_s_for_small_sets(
            s1 in 0.2f64..0.9, s2 in 0.2f64..0.9, n in 1u32..4
        ) {
            // All our diameters are <= sqrt(2) with subcell sides <= 1/2, so
            // kernel and self-term both grow with s... the kernel only once
            // distances are <= 1. Restrict to the quarter-corner set scaled
            // into [0, 1/2]^2 where every distance is < 1.
            let base = four_corner_cantor(Ratio::new(1, 4), n).unwrap();
            let half = CellSet::new(2, base.side() * 0.5, base.anchors().to_vec()).unwrap();
            let mu = CellMeasure::equidistributed(half, 1).unwrap();
            let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            let e_lo = riesz_energy(&mu, lo).unwrap();
            let e_hi = riesz_energy(&mu, hi).unwrap();
            prop_assert!(e_hi >= e_lo - 1e-9, "s {lo} -> {e_lo}, s {hi} -> {e_hi}");
        }

        #[test]
        fn ball_mass_never_exceeds_total(n in 1u32..4, x in -0.5f64..1.5, y in -0.5f64..1.5, r in 0.01f64..2.0) {
            let mu = kn(n, 1);
            let m = mu.ball_mass(&Point::new2(x, y), r);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&m));
        }
    }
}
