//! Curve and surface profiles with the derivative bounds the projection
//! machinery relies on, plus decomposition of composite curves into
//! admissible graph pieces.

use crate::error::{Error, Result};
use std::sync::Arc;

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const VALIDATION_GRID: usize = 257;
const SLOPE_TOL: f64 = 1e-9;

/// Direction in which the derivative moves across the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concavity {
    /// Derivative strictly decreasing (graph bends downward).
    Down,
    /// Derivative strictly increasing.
    Up,
}

/// A planar graph `t -> (t, gamma(t))` on a compact interval whose slope is
/// bounded by 1 and whose derivative is strictly monotone and bi-Lipschitz:
/// `|t - u| / lambda <= |gamma'(t) - gamma'(u)| <= lambda |t - u|`.
#[derive(Clone)]
pub struct CurveSpec {
    gamma: RealFn,
    dgamma: RealFn,
    interval: (f64, f64),
    lambda: f64,
    concavity: Concavity,
    /// Interior zero of the derivative, when it changes sign.
    critical: Option<f64>,
    name: String,
}

impl std::fmt::Debug for CurveSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurveSpec")
            .field("interval", &self.interval)
            .field("lambda", &self.lambda)
            .field("concavity", &self.concavity)
            .field("name", &self.name)
            .finish()
    }
}

impl CurveSpec {
    /// Validate the slope bound, strict monotonicity of the derivative, and
    /// the bi-Lipschitz envelope on a sampling grid. `lambda` is the claimed
    /// bi-Lipschitz constant; sampled violations beyond a small tolerance are
    /// rejected.
    pub fn new(
        gamma: RealFn,
        dgamma: RealFn,
        interval: (f64, f64),
        lambda: f64,
        name: impl Into<String>,
    ) -> Result<CurveSpec> {
        let (l1, l2) = interval;
        if !(l1.is_finite() && l2.is_finite() && l2 > l1) {
            return Err(Error::invalid(format!("bad curve interval [{l1}, {l2}]")));
        }
        if !(lambda >= 1.0) || !lambda.is_finite() {
            return Err(Error::invalid(format!(
                "bi-Lipschitz constant {lambda} must be >= 1"
            )));
        }
        let n = VALIDATION_GRID;
        let step = (l2 - l1) / (n - 1) as f64;
        let ts: Vec<f64> = (0..n).map(|i| l1 + i as f64 * step).collect();
        let gs: Vec<f64> = ts.iter().map(|&t| gamma(t)).collect();
        let ds: Vec<f64> = ts.iter().map(|&t| dgamma(t)).collect();
        for (i, (&g, &d)) in gs.iter().zip(&ds).enumerate() {
            if !g.is_finite() || !d.is_finite() {
                return Err(Error::invalid(format!("curve not finite at t = {}", ts[i])));
            }
            if d.abs() > 1.0 + SLOPE_TOL {
                return Err(Error::invalid(format!(
                    "slope {d} at t = {} exceeds 1",
                    ts[i]
                )));
            }
        }
        let increasing = ds[n - 1] > ds[0];
        for w in ds.windows(2) {
            let diff = w[1] - w[0];
            if (increasing && diff <= 0.0) || (!increasing && diff >= 0.0) {
                return Err(Error::invalid(
                    "derivative is not strictly monotone on the interval",
                ));
            }
        }
        // Bi-Lipschitz envelope on sampled pairs at several separations.
        let tol = 1.0 + 1e-6;
        for stride in [1usize, 4, 16, 64, n - 1] {
            for i in 0..n.saturating_sub(stride) {
                let dt = ts[i + stride] - ts[i];
                let dd = (ds[i + stride] - ds[i]).abs();
                if dd > lambda * dt * tol || dd * lambda * tol < dt {
                    return Err(Error::invalid(format!(
                        "derivative increment {dd} over gap {dt} violates the bi-Lipschitz constant {lambda}"
                    )));
                }
            }
        }
        // Consistency of gamma with dgamma (catches mismatched closures).
        for i in 0..n - 1 {
            let mid = 0.5 * (ts[i] + ts[i + 1]);
            let fd = (gs[i + 1] - gs[i]) / step;
            let d = dgamma(mid);
            if (fd - d).abs() > lambda * step + 1e-6 {
                return Err(Error::invalid(format!(
                    "derivative mismatch near t = {mid}: finite difference {fd}, dgamma {d}"
                )));
            }
        }
        let concavity = if increasing {
            Concavity::Up
        } else {
            Concavity::Down
        };
        let critical = if ds[0] * ds[n - 1] < 0.0 {
            Some(bisect_zero(&*dgamma, l1, l2, increasing))
        } else {
            None
        };
        Ok(CurveSpec {
            gamma,
            dgamma,
            interval,
            lambda,
            concavity,
            critical,
            name: name.into(),
        })
    }

    /// `gamma(t) = coeff * t^2 / 2` on `interval`; needs `|coeff * t| <= 1`
    /// there.
    pub fn parabola(coeff: f64, interval: (f64, f64)) -> Result<CurveSpec> {
        if coeff == 0.0 || !coeff.is_finite() {
            return Err(Error::invalid("parabola coefficient must be nonzero"));
        }
        let c = coeff;
        let lambda = c.abs().max(1.0 / c.abs());
        CurveSpec::new(
            Arc::new(move |t| 0.5 * c * t * t),
            Arc::new(move |t| c * t),
            interval,
            lambda,
            format!("parabola({coeff})"),
        )
    }

    /// Upper circular arc `gamma(t) = sqrt(radius^2 - t^2)`, restricted to
    /// slopes at most 1, i.e. `|t| <= radius / sqrt(2)`.
    pub fn circle_arc(radius: f64, interval: (f64, f64)) -> Result<CurveSpec> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid("circle radius must be positive"));
        }
        let r = radius;
        let bound = r / 2f64.sqrt() + 1e-12;
        if interval.0 < -bound || interval.1 > bound {
            return Err(Error::invalid(format!(
                "interval [{}, {}] leaves the slope-1 window of radius {r}",
                interval.0, interval.1
            )));
        }
        // gamma'' ranges over [-2sqrt(2)/r, -1/r] on the window.
        let lambda = (2.0 * 2f64.sqrt() / r).max(r);
        CurveSpec::new(
            Arc::new(move |t| (r * r - t * t).sqrt()),
            Arc::new(move |t| -t / (r * r - t * t).sqrt()),
            interval,
            lambda,
            format!("arc(r={radius})"),
        )
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.gamma)(t)
    }

    pub fn deriv(&self, t: f64) -> f64 {
        (self.dgamma)(t)
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn concavity(&self) -> Concavity {
        self.concavity
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Exact range of `gamma` over `[u, v] ∩ interval`: the derivative is
    /// monotone, so extrema sit at the endpoints or the single interior
    /// critical point. Returns `None` when the windows do not meet.
    pub fn range_extrema(&self, u: f64, v: f64) -> Option<(f64, f64)> {
        let lo = u.max(self.interval.0);
        let hi = v.min(self.interval.1);
        if lo > hi {
            return None;
        }
        let a = self.eval(lo);
        let b = self.eval(hi);
        let (mut min, mut max) = if a <= b { (a, b) } else { (b, a) };
        if let Some(c) = self.critical {
            if c > lo && c < hi {
                let g = self.eval(c);
                min = min.min(g);
                max = max.max(g);
            }
        }
        Some((min, max))
    }
}

fn bisect_zero(
    f: &(dyn Fn(f64) -> f64 + Send + Sync),
    mut lo: f64,
    mut hi: f64,
    increasing: bool,
) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        let below = if increasing { v < 0.0 } else { v > 0.0 };
        if below {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// A rotationally symmetric surface graph `(x, y) -> f(|(x, y)|)` over the
/// disk of radius `l`, with `f` even, C^2, strictly convex. The profile is
/// rescaled by `zscale` so the slope stays at most 1.
#[derive(Clone)]
pub struct SurfaceSpec {
    f: RealFn,
    df: RealFn,
    l: f64,
    zscale: f64,
    name: String,
}

impl std::fmt::Debug for SurfaceSpec {
    fn fmt(&self, fmt: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt.debug_struct("SurfaceSpec")
            .field("l", &self.l)
            .field("zscale", &self.zscale)
            .field("name", &self.name)
            .finish()
    }
}

impl SurfaceSpec {
    /// `f` is the radial profile on [0, l] with `f'(0) = 0` and `f'` strictly
    /// increasing (convexity). The stored profile is `f / zscale` with
    /// `zscale = max(1, sup f')`, which keeps the graph 1-Lipschitz without
    /// changing which sets are null under its projections.
    pub fn new(f: RealFn, df: RealFn, l: f64, name: impl Into<String>) -> Result<SurfaceSpec> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::invalid("surface radius must be positive"));
        }
        let n = VALIDATION_GRID;
        let step = l / (n - 1) as f64;
        let ds: Vec<f64> = (0..n).map(|i| df(i as f64 * step)).collect();
        for (i, &d) in ds.iter().enumerate() {
            if !d.is_finite() || !f(i as f64 * step).is_finite() {
                return Err(Error::invalid("profile not finite on [0, l]"));
            }
        }
        if ds[0].abs() > 1e-6 {
            return Err(Error::invalid(format!(
                "even profile needs f'(0) = 0, got {}",
                ds[0]
            )));
        }
        for w in ds.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid(
                    "profile derivative must be strictly increasing",
                ));
            }
        }
        let zscale = ds[n - 1].max(1.0);
        Ok(SurfaceSpec {
            f,
            df,
            l,
            zscale,
            name: name.into(),
        })
    }

    /// `f(r) = coeff * r^2 / 2` over the disk of radius `l`.
    pub fn paraboloid(coeff: f64, l: f64) -> Result<SurfaceSpec> {
        if !(coeff > 0.0) || !coeff.is_finite() {
            return Err(Error::invalid("paraboloid coefficient must be positive"));
        }
        SurfaceSpec::new(
            Arc::new(move |r| 0.5 * coeff * r * r),
            Arc::new(move |r| coeff * r),
            l,
            format!("paraboloid({coeff})"),
        )
    }

    pub fn radius(&self) -> f64 {
        self.l
    }

    pub fn zscale(&self) -> f64 {
        self.zscale
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Rescaled profile value at radial distance `r` in [0, l].
    pub fn profile(&self, r: f64) -> f64 {
        (self.f)(r) / self.zscale
    }

    pub fn profile_deriv(&self, r: f64) -> f64 {
        (self.df)(r) / self.zscale
    }

    /// Exact profile range over a rectangle `W` of radial distances: the
    /// profile increases with `|s|`, so the extrema are at the nearest and
    /// farthest points of `W` from the origin. `None` when `W` misses the
    /// disk entirely.
    pub fn rect_extrema(&self, xw: (f64, f64), yw: (f64, f64)) -> Option<(f64, f64)> {
        let dmin = rect_dist_to_origin(xw, yw);
        if dmin > self.l {
            return None;
        }
        let dmax = rect_max_dist_to_origin(xw, yw).min(self.l);
        Some((self.profile(dmin), self.profile(dmax)))
    }
}

fn rect_dist_to_origin(xw: (f64, f64), yw: (f64, f64)) -> f64 {
    let dx = xw.0.max(-xw.1).max(0.0);
    let dy = yw.0.max(-yw.1).max(0.0);
    (dx * dx + dy * dy).sqrt()
}

fn rect_max_dist_to_origin(xw: (f64, f64), yw: (f64, f64)) -> f64 {
    let dx = xw.0.abs().max(xw.1.abs());
    let dy = yw.0.abs().max(yw.1.abs());
    (dx * dx + dy * dy).sqrt()
}

/// Input pieces for curve decomposition.
pub enum CurvePiece {
    Graph {
        gamma: RealFn,
        dgamma: RealFn,
        interval: (f64, f64),
        /// Claimed bi-Lipschitz constant of the derivative.
        lambda: f64,
    },
    /// Counterclockwise circular arc.
    Arc {
        center: (f64, f64),
        radius: f64,
        /// Angle range, `angles.1 > angles.0`, at most a full turn.
        angles: (f64, f64),
    },
    Segment,
}

/// An admissible graph piece together with the rigid motion that places it:
/// the original piece is the image of the graph under `rotation_quarter_turns`
/// quarter turns counterclockwise followed by translation by `offset`.
pub struct DecomposedPiece {
    pub spec: CurveSpec,
    pub rotation_quarter_turns: u8,
    pub offset: (f64, f64),
}

/// Split composite curves into graph pieces with slope at most 1 and strictly
/// monotone derivative, rotating steep or sideways pieces into position.
/// Straight segments are rejected: their derivative is constant, so no
/// rotation makes it strictly monotone.
pub fn decompose_curve(pieces: Vec<CurvePiece>) -> Result<Vec<DecomposedPiece>> {
    let mut out = Vec::new();
    for piece in pieces {
        match piece {
            CurvePiece::Segment => {
                return Err(Error::invalid(
                    "segments have constant derivative and admit no transversal decomposition",
                ));
            }
            CurvePiece::Graph {
                gamma,
                dgamma,
                interval,
                lambda,
            } => {
                decompose_graph(gamma, dgamma, interval, lambda, &mut out)?;
            }
            CurvePiece::Arc {
                center,
                radius,
                angles,
            } => {
                decompose_arc(center, radius, angles, &mut out)?;
            }
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("no pieces to decompose"));
    }
    Ok(out)
}

fn decompose_graph(
    gamma: RealFn,
    dgamma: RealFn,
    interval: (f64, f64),
    lambda: f64,
    out: &mut Vec<DecomposedPiece>,
) -> Result<()> {
    let (l1, l2) = interval;
    if !(l2 > l1) {
        return Err(Error::invalid("empty graph interval"));
    }
    // The derivative is monotone, so |gamma'| <= 1 fails on at most two end
    // windows; find the +-1 crossings by bisection.
    let n = VALIDATION_GRID;
    let step = (l2 - l1) / (n - 1) as f64;
    let ds: Vec<f64> = (0..n).map(|i| dgamma(l1 + i as f64 * step)).collect();
    let increasing = ds[n - 1] > ds[0];
    let cross = |level: f64| -> Option<f64> {
        let f0 = ds[0] - level;
        let f1 = ds[n - 1] - level;
        if f0 * f1 >= 0.0 {
            return None;
        }
        let g = |t: f64| dgamma(t) - level;
        Some(bisect_zero(&g, l1, l2, increasing))
    };
    let mut cuts = vec![l1];
    let mut crossings: Vec<f64> = [cross(-1.0), cross(1.0)].into_iter().flatten().collect();
    crossings.sort_by(f64::total_cmp);
    cuts.extend(crossings);
    cuts.push(l2);

    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a < 1e-9 {
            continue;
        }
        let mid = 0.5 * (a + b);
        let slope = dgamma(mid);
        if slope.abs() <= 1.0 {
            let spec =
                CurveSpec::new(gamma.clone(), dgamma.clone(), (a, b), lambda, "graph piece")?;
            out.push(DecomposedPiece {
                spec,
                rotation_quarter_turns: 0,
                offset: (0.0, 0.0),
            });
        } else {
            // Steep piece: gamma is strictly monotone here. Rotating the
            // plane a quarter turn counterclockwise sends the graph of the
            // inverse to the original piece: with g = gamma^{-1},
            // R(t, -g(t)) = (g(t), t).
            let g_lo = gamma(a).min(gamma(b));
            let g_hi = gamma(a).max(gamma(b));
            let gam = gamma.clone();
            let rising = gamma(b) > gamma(a);
            let inverse: RealFn = Arc::new(move |y: f64| {
                let mut lo = a;
                let mut hi = b;
                for _ in 0..200 {
                    let m = 0.5 * (lo + hi);
                    if (gam(m) < y) == rising {
                        lo = m;
                    } else {
                        hi = m;
                    }
                    if hi - lo < 1e-14 {
                        break;
                    }
                }
                0.5 * (lo + hi)
            });
            let inv = inverse.clone();
            let dg = dgamma.clone();
            let new_gamma: RealFn = Arc::new(move |t| -inverse(t));
            let new_dgamma: RealFn = Arc::new(move |t| -1.0 / dg(inv(t)));
            // The rotated derivative t -> -1/gamma'(g(t)) has slope
            // gamma''(g) / gamma'(g)^3, so its difference quotients lie in
            // [1/(lambda B^3), lambda] with B = sup |gamma'| on the piece
            // (the derivative is monotone, so B sits at an endpoint).
            let b_sup = dgamma(a).abs().max(dgamma(b).abs()).max(1.0);
            let new_lambda = lambda * b_sup.powi(3);
            let spec = CurveSpec::new(
                new_gamma,
                new_dgamma,
                (g_lo, g_hi),
                new_lambda.max(lambda),
                "rotated graph piece",
            )?;
            out.push(DecomposedPiece {
                spec,
                rotation_quarter_turns: 1,
                offset: (0.0, 0.0),
            });
        }
    }
    Ok(())
}

fn decompose_arc(
    center: (f64, f64),
    radius: f64,
    angles: (f64, f64),
    out: &mut Vec<DecomposedPiece>,
) -> Result<()> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid("arc radius must be positive"));
    }
    let (a0, a1) = angles;
    if !(a1 > a0) || a1 - a0 > std::f64::consts::TAU + 1e-12 {
        return Err(Error::invalid(format!("bad angle range [{a0}, {a1}]")));
    }
    // Split at odd multiples of pi/4: inside each sector the arc is a graph
    // with slope at most 1 after 0-3 quarter turns.
    let mut cuts = vec![a0];
    let mut k = ((a0 - FRAC_PI_4) / FRAC_PI_2).floor() as i64 + 1;
    loop {
        let cut = FRAC_PI_4 + k as f64 * FRAC_PI_2;
        if cut >= a1 - 1e-12 {
            break;
        }
        if cut > a0 + 1e-12 {
            cuts.push(cut);
        }
        k += 1;
    }
    cuts.push(a1);

    for w in cuts.windows(2) {
        let (b0, b1) = (w[0], w[1]);
        if b1 - b0 < 1e-9 {
            continue;
        }
        let mid = 0.5 * (b0 + b1);
        // Sector index: 0 for angles around pi/2 (top of the circle, plain
        // upper graph), 1 around pi, 2 around 3pi/2, 3 around 0.
        let sector =
            (((mid - FRAC_PI_4).rem_euclid(std::f64::consts::TAU)) / FRAC_PI_2).floor() as u8;
        let rot = sector; // original = R^rot(local upper graph) + center
                          // Local angles after rotating by -rot quarter turns land in
                          // [pi/4, 3pi/4]; the local piece is the upper graph over
                          // t in [R cos(b1'), R cos(b0')].
        let lo_ang = b0 - rot as f64 * FRAC_PI_2;
        let hi_ang = b1 - rot as f64 * FRAC_PI_2;
        let t_lo = radius * hi_ang.cos();
        let t_hi = radius * lo_ang.cos();
        let r = radius;
        let spec = CurveSpec::new(
            Arc::new(move |t: f64| (r * r - t * t).sqrt()),
            Arc::new(move |t: f64| -t / (r * r - t * t).sqrt()),
            (t_lo, t_hi),
            (2.0 * 2f64.sqrt() / r).max(r),
            format!("arc piece(r={radius})"),
        )?;
        out.push(DecomposedPiece {
            spec,
            rotation_quarter_turns: rot % 4,
            offset: center,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parabola_passes_validation_with_tight_constants() {
        let p = CurveSpec::parabola(-1.0, (-1.0, 1.0)).unwrap();
        assert_eq!(p.concavity(), Concavity::Down);
        assert_relative_eq!(p.eval(0.5), -0.125);
        assert_relative_eq!(p.deriv(0.5), -0.5);
        assert_relative_eq!(p.lambda(), 1.0);
    }

    #[test]
    fn slope_bound_is_enforced() {
        assert!(
            CurveSpec::parabola(-1.0, (-1.5, 1.0)).is_err(),
            "slope 1.5 at the left end"
        );
        assert!(CurveSpec::parabola(2.0, (-1.0, 1.0)).is_err());
        assert!(CurveSpec::parabola(2.0, (-0.5, 0.5)).is_ok());
    }

    #[test]
    fn non_monotone_derivative_is_rejected() {
        let bad = CurveSpec::new(
            Arc::new(|t: f64| t.sin() * 0.1),
            Arc::new(|t: f64| t.cos() * 0.1),
            (-6.0, 6.0),
            10.0,
            "wiggle",
        );
        assert!(bad.is_err());
    }

    #[test]
    fn mismatched_derivative_closure_is_caught() {
        let bad = CurveSpec::new(
            Arc::new(|t: f64| 0.5 * t * t),
            Arc::new(|t: f64| 0.5 * t),
            (-1.0, 1.0),
            2.0,
            "mismatch",
        );
        assert!(bad.is_err());
    }

    #[test]
    fn range_extrema_sees_the_interior_maximum() {
        // Downward parabola -t^2/2 has its maximum 0 at t = 0.
        let p = CurveSpec::parabola(-1.0, (-1.0, 1.0)).unwrap();
        let (min, max) = p.range_extrema(-0.5, 0.75).unwrap();
        assert_relative_eq!(max, 0.0, epsilon = 1e-10);
        assert_relative_eq!(min, -0.28125, epsilon = 1e-10);
        // Window clipped to the domain.
        let (min2, _) = p.range_extrema(0.5, 9.0).unwrap();
        assert_relative_eq!(min2, -0.5, epsilon = 1e-10);
        assert!(p.range_extrema(2.0, 3.0).is_none());
    }

    #[test]
    fn circle_arc_respects_the_slope_window() {
        let ok = CurveSpec::circle_arc(1.0, (-0.7, 0.7)).unwrap();
        assert!(ok.deriv(0.7).abs() <= 1.0 + 1e-9);
        assert!(CurveSpec::circle_arc(1.0, (-0.9, 0.9)).is_err());
    }

    #[test]
    fn paraboloid_rescales_to_unit_slope() {
        let s = SurfaceSpec::paraboloid(3.0, 1.0).unwrap();
        assert_relative_eq!(s.zscale(), 3.0);
        assert!(s.profile_deriv(1.0) <= 1.0 + 1e-12);
        assert_relative_eq!(s.profile(1.0), 0.5);
        let gentle = SurfaceSpec::paraboloid(0.5, 1.0).unwrap();
        assert_relative_eq!(gentle.zscale(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn surface_rect_extrema_are_radial() {
        let s = SurfaceSpec::paraboloid(1.0, 2.0).unwrap();
        // f(r) = r^2/2 with f'(2) = 2, so the height scale is 2 and
        // profile(r) = r^2/4. Rectangle [1, 2] x [0, 1]: nearest point
        // (1, 0), farthest (2, 1) clipped to the disk radius 2.
        let (min, max) = s.rect_extrema((1.0, 2.0), (0.0, 1.0)).unwrap();
        assert_relative_eq!(min, 0.25);
        assert_relative_eq!(max, s.profile(2.0));
        assert!(s.rect_extrema((3.0, 4.0), (3.0, 4.0)).is_none());
        // Rectangle containing the origin starts at profile(0) = 0.
        let (min0, _) = s.rect_extrema((-0.5, 0.5), (-0.5, 0.5)).unwrap();
        assert_relative_eq!(min0, 0.0);
    }

    #[test]
    fn segments_are_rejected() {
        assert!(decompose_curve(vec![CurvePiece::Segment]).is_err());
    }

    #[test]
    fn quarter_circle_splits_into_two_admissible_pieces() {
        let pieces = decompose_curve(vec![CurvePiece::Arc {
            center: (2.0, 3.0),
            radius: 1.0,
            angles: (0.0, std::f64::consts::FRAC_PI_2),
        }])
        .unwrap();
        assert_eq!(pieces.len(), 2);
        for p in &pieces {
            let (a, b) = p.spec.interval();
            assert!(p.spec.deriv(a).abs() <= 1.0 + 1e-6);
            assert!(p.spec.deriv(b).abs() <= 1.0 + 1e-6);
            assert_eq!(p.offset, (2.0, 3.0));
        }
        // One piece sits in the top sector (no rotation), one on the right
        // (three quarter turns).
        let mut rots: Vec<u8> = pieces.iter().map(|p| p.rotation_quarter_turns).collect();
        rots.sort();
        assert_eq!(rots, vec![0, 3]);
    }

    #[test]
    fn full_circle_splits_into_four_pieces() {
        let pieces = decompose_curve(vec![CurvePiece::Arc {
            center: (0.0, 0.0),
            radius: 2.0,
            angles: (0.0, std::f64::consts::TAU),
        }])
        .unwrap();
        // Cuts at pi/4, 3pi/4, 5pi/4, 7pi/4 plus the seam endpoints.
        assert_eq!(pieces.len(), 5);
    }

    #[test]
    fn rotated_arc_pieces_reassemble_the_original_points() {
        let center = (1.0, -2.0);
        let pieces = decompose_curve(vec![CurvePiece::Arc {
            center,
            radius: 1.5,
            angles: (0.2, 5.9),
        }])
        .unwrap();
        // Sample each local graph, apply the recorded motion, and check the
        // points lie on the original circle.
        for p in &pieces {
            let (a, b) = p.spec.interval();
            for i in 0..=8 {
                let t = a + (b - a) * i as f64 / 8.0;
                let y = p.spec.eval(t);
                let (mut px, mut py) = (t, y);
                for _ in 0..p.rotation_quarter_turns {
                    let (nx, ny) = (-py, px);
                    px = nx;
                    py = ny;
                }
                px += p.offset.0;
                py += p.offset.1;
                let r = ((px - center.0).powi(2) + (py - center.1).powi(2)).sqrt();
                assert_relative_eq!(r, 1.5, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn steep_graph_is_rotated_into_an_admissible_piece() {
        // gamma(t) = t^2 on [0.2, 1.5]: slope exceeds 1 beyond t = 0.5.
        let pieces = decompose_curve(vec![CurvePiece::Graph {
            gamma: Arc::new(|t: f64| t * t),
            dgamma: Arc::new(|t: f64| 2.0 * t),
            interval: (0.2, 1.5),
            lambda: 2.0,
        }])
        .unwrap();
        assert_eq!(pieces.len(), 2);
        let flat = &pieces[0];
        let steep = &pieces[1];
        assert_eq!(flat.rotation_quarter_turns, 0);
        assert_eq!(steep.rotation_quarter_turns, 1);
        // The rotated piece covers the gamma-range of the steep part.
        let (a, b) = steep.spec.interval();
        assert_relative_eq!(a, 0.25, epsilon = 1e-6);
        assert_relative_eq!(b, 2.25, epsilon = 1e-6);
        // Check point recovery: R(t, spec(t)) lands on the original graph.
        for i in 0..=6 {
            let t = a + (b - a) * i as f64 / 6.0;
            let y = steep.spec.eval(t);
            let (px, py) = (-y, t);
            assert_relative_eq!(py, px * px, epsilon = 1e-5);
        }
    }
}
