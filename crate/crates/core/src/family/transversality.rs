//! Empirical transversality probes.
//!
//! A family is s-transversal when the parameter measure of
//! `{α : |Φ_α(x) - Φ_α(y)| <= δ |x - y|}` is bounded by
//! `c · δ^m · |x - y|^{m - s}` uniformly over distinct points of the domain.
//! `transversality_estimate` samples point pairs and measures that set by
//! stratified parameter sampling; the reported worst ratio is the empirical
//! value of `c`. Families that fail the property show ratios growing like
//! `1/δ` as δ shrinks.

use super::{ProjectionFamily, VantageSet};
use crate::error::{Error, Result};
use crate::geom::{BBox, Point};
use crate::rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Per-δ statistics over the sampled pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaStats {
    pub delta: f64,
    /// max over pairs of psi-hat / (delta^m |x-y|^{m-s}).
    pub worst_ratio: f64,
    /// The pair realizing the worst ratio.
    pub worst_pair: ((f64, f64, f64), (f64, f64, f64)),
    /// Mean over pairs of the measured parameter mass psi-hat.
    pub mean_psi: f64,
    /// Plain Monte Carlo standard error a single unstratified estimate of
    /// psi-hat would carry; stratification only tightens it.
    pub se_psi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub family: String,
    pub s: f64,
    /// Codomain dimension, the exponent m of the bound.
    pub m: u8,
    /// Dimension of the parameter set the ψ samples are drawn from.
    pub param_dim: u8,
    pub per_delta: Vec<DeltaStats>,
    pub worst_ratio: f64,
    pub pairs: usize,
    pub psi_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct TransversalityOptions {
    pub pairs: usize,
    pub psi_samples: usize,
    pub seed: u64,
}

/// Estimate the transversality constant of the family at exponent `s` for
/// each δ in `deltas`.
pub fn transversality_estimate(
    family: &ProjectionFamily,
    s: f64,
    deltas: &[f64],
    opts: TransversalityOptions,
) -> Result<TransversalityReport> {
    let m = family.codomain_dim() as f64;
    if !(s > 0.0 && s <= m) {
        return Err(Error::invalid(format!(
            "transversality exponent {s} must lie in (0, {m}]"
        )));
    }
    if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::invalid("deltas must be positive"));
    }
    if opts.pairs == 0 || opts.psi_samples < 16 {
        return Err(Error::invalid("need pairs >= 1 and psi_samples >= 16"));
    }

    struct PairResult {
        // Per delta: (psi_hat, ratio).
        per_delta: Vec<(f64, f64)>,
        x: Point,
        y: Point,
    }

    let run_pair = |pair_idx: usize| -> Result<PairResult> {
        let mut point_rng = rng::substream(opts.seed, pair_idx as u64, 0);
        let x = family.sample_omega(&mut point_rng);
        let mut y = family.sample_omega(&mut point_rng);
        let scale = family.omega().diameter().max(1e-12);
        let mut guard = 0;
        while x.dist(&y) < 1e-9 * scale {
            y = family.sample_omega(&mut point_rng);
            guard += 1;
            if guard > 1000 {
                return Err(Error::Inconsistency(
                    "could not draw a separated point pair from the domain".into(),
                ));
            }
        }
        let dist = x.dist(&y);
        let mut alpha_rng = rng::substream(opts.seed, pair_idx as u64, 1);
        let alphas = family.psi_stratified(opts.psi_samples, &mut alpha_rng)?;
        let n_eff = alphas.len() as f64;
        let mut counts = vec![0usize; deltas.len()];
        for alpha in &alphas {
            let px = family.project(alpha, &x)?;
            let py = family.project(alpha, &y)?;
            let d = family.codist(px, py);
            for (k, &delta) in deltas.iter().enumerate() {
                if d <= delta * dist {
                    counts[k] += 1;
                }
            }
        }
        let per_delta = deltas
            .iter()
            .zip(&counts)
            .map(|(&delta, &c)| {
                let psi_hat = c as f64 / n_eff;
                let bound = delta.powf(m) * dist.powf(m - s);
                (psi_hat, psi_hat / bound)
            })
            .collect();
        Ok(PairResult { per_delta, x, y })
    };

    // Pairs are independent work items; results are merged in index order so
    // the report is identical for any thread count.
    let results: Vec<Result<PairResult>> = (0..opts.pairs).into_par_iter().map(run_pair).collect();
    let mut pair_results = Vec::with_capacity(opts.pairs);
    for r in results {
        pair_results.push(r?);
    }

    let mut per_delta = Vec::with_capacity(deltas.len());
    let mut overall_worst = 0.0f64;
    for (k, &delta) in deltas.iter().enumerate() {
        let mut worst = f64::NEG_INFINITY;
        let mut worst_pair = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0));
        let mut psi_sum = 0.0;
        for pr in &pair_results {
            let (psi_hat, ratio) = pr.per_delta[k];
            psi_sum += psi_hat;
            if ratio > worst {
                worst = ratio;
                worst_pair = (point_tuple(&pr.x), point_tuple(&pr.y));
            }
        }
        let mean_psi = psi_sum / opts.pairs as f64;
        let se_psi = (mean_psi * (1.0 - mean_psi) / opts.psi_samples as f64)
            .max(0.0)
            .sqrt();
        overall_worst = overall_worst.max(worst);
        per_delta.push(DeltaStats {
            delta,
            worst_ratio: worst,
            worst_pair,
            mean_psi,
            se_psi,
        });
    }

    Ok(TransversalityReport {
        family: family.name().to_string(),
        s,
        m: family.codomain_dim(),
        param_dim: family.param_dim(),
        per_delta,
        worst_ratio: overall_worst,
        pairs: opts.pairs,
        psi_samples: opts.psi_samples,
        seed: opts.seed,
    })
}

fn point_tuple(p: &Point) -> (f64, f64, f64) {
    (p.x(), p.y(), if p.dim() == 3 { p.z() } else { 0.0 })
}

/// Per-δ statistics for the tube condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TubeReport {
    pub deltas: Vec<f64>,
    /// max over sampled lines of psi(T_delta) / delta, per delta.
    pub worst_ratios: Vec<f64>,
    pub worst_ratio: f64,
    pub lines: usize,
    pub arc_samples: usize,
    pub seed: u64,
}

/// Check that the vantage measure puts mass at most `c·δ` on every δ-tube
/// around a line through two points of the visible box: sample lines,
/// measure the arc mass inside each tube, report the worst ratio.
///
/// A vantage segment collinear with the visible set makes the tube around
/// that common line carry full mass, so the ratio grows like 1/δ; that
/// configuration is exactly what this check is for. The vantage carrier is
/// discretized fine enough to resolve the thinnest requested tube.
pub fn tube_condition_check(
    vantage: &VantageSet,
    visible: &BBox,
    deltas: &[f64],
    lines: usize,
    seed: u64,
) -> Result<TubeReport> {
    if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::invalid("deltas must be positive"));
    }
    if lines == 0 {
        return Err(Error::invalid("need lines >= 1"));
    }
    if visible.dim != 2 {
        return Err(Error::invalid("tube check lives in the plane"));
    }
    let diam = visible.diameter();
    if diam == 0.0 {
        return Err(Error::invalid(
            "visible box is a single point; no lines to draw",
        ));
    }
    // Spacing <= delta_min / 8 along the carrier, with sane floor and cap.
    let delta_min = deltas.iter().cloned().fold(f64::INFINITY, f64::min);
    let arc_samples = ((8.0 * vantage.length() / delta_min).ceil() as usize).clamp(4096, 1 << 21);
    let carrier = vantage.grid(arc_samples);
    let w = 1.0 / arc_samples as f64;

    let sample_point = |r: &mut rand_chacha::ChaCha8Rng| {
        let x = if visible.hi[0] > visible.lo[0] {
            r.gen_range(visible.lo[0]..=visible.hi[0])
        } else {
            visible.lo[0]
        };
        let y = if visible.hi[1] > visible.lo[1] {
            r.gen_range(visible.lo[1]..=visible.hi[1])
        } else {
            visible.lo[1]
        };
        Point::new2(x, y)
    };

    let per_line: Vec<Vec<f64>> = (0..lines)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i as u64);
            let p = sample_point(&mut r);
            let mut q = sample_point(&mut r);
            let mut guard = 0;
            while p.dist(&q) < 1e-9 * diam {
                q = sample_point(&mut r);
                guard += 1;
                if guard > 1000 {
                    // Degenerate box: fall back to any maximal chord.
                    q = Point::new2(visible.hi[0], visible.hi[1]);
                    break;
                }
            }
            let len = p.dist(&q).max(1e-300);
            let (ux, uy) = ((q.x() - p.x()) / len, (q.y() - p.y()) / len);
            // Distance from a to the infinite line through p with direction u.
            let masses: Vec<f64> = deltas
                .iter()
                .map(|&delta| {
                    carrier
                        .iter()
                        .filter(|a| {
                            let dx = a.x() - p.x();
                            let dy = a.y() - p.y();
                            (ux * dy - uy * dx).abs() <= delta
                        })
                        .count() as f64
                        * w
                })
                .collect();
            masses
        })
        .collect();

    let mut worst_ratios = vec![0.0f64; deltas.len()];
    for masses in &per_line {
        for (k, &m) in masses.iter().enumerate() {
            worst_ratios[k] = worst_ratios[k].max(m / deltas[k]);
        }
    }
    let worst_ratio = worst_ratios.iter().cloned().fold(0.0, f64::max);
    Ok(TubeReport {
        deltas: deltas.to_vec(),
        worst_ratios,
        worst_ratio,
        lines,
        arc_samples,
        seed,
    })
}
