//! Rasterization and Minkowski-sum area sweeps.
//!
//! Areas of cell sets are measured by counting pixel centers on a uniform
//! grid; Minkowski sums `E + Γ` are measured column by column, writing for
//! every cell the vertical band it sweeps over the column's horizontal
//! window and merging the bands with an interval sweep. Both paths reduce
//! over fixed-size column chunks in index order, so the result is
//! independent of the number of worker threads.

use crate::error::{Error, Result};
use crate::geom::{CellSet, IntervalUnion, Point};
use rayon::prelude::*;

const COLUMN_CHUNK: usize = 512;
const MAX_COLUMNS: usize = 1 << 26;

/// Occupancy bitmap over a uniform pixel grid (dimension 2).
#[derive(Debug, Clone)]
pub struct Raster {
    origin: [f64; 2],
    pitch: f64,
    nx: usize,
    ny: usize,
    words: Vec<u64>,
}

impl Raster {
    /// Rasterizes a 2-d cell set: a pixel is occupied iff its center lies in
    /// some cell (cells half-open, so shared edges never double-mark).
    pub fn from_cells(cells: &CellSet, pitch: f64) -> Result<Raster> {
        check_pitch(cells, pitch)?;
        if cells.dim() != 2 {
            return Err(Error::invalid("bitmap raster supports dimension 2 only"));
        }
        let bb = cells.bbox()?;
        let origin = [bb.lo[0], bb.lo[1]];
        let nx = ((bb.hi[0] - bb.lo[0]) / pitch).ceil() as usize + 1;
        let ny = ((bb.hi[1] - bb.lo[1]) / pitch).ceil() as usize + 1;
        if nx.saturating_mul(ny) > MAX_COLUMNS * 64 {
            return Err(Error::ResourceLimit(format!(
                "raster of {nx} x {ny} pixels"
            )));
        }
        let mut raster = Raster {
            origin,
            pitch,
            nx,
            ny,
            words: vec![0u64; (nx * ny).div_ceil(64)],
        };
        let side = cells.side();
        for a in cells.anchors() {
            let lo = [a[0] as f64 * side, a[1] as f64 * side];
            let (i0, i1) = center_range(lo[0] - origin[0], lo[0] - origin[0] + side, pitch);
            let (j0, j1) = center_range(lo[1] - origin[1], lo[1] - origin[1] + side, pitch);
            for i in i0..i1.min(nx as i64) {
                for j in j0..j1.min(ny as i64) {
                    if i >= 0 && j >= 0 {
                        raster.set(i as usize, j as usize);
                    }
                }
            }
        }
        Ok(raster)
    }

    fn set(&mut self, i: usize, j: usize) {
        let bit = j * self.nx + i;
        self.words[bit / 64] |= 1u64 << (bit % 64);
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        let bit = j * self.nx + i;
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn size(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn occupied(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn area(&self) -> f64 {
        self.occupied() as f64 * self.pitch * self.pitch
    }
}

/// Pixel indices whose centers `(i + 1/2) * pitch` fall in `[lo, hi)`.
fn center_range(lo: f64, hi: f64, pitch: f64) -> (i64, i64) {
    let first = (lo / pitch - 0.5).ceil() as i64;
    let last = ((hi / pitch - 0.5).ceil() as i64).max(first);
    (first, last)
}

fn check_pitch(cells: &CellSet, pitch: f64) -> Result<()> {
    if !(pitch.is_finite() && pitch > 0.0) {
        return Err(Error::invalid(format!(
            "pitch must be positive, got {pitch}"
        )));
    }
    if !cells.is_empty() && pitch > cells.side() {
        return Err(Error::invalid(format!(
            "pitch {pitch} exceeds cell side {}",
            cells.side()
        )));
    }
    Ok(())
}

/// Area (or volume) of a cell set by center-sampled pixel counting at the
/// given pitch. Exact when `side / pitch` is an integer; converges to the
/// exact measure as `pitch -> 0` in general.
pub fn raster_area(cells: &CellSet, pitch: f64) -> Result<f64> {
    check_pitch(cells, pitch)?;
    let side = cells.side();
    let mut total = 0u64;
    for a in cells.anchors() {
        let mut n = 1u64;
        for &idx in a.iter().take(cells.dim() as usize) {
            let lo = idx as f64 * side;
            let (i0, i1) = center_range(lo, lo + side, pitch);
            n *= (i1 - i0).max(0) as u64;
        }
        total += n;
    }
    Ok(total as f64 * pitch.powi(cells.dim() as i32))
}

/// Vertical extent of a swept shape over a horizontal window, or None when
/// the shape's domain misses the window entirely.
pub type BandFn<'a> = dyn Fn(f64, f64) -> Option<(f64, f64)> + Sync + 'a;

/// Two-window analogue of [`BandFn`]: z-extent over an (x, y) rectangle.
pub type Band2Fn<'a> = dyn Fn((f64, f64), (f64, f64)) -> Option<(f64, f64)> + Sync + 'a;

/// Area of `E + Γ` for a 2-d cell set `E` and a shape `Γ` described by its
/// band function: `band(u, v)` returns the (min, max) of the shape's
/// y-values over x in `[u, v]`. `x_extent` is the shape's horizontal reach
/// (min and max x of Γ). One-sided overapproximation: each column uses the
/// band over the full column width, so the error is O(pitch × perimeter).
pub fn sweep_area_2d(
    cells: &CellSet,
    x_extent: (f64, f64),
    band: &BandFn<'_>,
    pitch: f64,
) -> Result<f64> {
    if cells.dim() != 2 {
        return Err(Error::invalid("column sweep requires a 2-d cell set"));
    }
    if !(pitch.is_finite() && pitch > 0.0) {
        return Err(Error::invalid(format!(
            "pitch must be positive, got {pitch}"
        )));
    }
    if cells.is_empty() {
        return Ok(0.0);
    }
    let side = cells.side();
    let (ix_lo, ix_hi) = cells.index_range(0).unwrap();
    let x_lo = ix_lo as f64 * side + x_extent.0;
    let x_hi = (ix_hi + 1) as f64 * side + x_extent.1;
    let ncols = ((x_hi - x_lo) / pitch).ceil() as usize;
    if ncols == 0 {
        return Ok(0.0);
    }
    if ncols > MAX_COLUMNS {
        return Err(Error::ResourceLimit(format!("sweep of {ncols} columns")));
    }

    // Cells sharing a column index share the band over any window; group them.
    let mut groups: Vec<(i64, Vec<f64>)> = Vec::new();
    for a in cells.anchors() {
        let y = a[1] as f64 * side;
        match groups.last_mut() {
            Some((ix, ys)) if *ix == a[0] => ys.push(y),
            _ => groups.push((a[0], vec![y])),
        }
    }

    let nchunks = ncols.div_ceil(COLUMN_CHUNK);
    let chunk_sums: Vec<f64> = (0..nchunks)
        .into_par_iter()
        .map(|chunk| {
            let mut bands: Vec<(f64, f64)> = Vec::with_capacity(cells.count());
            let mut acc = 0.0;
            let col_end = ((chunk + 1) * COLUMN_CHUNK).min(ncols);
            for col in chunk * COLUMN_CHUNK..col_end {
                let cx_lo = x_lo + col as f64 * pitch;
                let cx_hi = cx_lo + pitch;
                bands.clear();
                for (ix, ys) in &groups {
                    let a1 = *ix as f64 * side;
                    if let Some((m, mx)) = band(cx_lo - a1 - side, cx_hi - a1) {
                        for &y in ys {
                            bands.push((y + m, y + side + mx));
                        }
                    }
                }
                bands.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
                let mut cur: Option<(f64, f64)> = None;
                for &(lo, hi) in &bands {
                    match cur {
                        Some((clo, chi)) if lo <= chi => cur = Some((clo, chi.max(hi))),
                        Some((clo, chi)) => {
                            acc += chi - clo;
                            cur = Some((lo, hi));
                        }
                        None => cur = Some((lo, hi)),
                    }
                }
                if let Some((clo, chi)) = cur {
                    acc += chi - clo;
                }
            }
            acc
        })
        .collect();

    Ok(chunk_sums.iter().sum::<f64>() * pitch)
}

/// Volume analogue of [`sweep_area_2d`] for 3-d cell sets: `band2(xw, yw)`
/// returns the (min, max) z-values of the shape over the rectangle
/// `xw × yw`, and columns run over (x, y) pixels.
pub fn sweep_volume_3d(
    cells: &CellSet,
    xy_extent: ((f64, f64), (f64, f64)),
    band2: &Band2Fn<'_>,
    pitch: f64,
) -> Result<f64> {
    if cells.dim() != 3 {
        return Err(Error::invalid("volume sweep requires a 3-d cell set"));
    }
    if !(pitch.is_finite() && pitch > 0.0) {
        return Err(Error::invalid(format!(
            "pitch must be positive, got {pitch}"
        )));
    }
    if cells.is_empty() {
        return Ok(0.0);
    }
    let side = cells.side();
    let (ix_lo, ix_hi) = cells.index_range(0).unwrap();
    let (iy_lo, iy_hi) = cells.index_range(1).unwrap();
    let x_lo = ix_lo as f64 * side + xy_extent.0 .0;
    let x_hi = (ix_hi + 1) as f64 * side + xy_extent.0 .1;
    let y_lo = iy_lo as f64 * side + xy_extent.1 .0;
    let y_hi = (iy_hi + 1) as f64 * side + xy_extent.1 .1;
    let nx = ((x_hi - x_lo) / pitch).ceil() as usize;
    let ny = ((y_hi - y_lo) / pitch).ceil() as usize;
    if nx.saturating_mul(ny) > MAX_COLUMNS {
        return Err(Error::ResourceLimit(format!(
            "sweep of {nx} x {ny} pixel columns"
        )));
    }

    let anchors = cells.anchors();
    let rows: Vec<f64> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let cx_lo = x_lo + i as f64 * pitch;
            let cx_hi = cx_lo + pitch;
            let mut bands: Vec<(f64, f64)> = Vec::with_capacity(anchors.len());
            let mut acc = 0.0;
            for j in 0..ny {
                let cy_lo = y_lo + j as f64 * pitch;
                let cy_hi = cy_lo + pitch;
                bands.clear();
                for a in anchors {
                    let a1 = a[0] as f64 * side;
                    let a2 = a[1] as f64 * side;
                    if let Some((m, mx)) = band2(
                        (cx_lo - a1 - side, cx_hi - a1),
                        (cy_lo - a2 - side, cy_hi - a2),
                    ) {
                        let a3 = a[2] as f64 * side;
                        bands.push((a3 + m, a3 + side + mx));
                    }
                }
                bands.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
                let mut cur: Option<(f64, f64)> = None;
                for &(lo, hi) in &bands {
                    match cur {
                        Some((clo, chi)) if lo <= chi => cur = Some((clo, chi.max(hi))),
                        Some((clo, chi)) => {
                            acc += chi - clo;
                            cur = Some((lo, hi));
                        }
                        None => cur = Some((lo, hi)),
                    }
                }
                if let Some((clo, chi)) = cur {
                    acc += chi - clo;
                }
            }
            acc
        })
        .collect();

    Ok(rows.iter().sum::<f64>() * pitch * pitch)
}

/// Band oracle backed by a sampled point cloud: y-extrema over an x-window
/// answered by a sparse table over the samples sorted by x.
pub struct SampleBand {
    xs: Vec<f64>,
    mins: Vec<Vec<f64>>,
    maxs: Vec<Vec<f64>>,
}

impl SampleBand {
    pub fn new(samples: &[Point]) -> Result<SampleBand> {
        if samples.is_empty() {
            return Err(Error::invalid("empty sample set for a swept shape"));
        }
        let mut pts: Vec<(f64, f64)> = samples.iter().map(|p| (p.x(), p.y())).collect();
        if pts.iter().any(|(x, y)| !(x.is_finite() && y.is_finite())) {
            return Err(Error::invalid("non-finite shape sample"));
        }
        pts.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let base: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let levels = (usize::BITS - pts.len().leading_zeros()) as usize;
        let mut mins = vec![base.clone()];
        let mut maxs = vec![base];
        for l in 1..levels {
            let half = 1usize << (l - 1);
            let prev_min = &mins[l - 1];
            let prev_max = &maxs[l - 1];
            let n = pts.len().saturating_sub((1 << l) - 1);
            let mut mn = Vec::with_capacity(n);
            let mut mx = Vec::with_capacity(n);
            for i in 0..n {
                mn.push(prev_min[i].min(prev_min[i + half]));
                mx.push(prev_max[i].max(prev_max[i + half]));
            }
            mins.push(mn);
            maxs.push(mx);
        }
        Ok(SampleBand { xs, mins, maxs })
    }

    pub fn x_extent(&self) -> (f64, f64) {
        (self.xs[0], *self.xs.last().unwrap())
    }

    pub fn query(&self, u: f64, v: f64) -> Option<(f64, f64)> {
        let i0 = self.xs.partition_point(|&x| x < u);
        let i1 = self.xs.partition_point(|&x| x <= v);
        if i0 >= i1 {
            return None;
        }
        let len = i1 - i0;
        let l = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let a = i0;
        let b = i1 - (1 << l);
        Some((
            self.mins[l][a].min(self.mins[l][b]),
            self.maxs[l][a].max(self.maxs[l][b]),
        ))
    }
}

/// Area of `E + Γ` where `Γ` is given by a dense sample cloud (spacing at
/// most `pitch` along x for full accuracy). 2-d only.
pub fn minkowski_sum_raster(cells: &CellSet, samples: &[Point], pitch: f64) -> Result<f64> {
    if cells.dim() != 2 {
        return Err(Error::invalid(
            "sampled Minkowski raster supports dimension 2 only",
        ));
    }
    if !(pitch.is_finite() && pitch > 0.0) {
        return Err(Error::invalid(format!(
            "pitch must be positive, got {pitch}"
        )));
    }
    let band = SampleBand::new(samples)?;
    sweep_area_2d(cells, band.x_extent(), &|u, v| band.query(u, v), pitch)
}

/// Merges a set of raw intervals and returns the measure of their union.
/// Convenience for callers that already collected bands.
pub fn union_measure(intervals: Vec<(f64, f64)>) -> Result<f64> {
    Ok(IntervalUnion::from_intervals(intervals)?.measure())
}
