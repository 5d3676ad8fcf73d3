//! Similarity iterated function systems and their finite generations.
//!
//! Generations are produced on the exact `ratio^n` grid: anchors are carried
//! as rational numbers through the recursion and converted to integer grid
//! indices at the end, so corner coincidences (for example the ones that make
//! certain directional shadows of the four-corner set a single interval)
//! survive in floating point.

use crate::error::{Error, Result};
use crate::geom::CellSet;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

type Q = Ratio<i64>;

/// A contracting similarity system `x -> offset_i + ratio * x` on the unit
/// square or cube, with pairwise disjoint images.
#[derive(Debug, Clone)]
pub struct SimilarityIFS {
    dim: u8,
    ratio: Q,
    offsets: Vec<[Q; 3]>,
}

/// Generation request: depth plus a guard on the number of output cells.
#[derive(Debug, Clone, Copy)]
pub struct GenerationSpec {
    pub n: u32,
    pub cell_cap: usize,
}

impl GenerationSpec {
    pub fn new(n: u32) -> GenerationSpec {
        GenerationSpec {
            n,
            cell_cap: 65_536,
        }
    }

    pub fn with_cap(n: u32, cell_cap: usize) -> GenerationSpec {
        GenerationSpec { n, cell_cap }
    }
}

impl SimilarityIFS {
    /// `ratio` must lie in (0, 1/2]; offsets must keep every image inside the
    /// unit cube and pairwise disjoint (separated by at least `ratio` on some
    /// axis).
    pub fn new(dim: u8, ratio: Q, offsets: Vec<[Q; 3]>) -> Result<SimilarityIFS> {
        if !(dim == 2 || dim == 3) {
            return Err(Error::invalid(format!("IFS dimension {dim} not supported")));
        }
        if ratio <= Q::zero() || ratio > Q::new(1, 2) {
            return Err(Error::invalid(format!(
                "contraction ratio {ratio} outside (0, 1/2]"
            )));
        }
        if offsets.is_empty() {
            return Err(Error::invalid("an IFS needs at least one map"));
        }
        let max_off = Q::one() - ratio;
        for o in &offsets {
            for c in o.iter().take(dim as usize) {
                if *c < Q::zero() || *c > max_off {
                    return Err(Error::invalid(format!(
                        "offset {c} leaves the unit cube (allowed range [0, {max_off}])"
                    )));
                }
            }
            if dim == 2 && !o[2].is_zero() {
                return Err(Error::invalid("2-d IFS with a nonzero third offset"));
            }
        }
        for i in 0..offsets.len() {
            for j in 0..i {
                let separated =
                    (0..dim as usize).any(|k| (offsets[i][k] - offsets[j][k]).abs() >= ratio);
                if !separated {
                    return Err(Error::invalid(format!(
                        "maps {j} and {i} have overlapping images"
                    )));
                }
            }
        }
        Ok(SimilarityIFS {
            dim,
            ratio,
            offsets,
        })
    }

    /// Four maps at the corners of the unit square: offsets {0, 1-ratio}^2.
    pub fn four_corner(ratio: Q) -> Result<SimilarityIFS> {
        let hi = Q::one() - ratio;
        let z = Q::zero();
        SimilarityIFS::new(
            2,
            ratio,
            vec![[z, z, z], [hi, z, z], [z, hi, z], [hi, hi, z]],
        )
    }

    /// Two maps on the x-axis: offsets {0, 1-ratio} x {0}.
    pub fn linear(ratio: Q) -> Result<SimilarityIFS> {
        let hi = Q::one() - ratio;
        let z = Q::zero();
        SimilarityIFS::new(2, ratio, vec![[z, z, z], [hi, z, z]])
    }

    pub fn dim(&self) -> u8 {
        self.dim
    }

    pub fn ratio(&self) -> Q {
        self.ratio
    }

    pub fn map_count(&self) -> usize {
        self.offsets.len()
    }

    pub fn similarity_dimension(&self) -> f64 {
        let r = self.ratio.to_f64().unwrap();
        (self.offsets.len() as f64).ln() / (1.0 / r).ln()
    }
}

/// Generation `spec.n` of the attractor as a cell set with side `ratio^n`.
///
/// Cell count is `maps^n` and must stay within `spec.cell_cap`. Anchors must
/// land on the `ratio^n` grid exactly; offsets that do not align (for example
/// 1/3 under ratio 1/4) are rejected rather than rounded.
pub fn generate(ifs: &SimilarityIFS, spec: GenerationSpec) -> Result<CellSet> {
    let m = ifs.offsets.len();
    let mut count: usize = 1;
    for _ in 0..spec.n {
        count = count
            .checked_mul(m)
            .filter(|&c| c <= spec.cell_cap)
            .ok_or_else(|| {
                Error::ResourceLimit(format!(
                    "generation {} needs {m}^{} cells, cap is {}",
                    spec.n, spec.n, spec.cell_cap
                ))
            })?;
    }

    // side(k) = ratio^k; anchors accumulated exactly.
    let mut anchors: Vec<[Q; 3]> = vec![[Q::zero(); 3]];
    let mut scale = Q::one();
    for _ in 0..spec.n {
        let mut next = Vec::with_capacity(anchors.len() * m);
        for a in &anchors {
            for o in &ifs.offsets {
                next.push([
                    a[0] + o[0] * scale,
                    a[1] + o[1] * scale,
                    a[2] + o[2] * scale,
                ]);
            }
        }
        anchors = next;
        scale *= ifs.ratio;
    }

    let side_q = scale; // ratio^n
    let side = side_q.numer().to_f64().unwrap() / side_q.denom().to_f64().unwrap();
    let mut grid = Vec::with_capacity(anchors.len());
    for a in &anchors {
        let mut idx = [0i64; 3];
        for k in 0..3 {
            let q = a[k] / side_q;
            if !q.is_integer() {
                return Err(Error::invalid(format!(
                    "anchor {} is not a multiple of side {side_q}; offsets do not align to the generation grid",
                    a[k]
                )));
            }
            idx[k] = q.to_integer();
        }
        grid.push(idx);
    }
    CellSet::new(ifs.dim, side, grid)
}

/// Generation `n` of the four-corner set with the given ratio.
pub fn four_corner_cantor(ratio: Q, n: u32) -> Result<CellSet> {
    generate(&SimilarityIFS::four_corner(ratio)?, GenerationSpec::new(n))
}

/// Generation `n` of the linear (x-axis) Cantor set: `2^n` intervals of
/// length `ratio^n`, realized as one row of thin cells of side `ratio^n`
/// sitting on the x-axis.
pub fn linear_cantor(ratio: Q, n: u32) -> Result<CellSet> {
    generate(&SimilarityIFS::linear(ratio)?, GenerationSpec::new(n))
}

/// The slab `[0, 1] x [1/2 - r, 1/2 + r]`: two rows of cells of side `r`,
/// so the thickness is exactly `2r` for every `r` (the vertical position is
/// exact whenever `1/2 - r` is a multiple of `r`, in particular for every
/// power of two). The degenerate fixture whose flat sweeps decay like `r`.
pub fn horizontal_slab(r: f64) -> Result<CellSet> {
    if !(r.is_finite() && r > 0.0 && r <= 0.5) {
        return Err(Error::invalid(format!(
            "slab half-thickness {r} must lie in (0, 1/2]"
        )));
    }
    let cols = (1.0 / r).round().max(1.0) as i64;
    let j0 = ((0.5 - r) / r).round() as i64;
    let anchors = (0..cols)
        .flat_map(|i| [[i, j0, 0], [i, j0 + 1, 0]])
        .collect();
    CellSet::new(2, r, anchors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn generation_zero_is_the_unit_square() {
        let k0 = four_corner_cantor(q(1, 4), 0).unwrap();
        assert_eq!(k0.count(), 1);
        assert_eq!(k0.side(), 1.0);
        assert_eq!(k0.anchors(), &[[0, 0, 0]]);
    }

    #[test]
    fn generation_one_has_the_four_corner_cells() {
        let k1 = four_corner_cantor(q(1, 4), 1).unwrap();
        assert_eq!(k1.side(), 0.25);
        assert_eq!(k1.anchors(), &[[0, 0, 0], [0, 3, 0], [3, 0, 0], [3, 3, 0]]);
    }

    #[test]
    fn generation_counts_and_measure_follow_the_law() {
        for n in 0..5u32 {
            let kn = four_corner_cantor(q(1, 4), n).unwrap();
            assert_eq!(kn.count(), 4usize.pow(n));
            assert_relative_eq!(kn.measure(), 0.25f64.powi(n as i32), epsilon = 1e-12);
        }
    }

    #[test]
    fn generations_are_nested() {
        let a = four_corner_cantor(q(1, 4), 2).unwrap();
        let b = four_corner_cantor(q(1, 4), 3).unwrap();
        assert!(b.nested_in(&a));
        let c = linear_cantor(q(1, 4), 4).unwrap();
        let d = linear_cantor(q(1, 4), 3).unwrap();
        assert!(c.nested_in(&d));
    }

    #[test]
    fn corners_are_exact_dyadics() {
        let k2 = four_corner_cantor(q(1, 4), 2).unwrap();
        // Offsets 3/4 * (1/4)^k give indices 3 * 4^k on the 1/16 grid.
        assert!(k2.anchors().contains(&[3, 0, 0]));
        assert!(k2.anchors().contains(&[12, 3, 0]));
        assert!(k2.anchors().contains(&[15, 15, 0]));
        let corner = k2.corner([15, 15, 0]);
        assert_eq!(corner.x(), 15.0 / 16.0);
    }

    #[test]
    fn ratio_one_fifth_aligns() {
        let g1 = four_corner_cantor(q(1, 5), 1).unwrap();
        assert_eq!(g1.side(), 0.2);
        assert!(g1.anchors().contains(&[4, 4, 0]));
        let ifs = SimilarityIFS::four_corner(q(1, 5)).unwrap();
        assert_relative_eq!(
            ifs.similarity_dimension(),
            4f64.ln() / 5f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn linear_cantor_is_a_thin_row() {
        let c1 = linear_cantor(q(1, 4), 1).unwrap();
        assert_eq!(c1.anchors(), &[[0, 0, 0], [3, 0, 0]]);
        let c3 = linear_cantor(q(1, 4), 3).unwrap();
        assert_eq!(c3.count(), 8);
        assert!(c3.anchors().iter().all(|a| a[1] == 0));
        assert_relative_eq!(c3.measure(), 8.0 * (0.25f64.powi(3)).powi(2));
    }

    #[test]
    fn slab_thickness_is_exactly_twice_the_radius() {
        for k in 2..=8 {
            let r = f64::powi(2.0, -k);
            let slab = horizontal_slab(r).unwrap();
            let bb = slab.bbox().unwrap();
            assert_eq!(bb.hi[1] - bb.lo[1], 2.0 * r);
            assert_eq!(bb.lo[1], 0.5 - r);
            assert_eq!((bb.lo[0], bb.hi[0]), (0.0, 1.0));
        }
        assert!(horizontal_slab(0.0).is_err());
        assert!(horizontal_slab(0.7).is_err());
    }

    #[test]
    fn invalid_systems_are_rejected() {
        assert!(SimilarityIFS::four_corner(q(3, 5)).is_err(), "ratio > 1/2");
        assert!(SimilarityIFS::four_corner(q(0, 1)).is_err(), "ratio 0");
        // Overlapping images: two maps closer than the ratio.
        let bad = SimilarityIFS::new(
            2,
            q(2, 5),
            vec![[q(0, 1), q(0, 1), q(0, 1)], [q(1, 5), q(0, 1), q(0, 1)]],
        );
        assert!(bad.is_err());
        // Offset outside the cube.
        let out = SimilarityIFS::new(2, q(1, 4), vec![[q(9, 10), q(0, 1), q(0, 1)]]);
        assert!(out.is_err());
    }

    #[test]
    fn misaligned_offsets_are_rejected_not_rounded() {
        let ifs = SimilarityIFS::new(
            2,
            q(1, 4),
            vec![[q(0, 1), q(0, 1), q(0, 1)], [q(1, 3), q(0, 1), q(0, 1)]],
        )
        .unwrap();
        assert!(generate(&ifs, GenerationSpec::new(1)).is_err());
    }

    #[test]
    fn cell_cap_is_enforced() {
        let err = four_corner_cantor(q(1, 4), 9);
        assert!(matches!(err, Err(Error::ResourceLimit(_))), "4^9 > 65536");
        let ok = generate(
            &SimilarityIFS::four_corner(q(1, 4)).unwrap(),
            GenerationSpec::with_cap(9, 1 << 20),
        );
        assert!(ok.is_ok());
    }
}
