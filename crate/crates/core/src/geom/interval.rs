//! Finite unions of closed intervals on the line, kept sorted and disjoint.

use crate::error::{Error, Result};

/// Canonical form: components sorted by left endpoint, pairwise disjoint,
/// and never touching (touching inserts are merged into one component).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntervalUnion {
    ivs: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn new() -> IntervalUnion {
        IntervalUnion { ivs: Vec::new() }
    }

    /// Builds a union from arbitrary intervals by sort-and-sweep.
    pub fn from_intervals(
        intervals: impl IntoIterator<Item = (f64, f64)>,
    ) -> Result<IntervalUnion> {
        let mut ivs: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in intervals {
            check_interval(lo, hi)?;
            ivs.push((lo, hi));
        }
        ivs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(ivs.len());
        for (lo, hi) in ivs {
            match out.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        Ok(IntervalUnion { ivs: out })
    }

    /// Inserts one interval, merging any components it overlaps or touches.
    pub fn insert(&mut self, lo: f64, hi: f64) -> Result<()> {
        check_interval(lo, hi)?;
        // First component whose right endpoint reaches lo.
        let start = self.ivs.partition_point(|&(_, h)| h < lo);
        // First component strictly to the right of hi.
        let end = self.ivs.partition_point(|&(l, _)| l <= hi);
        if start >= end {
            self.ivs.insert(start, (lo, hi));
        } else {
            let merged = (lo.min(self.ivs[start].0), hi.max(self.ivs[end - 1].1));
            self.ivs.splice(start..end, [merged]);
        }
        Ok(())
    }

    pub fn measure(&self) -> f64 {
        self.ivs.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.ivs
    }

    pub fn component_count(&self) -> usize {
        self.ivs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ivs.is_empty()
    }

    /// Smallest interval containing the union, or None when empty.
    pub fn span(&self) -> Option<(f64, f64)> {
        match (self.ivs.first(), self.ivs.last()) {
            (Some(&(lo, _)), Some(&(_, hi))) => Some((lo, hi)),
            _ => None,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let i = self.ivs.partition_point(|&(_, h)| h < x);
        i < self.ivs.len() && self.ivs[i].0 <= x
    }
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid(format!(
            "non-finite interval endpoints [{lo}, {hi}]"
        )));
    }
    if lo > hi {
        return Err(Error::invalid(format!("reversed interval [{lo}, {hi}]")));
    }
    Ok(())
}
