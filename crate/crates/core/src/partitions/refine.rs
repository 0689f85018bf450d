//! Differ-sets, their refinement by the other codewords, and the level windows
//! derived from the incremental unions of the refinement cells.
//!
//! Everything here is stated relative to a fixed codeword `i`. Translating the
//! whole code by `c_i` (XOR) preserves every distance, so "zero components of
//! `y`" in the all-zero-`c_1` presentation become "positions where `y` agrees
//! with `c_i`".

use serde::Serialize;

use crate::model::{BitWord, IndexSet, Instance};

use super::PartitionError;

/// Largest `M` for which refinements are built; cell indices must fit in `u64`.
pub const MAX_PARTITION_CODEWORDS: usize = 64;

/// `S_{i,j}` and its size `l_{i,j}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DifferSet {
    pub i: usize,
    pub j: usize,
    #[serde(skip)]
    pub support: IndexSet,
    pub len: usize,
}

pub fn differ_set(inst: &Instance, i: usize, j: usize) -> Result<DifferSet, PartitionError> {
    inst.check_index(i)?;
    inst.check_index(j)?;
    if i == j {
        return Err(PartitionError::SameIndex(i + 1));
    }
    let support = inst.differ_mask(i, j);
    Ok(DifferSet {
        i,
        j,
        support,
        len: support.len(),
    })
}

/// One nonempty refinement cell `S_{i,j}^(m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    /// 1-based cell index `m`.
    pub index: u64,
    pub members: IndexSet,
}

/// The window used by level `k`: `S̄^(eta_k - 1)`, `S̄^(eta_k)` and the cell
/// `S^(eta_k)` between them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LevelWindow {
    pub k: usize,
    pub eta: u64,
    pub before: IndexSet,
    pub window: IndexSet,
}

impl LevelWindow {
    pub fn before_len(&self) -> usize {
        self.before.len()
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    /// `S^(eta_k) = S̄^(eta_k) \ S̄^(eta_k - 1)`.
    pub fn cell(&self) -> IndexSet {
        self.window.minus(self.before)
    }
}

/// The `2^(M-2)`-cell refinement of `S_{i,j}` for one ordered pair.
///
/// Only nonempty cells are stored; [`RefinedPartition::cell`] returns the
/// empty set for the others, so cell numbering matches the dense definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinedPartition {
    pub n: usize,
    pub differ: DifferSet,
    /// Codewords other than `i` and `j`, in the order of their `lambda` bits:
    /// `others[b]` drives bit `b` of `m - 1`.
    pub others: Vec<usize>,
    pub cells: Vec<Cell>,
    /// One window per `k in 0..l_{i,j}`.
    pub levels: Vec<LevelWindow>,
}

impl RefinedPartition {
    pub fn i(&self) -> usize {
        self.differ.i
    }

    pub fn j(&self) -> usize {
        self.differ.j
    }

    /// `2^(M-2)`.
    pub fn cell_count(&self) -> u64 {
        1u64 << self.others.len()
    }

    /// `S^(m)` for `m in 1..=2^(M-2)`.
    pub fn cell(&self, m: u64) -> IndexSet {
        self.cells
            .iter()
            .find(|c| c.index == m)
            .map(|c| c.members)
            .unwrap_or(IndexSet::EMPTY)
    }

    /// `S̄^(m)`, the union of cells `1..=m`; `m = 0` gives the empty set.
    pub fn prefix(&self, m: u64) -> IndexSet {
        self.cells
            .iter()
            .take_while(|c| c.index <= m)
            .fold(IndexSet::EMPTY, |acc, c| acc.union(c.members))
    }

    /// `lambda_r` for cell `m`: whether the cell lies inside `S_{i,r}`.
    pub fn lambda(&self, m: u64, r: usize) -> Option<bool> {
        let b = self.others.iter().position(|&o| o == r)?;
        Some(((m - 1) >> b) & 1 == 1)
    }

    pub fn level(&self, k: usize) -> &LevelWindow {
        &self.levels[k]
    }
}

/// Builds the refinement of `S_{i,j}` by membership in every other `S_{i,r}`.
///
/// Cell index `m = 1 + sum_r lambda_r 2^pos(r)`, where `pos` numbers the
/// codewords of `[M] \ {i, j}` consecutively in ascending index order.
pub fn refine(inst: &Instance, i: usize, j: usize) -> Result<RefinedPartition, PartitionError> {
    let differ = differ_set(inst, i, j)?;
    if inst.m() > MAX_PARTITION_CODEWORDS {
        return Err(PartitionError::TooManyCodewords {
            m: inst.m(),
            max: MAX_PARTITION_CODEWORDS,
        });
    }
    let n = inst.n();
    let others: Vec<usize> = (0..inst.m()).filter(|&r| r != i && r != j).collect();
    let other_masks: Vec<IndexSet> = others.iter().map(|&r| inst.differ_mask(i, r)).collect();

    let mut by_index: std::collections::BTreeMap<u64, IndexSet> = Default::default();
    for t in differ.support.indices(n) {
        let pattern = other_masks
            .iter()
            .enumerate()
            .filter(|(_, s)| s.contains(n, t))
            .fold(0u64, |acc, (b, _)| acc | (1u64 << b));
        let cell = by_index.entry(pattern + 1).or_default();
        *cell = cell.union(IndexSet::from_indices(n, [t]));
    }
    let cells: Vec<Cell> = by_index
        .into_iter()
        .map(|(index, members)| Cell { index, members })
        .collect();

    // Prefix unions only grow at nonempty cells, so eta_k is always the index
    // of a nonempty cell.
    let mut prefixes = Vec::with_capacity(cells.len());
    let mut acc = IndexSet::EMPTY;
    for c in &cells {
        let before = acc;
        acc = acc.union(c.members);
        prefixes.push((c.index, before, acc));
    }
    let l = differ.len;
    let levels = (0..l)
        .map(|k| {
            let &(eta, before, window) = prefixes
                .iter()
                .find(|(_, _, w)| if k + 1 < l { k + 1 < w.len() } else { w.len() == l })
                .expect("the last prefix is S_{i,j}");
            LevelWindow { k, eta, before, window }
        })
        .collect();

    Ok(RefinedPartition {
        n,
        differ,
        others,
        cells,
        levels,
    })
}

/// `d(c_i, y | S)`: positions of `S` where `y` disagrees with `c_i`.
#[inline]
pub(crate) fn ones(ci: BitWord, y: BitWord, s: IndexSet) -> usize {
    ((ci.0 ^ y.0) & s.0).count_ones() as usize
}
