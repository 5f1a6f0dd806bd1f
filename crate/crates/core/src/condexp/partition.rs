//! Local averaging over a tensor grid of cells.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::RangePolicy;
use crate::error::{Error, Result};
use crate::par;

/// Refuse grids with more cells than this.
pub const MAX_CELLS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFit {
    /// Lower edge per coordinate.
    pub lo: Vec<f64>,
    /// Cell width per coordinate.
    pub width: Vec<f64>,
    /// Cells per coordinate; 1 where the range collapsed.
    pub cells: Vec<usize>,
    /// Cell values, last coordinate fastest.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
struct Grid {
    lo: Vec<f64>,
    width: Vec<f64>,
    cells: Vec<usize>,
}

fn cell_of(x: &[f64], lo: &[f64], width: &[f64], cells: &[usize]) -> usize {
    let mut idx = 0;
    for i in 0..x.len() {
        let nb = cells[i];
        let j = if nb == 1 {
            0
        } else {
            let t = ((x[i] - lo[i]) / width[i]).floor();
            // NaN and negatives saturate to 0 on the cast
            (t as isize).clamp(0, nb as isize - 1) as usize
        };
        idx = idx * nb + j;
    }
    idx
}

impl PartitionFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.values[cell_of(x, &self.lo, &self.width, &self.cells)]
    }

    pub fn total_cells(&self) -> usize {
        self.values.len()
    }
}

pub(super) struct PartitionDesign {
    grid: Grid,
    assignment: Vec<u32>,
}

impl PartitionDesign {
    pub(super) fn new(features: &[f64], d: usize, bins: usize, range: &RangePolicy) -> Result<Self> {
        let rows = features.len() / d;
        let (lo, hi) = match range {
            RangePolicy::Fixed { lo, hi } => {
                if lo.len() != d {
                    return Err(Error::Problem(format!(
                        "fixed range has {} coordinates, features have {d}",
                        lo.len()
                    )));
                }
                (lo.clone(), hi.clone())
            }
            RangePolicy::MinMax => {
                let parts = par::map_chunks(rows, |r| {
                    let mut lo = vec![f64::INFINITY; d];
                    let mut hi = vec![f64::NEG_INFINITY; d];
                    for p in r {
                        for i in 0..d {
                            let v = features[p * d + i];
                            lo[i] = lo[i].min(v);
                            hi[i] = hi[i].max(v);
                        }
                    }
                    (lo, hi)
                });
                let mut lo = vec![f64::INFINITY; d];
                let mut hi = vec![f64::NEG_INFINITY; d];
                for (l, h) in parts {
                    for i in 0..d {
                        lo[i] = lo[i].min(l[i]);
                        hi[i] = hi[i].max(h[i]);
                    }
                }
                (lo, hi)
            }
        };
        let mut cells = Vec::with_capacity(d);
        let mut width = Vec::with_capacity(d);
        for i in 0..d {
            let span = hi[i] - lo[i];
            if span > 0.0 && span.is_finite() {
                cells.push(bins);
                width.push(span / bins as f64);
            } else {
                cells.push(1);
                width.push(1.0);
            }
        }
        let total = cells
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c).filter(|&v| v <= MAX_CELLS));
        if total.is_none() {
            return Err(Error::Overflow(format!(
                "{bins} bins in {d} dimensions exceeds {MAX_CELLS} cells"
            )));
        }
        let grid = Grid { lo, width, cells };
        let assignment = par::map_chunks(rows, |r| {
            r.map(|p| cell_of(&features[p * d..(p + 1) * d], &grid.lo, &grid.width, &grid.cells) as u32)
                .collect::<Vec<_>>()
        })
        .concat();
        Ok(PartitionDesign { grid, assignment })
    }

    pub(super) fn fit(&self, responses: &[f64]) -> PartitionFit {
        let total: usize = self.grid.cells.iter().product();
        let mut sum = vec![0.0; total];
        let mut count = vec![0u64; total];
        for (&c, &r) in self.assignment.iter().zip(responses) {
            sum[c as usize] += r;
            count[c as usize] += 1;
        }
        let mut values = vec![f64::NAN; total];
        let mut owner = vec![usize::MAX; total];
        let mut queue = VecDeque::new();
        for c in 0..total {
            if count[c] > 0 {
                values[c] = sum[c] / count[c] as f64;
                owner[c] = c;
                queue.push_back(c);
            }
        }
        // breadth-first fill from the occupied cells, axis neighbours in a
        // fixed order, so each empty cell copies its nearest occupied cell
        let cells = &self.grid.cells;
        let mut strides = vec![1usize; cells.len()];
        for i in (0..cells.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * cells[i + 1];
        }
        while let Some(c) = queue.pop_front() {
            for i in 0..cells.len() {
                let j = (c / strides[i]) % cells[i];
                let mut visit = |nb: usize| {
                    if owner[nb] == usize::MAX {
                        owner[nb] = owner[c];
                        values[nb] = values[owner[c]];
                        queue.push_back(nb);
                    }
                };
                if j > 0 {
                    visit(c - strides[i]);
                }
                if j + 1 < cells[i] {
                    visit(c + strides[i]);
                }
            }
        }
        PartitionFit {
            lo: self.grid.lo.clone(),
            width: self.grid.width.clone(),
            cells: self.grid.cells.clone(),
            values,
        }
    }

    pub(super) fn matches(&self, fit: &PartitionFit) -> bool {
        self.grid.lo == fit.lo && self.grid.width == fit.width && self.grid.cells == fit.cells
    }

    pub(super) fn predict_rows(&self, fit: &PartitionFit) -> Vec<f64> {
        self.assignment.iter().map(|&c| fit.values[c as usize]).collect()
    }
}
