//! Summed-area tables in double-double precision.
//!
//! Entry `(i_1, ..., i_n)` of the `(N+1)^n` table holds the sum over cells with
//! every coordinate `< i_k`, so the sum over a cube is an inclusion-exclusion
//! over its `2^n` corners. Storing `hi + lo` pairs keeps the corner
//! differences accurate when large and tiny masses share a table; on
//! small-integer data every entry is exact and queries equal the naive sum
//! bit for bit.

use alloc::vec;
use alloc::vec::Vec;

use crate::grid::{Cube, Grid};
use crate::numeric::{Compensated, DoubleDouble};

#[derive(Debug, Clone)]
pub(crate) struct PrefixTable {
    dim: usize,
    stride: usize,
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl PrefixTable {
    pub fn build(grid: &Grid, cells: &[f64]) -> Self {
        let dim = grid.dim();
        let n = grid.cells_per_axis();
        let stride = n + 1;
        let len = stride.pow(dim as u32);
        let mut table = vec![DoubleDouble::ZERO; len];

        // scatter cells to their (i+1) slots
        for (idx, &x) in cells.iter().enumerate() {
            let coords = grid.cell_coords(idx);
            let slot = coords[..dim].iter().fold(0, |acc, &c| acc * stride + c + 1);
            table[slot] = DoubleDouble::from_f64(x);
        }

        // separable running sums, one axis at a time
        let mut step = 1;
        for _ in 0..dim {
            for slot in 0..len {
                if (slot / step) % stride != 0 {
                    table[slot] = table[slot].add(table[slot - step]);
                }
            }
            step *= stride;
        }

        let (hi, lo) = table.iter().map(|d| (d.hi, d.lo)).unzip();
        Self {
            dim,
            stride,
            hi,
            lo,
        }
    }

    pub fn query(&self, cube: &Cube) -> f64 {
        let origin = cube.origin();
        let side = cube.side();
        if self.dim == 1 {
            let a = origin[0];
            let b = a + side;
            let mut acc = Compensated::new();
            acc.add(self.hi[b]);
            acc.add(-self.hi[a]);
            acc.add(self.lo[b]);
            acc.add(-self.lo[a]);
            return acc.value();
        }
        let mut hi = Compensated::new();
        let mut lo = Compensated::new();
        for corner in 0..(1usize << self.dim) {
            let mut slot = 0;
            let mut upper = 0;
            for (k, &o) in origin.iter().enumerate() {
                let bit = (corner >> (self.dim - 1 - k)) & 1;
                upper += bit;
                slot = slot * self.stride + o + bit * side;
            }
            let sign = if (self.dim - upper) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            hi.add(sign * self.hi[slot]);
            lo.add(sign * self.lo[slot]);
        }
        hi.value() + lo.value()
    }
}
