use alloc::vec::Vec;

use crate::l2::anchor::{select_anchor, AnchorScan};
use crate::linfn::{centered_sq_norm, Grid, LinearFunction};
use crate::numeric::round_pm1;
use crate::perm::Cell;

/// `e + Σ e_grid[i][j] x[i][j]` with `e_grid` over `{−1, 0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRep {
    pub n: usize,
    pub e: i64,
    pub e_grid: Grid<i8>,
    pub anchor: Cell,
    pub scores: (f64, f64),
    /// Exact `E[(f − g)²]` against the input.
    pub residual_l2sq: f64,
}

impl SparseRep {
    pub fn function(&self) -> LinearFunction {
        LinearFunction::new(self.e as f64, self.e_grid.to_f64()).expect("integer grid is finite")
    }

    pub fn support(&self) -> Vec<Cell> {
        self.e_grid.support()
    }
}

/// `r + Σ r_grid[i][j] x[i][j]`, obtained from a sparse representation by
/// subtracting the most common value of each row (`alpha`) and each column
/// (`beta`).
#[derive(Debug, Clone, PartialEq)]
pub struct SporadicRep {
    pub n: usize,
    pub r: i64,
    pub r_grid: Grid<i8>,
    pub alpha: Vec<i8>,
    pub beta: Vec<i8>,
}

impl SporadicRep {
    pub fn function(&self) -> LinearFunction {
        LinearFunction::new(self.r as f64, self.r_grid.to_f64()).expect("integer grid is finite")
    }

    pub fn support(&self) -> Vec<Cell> {
        self.r_grid.support()
    }

    /// Fewest zeros of `r_grid` in any row or column.
    pub fn min_line_zeros(&self) -> usize {
        min_line_zeros(&self.r_grid)
    }
}

pub(crate) fn min_line_zeros(g: &Grid<i8>) -> usize {
    let n = g.n();
    let mut rows = alloc::vec![0usize; n];
    let mut cols = alloc::vec![0usize; n];
    for ((i, j), &v) in g.cells() {
        if v == 0 {
            rows[i] += 1;
            cols[j] += 1;
        }
    }
    rows.into_iter().chain(cols).min().unwrap_or(0)
}

/// Most common value of a `{−1, 0, 1}` sequence; ties prefer 0, then +1,
/// then −1.
pub fn most_common_pm1(values: impl Iterator<Item = i8>) -> i8 {
    let mut counts = [0usize; 3];
    for v in values {
        counts[(v + 1) as usize] += 1;
    }
    let (neg, zero, pos) = (counts[0], counts[1], counts[2]);
    if zero >= pos && zero >= neg {
        0
    } else if pos >= neg {
        1
    } else {
        -1
    }
}

/// Rounds the recentered coefficients to `{0, ±1}` and the constant to an
/// integer.
pub fn sparse_representation(f: &LinearFunction, scan: AnchorScan) -> SparseRep {
    let n = f.n();
    let choice = select_anchor(f, scan);
    let g = f.recenter(choice.anchor);
    let e_grid = g.coeff().map(|&d| round_pm1(d));
    let e_total: f64 = e_grid.as_slice().iter().map(|&v| f64::from(v)).sum();
    // Constant matching the mean of f, then rounded.
    let e = libm::round(f.mean() - e_total / n as f64) as i64;
    let approx_mean = e as f64 + e_total / n as f64;
    let diff = g.coeff().sub(&e_grid.to_f64());
    let dm = f.mean() - approx_mean;
    SparseRep {
        n,
        e,
        e_grid,
        anchor: choice.anchor,
        scores: (choice.s1, choice.s2),
        residual_l2sq: centered_sq_norm(&diff) + dm * dm,
    }
}

/// Line-corrected representation of a `{0, ±1}` grid with integer constant.
pub fn sporadic_from_grid(n: usize, e: i64, e_grid: &Grid<i8>) -> SporadicRep {
    let alpha: Vec<i8> = (0..n)
        .map(|i| most_common_pm1(e_grid.row(i).iter().copied()))
        .collect();
    let beta: Vec<i8> = (0..n)
        .map(|j| most_common_pm1((0..n).map(|i| e_grid[(i, j)])))
        .collect();
    let r_grid = Grid::from_fn(n, |i, j| e_grid[(i, j)] - alpha[i] - beta[j]);
    let shift: i64 = alpha.iter().chain(&beta).map(|&v| i64::from(v)).sum();
    SporadicRep {
        n,
        r: e + shift,
        r_grid,
        alpha,
        beta,
    }
}

pub fn sporadic_representation(s: &SparseRep) -> SporadicRep {
    sporadic_from_grid(s.n, s.e, &s.e_grid)
}
