use crate::error::{Error, Result};
use crate::linfn::{Grid, LinearFunction};
use crate::perm::Cell;

/// `E[(x[c1] − 1/n)(x[c2] − 1/n)]` under a uniform permutation.
pub fn pair_covariance(n: usize, (i1, j1): Cell, (i2, j2): Cell) -> f64 {
    let nf = n as f64;
    let same_row = i1 == i2;
    let same_col = j1 == j2;
    match (same_row, same_col) {
        (true, true) => (nf - 1.0) / (nf * nf),
        (true, false) | (false, true) => -1.0 / (nf * nf),
        (false, false) => 1.0 / (nf * nf * (nf - 1.0)),
    }
}

/// `E[(Σ δ[i][j] (x[i][j] − 1/n))²]` in `O(n²)`.
///
/// Pairs of cells are grouped by how many lines they share, and each group's
/// weight is recovered from the sum of squares, the row sums, the column sums
/// and the total.
pub fn centered_sq_norm(delta: &Grid<f64>) -> f64 {
    let n = delta.n();
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let n2 = nf * nf;
    let s2: f64 = delta.as_slice().iter().map(|d| d * d).sum();
    let rows = delta.row_sums();
    let cols = delta.col_sums();
    let r2: f64 = rows.iter().map(|r| r * r).sum();
    let c2: f64 = cols.iter().map(|c| c * c).sum();
    let t: f64 = rows.iter().sum();
    let same = s2;
    let share_row = r2 - s2;
    let share_col = c2 - s2;
    let share_none = t * t - r2 - c2 + s2;
    let v = (nf - 1.0) / n2 * same - (share_row + share_col) / n2 + share_none / (n2 * (nf - 1.0));
    v.max(0.0)
}

/// Exact `E[(f − g)²]` for two linear functions.
pub fn distance_l2_between(f: &LinearFunction, g: &LinearFunction) -> Result<f64> {
    if f.n() != g.n() {
        return Err(Error::SizeMismatch {
            expected: f.n(),
            found: g.n(),
        });
    }
    let diff = f.coeff().sub(g.coeff());
    let dm = f.mean() - g.mean();
    Ok(centered_sq_norm(&diff) + dm * dm)
}
