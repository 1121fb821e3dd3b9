//! Functions on `S_n`: linear functions, explicit value tables, exact
//! moments, distances and the degree-1 projection.

mod estimate;
mod grid;
mod moments;
mod projection;

use alloc::vec::Vec;

pub use estimate::{
    disagreement, dist_to_boolean, estimate_max, estimate_mean, l2_between, prob_not_boolean,
};
pub use grid::Grid;
pub use moments::{centered_sq_norm, distance_l2_between, pair_covariance};
pub use projection::{closeness_to_linear, conditional_means, degree_le1_projection};

use crate::error::{Error, Result};
use crate::numeric::factorial;
use crate::perm::{for_each_permutation, Cell, Permutation};

/// Anything that can be evaluated at a permutation of `[n]`. The rank is the
/// lexicographic position when the caller is enumerating, and `None` when
/// sampling.
pub trait SnFunction {
    fn n(&self) -> usize;
    fn value(&self, p: &Permutation, rank: Option<usize>) -> f64;
}

/// A closure viewed as a function on `S_n`.
pub struct FnOnSn<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[usize]) -> f64> FnOnSn<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnOnSn { n, f }
    }
}

impl<F: Fn(&[usize]) -> f64> SnFunction for FnOnSn<F> {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, p: &Permutation, _rank: Option<usize>) -> f64 {
        (self.f)(p.image())
    }
}

/// `constant + Σ coeff[i][j] · x[i][j]`.
///
/// The representation is not unique on `S_n`: adding `t` to every
/// coefficient of a row and subtracting `t` from the constant leaves the
/// function unchanged. Compare functions by their values, never by
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFunction {
    constant: f64,
    coeff: Grid<f64>,
}

impl LinearFunction {
    pub fn new(constant: f64, coeff: Grid<f64>) -> Result<Self> {
        if coeff.n() == 0 {
            return Err(Error::invalid("n must be >= 1"));
        }
        if !constant.is_finite() || coeff.as_slice().iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("coefficients must be finite"));
        }
        Ok(LinearFunction { constant, coeff })
    }

    pub fn zero(n: usize) -> Self {
        Self::constant_fn(n, 0.0)
    }

    pub fn constant_fn(n: usize, c: f64) -> Self {
        assert!(n >= 1, "n must be >= 1");
        LinearFunction {
            constant: c,
            coeff: Grid::zeros(n),
        }
    }

    /// Builds `constant + Σ c · x[cell]`; repeated cells add up.
    pub fn from_terms(n: usize, constant: f64, terms: &[(Cell, f64)]) -> Result<Self> {
        let mut coeff = Grid::zeros(n);
        for &((i, j), c) in terms {
            if i >= n || j >= n {
                return Err(Error::invalid("cell out of range"));
            }
            coeff[(i, j)] += c;
        }
        Self::new(constant, coeff)
    }

    /// `Σ_{cell ∈ cells} x[cell]`.
    pub fn indicator_sum(n: usize, cells: impl IntoIterator<Item = Cell>) -> Result<Self> {
        let terms: Vec<_> = cells.into_iter().map(|c| (c, 1.0)).collect();
        Self::from_terms(n, 0.0, &terms)
    }

    pub fn n(&self) -> usize {
        self.coeff.n()
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn coeff(&self) -> &Grid<f64> {
        &self.coeff
    }

    pub fn coeff_mut(&mut self) -> &mut Grid<f64> {
        &mut self.coeff
    }

    pub fn set_constant(&mut self, c: f64) {
        self.constant = c;
    }

    pub fn evaluate(&self, p: &Permutation) -> Result<f64> {
        if p.n() != self.n() {
            return Err(Error::SizeMismatch {
                expected: self.n(),
                found: p.n(),
            });
        }
        Ok(self.eval_image(p.image()))
    }

    /// Unchecked evaluation on a permutation image.
    #[inline]
    pub fn eval_image(&self, image: &[usize]) -> f64 {
        let mut acc = self.constant;
        for (i, &j) in image.iter().enumerate() {
            acc += self.coeff[(i, j)];
        }
        acc
    }

    /// `E[f]` under the uniform measure: every cell is hit with probability `1/n`.
    pub fn mean(&self) -> f64 {
        self.constant + self.coeff.total() / self.n() as f64
    }

    /// Equivalent representation whose row `i1` and column `j1` vanish.
    pub fn recenter(&self, (i1, j1): Cell) -> LinearFunction {
        let n = self.n();
        let c = &self.coeff;
        let pivot = c[(i1, j1)];
        let row_sum: f64 = c.row(i1).iter().sum();
        let col_sum: f64 = (0..n).map(|i| c[(i, j1)]).sum();
        let coeff = Grid::from_fn(n, |i, j| {
            if i == i1 || j == j1 {
                0.0
            } else {
                pivot + c[(i, j)] - c[(i1, j)] - c[(i, j1)]
            }
        });
        LinearFunction {
            constant: self.constant + row_sum + col_sum - n as f64 * pivot,
            coeff,
        }
    }

    /// `1 − f`.
    pub fn complement(&self) -> LinearFunction {
        LinearFunction {
            constant: 1.0 - self.constant,
            coeff: self.coeff.map(|c| -c),
        }
    }

    pub fn sub(&self, other: &LinearFunction) -> Result<LinearFunction> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(LinearFunction {
            constant: self.constant - other.constant,
            coeff: self.coeff.sub(&other.coeff),
        })
    }

    /// Values on all of `S_n` in enumeration order.
    pub fn table(&self, exact_threshold: usize) -> Result<ValueTable> {
        ValueTable::from_fn(self.n(), exact_threshold, |p| self.eval_image(p.image()))
    }

    /// Whether every coefficient and the constant are integers.
    pub fn is_integral(&self) -> bool {
        let int = |x: f64| libm::round(x) == x;
        int(self.constant) && self.coeff.as_slice().iter().all(|&c| int(c))
    }
}

impl SnFunction for LinearFunction {
    fn n(&self) -> usize {
        self.coeff.n()
    }

    #[inline]
    fn value(&self, p: &Permutation, _rank: Option<usize>) -> f64 {
        self.eval_image(p.image())
    }
}

/// Values of a function on all `n!` permutations, in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    n: usize,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        let expected = factorial(n).ok_or_else(|| Error::invalid("n! overflows"))?;
        if n == 0 {
            return Err(Error::invalid("n must be >= 1"));
        }
        if values.len() as u64 != expected {
            return Err(Error::invalid(alloc::format!(
                "table for n = {n} needs {expected} values, found {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("table values must be finite"));
        }
        Ok(ValueTable { n, values })
    }

    pub fn from_fn(
        n: usize,
        exact_threshold: usize,
        mut f: impl FnMut(&Permutation) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::new();
        for_each_permutation(n, exact_threshold, |p, _| values.push(f(p)))?;
        Ok(ValueTable { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, rank: usize) -> f64 {
        self.values[rank]
    }

    pub fn mean(&self) -> f64 {
        let s: crate::numeric::CompensatedSum = self.values.iter().copied().collect();
        s.value() / self.values.len() as f64
    }

    pub fn complement(&self) -> ValueTable {
        ValueTable {
            n: self.n,
            values: self.values.iter().map(|v| 1.0 - v).collect(),
        }
    }

    pub fn is_boolean(&self, tau: f64) -> bool {
        self.values
            .iter()
            .all(|&v| crate::numeric::is_boolean(v, tau))
    }
}

impl SnFunction for ValueTable {
    fn n(&self) -> usize {
        self.n
    }

    fn value(&self, p: &Permutation, rank: Option<usize>) -> f64 {
        self.values[rank.unwrap_or_else(|| p.lex_rank())]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rng_from_seed;
    use crate::perm::{enumerate_permutations, sample_permutation};
    use rand::Rng;

    #[test]
    fn evaluate_examples() {
        let f = LinearFunction::indicator_sum(3, [(0, 0)]).unwrap();
        assert_eq!(f.evaluate(&Permutation::identity(3)).unwrap(), 1.0);
        let t = Permutation::new(alloc::vec![1, 0, 2]).unwrap();
        assert_eq!(f.evaluate(&t).unwrap(), 0.0);
        let flat = LinearFunction::new(0.0, Grid::filled(4, 0.25)).unwrap();
        for p in enumerate_permutations(4, 10).unwrap() {
            assert!((flat.evaluate(&p).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(f.evaluate(&Permutation::identity(2)).is_err());
    }

    #[test]
    fn recenter_examples() {
        let f = LinearFunction::indicator_sum(2, [(0, 0)]).unwrap();
        let g = f.recenter((0, 0));
        assert_eq!(g.constant(), 0.0);
        assert_eq!(g.coeff()[(1, 1)], 1.0);
        assert_eq!(g.coeff()[(0, 0)], 0.0);
        let h = LinearFunction::indicator_sum(4, [(2, 3)]).unwrap();
        assert_eq!(h.recenter((0, 0)), h);
        let once = h.recenter((1, 2));
        assert_eq!(once.recenter((1, 2)), once);
    }

    #[test]
    fn recenter_preserves_values_exhaustive_and_sampled() {
        let mut rng = rng_from_seed(9);
        for n in 1..=6 {
            let f = LinearFunction::new(
                rng.random_range(-1.0..1.0),
                Grid::from_fn(n, |_, _| rng.random_range(-2.0..2.0)),
            )
            .unwrap();
            for a in 0..n {
                for b in 0..n {
                    let g = f.recenter((a, b));
                    for p in enumerate_permutations(n, 10).unwrap() {
                        let d = f.evaluate(&p).unwrap() - g.evaluate(&p).unwrap();
                        assert!(d.abs() < 1e-12);
                    }
                }
            }
        }
        for n in [10, 25, 50] {
            let f = LinearFunction::new(
                0.3,
                Grid::from_fn(n, |_, _| rng.random_range(-1.0..1.0)),
            )
            .unwrap();
            let g = f.recenter((n / 2, n - 1));
            for _ in 0..200 {
                let p = sample_permutation(n, &mut rng);
                let d = f.evaluate(&p).unwrap() - g.evaluate(&p).unwrap();
                assert!(d.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn table_length_checked() {
        assert!(ValueTable::new(3, alloc::vec![0.0; 5]).is_err());
        assert!(ValueTable::new(3, alloc::vec![0.0; 6]).is_ok());
        let f = LinearFunction::indicator_sum(3, [(0, 0)]).unwrap();
        let t = f.table(10).unwrap();
        assert_eq!(t.values().iter().filter(|&&v| v == 1.0).count(), 2);
    }
}
