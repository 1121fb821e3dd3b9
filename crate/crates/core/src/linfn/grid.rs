use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::perm::Cell;

/// Dense `n × n` array, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(n: usize, value: T) -> Self {
        Grid {
            n,
            data: alloc::vec![value; n * n],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Grid { n, data }
    }

    /// Wraps a row-major buffer of length `n²`.
    pub fn from_vec(n: usize, data: Vec<T>) -> Option<Self> {
        (data.len() == n * n).then_some(Grid { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Cells with their values in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (Cell, &T)> + '_ {
        let n = self.n;
        self.data.iter().enumerate().map(move |(k, v)| ((k / n, k % n), v))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            n: self.n,
            data: self.data.iter().map(&mut f).collect(),
        }
    }
}

impl Grid<f64> {
    pub fn zeros(n: usize) -> Self {
        Grid::filled(n, 0.0)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = alloc::vec![0.0; self.n];
        for ((_, j), v) in self.cells() {
            s[j] += *v;
        }
        s
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn sub(&self, other: &Grid<f64>) -> Grid<f64> {
        debug_assert_eq!(self.n, other.n);
        Grid {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Grid<i8> {
    pub fn to_f64(&self) -> Grid<f64> {
        self.map(|&v| f64::from(v))
    }

    pub fn support(&self) -> Vec<Cell> {
        self.cells().filter(|(_, v)| **v != 0).map(|(c, _)| c).collect()
    }
}

impl<T> Index<Cell> for Grid<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): Cell) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<Cell> for Grid<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): Cell) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}
