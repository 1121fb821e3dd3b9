use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A cell `(row, col)` of the `n × n` board; the coset of permutations
/// sending `row` to `col`.
pub type Cell = (usize, usize);

/// A set of cells of the `n × n` board.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellSet {
    n: usize,
    cells: BTreeSet<Cell>,
}

impl CellSet {
    pub fn empty(n: usize) -> Self {
        CellSet {
            n,
            cells: BTreeSet::new(),
        }
    }

    /// Builds a set; duplicates collapse, out-of-range cells are rejected.
    pub fn new(n: usize, cells: impl IntoIterator<Item = Cell>) -> Result<Self> {
        let mut set = CellSet::empty(n);
        for c in cells {
            set.insert(c)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, (i, j): Cell) -> Result<bool> {
        if i >= self.n || j >= self.n {
            return Err(Error::invalid(alloc::format!(
                "cell ({}, {}) out of range for n = {}",
                i + 1,
                j + 1,
                self.n
            )));
        }
        Ok(self.cells.insert((i, j)))
    }

    pub fn remove(&mut self, cell: &Cell) -> bool {
        self.cells.remove(cell)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, cell: &Cell) -> bool {
        self.cells.contains(cell)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cell> + '_ {
        self.cells.iter()
    }

    pub fn touched_rows(&self) -> BTreeSet<usize> {
        self.cells.iter().map(|c| c.0).collect()
    }

    pub fn touched_cols(&self) -> BTreeSet<usize> {
        self.cells.iter().map(|c| c.1).collect()
    }

    /// The same set with rows and columns exchanged.
    pub fn transposed(&self) -> CellSet {
        CellSet {
            n: self.n,
            cells: self.cells.iter().map(|&(i, j)| (j, i)).collect(),
        }
    }

    /// Dense membership mask, row-major.
    pub fn mask(&self) -> Vec<bool> {
        let mut m = alloc::vec![false; self.n * self.n];
        for &(i, j) in &self.cells {
            m[i * self.n + j] = true;
        }
        m
    }
}

impl<'a> IntoIterator for &'a CellSet {
    type Item = &'a Cell;
    type IntoIter = alloc::collections::btree_set::Iter<'a, Cell>;

    fn into_iter(self) -> Self::IntoIter {
        self.cells.iter()
    }
}
