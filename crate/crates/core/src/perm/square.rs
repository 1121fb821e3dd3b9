use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::perm::permutation::{sample_permutation, Permutation};
use crate::perm::Cell;

/// A square `{a, a'} × {b, b'}`. The orientation of each side is kept so it
/// can serve as a cube variable: `x = 1` maps `a ↦ b, a' ↦ b'` (straight),
/// `x = 0` maps `a ↦ b', a' ↦ b` (crossed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Square {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
}

impl Square {
    pub fn new(rows: (usize, usize), cols: (usize, usize)) -> Result<Self> {
        if rows.0 == rows.1 || cols.0 == cols.1 {
            return Err(Error::invalid("degenerate square: repeated index"));
        }
        Ok(Square { rows, cols })
    }

    /// Same square with `rows.0 < rows.1` and `cols.0 < cols.1`.
    pub fn canonical(&self) -> Square {
        let (a, b) = self.rows;
        let (c, d) = self.cols;
        Square {
            rows: (a.min(b), a.max(b)),
            cols: (c.min(d), c.max(d)),
        }
    }

    pub fn is_compatible(&self, other: &Square) -> bool {
        let (a, b) = self.rows;
        let (c, d) = self.cols;
        a != other.rows.0
            && a != other.rows.1
            && b != other.rows.0
            && b != other.rows.1
            && c != other.cols.0
            && c != other.cols.1
            && d != other.cols.0
            && d != other.cols.1
    }
}

/// `⌊n/2⌋` mutually compatible squares plus a singleton when `n` is odd.
/// Together they index the sub-cube `S_Σ ⊂ S_n` of permutations hitting
/// every square.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareSystem {
    n: usize,
    squares: Vec<Square>,
    singleton: Option<Cell>,
}

impl SquareSystem {
    /// Pairs consecutive entries of the sequences `a` and `b`.
    pub fn from_sequences(a: &Permutation, b: &Permutation) -> Result<Self> {
        let n = a.n();
        if b.n() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                found: b.n(),
            });
        }
        if n < 2 {
            return Err(Error::invalid("square systems need n >= 2"));
        }
        let (a, b) = (a.image(), b.image());
        let squares = (0..n / 2)
            .map(|t| Square {
                rows: (a[2 * t], a[2 * t + 1]),
                cols: (b[2 * t], b[2 * t + 1]),
            })
            .collect();
        let singleton = (n % 2 == 1).then(|| (a[n - 1], b[n - 1]));
        let sys = SquareSystem {
            n,
            squares,
            singleton,
        };
        debug_assert!(sys.is_partition());
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn squares(&self) -> &[Square] {
        &self.squares
    }

    pub fn singleton(&self) -> Option<Cell> {
        self.singleton
    }

    /// Number of cube variables, `⌊n/2⌋`.
    pub fn dim(&self) -> usize {
        self.squares.len()
    }

    pub fn contains_square(&self, sq: &Square) -> bool {
        let c = sq.canonical();
        self.squares.iter().any(|s| s.canonical() == c)
    }

    /// Row sides and column sides (with the singleton) each partition `[n]`.
    pub fn is_partition(&self) -> bool {
        let mut rows = alloc::vec![0u8; self.n];
        let mut cols = alloc::vec![0u8; self.n];
        for s in &self.squares {
            for r in [s.rows.0, s.rows.1] {
                if r >= self.n {
                    return false;
                }
                rows[r] += 1;
            }
            for c in [s.cols.0, s.cols.1] {
                if c >= self.n {
                    return false;
                }
                cols[c] += 1;
            }
        }
        if let Some((r, c)) = self.singleton {
            if r >= self.n || c >= self.n {
                return false;
            }
            rows[r] += 1;
            cols[c] += 1;
        }
        rows.iter().all(|&k| k == 1) && cols.iter().all(|&k| k == 1)
    }

    /// The element of `S_Σ` selected by a cube point.
    pub fn permutation(&self, x: &[bool]) -> Result<Permutation> {
        if x.len() != self.dim() {
            return Err(Error::SizeMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let mut image = alloc::vec![0; self.n];
        for (s, &bit) in self.squares.iter().zip(x) {
            let (a, a2) = s.rows;
            let (b, b2) = s.cols;
            if bit {
                image[a] = b;
                image[a2] = b2;
            } else {
                image[a] = b2;
                image[a2] = b;
            }
        }
        if let Some((r, c)) = self.singleton {
            image[r] = c;
        }
        Ok(Permutation::from_vec_unchecked(image))
    }
}

/// Square system built from two independent uniform permutations.
pub fn sample_square_system<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SquareSystem> {
    if n < 2 {
        return Err(Error::invalid("square systems need n >= 2"));
    }
    let a = sample_permutation(n, rng);
    let b = sample_permutation(n, rng);
    SquareSystem::from_sequences(&a, &b)
}
