use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// A bijection of `{0, .., n-1}`; `image[i]` is the value `π(i)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        if image.is_empty() {
            return Err(Error::invalid("permutation must have n >= 1"));
        }
        let n = image.len();
        let mut seen = alloc::vec![false; n];
        for &v in &image {
            if v >= n || seen[v] {
                return Err(Error::invalid(alloc::format!(
                    "image is not a bijection on [0, {n})"
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation { image })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n).collect(),
        }
    }

    pub(crate) fn from_vec_unchecked(image: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(image.clone()).is_ok());
        Permutation { image }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = alloc::vec![0; self.n()];
        for (i, &j) in self.image.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { image: inv }
    }

    /// Composition `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(Permutation {
            image: other.image.iter().map(|&k| self.image[k]).collect(),
        })
    }

    /// Position of this permutation in the lexicographic enumeration.
    pub fn lex_rank(&self) -> usize {
        let n = self.n();
        let mut rank = 0usize;
        for i in 0..n {
            let smaller_later = self.image[i + 1..]
                .iter()
                .filter(|&&v| v < self.image[i])
                .count();
            rank = rank * (n - i) + smaller_later;
        }
        rank
    }

    /// Advances to the lexicographic successor; returns `false` at the last one.
    fn advance(&mut self) -> bool {
        let v = &mut self.image;
        let n = v.len();
        if n < 2 {
            return false;
        }
        let mut i = n - 1;
        while i > 0 && v[i - 1] >= v[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = n - 1;
        while v[j] <= v[i - 1] {
            j -= 1;
        }
        v.swap(i - 1, j);
        v[i..].reverse();
        true
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, v) in self.image.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, "]")
    }
}

/// Lexicographic stream over all of `S_n`.
#[derive(Debug, Clone)]
pub struct Permutations {
    next: Option<Permutation>,
}

impl Iterator for Permutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if succ.advance() {
            self.next = Some(succ);
        }
        Some(current)
    }
}

/// All `n!` permutations in lexicographic order of their images.
pub fn enumerate_permutations(n: usize, exact_threshold: usize) -> Result<Permutations> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if n > exact_threshold {
        return Err(Error::Capacity {
            what: "n for exhaustive enumeration",
            requested: n,
            limit: exact_threshold,
        });
    }
    Ok(Permutations {
        next: Some(Permutation::identity(n)),
    })
}

/// Calls `visit(π, rank)` for every permutation in lexicographic order,
/// reusing one buffer instead of allocating per permutation.
pub fn for_each_permutation(
    n: usize,
    exact_threshold: usize,
    mut visit: impl FnMut(&Permutation, usize),
) -> Result<()> {
    let mut it = enumerate_permutations(n, exact_threshold)?;
    let mut p = it.next.take().expect("enumeration starts with identity");
    let mut rank = 0;
    loop {
        visit(&p, rank);
        rank += 1;
        if !p.advance() {
            return Ok(());
        }
    }
}

/// Uniform sample from `S_n` (Fisher–Yates shuffle).
pub fn sample_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let mut image: Vec<usize> = (0..n).collect();
    image.shuffle(rng);
    Permutation { image }
}

/// Shuffles `p` in place into a fresh uniform sample.
pub fn resample<R: Rng + ?Sized>(p: &mut Permutation, rng: &mut R) {
    p.image.shuffle(rng);
}
