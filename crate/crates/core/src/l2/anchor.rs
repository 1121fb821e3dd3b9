use alloc::vec::Vec;

use rand::seq::index::sample;

use crate::linfn::LinearFunction;
use crate::numeric::{rng_from_seed, round_pm1};
use crate::perm::Cell;

/// Which anchors to score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorScan {
    /// All `n²` anchors (`O(n⁴)` work).
    Full,
    /// A seeded random subset of `count` anchors.
    Sampled { count: usize, seed: u64 },
}

impl AnchorScan {
    /// Full scan up to `limit`, sampled beyond.
    pub fn for_size(n: usize, limit: usize, count: usize, seed: u64) -> Self {
        if n <= limit {
            AnchorScan::Full
        } else {
            AnchorScan::Sampled { count, seed }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnchorChoice {
    pub anchor: Cell,
    /// Mean squared rounding error of the recentered off-anchor coefficients.
    pub s1: f64,
    /// Fraction of recentered off-anchor coefficients that round to ±1.
    pub s2: f64,
    nonzero: usize,
}

/// `d[i][j] = c[i1][j1] + c[i][j] − c[i1][j] − c[i][j1]`.
#[inline]
pub fn recentered_coeff(f: &LinearFunction, (i1, j1): Cell, (i, j): Cell) -> f64 {
    let c = f.coeff();
    c[(i1, j1)] + c[(i, j)] - c[(i1, j)] - c[(i, j1)]
}

fn score(f: &LinearFunction, anchor: Cell) -> AnchorChoice {
    let n = f.n();
    let (i1, j1) = anchor;
    let c = f.coeff();
    let pivot = c[anchor];
    let anchor_row = c.row(i1);
    let mut nonzero = 0usize;
    let mut sq = 0.0;
    for i in (0..n).filter(|&i| i != i1) {
        let row = c.row(i);
        let shift = pivot - row[j1];
        for j in (0..n).filter(|&j| j != j1) {
            let d = shift + row[j] - anchor_row[j];
            let r = round_pm1(d);
            if r != 0 {
                nonzero += 1;
            }
            let e = d - f64::from(r);
            sq += e * e;
        }
    }
    let cells = ((n - 1) * (n - 1)).max(1) as f64;
    AnchorChoice {
        anchor,
        s1: sq / cells,
        s2: nonzero as f64 / cells,
        nonzero,
    }
}

fn better(a: &AnchorChoice, b: &AnchorChoice) -> bool {
    (a.nonzero, a.s1, a.anchor) < (b.nonzero, b.s1, b.anchor)
}

/// Anchor minimizing `(S2, S1, i1, j1)` lexicographically.
pub fn select_anchor(f: &LinearFunction, scan: AnchorScan) -> AnchorChoice {
    let n = f.n();
    let candidates: Vec<Cell> = match scan {
        AnchorScan::Full => (0..n * n).map(|k| (k / n, k % n)).collect(),
        AnchorScan::Sampled { count, seed } => {
            let mut rng = rng_from_seed(seed);
            let mut picks: Vec<Cell> = sample(&mut rng, n * n, count.clamp(1, n * n))
                .into_iter()
                .map(|k| (k / n, k % n))
                .collect();
            picks.sort_unstable();
            picks
        }
    };
    let mut best = score(f, candidates[0]);
    for &a in &candidates[1..] {
        let s = score(f, a);
        if better(&s, &best) {
            best = s;
        }
    }
    best
}
