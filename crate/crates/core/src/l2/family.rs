use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::l2::reps::SporadicRep;
use crate::linfn::LinearFunction;
use crate::numeric::binomial2;
use crate::perm::{Cell, CellSet};
use crate::report::{Dictator, Orientation};

/// A set of cosets with its non-disjoint pair count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetFamily {
    pub cells: CellSet,
    pub size: usize,
    /// Unordered pairs of distinct cells in different rows and columns.
    pub nondisjoint_pairs: usize,
}

impl CosetFamily {
    pub fn new(cells: CellSet) -> Self {
        let (size, nondisjoint_pairs) = disjointness_stats(&cells);
        CosetFamily {
            cells,
            size,
            nondisjoint_pairs,
        }
    }

    pub fn n(&self) -> usize {
        self.cells.n()
    }

    /// `h = Σ_C x`.
    pub fn sum_function(&self) -> LinearFunction {
        LinearFunction::indicator_sum(self.n(), self.cells.iter().copied())
            .expect("family cells are in range")
    }

    /// `max_C x`, i.e. whether the permutation hits the family, at an image.
    pub fn hits(&self, image: &[usize]) -> bool {
        self.cells.iter().any(|&(i, j)| image[i] == j)
    }
}

/// `(|C|, P)` where `P` counts unordered pairs that share neither row nor column.
pub fn disjointness_stats(cells: &CellSet) -> (usize, usize) {
    let m = cells.len();
    let mut rows: BTreeMap<usize, usize> = BTreeMap::new();
    let mut cols: BTreeMap<usize, usize> = BTreeMap::new();
    for &(i, j) in cells {
        *rows.entry(i).or_default() += 1;
        *cols.entry(j).or_default() += 1;
    }
    // Distinct cells share at most one line.
    let same_line: usize = rows.values().chain(cols.values()).map(|&k| binomial2(k)).sum();
    (m, binomial2(m) - same_line)
}

/// Exact `E[h(h − 1)]` for `h = Σ_C x`: only non-disjoint pairs can be hit
/// together, each with probability `1/(n(n−1))`.
pub fn expected_pair_overlap(c: &CosetFamily) -> f64 {
    let n = c.n() as f64;
    2.0 * c.nondisjoint_pairs as f64 / (n * (n - 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub family: CosetFamily,
    /// The family approximates `1 − f` rather than `f`.
    pub flipped: bool,
    /// Support cells whose oriented coefficient is not 1.
    pub bad_cells: Vec<Cell>,
}

/// Keeps the support cells with oriented coefficient 1.
pub fn extract_coset_family(sp: &SporadicRep) -> Result<Extraction> {
    let flipped = match sp.r {
        0 => false,
        1 => true,
        r => {
            return Err(Error::NotNearBoolean(format!(
                "sporadic constant is {r}, expected 0 or 1"
            )))
        }
    };
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for (cell, &v) in sp.r_grid.cells() {
        if v == 0 {
            continue;
        }
        let oriented = if flipped { -v } else { v };
        if oriented == 1 {
            good.push(cell);
        } else {
            bad.push(cell);
        }
    }
    let cells = CellSet::new(sp.n, good).expect("grid cells are in range");
    Ok(Extraction {
        family: CosetFamily::new(cells),
        flipped,
        bad_cells: bad,
    })
}

/// Dictator on the heaviest line if it holds at least `K·δ·n` cells,
/// otherwise `None` (the constant 0). Ties prefer rows, then lower indices.
pub fn constant_or_dictator(c: &CosetFamily, delta: f64, k: f64) -> Result<Option<Dictator>> {
    if !(delta > 0.0) {
        return Err(Error::invalid("delta must be positive"));
    }
    let n = c.n();
    let mut rows = alloc::vec![0usize; n];
    let mut cols = alloc::vec![0usize; n];
    for &(i, j) in &c.cells {
        rows[i] += 1;
        cols[j] += 1;
    }
    let mut best: Option<(usize, Orientation, usize)> = None;
    for (orientation, counts) in [(Orientation::Row, &rows), (Orientation::Col, &cols)] {
        for (idx, &cnt) in counts.iter().enumerate() {
            if best.is_none_or(|(b, _, _)| cnt > b) {
                best = Some((cnt, orientation, idx));
            }
        }
    }
    let threshold = k * delta * n as f64;
    match best {
        Some((cnt, orientation, index)) if cnt > 0 && cnt as f64 + 1e-9 >= threshold => {
            let targets = c
                .cells
                .iter()
                .filter_map(|&(i, j)| match orientation {
                    Orientation::Row if i == index => Some(j),
                    Orientation::Col if j == index => Some(i),
                    _ => None,
                })
                .collect();
            Ok(Some(Dictator {
                orientation,
                index,
                targets,
                flipped: false,
            }))
        }
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::l2::reps::sporadic_from_grid;
    use crate::linfn::Grid;
    use crate::numeric::{dist_01, rng_from_seed};
    use crate::perm::enumerate_permutations;
    use rand::Rng;

    fn set(n: usize, cells: &[Cell]) -> CellSet {
        CellSet::new(n, cells.iter().copied()).unwrap()
    }

    #[test]
    fn stats_examples() {
        assert_eq!(disjointness_stats(&set(4, &[(0, 0), (0, 1), (0, 3)])), (3, 0));
        assert_eq!(disjointness_stats(&set(3, &[(0, 0), (1, 1)])), (2, 1));
        assert_eq!(disjointness_stats(&set(3, &[(0, 0), (1, 1), (2, 2)])), (3, 3));
    }

    fn brute_overlap(c: &CosetFamily) -> (f64, f64) {
        let h = c.sum_function();
        let mut hh = 0.0;
        let mut d = 0.0;
        let mut cnt = 0.0;
        for p in enumerate_permutations(c.n(), 10).unwrap() {
            let v = h.evaluate(&p).unwrap();
            hh += v * (v - 1.0);
            d += dist_01(v).powi(2);
            cnt += 1.0;
        }
        (hh / cnt, d / cnt)
    }

    #[test]
    fn overlap_examples() {
        let c = CosetFamily::new(set(3, &[(0, 0), (1, 1)]));
        assert!((expected_pair_overlap(&c) - 1.0 / 3.0).abs() < 1e-15);
        assert!((brute_overlap(&c).0 - 1.0 / 3.0).abs() < 1e-15);
        let row = CosetFamily::new(set(5, &[(2, 0), (2, 4)]));
        assert_eq!(expected_pair_overlap(&row), 0.0);
        let diag = CosetFamily::new(set(4, &[(0, 0), (1, 1), (2, 2)]));
        assert_eq!(expected_pair_overlap(&diag), 0.5);
        assert!((brute_overlap(&diag).0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn overlap_sandwich_random_families() {
        let mut rng = rng_from_seed(21);
        for n in 3..=7 {
            for _ in 0..10 {
                let m = rng.random_range(0..=2 * n);
                let cells: Vec<Cell> = (0..m).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
                let c = CosetFamily::new(set(n, &cells));
                let (hh, d) = brute_overlap(&c);
                assert!((expected_pair_overlap(&c) - hh).abs() < 1e-12);
                assert!(d <= hh + 1e-12 && hh <= 2.0 * d + 1e-12);
            }
        }
    }

    #[test]
    fn extraction_orients_by_constant() {
        let mut g = Grid::filled(5, 0i8);
        g[(1, 0)] = 1;
        g[(1, 3)] = 1;
        let ex = extract_coset_family(&sporadic_from_grid(5, 0, &g)).unwrap();
        assert!(!ex.flipped);
        assert!(ex.bad_cells.is_empty());
        assert_eq!(ex.family.cells, set(5, &[(1, 0), (1, 3)]));

        let neg = g.map(|&v| -v);
        let ex1 = extract_coset_family(&sporadic_from_grid(5, 1, &neg)).unwrap();
        assert!(ex1.flipped);
        assert_eq!(ex1.family.cells, ex.family.cells);

        let bad = sporadic_from_grid(5, 2, &g);
        assert!(matches!(extract_coset_family(&bad), Err(Error::NotNearBoolean(_))));
    }

    #[test]
    fn heavy_line_decisions() {
        let half_row = CosetFamily::new(set(10, &[(1, 0), (1, 1), (1, 2), (1, 3), (1, 4)]));
        let d = constant_or_dictator(&half_row, 0.1, 1.0).unwrap().unwrap();
        assert_eq!((d.orientation, d.index), (Orientation::Row, 1));

        let scattered = CosetFamily::new(set(10, &[(0, 0), (5, 5)]));
        assert!(constant_or_dictator(&scattered, 0.9, 1.0).unwrap().is_none());

        let mixed = CosetFamily::new(set(
            10,
            &[(3, 0), (3, 2), (3, 4), (3, 6), (3, 8), (0, 1), (7, 5)],
        ));
        let d = constant_or_dictator(&mixed, 0.3, 1.0).unwrap().unwrap();
        assert_eq!((d.orientation, d.index), (Orientation::Row, 3));
        assert_eq!(d.targets, alloc::vec![0, 2, 4, 6, 8]);
        assert!(constant_or_dictator(&mixed, 0.0, 1.0).is_err());
    }
}
