//! Recovery in the L0 metric: square defects, the square census and the L0
//! sparse representation.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::l2::{
    dictator_step, family_approximant, finish_chain, recentered_coeff, sporadic_from_grid,
    verdict_for, AnalysisOptions, AnchorScan, SparseRep,
};
use crate::linfn::{centered_sq_norm, disagreement, dist_to_boolean, distance_l2_between, estimate_mean, Grid, LinearFunction};
use crate::numeric::{binomial2, dist_int, dist_pm1, rng_from_seed, round_pm1};
use crate::perm::{Cell, CellSet};
use crate::report::{Measurement, Metric, Regime, StructureReport, Verdict};

/// `c[i1][j1] + c[i2][j2] − c[i1][j2] − c[i2][j1]` with the sides sorted.
pub fn square_defect(f: &LinearFunction, rows: (usize, usize), cols: (usize, usize)) -> Result<f64> {
    let n = f.n();
    let (i1, i2) = (rows.0.min(rows.1), rows.0.max(rows.1));
    let (j1, j2) = (cols.0.min(cols.1), cols.0.max(cols.1));
    if i1 == i2 || j1 == j2 {
        return Err(Error::invalid("degenerate square"));
    }
    if i2 >= n || j2 >= n {
        return Err(Error::invalid("square out of range"));
    }
    let c = f.coeff();
    Ok(c[(i1, j1)] + c[(i2, j2)] - c[(i1, j2)] - c[(i2, j1)])
}

/// Counts of squares with non-zero defect (`R₀`) and with defect outside
/// `{0, ±1}` (`R₁`).
#[derive(Debug, Clone, PartialEq)]
pub struct SquareCensus {
    pub n: usize,
    /// `C(n, 2)²`.
    pub total: u64,
    pub r0_count: u64,
    pub r1_count: u64,
    pub regime: Regime,
    /// Ordered pairs of compatible squares both in `R₀`, when requested.
    pub compatible_r0_pairs: Option<u64>,
}

impl SquareCensus {
    pub fn rho0(&self) -> f64 {
        self.r0_count as f64 / self.total as f64
    }

    pub fn rho1(&self) -> f64 {
        self.r1_count as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensusOptions {
    pub tau: f64,
    /// Largest `n` censused exactly.
    pub exact_limit: usize,
    pub samples: usize,
    pub seed: u64,
    pub compatible_pairs: bool,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            tau: crate::DEFAULT_TAU,
            exact_limit: 150,
            samples: 1_000_000,
            seed: 0,
            compatible_pairs: false,
        }
    }
}

fn in_r1(d: f64, tau: f64) -> bool {
    dist_pm1(d) > tau
}

fn pair_index(n: usize, a: usize, b: usize) -> usize {
    // Rank of {a < b} among the pairs of [n].
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

pub fn square_census(f: &LinearFunction, opts: &CensusOptions) -> Result<SquareCensus> {
    let n = f.n();
    if n < 2 {
        return Err(Error::invalid("census needs n >= 2"));
    }
    let total = (binomial2(n) as u64).pow(2);
    let c = f.coeff();
    if n > opts.exact_limit {
        if opts.samples == 0 {
            return Err(Error::invalid("samples must be positive"));
        }
        let mut rng = rng_from_seed(opts.seed);
        let (mut r0, mut r1) = (0u64, 0u64);
        let pick = |rng: &mut crate::numeric::SeededRng| {
            let a = rng.random_range(0..n);
            let mut b = rng.random_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            (a, b)
        };
        for _ in 0..opts.samples {
            let rows = pick(&mut rng);
            let cols = pick(&mut rng);
            let d = square_defect(f, rows, cols)?;
            if libm::fabs(d) > opts.tau {
                r0 += 1;
            }
            if in_r1(d, opts.tau) {
                r1 += 1;
            }
        }
        let scale = total as f64 / opts.samples as f64;
        return Ok(SquareCensus {
            n,
            total,
            r0_count: libm::round(r0 as f64 * scale) as u64,
            r1_count: libm::round(r1 as f64 * scale) as u64,
            regime: Regime::MonteCarlo { samples: opts.samples },
            compatible_r0_pairs: None,
        });
    }

    let (mut r0, mut r1) = (0u64, 0u64);
    let mut diff = alloc::vec![0.0; n];
    let mut for_each_square = |visit: &mut dyn FnMut(usize, usize, usize, usize, f64)| {
        for i1 in 0..n {
            for i2 in i1 + 1..n {
                for j in 0..n {
                    diff[j] = c[(i1, j)] - c[(i2, j)];
                }
                for j1 in 0..n {
                    for j2 in j1 + 1..n {
                        visit(i1, i2, j1, j2, diff[j1] - diff[j2]);
                    }
                }
            }
        }
    };
    for_each_square(&mut |_, _, _, _, d| {
        if libm::fabs(d) > opts.tau {
            r0 += 1;
        }
        if in_r1(d, opts.tau) {
            r1 += 1;
        }
    });

    let compatible_r0_pairs = if opts.compatible_pairs {
        Some(compatible_pairs(n, r0, opts.tau, &mut for_each_square))
    } else {
        None
    };
    Ok(SquareCensus {
        n,
        total,
        r0_count: r0,
        r1_count: r1,
        regime: Regime::Exact,
        compatible_r0_pairs,
    })
}

/// Ordered pairs `(s, t)` of `R₀` squares sharing no row and no column, by
/// inclusion–exclusion over shared indices.
fn compatible_pairs(
    n: usize,
    r0: u64,
    tau: f64,
    for_each_square: &mut dyn FnMut(&mut dyn FnMut(usize, usize, usize, usize, f64)),
) -> u64 {
    let pairs = binomial2(n);
    let mut row = alloc::vec![0u64; n];
    let mut col = alloc::vec![0u64; n];
    let mut row_pair = alloc::vec![0u64; pairs];
    let mut col_pair = alloc::vec![0u64; pairs];
    let mut rc = alloc::vec![0u64; n * n];
    let mut rp_c = alloc::vec![0u32; pairs * n];
    let mut r_cp = alloc::vec![0u32; n * pairs];
    for_each_square(&mut |i1, i2, j1, j2, d| {
        if libm::fabs(d) <= tau {
            return;
        }
        let (rp, cp) = (pair_index(n, i1, i2), pair_index(n, j1, j2));
        row[i1] += 1;
        row[i2] += 1;
        col[j1] += 1;
        col[j2] += 1;
        row_pair[rp] += 1;
        col_pair[cp] += 1;
        for &a in &[i1, i2] {
            for &b in &[j1, j2] {
                rc[a * n + b] += 1;
            }
            r_cp[a * pairs + cp] += 1;
        }
        for &b in &[j1, j2] {
            rp_c[rp * n + b] += 1;
        }
    });
    let mut clash = 0u64;
    for_each_square(&mut |i1, i2, j1, j2, d| {
        if libm::fabs(d) <= tau {
            return;
        }
        let (rp, cp) = (pair_index(n, i1, i2), pair_index(n, j1, j2));
        let share_row = row[i1] + row[i2] - row_pair[rp];
        let share_col = col[j1] + col[j2] - col_pair[cp];
        let both = rc[i1 * n + j1] + rc[i1 * n + j2] + rc[i2 * n + j1] + rc[i2 * n + j2]
            - u64::from(rp_c[rp * n + j1])
            - u64::from(rp_c[rp * n + j2])
            - u64::from(r_cp[i1 * pairs + cp])
            - u64::from(r_cp[i2 * pairs + cp])
            + 1;
        clash += share_row + share_col - both;
    });
    r0 * r0 - clash
}

/// Sparse representation in the L0 sense.
#[derive(Debug, Clone, PartialEq)]
pub struct L0Sparse {
    pub rep: SparseRep,
    /// Cells whose recentered coefficient was not within `tau` of `{0, ±1}`.
    pub discarded: Vec<Cell>,
    /// Distance of the recentered constant to its integer.
    pub constant_offset: f64,
}

fn l0_scores(f: &LinearFunction, anchor: Cell, tau: f64) -> (usize, usize) {
    let n = f.n();
    let (mut bad, mut nonzero) = (0, 0);
    for i in (0..n).filter(|&i| i != anchor.0) {
        for j in (0..n).filter(|&j| j != anchor.1) {
            let d = recentered_coeff(f, anchor, (i, j));
            if dist_pm1(d) > tau {
                bad += 1;
            } else if libm::fabs(d) > tau {
                nonzero += 1;
            }
        }
    }
    (bad, nonzero)
}

/// Recenters at the anchor minimizing `(#d ∉ {0,±1}, #d ≠ 0, i1, j1)`, keeps
/// coefficients within `tau` of `{0, ±1}` and zeroes the rest.
pub fn sparse_representation_l0(f: &LinearFunction, scan: AnchorScan, tau: f64) -> Result<L0Sparse> {
    let n = f.n();
    if n < 2 {
        return Err(Error::invalid("n must be >= 2"));
    }
    let candidates: Vec<Cell> = match scan {
        AnchorScan::Full => (0..n * n).map(|k| (k / n, k % n)).collect(),
        AnchorScan::Sampled { count, seed } => {
            let mut rng = rng_from_seed(seed);
            let mut v: Vec<Cell> = rand::seq::index::sample(&mut rng, n * n, count.clamp(1, n * n))
                .into_iter()
                .map(|k| (k / n, k % n))
                .collect();
            v.sort_unstable();
            v
        }
    };
    let mut best: Option<((usize, usize), Cell)> = None;
    for a in candidates {
        let s = l0_scores(f, a, tau);
        if best.is_none_or(|(b, _)| s < b) {
            best = Some((s, a));
        }
    }
    let ((bad, nonzero), anchor) = best.expect("n >= 2 has candidates");
    let g = f.recenter(anchor);
    let mut discarded = Vec::new();
    let e_grid = Grid::from_fn(n, |i, j| {
        let d = g.coeff()[(i, j)];
        if dist_pm1(d) > tau {
            discarded.push((i, j));
            0
        } else {
            round_pm1(d)
        }
    });
    let offset = dist_int(g.constant());
    if offset > 0.4 {
        return Err(Error::NotNearBoolean(format!(
            "recentered constant {} is {offset:.3} from the nearest integer",
            g.constant()
        )));
    }
    let e = libm::round(g.constant()) as i64;
    let diff = g.coeff().sub(&e_grid.to_f64());
    let e_total: f64 = e_grid.as_slice().iter().map(|&v| f64::from(v)).sum();
    let dm = f.mean() - (e as f64 + e_total / n as f64);
    let cells = ((n - 1) * (n - 1)) as f64;
    Ok(L0Sparse {
        rep: SparseRep {
            n,
            e,
            e_grid,
            anchor,
            scores: (bad as f64 / cells, nonzero as f64 / cells),
            residual_l2sq: centered_sq_norm(&diff) + dm * dm,
        },
        discarded,
        constant_offset: offset,
    })
}

/// Runs the L0 recovery pipeline on a linear function. `ε = Pr[f ∉ {0,1}]`;
/// the analysis is applied to `1 − f` when `Pr[f = 1] > 1/2`.
pub fn analyze_l0(f: &LinearFunction, opts: &AnalysisOptions) -> Result<StructureReport> {
    let n = f.n();
    if n < 2 {
        return Err(Error::invalid("analysis needs n >= 2"));
    }
    let thr = opts.exact_threshold;
    let epsilon = dist_to_boolean(f, Metric::L0, opts.strategy(n, 1), thr, opts.tau)?;
    let p_one = estimate_mean(n, opts.strategy(n, 3), thr, |p, _| {
        f64::from(u8::from(libm::fabs(f.eval_image(p.image()) - 1.0) <= opts.tau))
    })?;
    let pre_flip = p_one.value > 0.5;
    let h = if pre_flip { f.complement() } else { f.clone() };

    let sparse = sparse_representation_l0(&h, opts.anchor_scan(n), opts.tau)?;
    let rep = &sparse.rep;
    let sp = sporadic_from_grid(n, rep.e, &rep.e_grid);
    let chain = finish_chain(n, rep.anchor, rep.scores, rep.support().len(), &sp, opts)?;
    let flipped = pre_flip ^ chain.extraction.flipped;
    let family = chain.extraction.family;
    let mut diagnostics = chain.diagnostics;
    diagnostics.discarded_cells = sparse.discarded.clone();
    diagnostics.notes.push(format!(
        "Pr[f = 1] = {:.6}; recentered constant offset {:.3e}",
        p_one.value, sparse.constant_offset
    ));
    let g = family_approximant(&family.cells, flipped);
    let mut report = StructureReport {
        metric: Metric::L0,
        n,
        verdict: Verdict::Family,
        family: family.cells.clone(),
        dictator: None,
        flipped,
        epsilon,
        closeness: Measurement::exact(distance_l2_between(f, &g)?),
        disagreement: Some(disagreement(f, &g, opts.strategy(n, 2), thr, opts.tau)?),
        disagreement_max: None,
        dictator_closeness: None,
        dictator_disagreement: None,
        diagnostics,
    };
    if let Some(delta) = opts.delta {
        let (d, close, dis) = dictator_step(f, Some(f), &family, flipped, delta, opts)?;
        report.dictator_closeness = Some(close);
        report.dictator_disagreement = Some(dis);
        report.dictator = Some(d);
    }
    report.verdict = verdict_for(report.dictator.as_ref(), &report.family, flipped);
    Ok(report)
}

/// Cells of `f`'s recentered grid that an L0 representation discards, as a
/// cell set (for avoidance computations).
pub fn discarded_set(s: &L0Sparse) -> CellSet {
    CellSet::new(s.rep.n, s.discarded.iter().copied()).expect("grid cells are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::gen_dictator;
    use crate::numeric::rng_from_seed;
    use crate::perm::{enumerate_permutations, sample_square_system};
    use crate::report::Orientation;

    fn brute_census(f: &LinearFunction, tau: f64) -> (u64, u64, u64) {
        let n = f.n();
        let mut squares = Vec::new();
        for i1 in 0..n {
            for i2 in i1 + 1..n {
                for j1 in 0..n {
                    for j2 in j1 + 1..n {
                        let d = square_defect(f, (i1, i2), (j1, j2)).unwrap();
                        squares.push(((i1, i2, j1, j2), d));
                    }
                }
            }
        }
        let r0: Vec<_> = squares.iter().filter(|(_, d)| d.abs() > tau).collect();
        let r1 = squares.iter().filter(|(_, d)| in_r1(*d, tau)).count() as u64;
        let mut compat = 0;
        for (s, _) in &r0 {
            for (t, _) in &r0 {
                let rows_disjoint = s.0 != t.0 && s.0 != t.1 && s.1 != t.0 && s.1 != t.1;
                let cols_disjoint = s.2 != t.2 && s.2 != t.3 && s.3 != t.2 && s.3 != t.3;
                if rows_disjoint && cols_disjoint {
                    compat += 1;
                }
            }
        }
        (r0.len() as u64, r1, compat)
    }

    #[test]
    fn defect_examples() {
        let c = LinearFunction::constant_fn(4, 0.7);
        assert_eq!(square_defect(&c, (0, 1), (2, 3)).unwrap(), 0.0);
        let x = LinearFunction::indicator_sum(4, [(0, 0)]).unwrap();
        assert_eq!(square_defect(&x, (0, 1), (0, 1)).unwrap(), 1.0);
        assert_eq!(square_defect(&x, (1, 2), (1, 2)).unwrap(), 0.0);
        assert_eq!(square_defect(&x, (1, 0), (1, 0)).unwrap(), 1.0);
        assert!(square_defect(&x, (1, 1), (0, 2)).is_err());
    }

    #[test]
    fn defect_orientation_properties() {
        let mut rng = rng_from_seed(1);
        let f = LinearFunction::new(0.0, Grid::from_fn(6, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let c = f.coeff();
        for _ in 0..50 {
            let (a, b) = (rng.random_range(0..6), rng.random_range(0..6));
            let (x, y) = (rng.random_range(0..6), rng.random_range(0..6));
            if a == b || x == y {
                continue;
            }
            let raw = c[(a, x)] + c[(b, y)] - c[(a, y)] - c[(b, x)];
            let swapped = c[(b, x)] + c[(a, y)] - c[(b, y)] - c[(a, x)];
            assert!((swapped + raw).abs() < 1e-15);
            let canon = square_defect(&f, (a, b), (x, y)).unwrap();
            let sign = if (a < b) == (x < y) { 1.0 } else { -1.0 };
            assert!((canon - sign * raw).abs() < 1e-15);
        }
    }

    #[test]
    fn census_examples() {
        let opts = CensusOptions::default();
        let x = LinearFunction::indicator_sum(4, [(0, 0)]).unwrap();
        let c = square_census(&x, &opts).unwrap();
        assert_eq!((c.total, c.r0_count, c.r1_count), (36, 9, 0));
        let k = square_census(&LinearFunction::constant_fn(5, 0.7), &opts).unwrap();
        assert_eq!((k.r0_count, k.r1_count), (0, 0));
        let half = LinearFunction::from_terms(4, 0.0, &[((0, 0), 0.5)]).unwrap();
        assert_eq!(square_census(&half, &opts).unwrap().r1_count, 9);
    }

    #[test]
    fn census_and_compatible_pairs_match_brute_force() {
        let mut rng = rng_from_seed(2);
        let opts = CensusOptions {
            compatible_pairs: true,
            ..CensusOptions::default()
        };
        for n in 2..=7 {
            for _ in 0..5 {
                let g = Grid::from_fn(n, |_, _| [0.0, 0.0, 0.0, 1.0, -1.0, 0.3][rng.random_range(0..6)]);
                let f = LinearFunction::new(0.0, g).unwrap();
                let c = square_census(&f, &opts).unwrap();
                let (r0, r1, compat) = brute_census(&f, 1e-9);
                assert_eq!((c.r0_count, c.r1_count, c.compatible_r0_pairs), (r0, r1, Some(compat)));
            }
        }
    }

    #[test]
    fn sampled_census_tracks_exact_density() {
        let f = LinearFunction::from_terms(12, 0.0, &[((0, 0), 0.5), ((3, 4), 1.0)]).unwrap();
        let exact = square_census(&f, &CensusOptions::default()).unwrap();
        let sampled = square_census(
            &f,
            &CensusOptions {
                exact_limit: 5,
                samples: 200_000,
                seed: 4,
                ..CensusOptions::default()
            },
        )
        .unwrap();
        let p = exact.rho1();
        let sd = (p * (1.0 - p) / 200_000.0).sqrt();
        assert!((sampled.rho1() - p).abs() <= 4.0 * sd);
    }

    #[test]
    fn census_is_consistent_with_random_square_systems() {
        // Pr[Σ meets R₁] lies between max-marginal and union bound.
        let n = 6;
        let f = LinearFunction::from_terms(n, 0.0, &[((0, 0), 0.5), ((2, 3), 0.25)]).unwrap();
        let census = square_census(&f, &CensusOptions::default()).unwrap();
        let per_square = (n / 2) as f64 / census.total as f64;
        let union = (census.r1_count as f64 * per_square).min(1.0);
        let mut rng = rng_from_seed(8);
        let trials = 100_000;
        let mut hits = 0;
        for _ in 0..trials {
            let sys = sample_square_system(n, &mut rng).unwrap();
            let meets = sys
                .squares()
                .iter()
                .any(|sq| in_r1(square_defect(&f, sq.rows, sq.cols).unwrap(), 1e-9));
            if meets {
                hits += 1;
            }
        }
        let p = hits as f64 / trials as f64;
        let sd = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(p <= union + 4.0 * sd);
        assert!(p >= per_square - 4.0 * sd);
    }

    #[test]
    fn l0_sparse_examples() {
        let d = gen_dictator(6, Orientation::Row, 1, &[0, 3]).unwrap();
        let s = sparse_representation_l0(&d, AnchorScan::Full, 1e-9).unwrap();
        assert!(s.discarded.is_empty());
        let same = enumerate_permutations(6, 10).unwrap().all(|p| {
            d.evaluate(&p).unwrap() == s.rep.function().evaluate(&p).unwrap()
        });
        assert!(same);
        assert!(matches!(
            sparse_representation_l0(&LinearFunction::constant_fn(4, 0.5), AnchorScan::Full, 1e-9),
            Err(Error::NotNearBoolean(_))
        ));
    }

    #[test]
    fn l0_sparse_zeroes_corrupted_cells() {
        let n = 8;
        let mut f = gen_dictator(n, Orientation::Row, 0, &[2, 5]).unwrap();
        f.coeff_mut()[(3, 1)] = 0.5;
        f.coeff_mut()[(6, 7)] = 0.5;
        let s = sparse_representation_l0(&f, AnchorScan::Full, 1e-9).unwrap();
        let bad = discarded_set(&s);
        assert_eq!(s.discarded.len(), 2);
        let g = s.rep.function();
        let mut differ = 0usize;
        let mut total = 0usize;
        for p in enumerate_permutations(n, 10).unwrap() {
            let hits_bad = bad.iter().any(|&(i, j)| p.apply(i) == j);
            let fv = f.evaluate(&p).unwrap();
            let gv = g.evaluate(&p).unwrap();
            if !hits_bad {
                assert!((fv - gv).abs() < 1e-12);
            }
            if (fv - gv).abs() > 1e-9 {
                differ += 1;
            }
            total += 1;
        }
        assert!(differ as f64 / total as f64 <= 2.0 / 8.0);
    }

    #[test]
    fn analyze_l0_examples() {
        let o = AnalysisOptions::default();
        let d = gen_dictator(8, Orientation::Row, 4, &[0, 6]).unwrap();
        let r = analyze_l0(&d, &o).unwrap();
        assert_eq!(r.disagreement.unwrap().value, 0.0);
        assert_eq!(r.family, CellSet::new(8, [(4, 0), (4, 6)]).unwrap());

        let mut noisy = d.clone();
        noisy.coeff_mut()[(1, 2)] = 0.37;
        let r = analyze_l0(&noisy, &o).unwrap();
        assert_eq!(r.family, CellSet::new(8, [(4, 0), (4, 6)]).unwrap());
        assert!((r.disagreement.unwrap().value - 1.0 / 8.0).abs() < 1e-12);

        let r = analyze_l0(&d.complement(), &o).unwrap();
        assert!(r.flipped);
        assert_eq!(r.family, CellSet::new(8, [(4, 0), (4, 6)]).unwrap());
        assert_eq!(r.disagreement.unwrap().value, 0.0);
    }

    #[test]
    fn exact_dictators_recovered_in_l0() {
        for n in 3..=6 {
            for o in [Orientation::Row, Orientation::Col] {
                for size in 1..=n / 2 {
                    let t: Vec<usize> = (0..size).map(|k| (k * 2 + 1) % n).collect();
                    let f = gen_dictator(n, o, n / 2, &t).unwrap();
                    let r = analyze_l0(&f, &AnalysisOptions::default()).unwrap();
                    assert_eq!(r.disagreement.unwrap().value, 0.0, "n={n} {o} {t:?}");
                    assert_eq!(r.closeness.value, 0.0);
                }
            }
        }
    }
}
