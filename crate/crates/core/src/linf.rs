//! Recovery in the L∞ metric: 2ε-close sparse representation, line
//! correction and the dictator decision, with a rounding fallback for small
//! `n` and a mandatory pointwise verification of the emitted dictator.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::l2::{most_common_pm1, recentered_coeff, AnchorScan};
use crate::linfn::{
    disagreement, dist_to_boolean, estimate_mean, l2_between, Grid,
    LinearFunction,
};
use crate::numeric::{derive_seed, dist_int, dist_pm1, rng_from_seed, round_01, round_pm1};
use crate::perm::{for_each_permutation, Cell, CellSet};
use crate::report::{
    Diagnostics, Dictator, Measurement, Metric, Orientation, Strategy, StructureReport, Verdict,
};

#[derive(Debug, Clone, PartialEq)]
pub struct LinfOptions {
    /// Claimed bound on `sup dist(f(π), {0,1})`.
    pub epsilon: f64,
    /// Largest accepted `epsilon`.
    pub eps0: f64,
    /// Smallest `n` handled by the structural path.
    pub line_threshold: usize,
    pub exact_threshold: usize,
    pub verify_samples: usize,
    pub samples: usize,
    pub seed: u64,
    pub tau: f64,
    pub anchor_scan_limit: usize,
    pub anchor_candidates: usize,
}

impl Default for LinfOptions {
    fn default() -> Self {
        LinfOptions {
            epsilon: 0.02,
            eps0: 1.0 / 40.0,
            line_threshold: 12,
            exact_threshold: crate::DEFAULT_EXACT_THRESHOLD,
            verify_samples: 10_000,
            samples: 100_000,
            seed: 0,
            tau: crate::DEFAULT_TAU,
            anchor_scan_limit: 150,
            anchor_candidates: 64,
        }
    }
}

impl LinfOptions {
    fn strategy(&self, n: usize, stream: u64, samples: usize) -> Strategy {
        Strategy::auto(n, self.exact_threshold, samples, derive_seed(self.seed, stream))
    }
}

/// `constant + Σ grid[i][j] x[i][j]` with every entry within `2ε` of an integer.
#[derive(Debug, Clone, PartialEq)]
pub struct LinfRep {
    pub n: usize,
    pub constant: f64,
    pub grid: Grid<f64>,
    pub epsilon: f64,
    pub rounded_grid: Grid<i8>,
    pub anchor: Cell,
    /// Line corrections; all zero before correction.
    pub alpha: Vec<i8>,
    pub beta: Vec<i8>,
    /// Entries `2ε`-close to 0 in each row and in each column.
    pub row_zeros: Vec<usize>,
    pub col_zeros: Vec<usize>,
}

impl LinfRep {
    fn build(n: usize, constant: f64, grid: Grid<f64>, epsilon: f64, anchor: Cell, alpha: Vec<i8>, beta: Vec<i8>) -> Self {
        let rounded_grid = grid.map(|&v| libm::round(v) as i8);
        let mut row_zeros = alloc::vec![0; n];
        let mut col_zeros = alloc::vec![0; n];
        for ((i, j), &v) in grid.cells() {
            if libm::fabs(v) <= 2.0 * epsilon {
                row_zeros[i] += 1;
                col_zeros[j] += 1;
            }
        }
        LinfRep {
            n,
            constant,
            grid,
            epsilon,
            rounded_grid,
            anchor,
            alpha,
            beta,
            row_zeros,
            col_zeros,
        }
    }

    pub fn function(&self) -> LinearFunction {
        LinearFunction::new(self.constant, self.grid.clone()).expect("grid is finite")
    }

    pub fn min_line_zeros(&self) -> usize {
        self.row_zeros.iter().chain(&self.col_zeros).copied().min().unwrap_or(0)
    }
}

fn anchor_candidates(n: usize, scan: AnchorScan) -> Vec<Cell> {
    match scan {
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
    }
}

/// Recenters at the anchor with the fewest coefficients not `2ε`-close to 0
/// and checks that all are `2ε`-close to `{0, ±1}`.
pub fn sparse_representation_linf(f: &LinearFunction, epsilon: f64, scan: AnchorScan) -> Result<LinfRep> {
    if !(0.0..1.0 / 6.0).contains(&epsilon) {
        return Err(Error::invalid("sparse representation needs 0 <= epsilon < 1/6"));
    }
    let n = f.n();
    let tol = 2.0 * epsilon;
    let mut best: Option<(usize, Cell)> = None;
    for a in anchor_candidates(n, scan) {
        let mut far = 0;
        for i in (0..n).filter(|&i| i != a.0) {
            for j in (0..n).filter(|&j| j != a.1) {
                if libm::fabs(recentered_coeff(f, a, (i, j))) > tol {
                    far += 1;
                }
            }
        }
        if best.is_none_or(|(b, _)| far < b) {
            best = Some((far, a));
        }
    }
    let (_, anchor) = best.expect("n >= 1 has candidates");
    let g = f.recenter(anchor);
    let mut worst: Option<(f64, Cell)> = None;
    for (cell, &d) in g.coeff().cells() {
        let dist = dist_pm1(d);
        if dist > tol && worst.is_none_or(|(w, _)| dist > w) {
            worst = Some((dist, cell));
        }
    }
    if let Some((dist, cell)) = worst {
        return Err(Error::premise(
            format!(
                "recentered coefficient at ({}, {}) is {dist:.4} from {{0, ±1}}, above 2ε = {tol}",
                cell.0 + 1,
                cell.1 + 1
            ),
            alloc::vec![cell],
        ));
    }
    Ok(LinfRep::build(
        n,
        g.constant(),
        g.coeff().clone(),
        epsilon,
        anchor,
        alloc::vec![0; n],
        alloc::vec![0; n],
    ))
}

/// Subtracts the most common rounded value of each row and column, moving
/// the corrections into the constant.
pub fn sporadic_representation_linf(rep: &LinfRep, line_threshold: usize) -> Result<LinfRep> {
    let n = rep.n;
    if n < line_threshold {
        return Err(Error::invalid(format!(
            "line correction needs n >= {line_threshold}, found {n}"
        )));
    }
    let d = rep.grid.map(|&v| round_pm1(v));
    let alpha: Vec<i8> = (0..n).map(|i| most_common_pm1(d.row(i).iter().copied())).collect();
    let beta: Vec<i8> = (0..n)
        .map(|j| most_common_pm1((0..n).map(|i| d[(i, j)])))
        .collect();
    let grid = Grid::from_fn(n, |i, j| {
        rep.grid[(i, j)] - f64::from(alpha[i]) - f64::from(beta[j])
    });
    let shift: f64 = alpha.iter().chain(&beta).map(|&v| f64::from(v)).sum();
    let out = LinfRep::build(n, rep.constant + shift, grid, rep.epsilon, rep.anchor, alpha, beta);
    let bad: Vec<usize> = out
        .row_zeros
        .iter()
        .chain(&out.col_zeros)
        .copied()
        .filter(|&z| 4 * z < n)
        .collect();
    if !bad.is_empty() {
        let lines: Vec<Cell> = (0..n)
            .filter(|&i| 4 * out.row_zeros[i] < n)
            .map(|i| (i, usize::MAX))
            .chain((0..n).filter(|&j| 4 * out.col_zeros[j] < n).map(|j| (usize::MAX, j)))
            .collect();
        let cells: Vec<Cell> = lines
            .iter()
            .flat_map(|&(i, j)| {
                (0..n).map(move |k| if i == usize::MAX { (k, j) } else { (i, k) })
            })
            .filter(|&cell| libm::fabs(out.grid[cell]) > 2.0 * rep.epsilon)
            .collect();
        return Err(Error::premise(
            format!("{} lines have fewer than n/4 near-zero entries", bad.len()),
            cells,
        ));
    }
    Ok(out)
}

/// `E[h | π(i) = j]` for every cell, in closed form.
pub fn linear_conditional_means(h: &LinearFunction) -> Grid<f64> {
    let n = h.n();
    let c = h.coeff();
    if n == 1 {
        return Grid::filled(1, h.constant() + c[(0, 0)]);
    }
    let rows = c.row_sums();
    let cols = c.col_sums();
    let total = c.total();
    Grid::from_fn(n, |i, j| {
        let rest = total - rows[i] - cols[j] + c[(i, j)];
        h.constant() + c[(i, j)] + rest / (n - 1) as f64
    })
}

/// Dictator equal to a linear function, if it is one. A function that
/// depends only on `π(I)` has conditional means in `{0, 1}` along row `I`;
/// the candidate read off there is confirmed by `h − d ≡ 0`, tested on the
/// representation with row 0 and column 0 cleared, which is unique.
pub fn dictator_of(h: &LinearFunction, tau: f64) -> Result<Option<Dictator>> {
    let n = h.n();
    let m = linear_conditional_means(h);
    for orientation in [Orientation::Row, Orientation::Col] {
        for index in 0..n {
            let line: Vec<f64> = (0..n)
                .map(|k| match orientation {
                    Orientation::Row => m[(index, k)],
                    Orientation::Col => m[(k, index)],
                })
                .collect();
            if !line.iter().all(|&v| crate::numeric::is_boolean(v, tau)) {
                continue;
            }
            let d = Dictator {
                orientation,
                index,
                targets: (0..n).filter(|&k| line[k] > 0.5).collect(),
                flipped: false,
            };
            if is_zero_function(&h.sub(&d.to_linear(n))?, tau) {
                return Ok(Some(d.normalized(n)));
            }
        }
    }
    Ok(None)
}

/// Whether a linear function vanishes on all of `S_n` (up to `tau`).
pub fn is_zero_function(g: &LinearFunction, tau: f64) -> bool {
    let c = g.recenter((0, 0));
    libm::fabs(c.constant()) <= tau && c.coeff().as_slice().iter().all(|v| libm::fabs(*v) <= tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinfPath {
    /// Line-corrected representation with all non-zero rounded entries on one line.
    Structural,
    /// Integer rounding of the sparse representation, checked by enumeration.
    SmallN,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinfDecision {
    pub dictator: Dictator,
    pub path: LinfPath,
    /// `sup dist(f(π), {0,1})`; a lower bound when sampled.
    pub measured_epsilon: Measurement,
    /// `Pr[round(f) ≠ dictator]` over the verification set; always 0 on success.
    pub verification: Measurement,
    pub rep: LinfRep,
}

fn nonzero_line(e: &Grid<i8>) -> Result<Option<(Orientation, usize, Vec<usize>, i8)>> {
    let support: Vec<(Cell, i8)> = e.cells().filter(|(_, &v)| v != 0).map(|(c, &v)| (c, v)).collect();
    if support.is_empty() {
        return Ok(None);
    }
    let big: Vec<Cell> = support.iter().filter(|(_, v)| v.abs() > 1).map(|&(c, _)| c).collect();
    if !big.is_empty() {
        return Err(Error::premise("rounded entries outside {0, ±1}", big));
    }
    let (i0, j0) = support[0].0;
    let (orientation, index) = if support.iter().all(|&((i, _), _)| i == i0) {
        (Orientation::Row, i0)
    } else if support.iter().all(|&((_, j), _)| j == j0) {
        (Orientation::Col, j0)
    } else {
        return Err(Error::premise(
            "non-zero rounded entries are not on a single line",
            support.iter().map(|&(c, _)| c).collect(),
        ));
    };
    let sign = support[0].1;
    if support.iter().any(|&(_, v)| v != sign) {
        return Err(Error::premise(
            "non-zero rounded entries on the line have mixed signs",
            support.iter().map(|&(c, _)| c).collect(),
        ));
    }
    let targets = support
        .iter()
        .map(|&((i, j), _)| if orientation == Orientation::Row { j } else { i })
        .collect();
    Ok(Some((orientation, index, targets, sign)))
}

/// Decides which dictator `round(f, {0,1})` is, for `f` with
/// `sup dist(f, {0,1}) ≤ ε`. The result is verified pointwise (all of `S_n`
/// when enumerable, otherwise a seeded sample); a mismatch is an error.
pub fn dictator_decision_linf(f: &LinearFunction, opts: &LinfOptions) -> Result<LinfDecision> {
    let n = f.n();
    let eps = opts.epsilon;
    if !(eps >= 0.0) || eps > opts.eps0 {
        return Err(Error::invalid(format!(
            "epsilon = {eps} is outside [0, eps0 = {}]",
            opts.eps0
        )));
    }
    let measured = dist_to_boolean(
        f,
        Metric::Linf,
        opts.strategy(n, 11, opts.samples),
        opts.exact_threshold,
        opts.tau,
    )?;
    if measured.value > eps + opts.tau {
        return Err(Error::premise(
            format!("sup distance to {{0,1}} is at least {} > epsilon = {eps}", measured.value),
            Vec::new(),
        ));
    }
    let scan = AnchorScan::for_size(
        n,
        opts.anchor_scan_limit,
        opts.anchor_candidates,
        derive_seed(opts.seed, 0xA11C),
    );
    let sparse = sparse_representation_linf(f, eps, scan)?;

    let (dictator, path, rep) = if n >= opts.line_threshold {
        let rep = sporadic_representation_linf(&sparse, opts.line_threshold)?;
        let base = dist_int(rep.constant);
        if base > 0.5 - 1e-12 {
            return Err(Error::premise("constant is not near an integer", Vec::new()));
        }
        let base = libm::round(rep.constant) as i64;
        let d = match nonzero_line(&rep.rounded_grid)? {
            None => match base {
                0 => Dictator::constant(false),
                1 => Dictator::constant(true),
                _ => {
                    return Err(Error::premise(
                        format!("constant rounds to {base}, outside {{0, 1}}"),
                        Vec::new(),
                    ))
                }
            },
            Some((orientation, index, targets, sign)) => {
                let flipped = sign < 0;
                if base != i64::from(flipped) {
                    return Err(Error::premise(
                        format!("constant rounds to {base}, inconsistent with line sign {sign}"),
                        Vec::new(),
                    ));
                }
                Dictator {
                    orientation,
                    index,
                    targets,
                    flipped,
                }
            }
        };
        (d, LinfPath::Structural, rep)
    } else {
        let h = LinearFunction::new(
            libm::round(sparse.constant),
            sparse.grid.map(|&v| f64::from(round_pm1(v))),
        )?;
        if n <= opts.exact_threshold {
            let mut boolean = true;
            for_each_permutation(n, opts.exact_threshold, |p, _| {
                boolean &= crate::numeric::is_boolean(h.eval_image(p.image()), opts.tau);
            })?;
            if !boolean {
                return Err(Error::premise(
                    "rounded representation is not Boolean on S_n",
                    sparse.rounded_grid.support(),
                ));
            }
        }
        // Equality with a dictator also certifies Booleanity beyond enumeration.
        let d = dictator_of(&h, opts.tau)?.ok_or_else(|| {
            Error::premise("rounded representation is not a dictator", sparse.rounded_grid.support())
        })?;
        (d, LinfPath::SmallN, sparse)
    };

    let mismatch = |img: &[usize]| f64::from(u8::from(round_01(f.eval_image(img)) != dictator.eval(img)));
    let verification = estimate_mean(
        n,
        opts.strategy(n, 12, opts.verify_samples),
        opts.exact_threshold,
        |p, _| mismatch(p.image()),
    )?;
    if verification.value > 0.0 {
        return Err(Error::premise(
            format!(
                "emitted dictator disagrees with round(f) on a {:.3e} fraction of checked permutations",
                verification.value
            ),
            dictator.cells(),
        ));
    }
    Ok(LinfDecision {
        dictator,
        path,
        measured_epsilon: measured,
        verification,
        rep,
    })
}

/// The L∞ decision packaged as a report.
pub fn analyze_linf(f: &LinearFunction, opts: &LinfOptions) -> Result<StructureReport> {
    let n = f.n();
    let dec = dictator_decision_linf(f, opts)?;
    let d = &dec.dictator;
    let dl = d.to_linear(n);
    let closeness = l2_between(f, &dl, opts.strategy(n, 13, opts.samples), opts.exact_threshold)?;
    let rounded = crate::linfn::FnOnSn::new(n, |img: &[usize]| round_01(f.eval_image(img)));
    let dis = disagreement(&rounded, &dl, opts.strategy(n, 14, opts.samples), opts.exact_threshold, opts.tau)?;
    let verdict = match (d.is_constant(), d.flipped) {
        (true, false) => Verdict::ConstantZero,
        (true, true) => Verdict::ConstantOne,
        _ => Verdict::Dictator,
    };
    let path = match dec.path {
        LinfPath::Structural => "structural",
        LinfPath::SmallN => "small-n rounding",
    };
    let diagnostics = Diagnostics {
        anchor: Some(dec.rep.anchor),
        sparse_support: dec.rep.rounded_grid.support().len(),
        min_line_zeros: Some(dec.rep.min_line_zeros()),
        notes: alloc::vec![
            format!("path: {path}; eps0 = {}, line threshold N = {}", opts.eps0, opts.line_threshold),
            format!(
                "verification over {}: {} mismatches",
                if dec.verification.is_exact() { "all of S_n" } else { "sampled permutations" },
                dec.verification.value
            ),
        ],
        ..Diagnostics::default()
    };
    Ok(StructureReport {
        metric: Metric::Linf,
        n,
        verdict,
        family: CellSet::new(n, d.cells())?,
        dictator: Some(d.clone()),
        flipped: d.flipped,
        epsilon: dec.measured_epsilon,
        closeness,
        disagreement: Some(dis),
        disagreement_max: None,
        dictator_closeness: Some(closeness),
        dictator_disagreement: Some(dis),
        diagnostics,
    })
}
