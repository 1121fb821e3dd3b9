//! Recovery in the L2 metric: anchor selection, sparse and sporadic
//! representations, coset family extraction and the heavy-line decision.

mod anchor;
mod family;
mod reps;

use alloc::format;
pub use anchor::{recentered_coeff, select_anchor, AnchorChoice, AnchorScan};
pub use family::{
    constant_or_dictator, disjointness_stats, expected_pair_overlap, extract_coset_family,
    CosetFamily, Extraction,
};
pub use reps::{
    most_common_pm1, sparse_representation, sporadic_from_grid, sporadic_representation,
    SparseRep, SporadicRep,
};

use crate::error::{Error, Result};
use crate::linfn::{
    closeness_to_linear, degree_le1_projection, disagreement, dist_to_boolean,
    distance_l2_between, l2_between, FnOnSn, LinearFunction, SnFunction, ValueTable,
};
use crate::numeric::derive_seed;
use crate::perm::CellSet;
use crate::report::{
    Diagnostics, Dictator, Measurement, Metric, Orientation, Strategy, StructureReport, Verdict,
};
use alloc::vec::Vec;

/// Knobs shared by the pipelines. The heavy-line factor `k_heavy` and the
/// support cap factor have no canonical value; the defaults are empirical.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub exact_threshold: usize,
    pub samples: usize,
    pub seed: u64,
    /// Dictator mode: minimum balance `δ ≤ Pr[f = 1] ≤ 1 − δ` assumed.
    pub delta: Option<f64>,
    pub k_heavy: f64,
    pub support_cap_factor: usize,
    pub tau: f64,
    pub anchor_scan_limit: usize,
    pub anchor_candidates: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            exact_threshold: crate::DEFAULT_EXACT_THRESHOLD,
            samples: 100_000,
            seed: 0,
            delta: None,
            k_heavy: 1.0,
            support_cap_factor: 8,
            tau: crate::DEFAULT_TAU,
            anchor_scan_limit: 150,
            anchor_candidates: 64,
        }
    }
}

impl AnalysisOptions {
    /// Strategy for the `stream`-th measurement of a run.
    pub fn strategy(&self, n: usize, stream: u64) -> Strategy {
        Strategy::auto(
            n,
            self.exact_threshold,
            self.samples,
            derive_seed(self.seed, stream),
        )
    }

    pub fn anchor_scan(&self, n: usize) -> AnchorScan {
        AnchorScan::for_size(
            n,
            self.anchor_scan_limit,
            self.anchor_candidates,
            derive_seed(self.seed, 0xA11C),
        )
    }
}

/// Input to the L2 pipeline.
#[derive(Debug, Clone, Copy)]
pub enum L2Input<'a> {
    Linear(&'a LinearFunction),
    /// Values on all of `S_n`; the pipeline runs on its degree-1 projection.
    Table(&'a ValueTable),
}

impl L2Input<'_> {
    pub fn n(&self) -> usize {
        match self {
            L2Input::Linear(f) => f.n(),
            L2Input::Table(t) => t.n(),
        }
    }
}

/// `Σ_C x`, or `1 − Σ_C x` when `flipped`.
pub fn family_approximant(cells: &CellSet, flipped: bool) -> LinearFunction {
    let g = LinearFunction::indicator_sum(cells.n(), cells.iter().copied())
        .expect("family cells are in range");
    if flipped {
        g.complement()
    } else {
        g
    }
}

/// The dictator (or constant) closest to `f` in L2, with `E[(f − d)²]`.
///
/// `E[(f − d)²]` is separable over the targets of a fixed line: with
/// `m[i][j] = E[f | π(i) = j]`, a row-`i` dictator gains `(1 − 2m[i][j])/n`
/// per target `j`, and its complement gains `(2m[i][j] − 1)/n`. Each line is
/// therefore solved by thresholding its conditional means at `1/2`.
pub fn best_dictator_l2(f: &LinearFunction) -> Result<(Dictator, f64)> {
    let n = f.n();
    let m = crate::linf::linear_conditional_means(f);
    let mut best: Option<(Dictator, f64)> = None;
    for orientation in [Orientation::Row, Orientation::Col] {
        for index in 0..n {
            for flipped in [false, true] {
                let targets: Vec<usize> = (0..n)
                    .filter(|&t| {
                        let v = match orientation {
                            Orientation::Row => m[(index, t)],
                            Orientation::Col => m[(t, index)],
                        };
                        if flipped {
                            v < 0.5
                        } else {
                            v > 0.5
                        }
                    })
                    .collect();
                let d = Dictator {
                    orientation,
                    index,
                    targets,
                    flipped,
                };
                let dist = distance_l2_between(f, &d.to_linear(n))?;
                if best.as_ref().is_none_or(|b| dist < b.1) {
                    best = Some((d, dist));
                }
            }
        }
    }
    best.ok_or_else(|| Error::invalid("n must be >= 1"))
}

/// The core sparse → sporadic → family chain applied to `h` (already
/// oriented so that `E[h] ≤ 1/2`).
pub(crate) struct Chain {
    pub extraction: Extraction,
    pub diagnostics: Diagnostics,
}

pub(crate) fn finish_chain(
    n: usize,
    anchor: crate::perm::Cell,
    scores: (f64, f64),
    sparse_support: usize,
    sp: &SporadicRep,
    opts: &AnalysisOptions,
) -> Result<Chain> {
    let extraction = extract_coset_family(sp)?;
    let cap = opts.support_cap_factor * n;
    let mut diagnostics = Diagnostics {
        anchor: Some(anchor),
        anchor_scores: Some(scores),
        sparse_support,
        sporadic_support: sp.support().len(),
        bad_cells: extraction.bad_cells.len(),
        support_cap: cap,
        support_cap_exceeded: sparse_support > cap,
        nondisjoint_pairs: extraction.family.nondisjoint_pairs,
        min_line_zeros: Some(sp.min_line_zeros()),
        ..Diagnostics::default()
    };
    if diagnostics.support_cap_exceeded {
        diagnostics
            .notes
            .push(format!("sparse support {sparse_support} exceeds cap {cap}"));
    }
    Ok(Chain {
        extraction,
        diagnostics,
    })
}

/// Dictator-mode decision and its measurements against `f`.
pub(crate) fn dictator_step<F: SnFunction + ?Sized>(
    f: &F,
    linear: Option<&LinearFunction>,
    family: &CosetFamily,
    flipped: bool,
    delta: f64,
    opts: &AnalysisOptions,
) -> Result<(Dictator, Measurement, Measurement)> {
    let n = family.n();
    let d = match constant_or_dictator(family, delta, opts.k_heavy)? {
        Some(mut d) => {
            d.flipped = flipped;
            d
        }
        None => Dictator::constant(flipped),
    };
    let dl = d.to_linear(n);
    let closeness = match linear {
        Some(lf) => Measurement::exact(distance_l2_between(lf, &dl)?),
        None => l2_between(f, &dl, opts.strategy(n, 4), opts.exact_threshold)?,
    };
    let dis = disagreement(f, &dl, opts.strategy(n, 5), opts.exact_threshold, opts.tau)?;
    Ok((d, closeness, dis))
}

pub(crate) fn verdict_for(dictator: Option<&Dictator>, family: &CellSet, flipped: bool) -> Verdict {
    let constant = match dictator {
        Some(d) => d.is_constant(),
        None => family.is_empty(),
    };
    match (constant, flipped, dictator.is_some()) {
        (true, false, _) => Verdict::ConstantZero,
        (true, true, _) => Verdict::ConstantOne,
        (false, _, true) => Verdict::Dictator,
        (false, _, false) => Verdict::Family,
    }
}

/// Runs the L2 recovery pipeline.
///
/// Linear input: `ε = E[dist(f, {0,1})²]`. Table input: `ε = E[(t − t^{≤1})²]`
/// and the pipeline runs on the projection. When `E[f] > 1/2` the analysis is
/// applied to `1 − f`. The reported family `C` approximates `f` by `Σ_C x`
/// (or `1 − Σ_C x` when `flipped`).
pub fn analyze_l2(input: L2Input<'_>, opts: &AnalysisOptions) -> Result<StructureReport> {
    let n = input.n();
    if n < 2 {
        return Err(Error::invalid("analysis needs n >= 2"));
    }
    let (working, epsilon) = match input {
        L2Input::Linear(f) => {
            let eps = dist_to_boolean(f, Metric::L2, opts.strategy(n, 1), opts.exact_threshold, opts.tau)?;
            (f.clone(), eps)
        }
        L2Input::Table(t) => {
            if n > opts.exact_threshold {
                return Err(Error::Capacity {
                    what: "n for table input",
                    requested: n,
                    limit: opts.exact_threshold,
                });
            }
            (degree_le1_projection(t), Measurement::exact(closeness_to_linear(t)))
        }
    };
    let pre_flip = working.mean() > 0.5;
    let h = if pre_flip { working.complement() } else { working };

    let sparse = sparse_representation(&h, opts.anchor_scan(n));
    let sp = sporadic_representation(&sparse);
    let chain = finish_chain(
        n,
        sparse.anchor,
        sparse.scores,
        sparse.support().len(),
        &sp,
        opts,
    )?;
    let flipped = pre_flip ^ chain.extraction.flipped;
    let family = chain.extraction.family;
    let mut diagnostics = chain.diagnostics;
    diagnostics
        .notes
        .push(format!("sparse residual E[(f-g)^2] = {:.6e}", sparse.residual_l2sq));
    let g = family_approximant(&family.cells, flipped);

    let (closeness, dis, dis_max) = match input {
        L2Input::Linear(f) => (
            Measurement::exact(distance_l2_between(f, &g)?),
            disagreement(f, &g, opts.strategy(n, 2), opts.exact_threshold, opts.tau)?,
            None,
        ),
        L2Input::Table(t) => {
            let close = l2_between(t, &g, Strategy::Exact, opts.exact_threshold)?;
            let dis = disagreement(t, &g, Strategy::Exact, opts.exact_threshold, opts.tau)?;
            let dis_max = if t.is_boolean(opts.tau) {
                let gmax = FnOnSn::new(n, |img: &[usize]| {
                    f64::from(u8::from(family.hits(img) != flipped))
                });
                Some(disagreement(t, &gmax, Strategy::Exact, opts.exact_threshold, opts.tau)?)
            } else {
                None
            };
            (close, dis, dis_max)
        }
    };

    let mut report = StructureReport {
        metric: Metric::L2,
        n,
        verdict: Verdict::Family,
        family: family.cells.clone(),
        dictator: None,
        flipped,
        epsilon,
        closeness,
        disagreement: Some(dis),
        disagreement_max: dis_max,
        dictator_closeness: None,
        dictator_disagreement: None,
        diagnostics,
    };

    if let Some(delta) = opts.delta {
        let (d, close, dis) = match input {
            L2Input::Linear(f) => dictator_step(f, Some(f), &family, flipped, delta, opts)?,
            L2Input::Table(t) => dictator_step(t, None, &family, flipped, delta, opts)?,
        };
        report.dictator_closeness = Some(close);
        report.dictator_disagreement = Some(dis);
        report.dictator = Some(d);
    }
    report.verdict = verdict_for(report.dictator.as_ref(), &report.family, flipped);
    Ok(report)
}
