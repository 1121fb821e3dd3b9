//! Exact (enumeration) and sampled expectations over a uniform permutation.

use crate::error::{Error, Result};
use crate::linfn::SnFunction;
use crate::numeric::{dist_01, rng_from_seed, CompensatedSum, Z_99};
use crate::perm::{for_each_permutation, resample, Permutation};
use crate::report::{Measurement, Metric, Strategy};

/// `E[f(π)]`, exactly over all of `S_n` or from `samples` uniform draws.
pub fn estimate_mean(
    n: usize,
    strategy: Strategy,
    exact_threshold: usize,
    mut f: impl FnMut(&Permutation, Option<usize>) -> f64,
) -> Result<Measurement> {
    match strategy {
        Strategy::Exact => {
            let mut acc = CompensatedSum::new();
            let mut count = 0usize;
            for_each_permutation(n, exact_threshold, |p, rank| {
                acc.add(f(p, Some(rank)));
                count += 1;
            })?;
            Ok(Measurement::exact(acc.value() / count as f64))
        }
        Strategy::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::invalid("samples must be positive"));
            }
            let mut rng = rng_from_seed(seed);
            let mut p = Permutation::identity(n);
            let mut sum = CompensatedSum::new();
            let mut sum_sq = CompensatedSum::new();
            for _ in 0..samples {
                resample(&mut p, &mut rng);
                let v = f(&p, None);
                sum.add(v);
                sum_sq.add(v * v);
            }
            let nf = samples as f64;
            let mean = sum.value() / nf;
            let var = (sum_sq.value() / nf - mean * mean).max(0.0);
            Ok(Measurement::sampled(mean, samples, Z_99 * libm::sqrt(var / nf)))
        }
    }
}

/// `max f(π)`: exact over `S_n`, or the largest sampled value flagged as a
/// lower bound.
pub fn estimate_max(
    n: usize,
    strategy: Strategy,
    exact_threshold: usize,
    mut f: impl FnMut(&Permutation, Option<usize>) -> f64,
) -> Result<Measurement> {
    let mut best = f64::NEG_INFINITY;
    match strategy {
        Strategy::Exact => {
            for_each_permutation(n, exact_threshold, |p, rank| {
                best = best.max(f(p, Some(rank)));
            })?;
            Ok(Measurement::exact(best))
        }
        Strategy::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::invalid("samples must be positive"));
            }
            let mut rng = rng_from_seed(seed);
            let mut p = Permutation::identity(n);
            for _ in 0..samples {
                resample(&mut p, &mut rng);
                best = best.max(f(&p, None));
            }
            let mut m = Measurement::sampled(best, samples, 0.0);
            m.lower_bound_only = true;
            Ok(m)
        }
    }
}

/// Distance of `f` to `{0, 1}`-valued functions in the given metric:
/// `E[dist(f, {0,1})²]`, `Pr[f ∉ {0,1}]` (up to `tau`), or the sup-distance.
pub fn dist_to_boolean<F: SnFunction + ?Sized>(
    f: &F,
    metric: Metric,
    strategy: Strategy,
    exact_threshold: usize,
    tau: f64,
) -> Result<Measurement> {
    let n = f.n();
    match metric {
        Metric::L2 => estimate_mean(n, strategy, exact_threshold, |p, r| {
            let d = dist_01(f.value(p, r));
            d * d
        }),
        Metric::L0 => prob_not_boolean(f, strategy, exact_threshold, tau),
        Metric::Linf => estimate_max(n, strategy, exact_threshold, |p, r| dist_01(f.value(p, r))),
    }
}

/// `Pr[f(π) ∉ {0, 1}]` with tolerance `tau`.
pub fn prob_not_boolean<F: SnFunction + ?Sized>(
    f: &F,
    strategy: Strategy,
    exact_threshold: usize,
    tau: f64,
) -> Result<Measurement> {
    estimate_mean(f.n(), strategy, exact_threshold, |p, r| {
        if dist_01(f.value(p, r)) > tau {
            1.0
        } else {
            0.0
        }
    })
}

/// `E[(f − g)²]`.
pub fn l2_between<F: SnFunction + ?Sized, G: SnFunction + ?Sized>(
    f: &F,
    g: &G,
    strategy: Strategy,
    exact_threshold: usize,
) -> Result<Measurement> {
    check_sizes(f.n(), g.n())?;
    estimate_mean(f.n(), strategy, exact_threshold, |p, r| {
        let d = f.value(p, r) - g.value(p, r);
        d * d
    })
}

/// `Pr[|f − g| > tau]`.
pub fn disagreement<F: SnFunction + ?Sized, G: SnFunction + ?Sized>(
    f: &F,
    g: &G,
    strategy: Strategy,
    exact_threshold: usize,
    tau: f64,
) -> Result<Measurement> {
    check_sizes(f.n(), g.n())?;
    estimate_mean(f.n(), strategy, exact_threshold, |p, r| {
        if libm::fabs(f.value(p, r) - g.value(p, r)) > tau {
            1.0
        } else {
            0.0
        }
    })
}

fn check_sizes(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::SizeMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}
