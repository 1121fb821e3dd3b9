//! Exact identities: covariance, pair overlap, cube rounding, avoidance and
//! the converse bound for disjoint families.

use rand::seq::index::sample;
use rand::Rng;
use snfkn_core::cube::{candidates, fkn_round_cube, restrict_to_square_system};
use snfkn_core::gen::{apply_noise, gen_disjoint_family, FamilyMode, NoiseModel};
use snfkn_core::l2::expected_pair_overlap;
use snfkn_core::linfn::{dist_to_boolean, pair_covariance};
use snfkn_core::numeric::{derive_seed, factorial, rng_from_seed};
use snfkn_core::perm::{
    avoid_probability, count_avoiding, count_avoiding_by_enumeration, for_each_permutation,
    sample_square_system,
};
use snfkn_core::report::{Metric, Strategy};
use snfkn_core::CellSet;

use super::{job_seed, max_of, random_dictator, row, run_jobs, Suite, SuiteConfig, SuiteOutcome, Trial, Value};
use crate::Failure;

const ENUM_LIMIT: usize = 9;

fn sizes(cfg: &SuiteConfig, default: impl IntoIterator<Item = usize>) -> Vec<usize> {
    match cfg.n {
        Some(n) => vec![n],
        None => default.into_iter().collect(),
    }
}

fn enumerable(suite: Suite, ns: &[usize], lo: usize) -> Result<(), Failure> {
    match ns.iter().find(|&&n| n < lo || n > ENUM_LIMIT) {
        Some(n) => Err(Failure::Rejected(format!(
            "{} enumerates S_n and needs {lo} <= n <= {ENUM_LIMIT}, got {n}",
            suite.name()
        ))),
        None => Ok(()),
    }
}

const COVARIANCE_HEADER: [&str; 3] = ["n", "pairs", "max_abs_error"];

pub(super) fn covariance(cfg: &SuiteConfig) -> Result<SuiteOutcome, Failure> {
    let ns = sizes(cfg, 2..=6);
    enumerable(Suite::Covariance, &ns, 1)?;
    let (rows, failures) = run_jobs(&ns, COVARIANCE_HEADER.len(), |&n| {
        let n2 = n * n;
        let mut joint = vec![0u64; n2 * n2];
        for_each_permutation(n, n, |p, _| {
            let hit: Vec<usize> = (0..n).map(|i| i * n + p.apply(i)).collect();
            for &a in &hit {
                for &b in &hit {
                    joint[a * n2 + b] += 1;
                }
            }
        })?;
        let total = factorial(n).expect("n is small") as f64;
        let mut worst = 0.0f64;
        for a in 0..n2 {
            for b in 0..n2 {
                let brute = joint[a * n2 + b] as f64 / total
                    - (joint[a * n2 + a] as f64 / total) * (joint[b * n2 + b] as f64 / total);
                let closed = pair_covariance(n, (a / n, a % n), (b / n, b % n));
                worst = worst.max((closed - brute).abs());
            }
        }
        let mut t = Trial::new(row![n, n2 * n2, worst]);
        t.check(worst <= 1e-12, || format!("n = {n}: covariance error {worst:e}"));
        Ok(t)
    });
    let max_err = max_of(rows.iter().filter_map(|r| r.get(2).and_then(Value::as_f64)));
    Ok(SuiteOutcome {
        suite: Suite::Covariance,
        header: COVARIANCE_HEADER.to_vec(),
        rows,
        summary: vec![("max_abs_error", max_err.into())],
        failures,
    })
}

const PAIR_HEADER: [&str; 9] = [
    "n", "trial", "m", "nondisjoint_pairs", "formula", "brute", "e_dist_sq", "identity_exact", "sandwich",
];

pub(super) fn pair_overlap(cfg: &SuiteConfig) -> Result<SuiteOutcome, Failure> {
    let ns = sizes(cfg, 3..=8);
    enumerable(Suite::PairOverlap, &ns, 2)?;
    let trials = cfg.trials.unwrap_or(50);
    let jobs: Vec<(usize, usize)> = ns.iter().flat_map(|&n| (0..trials).map(move |t| (n, t))).collect();
    let (rows, failures) = run_jobs(&jobs, PAIR_HEADER.len(), |&(n, trial)| {
        let seed = job_seed(cfg, n, trial);
        let m = rng_from_seed(seed).random_range(1..=(2 * n).min(n * n));
        let fam = gen_disjoint_family(n, m, FamilyMode::Uniform, derive_seed(seed, 1))?;
        let mask = fam.cells.mask();
        let (mut hh, mut d2) = (0u128, 0u128);
        for_each_permutation(n, n, |p, _| {
            let h = (0..n).filter(|&i| mask[i * n + p.apply(i)]).count() as u128;
            if h >= 2 {
                hh += h * (h - 1);
                d2 += (h - 1) * (h - 1);
            }
        })?;
        let total = u128::from(factorial(n).expect("n is small"));
        let p = fam.nondisjoint_pairs as u128;
        let identity = hh * (n as u128) * (n as u128 - 1) == 2 * p * total;
        let sandwich = d2 <= hh && hh <= 2 * d2;
        let mut t = Trial::new(row![
            n,
            trial,
            m,
            fam.nondisjoint_pairs,
            expected_pair_overlap(&fam),
            hh as f64 / total as f64,
            d2 as f64 / total as f64,
            identity,
            sandwich,
        ]);
        t.check(identity, || format!("n = {n}, trial {trial}: E[h(h-1)] != 2P/(n(n-1))"));
        t.check(sandwich, || format!("n = {n}, trial {trial}: sandwich bound fails"));
        Ok(t)
    });
    Ok(SuiteOutcome {
        suite: Suite::PairOverlap,
        header: PAIR_HEADER.to_vec(),
        summary: vec![("trials", rows.len().into())],
        rows,
        failures,
    })
}

const CUBE_HEADER: [&str; 7] = ["n", "trial", "dim", "candidate", "fkn_dist", "brute_dist", "restriction_error"];

pub(super) fn cube_fkn(cfg: &SuiteConfig) -> Result<SuiteOutcome, Failure> {
    let n = cfg.n.unwrap_or(8);
    if !(2..=40).contains(&n) {
        return Err(Failure::Rejected(format!("cube-fkn needs 2 <= n <= 40, got {n}")));
    }
    let jobs: Vec<usize> = (0..cfg.trials.unwrap_or(50)).collect();
    let (rows, failures) = run_jobs(&jobs, CUBE_HEADER.len(), |&trial| {
        let seed = job_seed(cfg, n, trial);
        let mut rng = rng_from_seed(seed);
        let k = rng.random_range(1..=n / 2);
        let d = random_dictator(n, k, rng.random_bool(0.5), &mut rng);
        let f = apply_noise(&d.to_linear(n), NoiseModel::Uniform { amplitude: 0.3 / n as f64 }, derive_seed(seed, 1))?;
        let sys = sample_square_system(n, &mut rng)?;
        let g = restrict_to_square_system(&f, &sys)?;
        let m = sys.dim();
        let points: Vec<Vec<bool>> = (0u32..1 << m).map(|b| (0..m).map(|t| b >> t & 1 == 1).collect()).collect();
        let mut restriction_err = 0.0f64;
        for x in &points {
            let direct = f.evaluate(&sys.permutation(x)?)?;
            restriction_err = restriction_err.max((direct - g.eval(x)).abs());
        }
        let sq_dist = |c: &snfkn_core::cube::CubeCandidate| {
            points.iter().map(|x| (g.eval(x) - c.eval(x)).powi(2)).sum::<f64>() / points.len() as f64
        };
        let brute = candidates(m).map(|c| sq_dist(&c)).fold(f64::INFINITY, f64::min);
        let (cand, dist) = fkn_round_cube(&g);
        let mut t = Trial::new(row![n, trial, m, cand.to_string(), dist, brute, restriction_err]);
        t.check((dist - brute).abs() <= 1e-12 && (sq_dist(&cand) - brute).abs() <= 1e-12, || {
            format!("trial {trial}: rounding distance {dist:e} vs brute force {brute:e}")
        });
        t.check(restriction_err <= 1e-12, || format!("trial {trial}: restriction error {restriction_err:e}"));
        Ok(t)
    });
    Ok(SuiteOutcome {
        suite: Suite::CubeFkn,
        header: CUBE_HEADER.to_vec(),
        summary: vec![("trials", rows.len().into())],
        rows,
        failures,
    })
}

const AVOID_HEADER: [&str; 9] = ["part", "n", "trial", "cells", "touched_rows", "exact", "reference", "z", "ok"];

/// Forbidden sets for the sampled comparison stay within this many rows, the
/// exact permanent's line cap.
const SAMPLED_ROWS: usize = 20;

pub(super) fn avoidance(cfg: &SuiteConfig) -> Result<SuiteOutcome, Failure> {
    let (exact_ns, sampled_ns) = match cfg.n {
        Some(n) if n <= 8 => (vec![n], vec![]),
        Some(n) => (vec![], vec![n]),
        None => ((3..=8).collect(), vec![30]),
    };
    let exact_trials = cfg.trials.unwrap_or(20);
    let sampled_trials = cfg.trials.unwrap_or(5);
    let samples = cfg.run.samples;
    let mut jobs: Vec<(bool, usize, usize)> = Vec::new();
    jobs.extend(exact_ns.iter().flat_map(|&n| (0..exact_trials).map(move |t| (true, n, t))));
    jobs.extend(sampled_ns.iter().flat_map(|&n| (0..sampled_trials).map(move |t| (false, n, t))));
    let (rows, failures) = run_jobs(&jobs, AVOID_HEADER.len(), |&(exact, n, trial)| {
        let seed = job_seed(cfg, n, trial);
        let mut rng = rng_from_seed(seed);
        if exact {
            let size = rng.random_range(0..=2 * n);
            let s = gen_disjoint_family(n, size, FamilyMode::Uniform, derive_seed(seed, 1))?.cells;
            let ryser = count_avoiding(&s)?.to_string();
            let reference = count_avoiding_by_enumeration(&s, n)?.to_string();
            let ok = ryser == reference;
            let mut t = Trial::new(row!["exact", n, trial, s.len(), s.touched_rows().len(), ryser, reference, "", ok]);
            t.check(ok, || format!("n = {n}, trial {trial}: permanent disagrees with enumeration"));
            return Ok(t);
        }
        let rows_used = SAMPLED_ROWS.min(n);
        let rows = sample(&mut rng, n, rows_used).into_vec();
        let size = (2 * n).min(rows_used * n);
        let cells = sample(&mut rng, rows_used * n, size).into_iter().map(|k| (rows[k / n], k % n));
        let s = CellSet::new(n, cells)?;
        let p = avoid_probability(&s, Strategy::Exact)?.value();
        let mc = avoid_probability(&s, Strategy::MonteCarlo { samples, seed: derive_seed(seed, 2) })?.value();
        let sigma = (p * (1.0 - p) / samples as f64).sqrt();
        let z = if sigma > 0.0 { (mc - p).abs() / sigma } else if mc == p { 0.0 } else { f64::INFINITY };
        let ok = z <= 4.0;
        let mut t = Trial::new(row!["sampled", n, trial, s.len(), s.touched_rows().len(), p, mc, z, ok]);
        t.check(ok, || format!("n = {n}, trial {trial}: estimate {mc} is {z:.2} sigma from {p}"));
        Ok(t)
    });
    let max_z = max_of(rows.iter().filter_map(|r| r.get(7).and_then(Value::as_f64)));
    Ok(SuiteOutcome {
        suite: Suite::Avoidance,
        header: AVOID_HEADER.to_vec(),
        rows,
        summary: vec![("max_z", max_z.into())],
        failures,
    })
}

const CONVERSE_HEADER: [&str; 12] = [
    "n", "trial", "m", "nondisjoint_pairs", "pair_overlap", "bound", "l2", "l2_half_width", "l0", "l0_half_width",
    "l2_ratio", "ok",
];

pub(super) fn converse_family(cfg: &SuiteConfig) -> Result<SuiteOutcome, Failure> {
    let ns = sizes(cfg, [16, 32, 64]);
    if let Some(&n) = ns.iter().find(|&&n| n < 2) {
        return Err(Failure::Rejected(format!("converse-family needs n >= 2, got {n}")));
    }
    for &n in &ns {
        cfg.run.check_samples(n)?;
    }
    let trials = cfg.trials.unwrap_or(50);
    let jobs: Vec<(usize, usize)> = ns.iter().flat_map(|&n| (0..trials).map(move |t| (n, t))).collect();
    let run = &cfg.run;
    let (rows, failures) = run_jobs(&jobs, CONVERSE_HEADER.len(), |&(n, trial)| {
        let seed = job_seed(cfg, n, trial);
        let fam = gen_disjoint_family(n, n, FamilyMode::Uniform, seed)?;
        let overlap = expected_pair_overlap(&fam);
        let bound = 2.0 * overlap;
        let h = fam.sum_function();
        let strategy = |k| Strategy::auto(n, run.exact_threshold, run.samples, derive_seed(seed, k));
        let l2 = dist_to_boolean(&h, Metric::L2, strategy(1), run.exact_threshold, run.knobs.tau)?;
        let l0 = dist_to_boolean(&h, Metric::L0, strategy(2), run.exact_threshold, run.knobs.tau)?;
        let ok = l2.value <= bound + l2.half_width && l0.value <= bound + l0.half_width;
        let ratio = if bound > 0.0 { l2.value / bound } else { 0.0 };
        let mut t = Trial::new(row![
            n,
            trial,
            fam.cells.len(),
            fam.nondisjoint_pairs,
            overlap,
            bound,
            l2.value,
            l2.half_width,
            l0.value,
            l0.half_width,
            ratio,
            ok,
        ]);
        t.check(ok, || {
            format!("n = {n}, trial {trial}: l2 {} / l0 {} exceed bound {bound}", l2.value, l0.value)
        });
        Ok(t)
    });
    let max_ratio = max_of(rows.iter().filter_map(|r| r.get(10).and_then(Value::as_f64)));
    Ok(SuiteOutcome {
        suite: Suite::ConverseFamily,
        header: CONVERSE_HEADER.to_vec(),
        rows,
        summary: vec![("max_l2_over_bound", max_ratio.into())],
        failures,
    })
}
