//! Recovery experiments for the three pipelines and the tightness sweep.

use rand::seq::index::sample;
use rand::Rng;
use snfkn_core::gen::{apply_noise, apply_noise_table, gen_tightness, tightness_sizes, NoiseModel};
use snfkn_core::l0::analyze_l0;
use snfkn_core::l2::{analyze_l2, best_dictator_l2, family_approximant, L2Input};
use snfkn_core::linf::{dictator_decision_linf, is_zero_function, LinfPath};
use snfkn_core::linfn::{distance_l2_between, dist_to_boolean, l2_between};
use snfkn_core::numeric::{derive_seed, rng_from_seed, round_01};
use snfkn_core::perm::{avoid_probability, for_each_permutation, sample_permutation};
use snfkn_core::report::{Metric, Strategy};
use snfkn_core::{CellSet, Dictator, LinearFunction, Orientation, Verdict};

use super::{job_seed, max_of, random_dictator, row, run_jobs, targets_text, Suite, SuiteConfig, SuiteOutcome, Trial, Value};
use crate::Failure;

/// Hard bound on the fitted closeness-to-ε ratios.
pub const RATIO_BOUND: f64 = 25.0;

fn verdict_ok(v: Verdict) -> bool {
    v == Verdict::Family
}

fn same_function(f: &LinearFunction, g: &LinearFunction, tau: f64) -> Result<bool, Failure> {
    Ok(is_zero_function(&f.sub(g)?, tau))
}

const L2_HEADER: [&str; 9] = ["part", "n", "trial", "param", "epsilon", "distance", "ratio", "verdict", "planted_match"];

pub(super) fn dictator_recovery_l2(cfg: &SuiteConfig) -> Result<SuiteOutcome, Failure> {
    let run = &cfg.run;
    let noisy_n = cfg.n.unwrap_or(8);
    let flip_n = cfg.n.unwrap_or(7);
    if noisy_n < 4 {
        return Err(Failure::Rejected(format!("dictator-recovery-l2 needs n >= 4, got {noisy_n}")));
    }
    run.check_samples(noisy_n)?;
    let trials = cfg.trials.unwrap_or(100);
    let mut jobs: Vec<(bool, f64, usize)> = Vec::new();
    for a in [0.1, 0.3] {
        jobs.extend((0..trials).map(|t| (true, a, t)));
    }
    let flip_part = flip_n <= run.exact_threshold;
    if flip_part {
        for rho in [0.01, 0.05] {
            jobs.extend((0..trials).map(|t| (false, rho, t)));
        }
    }
    let opts = run.analysis_options();
    let (rows, failures) = run_jobs(&jobs, L2_HEADER.len(), |&(noisy, param, trial)| {
        let group = if noisy { (param * 1000.0) as usize } else { 10_000 + (param * 1000.0) as usize };
        let seed = job_seed(cfg, group, trial);
        let mut rng = rng_from_seed(seed);
        let n = if noisy { noisy_n } else { flip_n };
        let d = random_dictator(n, (n / 4).max(1), false, &mut rng);
        let base = d.to_linear(n);
        let opts = snfkn_core::l2::AnalysisOptions {
            seed: derive_seed(seed, 1),
            ..opts.clone()
        };
        if noisy {
            let f = apply_noise(&base, NoiseModel::Uniform { amplitude: param / n as f64 }, derive_seed(seed, 2))?;
            let r = analyze_l2(L2Input::Linear(&f), &opts)?;
            let g = family_approximant(&r.family, r.flipped);
            let eps = r.epsilon.value;
            let close = r.closeness.value;
            let ratio = if eps > 0.0 { close / eps } else if close == 0.0 { 0.0 } else { f64::INFINITY };
            let planted = same_function(&base, &g, run.knobs.tau)?;
            let mut t = Trial::new(row!["noisy", n, trial, param, eps, close, ratio, r.verdict.to_string(), planted]);
            t.check(verdict_ok(r.verdict), || format!("noisy a = {param}, trial {trial}: verdict {}", r.verdict));
            t.check(ratio.is_finite() && ratio <= RATIO_BOUND, || {
                format!("noisy a = {param}, trial {trial}: closeness/eps = {ratio}")
            });
            if n <= run.exact_threshold {
                let check = l2_between(&f, &g, Strategy::Exact, run.exact_threshold)?.value;
                t.check((check - close).abs() <= 1e-10, || {
                    format!("noisy a = {param}, trial {trial}: reported closeness {close} but enumeration gives {check}")
                });
            }
            return Ok(t);
        }
        let table = apply_noise_table(&base.table(run.exact_threshold)?, NoiseModel::FlipOutputs { prob: param }, derive_seed(seed, 2))?;
        let r = analyze_l2(L2Input::Table(&table), &opts)?;
        let eps = r.epsilon.value;
        let mask = r.family.mask();
        let mut mismatches = 0u64;
        let mut total = 0u64;
        for_each_permutation(n, run.exact_threshold, |p, rank| {
            let hit = (0..n).any(|i| mask[i * n + p.apply(i)]);
            let g = if hit != r.flipped { 1.0 } else { 0.0 };
            mismatches += u64::from(table.get(rank) != g);
            total += 1;
        })?;
        let dmax = mismatches as f64 / total as f64;
        let ratio = if eps > 0.0 { dmax / eps } else if dmax == 0.0 { 0.0 } else { f64::INFINITY };
        let planted = same_function(&base, &family_approximant(&r.family, r.flipped), run.knobs.tau)?;
        let mut t = Trial::new(row!["flip", n, trial, param, eps, dmax, ratio, r.verdict.to_string(), planted]);
        let reported = r.disagreement_max.map(|m| m.value);
        t.check(reported == Some(dmax), || {
            format!("flip rho = {param}, trial {trial}: reported {reported:?} but enumeration gives {dmax}")
        });
        t.check(dmax <= RATIO_BOUND * eps, || format!("flip rho = {param}, trial {trial}: Pr[f != g_max] / eps = {ratio}"));
        Ok(t)
    });
    let ratio_max = |part: &str| {
        max_of(rows.iter().filter(|r| r[0] == Value::from(part)).filter_map(|r| r[6].as_f64()))
    };
    let mut summary = vec![("max_ratio_noisy", ratio_max("noisy").into())];
    if flip_part {
        summary.push(("max_ratio_flip", ratio_max("flip").into()));
    } else {
        summary.push(("flip_part", "skipped: n above exact threshold".into()));
    }
    Ok(SuiteOutcome {
        suite: Suite::DictatorRecoveryL2,
        header: L2_HEADER.to_vec(),
        rows,
        summary,
        failures,
    })
}

const L0_HEADER: [&str; 11] = [
    "n", "trial", "k", "orientation", "index", "targets", "flipped", "epsilon", "disagreement", "reference",
    "family_match",
];

/// A random value at least 0.1 away from every integer, in `(−2, 2)`.
fn non_integer(rng: &mut snfkn_core::numeric::SeededRng) -> f64 {
    let v = rng.random_range(0.1..0.9) + f64::from(rng.random_range(0..2u8));
    if rng.random_bool(0.5) {
        -v
    } else {
        v
    }
}

pub(super) fn dictator_recovery_l0(cfg: &SuiteConfig) -> Result<SuiteOutcome, Failure> {
    let run = &cfg.run;
    let n = cfg.n.unwrap_or(8);
    if n < 4 {
        return Err(Failure::Rejected(format!("dictator-recovery-l0 needs n >= 4, got {n}")));
    }
    run.check_samples(n)?;
    let trials = cfg.trials.unwrap_or(100);
    let jobs: Vec<(usize, usize)> = [1, 2].into_iter().flat_map(|k| (0..trials).map(move |t| (k, t))).collect();
    let opts = run.analysis_options();
    let (rows, failures) = run_jobs(&jobs, L0_HEADER.len(), |&(k, trial)| {
        let seed = job_seed(cfg, k, trial);
        let mut rng = rng_from_seed(seed);
        // At |T| = n/2 a corrupted cell on the dictator's line makes the
        // complemented line minus that cell an equally close, sparser answer.
        let size = rng.random_range(1..n.div_ceil(2));
        let d = random_dictator(n, size, rng.random_bool(0.5), &mut rng);
        let base = d.to_linear(n);
        let support = d.cells();
        let off: Vec<_> = (0..n * n).map(|c| (c / n, c % n)).filter(|c| !support.contains(c)).collect();
        let corrupted: Vec<_> = sample(&mut rng, off.len(), k).into_iter().map(|c| off[c]).collect();
        let mut f = base.clone();
        for &c in &corrupted {
            f.coeff_mut()[c] = non_integer(&mut rng);
        }
        let opts = snfkn_core::l2::AnalysisOptions {
            seed: derive_seed(seed, 1),
            ..opts.clone()
        };
        let r = analyze_l0(&f, &opts)?;
        let g = family_approximant(&r.family, r.flipped);
        let matched = same_function(&base, &g, run.knobs.tau)?;
        let literal = r.family == CellSet::new(n, support.iter().copied())? && r.flipped == d.flipped;
        let dis = r.disagreement.map(|m| m.value).unwrap_or(f64::NAN);
        let reference = 1.0 - avoid_probability(&CellSet::new(n, corrupted)?, Strategy::Exact)?.value();
        let mut t = Trial::new(row![
            n,
            trial,
            k,
            d.orientation.to_string(),
            d.index + 1,
            targets_text(&d),
            d.flipped,
            r.epsilon.value,
            dis,
            reference,
            matched,
        ]);
        t.check(matched, || format!("k = {k}, trial {trial}: recovered function differs from the planted dictator"));
        t.check(literal, || format!("k = {k}, trial {trial}: recovered cells differ from planted"));
        if n <= run.exact_threshold {
            t.check((dis - reference).abs() <= 1e-12, || {
                format!("k = {k}, trial {trial}: Pr[f != g] = {dis} but the permanent gives {reference}")
            });
        }
        t.check(dis <= k as f64 / n as f64 + 1e-12, || format!("k = {k}, trial {trial}: Pr[f != g] = {dis} > k/n"));
        Ok(t)
    });
    let max_dis = max_of(rows.iter().filter_map(|r| r[8].as_f64()));
    Ok(SuiteOutcome {
        suite: Suite::DictatorRecoveryL0,
        header: L0_HEADER.to_vec(),
        rows,
        summary: vec![("max_disagreement", max_dis.into())],
        failures,
    })
}

const LINF_HEADER: [&str; 12] = [
    "n", "trial", "orientation", "index", "targets", "flipped", "path", "measured_epsilon", "checked", "mismatches",
    "decided", "match",
];

/// Permutations checked pointwise when `S_n` is too large to enumerate.
const LINF_SPOT_CHECKS: usize = 10_000;

pub(super) fn dictator_recovery_linf(cfg: &SuiteConfig) -> Result<SuiteOutcome, Failure> {
    let run = &cfg.run;
    let ns = match cfg.n {
        Some(n) => vec![n],
        None => vec![8, 12],
    };
    if let Some(&n) = ns.iter().find(|&&n| n < 3) {
        return Err(Failure::Rejected(format!("dictator-recovery-linf needs n >= 3, got {n}")));
    }
    for &n in &ns {
        run.check_samples(n)?;
    }
    let base_opts = run.linf_options();
    let eps = base_opts.epsilon;
    let trials = cfg.trials.unwrap_or(20);
    let jobs: Vec<(usize, usize)> = ns.iter().flat_map(|&n| (0..trials).map(move |t| (n, t))).collect();
    let (rows, failures) = run_jobs(&jobs, LINF_HEADER.len(), |&(n, trial)| {
        let seed = job_seed(cfg, n, trial);
        let mut rng = rng_from_seed(seed);
        let size = rng.random_range(1..=n / 2);
        let d = random_dictator(n, size, rng.random_bool(0.5), &mut rng);
        let f = apply_noise(&d.to_linear(n), NoiseModel::Uniform { amplitude: eps / n as f64 }, derive_seed(seed, 1))?;
        let opts = snfkn_core::linf::LinfOptions {
            seed: derive_seed(seed, 2),
            ..base_opts.clone()
        };
        let dec = dictator_decision_linf(&f, &opts)?;
        let (mut checked, mut mismatches) = (0u64, 0u64);
        let mut check = |image: &[usize]| {
            checked += 1;
            mismatches += u64::from(round_01(f.eval_image(image)) != d.eval(image));
        };
        if n <= run.exact_threshold {
            for_each_permutation(n, run.exact_threshold, |p, _| check(p.image()))?;
        } else {
            let mut prng = rng_from_seed(derive_seed(seed, 3));
            for _ in 0..LINF_SPOT_CHECKS {
                check(sample_permutation(n, &mut prng).image());
            }
        }
        let matched = dec.dictator.same_function(&d, n);
        let path = match dec.path {
            LinfPath::Structural => "structural",
            LinfPath::SmallN => "small-n",
        };
        let decided = dec.dictator.normalized(n);
        let decided_text = format!("{} {} [{}]{}", decided.orientation, decided.index + 1, targets_text(&decided), if decided.flipped { " flipped" } else { "" });
        let mut t = Trial::new(row![
            n,
            trial,
            d.orientation.to_string(),
            d.index + 1,
            targets_text(&d),
            d.flipped,
            path,
            dec.measured_epsilon.value,
            checked,
            mismatches,
            decided_text,
            matched,
        ]);
        t.check(matched, || format!("n = {n}, trial {trial}: decided dictator differs from the planted one"));
        t.check(mismatches == 0, || format!("n = {n}, trial {trial}: {mismatches} pointwise mismatches"));
        Ok(t)
    });
    Ok(SuiteOutcome {
        suite: Suite::DictatorRecoveryLinf,
        header: LINF_HEADER.to_vec(),
        summary: vec![("trials", rows.len().into()), ("epsilon", eps.into())],
        rows,
        failures,
    })
}

const TIGHT_HEADER: [&str; 14] = [
    "delta", "a", "b", "dist_line_a", "dist_line_b", "best_dictator_dist", "best_dictator", "best_constant_dist",
    "bracket_min", "bracket_sum", "ratio_dictator", "ratio_constant", "eps_to_boolean", "eps_half_width",
];

/// Factor within which the measured distances must track the brackets.
pub const TIGHTNESS_FACTOR: f64 = 4.0;

fn line_dictator(row: usize, len: usize) -> Dictator {
    Dictator {
        orientation: Orientation::Row,
        index: row,
        targets: (0..len).collect(),
        flipped: false,
    }
}

pub(super) fn tightness_tradeoff(cfg: &SuiteConfig) -> Result<SuiteOutcome, Failure> {
    let run = &cfg.run;
    let n = cfg.n.unwrap_or(40);
    run.check_samples(n)?;
    let eps = run.epsilon.unwrap_or(0.02);
    let sweep = run.delta.is_none();
    let deltas: Vec<f64> = match run.delta {
        Some(d) => vec![d],
        None => vec![0.1, 0.2, 0.3, 0.4, 0.5],
    };
    let (rows, mut failures) = run_jobs(&deltas, TIGHT_HEADER.len(), |&delta| {
        let (a, b) = tightness_sizes(n, delta, eps)?;
        let f = gen_tightness(n, delta, eps)?;
        let dist_a = distance_l2_between(&f, &line_dictator(0, a).to_linear(n))?;
        let dist_b = distance_l2_between(&f, &line_dictator(1, b).to_linear(n))?;
        let (best, best_dist) = best_dictator_l2(&f)?;
        let zero = distance_l2_between(&f, &LinearFunction::zero(n))?;
        let one = distance_l2_between(&f, &LinearFunction::constant_fn(n, 1.0))?;
        let constant = zero.min(one);
        let strategy = Strategy::auto(n, run.exact_threshold, run.samples, derive_seed(run.seed, (delta * 1e6) as u64));
        let boolean = dist_to_boolean(&f, Metric::L2, strategy, run.exact_threshold, run.knobs.tau)?;
        let bracket_min = delta.min(eps / delta);
        let bracket_sum = delta + eps / delta;
        let ratio_d = best_dist / bracket_min;
        let ratio_c = constant / bracket_sum;
        let best = best.normalized(n);
        let best_text = format!("{} {} [{}]{}", best.orientation, best.index + 1, targets_text(&best), if best.flipped { " flipped" } else { "" });
        let mut t = Trial::new(row![
            delta, a, b, dist_a, dist_b, best_dist, best_text, constant, bracket_min, bracket_sum, ratio_d, ratio_c,
            boolean.value, boolean.half_width,
        ]);
        let within = |r: f64| (1.0 / TIGHTNESS_FACTOR..=TIGHTNESS_FACTOR).contains(&r);
        t.check(within(ratio_d), || format!("delta = {delta}: dictator distance ratio {ratio_d}"));
        t.check(within(ratio_c), || format!("delta = {delta}: constant distance ratio {ratio_c}"));
        Ok(t)
    });
    let col = |k: usize| -> Vec<f64> { rows.iter().filter_map(|r| r.get(k).and_then(Value::as_f64)).collect() };
    let (da, db) = (col(3), col(4));
    let mut crossings = 0usize;
    if sweep && da.len() == deltas.len() {
        if !da.windows(2).all(|w| w[1] <= w[0]) {
            failures.push("distance to the row-0 dictator is not non-increasing in delta".into());
        }
        if !db.windows(2).all(|w| w[1] >= w[0]) {
            failures.push("distance to the row-1 dictator is not non-decreasing in delta".into());
        }
        let signs: Vec<bool> = da.iter().zip(&db).map(|(x, y)| x > y).collect();
        crossings = signs.windows(2).filter(|w| w[0] != w[1]).count();
        if crossings != 1 {
            failures.push(format!("expected one crossover of the two line dictators, found {crossings}"));
        }
    }
    let ratios: Vec<f64> = col(10).into_iter().chain(col(11)).collect();
    let worst = ratios.iter().map(|r| r.max(1.0 / r)).fold(1.0, f64::max);
    Ok(SuiteOutcome {
        suite: Suite::TightnessTradeoff,
        header: TIGHT_HEADER.to_vec(),
        rows,
        summary: vec![
            ("epsilon", eps.into()),
            ("worst_factor", worst.into()),
            ("crossovers", crossings.into()),
        ],
        failures,
    })
}
