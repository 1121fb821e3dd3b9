//! Instance generators: dictators, coset families, the tightness example and
//! noise models. Every generator is deterministic given its seed.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::l2::CosetFamily;
use crate::linfn::{LinearFunction, ValueTable};
use crate::numeric::rng_from_seed;
use crate::perm::{Cell, CellSet};
use crate::report::{Dictator, Orientation};

/// `Σ_{j∈T} x[index][j]` (row) or `Σ_{i∈T} x[i][index]` (column).
pub fn gen_dictator(
    n: usize,
    orientation: Orientation,
    index: usize,
    targets: &[usize],
) -> Result<LinearFunction> {
    if index >= n {
        return Err(Error::invalid(format!("line index {index} out of range for n = {n}")));
    }
    let mut t = targets.to_vec();
    t.sort_unstable();
    t.dedup();
    if t.is_empty() || t.len() >= n || t.iter().any(|&x| x >= n) {
        return Err(Error::invalid(
            "targets must form a nonempty proper subset of [n]",
        ));
    }
    let d = Dictator {
        orientation,
        index,
        targets: t,
        flipped: false,
    };
    Ok(d.to_linear(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyMode {
    /// `m` distinct cells uniformly without replacement.
    Uniform,
    /// `m − k_off` cells on one random row and `k_off` cells in other rows
    /// and in columns the row does not use.
    HeavyLine { k_off: usize },
}

pub fn gen_disjoint_family(n: usize, m: usize, mode: FamilyMode, seed: u64) -> Result<CosetFamily> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let cells: Vec<Cell> = match mode {
        FamilyMode::Uniform => {
            if m > n * n {
                return Err(Error::invalid(format!("m = {m} exceeds n^2 = {}", n * n)));
            }
            sample(&mut rng, n * n, m)
                .into_iter()
                .map(|k| (k / n, k % n))
                .collect()
        }
        FamilyMode::HeavyLine { k_off } => {
            let on = m.checked_sub(k_off).ok_or_else(|| Error::invalid("k_off exceeds m"))?;
            let free_cols = n.checked_sub(on).ok_or_else(|| {
                Error::invalid(format!("{on} line cells do not fit in a line of length {n}"))
            })?;
            if k_off > (n - 1) * free_cols {
                return Err(Error::invalid(format!(
                    "{k_off} off-line cells do not fit in {} free cells",
                    (n - 1) * free_cols
                )));
            }
            let row = rng.random_range(0..n);
            let cols = sample(&mut rng, n, on).into_vec();
            let other_rows: Vec<usize> = (0..n).filter(|&i| i != row).collect();
            let other_cols: Vec<usize> = (0..n).filter(|j| !cols.contains(j)).collect();
            let mut cells: Vec<Cell> = cols.iter().map(|&j| (row, j)).collect();
            for k in sample(&mut rng, (n - 1) * free_cols, k_off) {
                cells.push((other_rows[k / free_cols], other_cols[k % free_cols]));
            }
            cells
        }
    };
    Ok(CosetFamily::new(CellSet::new(n, cells)?))
}

/// Sizes `(⌊δn⌋, ⌊(ε/δ)n⌋)` of the two rows of the tightness example.
pub fn tightness_sizes(n: usize, delta: f64, eps: f64) -> Result<(usize, usize)> {
    if !(delta > 0.0) || !(eps >= 0.0) {
        return Err(Error::invalid("need delta > 0 and eps >= 0"));
    }
    let floor = |x: f64| libm::floor(x + 1e-9);
    let a = floor(delta * n as f64);
    let b = floor(eps / delta * n as f64);
    if a < 1.0 || a > n as f64 || b > n as f64 || n < 2 {
        return Err(Error::invalid(format!(
            "infeasible tightness parameters: floor(delta n) = {a}, floor(eps/delta n) = {b}, n = {n}"
        )));
    }
    Ok((a as usize, b as usize))
}

/// `Σ_{j<⌊δn⌋} x[0][j] + Σ_{j<⌊(ε/δ)n⌋} x[1][j]`.
pub fn gen_tightness(n: usize, delta: f64, eps: f64) -> Result<LinearFunction> {
    let (a, b) = tightness_sizes(n, delta, eps)?;
    let cells = (0..a).map(|j| (0, j)).chain((0..b).map(|j| (1, j)));
    LinearFunction::indicator_sum(n, cells)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Adds `U(−amplitude, amplitude)` to every coefficient (or table value).
    Uniform { amplitude: f64 },
    /// Adds `N(0, sigma²)` to every coefficient (or table value).
    Gaussian { sigma: f64 },
    /// Replaces `k` distinct coefficients by `U(−magnitude, magnitude)`.
    CorruptK { k: usize, magnitude: f64 },
    /// Complements each entry of a Boolean table with probability `prob`.
    FlipOutputs { prob: f64 },
}

impl NoiseModel {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseModel::Uniform { amplitude } => amplitude >= 0.0 && amplitude.is_finite(),
            NoiseModel::Gaussian { sigma } => sigma >= 0.0 && sigma.is_finite(),
            NoiseModel::CorruptK { magnitude, .. } => magnitude >= 0.0 && magnitude.is_finite(),
            NoiseModel::FlipOutputs { prob } => (0.0..=1.0).contains(&prob),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid noise parameters: {self:?}")))
        }
    }
}

fn additive(model: NoiseModel, values: &mut [f64], rng: &mut crate::numeric::SeededRng) {
    match model {
        NoiseModel::Uniform { amplitude } => {
            if amplitude > 0.0 {
                for v in values {
                    *v += rng.random_range(-amplitude..amplitude);
                }
            }
        }
        NoiseModel::Gaussian { sigma } if sigma > 0.0 => {
            let normal = Normal::new(0.0, sigma).expect("sigma is finite and positive");
            for v in values {
                *v += normal.sample(rng);
            }
        }
        _ => {}
    }
}

/// Noisy copy of a linear function.
pub fn apply_noise(f: &LinearFunction, model: NoiseModel, seed: u64) -> Result<LinearFunction> {
    model.validate()?;
    let n = f.n();
    let mut rng = rng_from_seed(seed);
    let mut g = f.clone();
    let coeff = g.coeff_mut();
    match model {
        NoiseModel::CorruptK { k, magnitude } => {
            if k > n * n {
                return Err(Error::invalid(format!("cannot corrupt {k} of {} cells", n * n)));
            }
            for idx in sample(&mut rng, n * n, k) {
                coeff[(idx / n, idx % n)] = if magnitude > 0.0 {
                    rng.random_range(-magnitude..magnitude)
                } else {
                    0.0
                };
            }
        }
        NoiseModel::FlipOutputs { .. } => {
            return Err(Error::invalid("flip_outputs applies to value tables only"));
        }
        _ => {
            additive(model, coeff.as_mut_slice(), &mut rng);
        }
    }
    Ok(g)
}

/// Noisy copy of a value table.
pub fn apply_noise_table(t: &ValueTable, model: NoiseModel, seed: u64) -> Result<ValueTable> {
    model.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut out = t.clone();
    match model {
        NoiseModel::FlipOutputs { prob } => {
            if !t.is_boolean(0.0) {
                return Err(Error::invalid("flip_outputs needs a Boolean table"));
            }
            for v in out.values_mut() {
                if rng.random_bool(prob) {
                    *v = 1.0 - *v;
                }
            }
        }
        NoiseModel::CorruptK { .. } => {
            return Err(Error::invalid("corrupt_k applies to linear functions only"));
        }
        _ => {
            additive(model, out.values_mut(), &mut rng);
        }
    }
    Ok(out)
}

/// Whether a table is a dictator or a constant, returned in normalized form.
/// A Boolean table is a dictator exactly when it depends on one `π(i)` or
/// one `π⁻¹(j)`.
pub fn dictator_of_table(t: &ValueTable, tau: f64) -> Option<Dictator> {
    let n = t.n();
    if !t.is_boolean(tau) {
        return None;
    }
    let bit = |v: f64| v > 0.5;
    for orientation in [Orientation::Row, Orientation::Col] {
        for index in 0..n {
            // Value forced by the line's coordinate, if consistent.
            let mut table: Vec<Option<bool>> = alloc::vec![None; n];
            let mut ok = true;
            crate::perm::for_each_permutation(n, n, |p, rank| {
                if !ok {
                    return;
                }
                let key = match orientation {
                    Orientation::Row => p.apply(index),
                    Orientation::Col => p.inverse().apply(index),
                };
                let b = bit(t.get(rank));
                match table[key] {
                    None => table[key] = Some(b),
                    Some(prev) if prev != b => ok = false,
                    _ => {}
                }
            })
            .ok()?;
            if ok {
                let targets: Vec<usize> = (0..n).filter(|&k| table[k] == Some(true)).collect();
                let d = Dictator {
                    orientation,
                    index,
                    targets,
                    flipped: false,
                };
                return Some(d.normalized(n));
            }
        }
    }
    None
}
