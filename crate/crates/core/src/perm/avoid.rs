//! Probability that a uniform permutation avoids a set of cells.
//!
//! The exact count of avoiding permutations is the permanent of the 0/1
//! board of allowed positions. Rows untouched by the forbidden set are
//! all-ones, so Ryser's formula collapses onto the touched rows: only their
//! `2^k` subsets are enumerated, and the untouched rows contribute a
//! binomial sum. The alternating sum is evaluated modulo several primes near
//! `2^62` and reconstructed with Garner's algorithm.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::numeric::{rng_from_seed, Z_99};
use crate::perm::cells::{Cell, CellSet};
use crate::perm::permutation::{for_each_permutation, resample, Permutation};
use crate::report::{Measurement, Strategy};

/// Largest number of touched lines (on the smaller side) handled exactly.
pub const RYSER_LINE_CAP: usize = 25;

/// Reduced fraction `numerator / denominator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactRatio {
    pub numerator: BigUint,
    pub denominator: BigUint,
}

impl ExactRatio {
    fn reduced(num: BigUint, den: BigUint) -> Self {
        let g = num.gcd(&den);
        if g.is_zero() || g.is_one() {
            return ExactRatio {
                numerator: num,
                denominator: den,
            };
        }
        ExactRatio {
            numerator: num / &g,
            denominator: den / &g,
        }
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.numerator, &self.denominator)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityEstimate {
    pub measurement: Measurement,
    /// Present in exact mode.
    pub exact: Option<ExactRatio>,
}

impl ProbabilityEstimate {
    pub fn value(&self) -> f64 {
        self.measurement.value
    }

    fn exact(count: BigUint, total: BigUint) -> Self {
        let ratio = ExactRatio::reduced(count, total);
        ProbabilityEstimate {
            measurement: Measurement::exact(ratio.to_f64()),
            exact: Some(ratio),
        }
    }
}

/// `Pr_π[(i, π(i)) ∉ S for all i]`.
pub fn avoid_probability(s: &CellSet, strategy: Strategy) -> Result<ProbabilityEstimate> {
    if s.n() == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    match strategy {
        Strategy::Exact => {
            let count = count_avoiding(s)?;
            Ok(ProbabilityEstimate::exact(count, factorial_big(s.n())))
        }
        Strategy::MonteCarlo { samples, seed } => Ok(ProbabilityEstimate {
            measurement: sampled_avoid(s, samples, seed)?,
            exact: None,
        }),
    }
}

/// `Pr[π avoids S ∖ pinned | π(i) = j for every pinned (i, j)]`.
pub fn conditional_avoid_probability(
    s: &CellSet,
    pinned: &[Cell],
    strategy: Strategy,
) -> Result<ProbabilityEstimate> {
    let n = s.n();
    let mut row_used = alloc::vec![false; n];
    let mut col_used = alloc::vec![false; n];
    for &(i, j) in pinned {
        if i >= n || j >= n {
            return Err(Error::invalid("pinned cell out of range"));
        }
        if row_used[i] || col_used[j] {
            return Err(Error::invalid(
                "pinned cells must lie in distinct rows and columns",
            ));
        }
        row_used[i] = true;
        col_used[j] = true;
    }
    let m = n - pinned.len();
    if m == 0 {
        return Ok(ProbabilityEstimate::exact(BigUint::one(), BigUint::one()));
    }
    let relabel = |used: &[bool]| {
        let mut map = alloc::vec![usize::MAX; n];
        let mut next = 0;
        for (k, &u) in used.iter().enumerate() {
            if !u {
                map[k] = next;
                next += 1;
            }
        }
        map
    };
    let rmap = relabel(&row_used);
    let cmap = relabel(&col_used);
    // Cells on a pinned row or column can no longer be hit.
    let reduced = CellSet::new(
        m,
        s.iter()
            .filter(|&&(i, j)| !row_used[i] && !col_used[j])
            .map(|&(i, j)| (rmap[i], cmap[j])),
    )?;
    avoid_probability(&reduced, strategy)
}

/// Number of permutations avoiding `s` by enumeration of all `n!`.
pub fn count_avoiding_by_enumeration(s: &CellSet, exact_threshold: usize) -> Result<u64> {
    let mask = s.mask();
    let n = s.n();
    let mut count = 0u64;
    for_each_permutation(n, exact_threshold, |p, _| {
        if (0..n).all(|i| !mask[i * n + p.apply(i)]) {
            count += 1;
        }
    })?;
    Ok(count)
}

fn sampled_avoid(s: &CellSet, samples: usize, seed: u64) -> Result<Measurement> {
    if samples == 0 {
        return Err(Error::invalid("samples must be positive"));
    }
    let n = s.n();
    let mask = s.mask();
    let mut rng = rng_from_seed(seed);
    let mut p = Permutation::identity(n);
    let mut hits = 0usize;
    for _ in 0..samples {
        resample(&mut p, &mut rng);
        if (0..n).all(|i| !mask[i * n + p.apply(i)]) {
            hits += 1;
        }
    }
    let mean = hits as f64 / samples as f64;
    let hw = Z_99 * libm::sqrt(mean * (1.0 - mean) / samples as f64);
    Ok(Measurement::sampled(mean, samples, hw))
}

/// Exact number of permutations avoiding `s`, by Ryser's formula on the
/// touched lines of the smaller side.
pub fn count_avoiding(s: &CellSet) -> Result<BigUint> {
    let n = s.n();
    let rows = s.touched_rows().len();
    let cols = s.touched_cols().len();
    let board = if cols < rows { s.transposed() } else { s.clone() };
    let k = rows.min(cols);
    if k > RYSER_LINE_CAP {
        return Err(Error::Capacity {
            what: "touched lines for exact avoidance",
            requested: k,
            limit: RYSER_LINE_CAP,
        });
    }

    let touched: Vec<usize> = board.touched_rows().into_iter().collect();
    let touched_cols: Vec<usize> = board.touched_cols().into_iter().collect();
    let mut col_slot = alloc::vec![usize::MAX; n];
    for (slot, &c) in touched_cols.iter().enumerate() {
        col_slot[c] = slot;
    }
    // Forbidden column slots per touched row.
    let forbidden: Vec<Vec<usize>> = touched
        .iter()
        .map(|&r| {
            board
                .iter()
                .filter(|c| c.0 == r)
                .map(|c| col_slot[c.1])
                .collect()
        })
        .collect();
    let plan = RyserPlan {
        n,
        k,
        m: touched_cols.len(),
        forbidden,
    };

    let mut residues = Vec::new();
    let mut moduli = Vec::new();
    for p in crt_primes(factorial_bits(n) + 2) {
        residues.push(plan.permanent_mod(p));
        moduli.push(p);
    }
    Ok(garner(&residues, &moduli))
}

struct RyserPlan {
    n: usize,
    k: usize,
    m: usize,
    forbidden: Vec<Vec<usize>>,
}

impl RyserPlan {
    fn permanent_mod(&self, p: u64) -> u64 {
        let (n, k, m) = (self.n, self.k, self.m);
        let free = n - k;
        // pow[b][e] = b^e mod p for b, e in 0..=n.
        let w = n + 1;
        let mut pow = alloc::vec![0u64; w * w];
        for b in 0..=n {
            let mut acc = 1u64;
            for e in 0..=n {
                pow[b * w + e] = acc;
                acc = mul_mod(acc, b as u64 % p, p);
            }
        }
        let binom = binomial_row(free, p);

        // f[c] = forbidden cells of touched column c inside the chosen rows;
        // hist[v] = number of touched columns with f = v.
        let mut f = alloc::vec![0usize; m];
        let mut hist = alloc::vec![0usize; k + 1];
        hist[0] = m;
        let mut chosen = alloc::vec![false; k];
        let mut y = 0usize;

        let mut total = 0u64;
        let mut accumulate = |y: usize, hist: &[usize]| {
            for u in 0..=free {
                let base = y + u;
                let mut term = mul_mod(binom[u], pow[base * w + (n - m)], p);
                for (v, &h) in hist.iter().enumerate().take(y + 1) {
                    if h > 0 {
                        term = mul_mod(term, pow[(base - v) * w + h], p);
                        if term == 0 {
                            break;
                        }
                    }
                }
                if (n - base).is_multiple_of(2) {
                    total = add_mod(total, term, p);
                } else {
                    total = sub_mod(total, term, p);
                }
            }
        };

        accumulate(0, &hist);
        // Reflected Gray code: step t toggles the lowest set bit of t.
        for t in 1u64..(1u64 << k) {
            let r = t.trailing_zeros() as usize;
            let entering = !chosen[r];
            chosen[r] = entering;
            for &c in &self.forbidden[r] {
                hist[f[c]] -= 1;
                if entering {
                    f[c] += 1;
                } else {
                    f[c] -= 1;
                }
                hist[f[c]] += 1;
            }
            if entering {
                y += 1;
            } else {
                y -= 1;
            }
            accumulate(y, &hist);
        }
        total
    }
}

fn binomial_row(n: usize, p: u64) -> Vec<u64> {
    let mut row = alloc::vec![0u64; n + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=i).rev() {
            row[j] = add_mod(row[j], row[j - 1], p);
        }
    }
    row
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(p)) as u64
}

#[inline]
fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for 64-bit integers.
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Descending primes below `2^62` whose product exceeds `2^bits`.
fn crt_primes(bits: usize) -> Vec<u64> {
    let mut primes = Vec::new();
    let mut candidate = (1u64 << 62) - 1;
    let mut covered = 0usize;
    while covered <= bits {
        if is_prime(candidate) {
            primes.push(candidate);
            covered += 61;
        }
        candidate -= 2;
    }
    primes
}

/// Upper bound on `log2(n!)`.
fn factorial_bits(n: usize) -> usize {
    let mut bits = 0usize;
    for k in 2..=n {
        bits += usize::BITS as usize - (k - 1).leading_zeros() as usize;
    }
    bits
}

/// The unique `x < Π moduli` with `x ≡ residues[i] (mod moduli[i])`.
fn garner(residues: &[u64], moduli: &[u64]) -> BigUint {
    let mut x = BigUint::zero();
    let mut m = BigUint::one();
    for (&r, &p) in residues.iter().zip(moduli) {
        let x_mod = (&x % p).to_u64().expect("residue fits in u64");
        let m_mod = (&m % p).to_u64().expect("residue fits in u64");
        let inv = pow_mod(m_mod, p - 2, p);
        let t = mul_mod(sub_mod(r, x_mod, p), inv, p);
        x += &m * t;
        m *= p;
    }
    x
}

pub fn factorial_big(n: usize) -> BigUint {
    (2..=n as u64).fold(BigUint::one(), |acc, k| acc * k)
}

/// `num / den` rounded to `f64` without overflowing on large factorials.
fn ratio_to_f64(num: &BigUint, den: &BigUint) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let shift = 64 + den.bits() as i64 - num.bits() as i64;
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        (num >> (-shift) as u64) / den
    };
    libm::scalbn(q.to_f64().unwrap_or(f64::INFINITY), -(shift as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rng_from_seed;
    use rand::Rng;

    fn cells(n: usize, one_based: &[(usize, usize)]) -> CellSet {
        CellSet::new(n, one_based.iter().map(|&(i, j)| (i - 1, j - 1))).unwrap()
    }

    #[test]
    fn derangements_of_three() {
        let s = cells(3, &[(1, 1), (2, 2), (3, 3)]);
        let p = avoid_probability(&s, Strategy::Exact).unwrap();
        let r = p.exact.clone().unwrap();
        assert_eq!(r.numerator, BigUint::from(1u32));
        assert_eq!(r.denominator, BigUint::from(3u32));
        assert!((p.value() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn small_golden_values() {
        let half = avoid_probability(&cells(2, &[(1, 1)]), Strategy::Exact).unwrap();
        assert_eq!(half.value(), 0.5);
        let row = avoid_probability(&cells(3, &[(1, 1), (1, 2), (1, 3)]), Strategy::Exact).unwrap();
        assert_eq!(row.value(), 0.0);
        let none = avoid_probability(&CellSet::empty(5), Strategy::Exact).unwrap();
        assert_eq!(none.value(), 1.0);
    }

    #[test]
    fn derangement_numbers() {
        // D_n for n = 1..=12.
        let d: [u64; 12] = [
            0, 1, 2, 9, 44, 265, 1854, 14833, 133496, 1334961, 14684570, 176214841,
        ];
        for (idx, &dn) in d.iter().enumerate() {
            let n = idx + 1;
            let s = CellSet::new(n, (0..n).map(|i| (i, i))).unwrap();
            assert_eq!(count_avoiding(&s).unwrap(), BigUint::from(dn), "n = {n}");
        }
        // D_25 exceeds u64 after scaling; check the exact big value.
        let s = CellSet::new(25, (0..25).map(|i| (i, i))).unwrap();
        let d25: BigUint = "5706255282633466762357224".parse().unwrap();
        assert_eq!(count_avoiding(&s).unwrap(), d25);
    }

    #[test]
    fn matches_enumeration_on_random_sets() {
        let mut rng = rng_from_seed(5);
        for n in 1..=6 {
            for _ in 0..40 {
                let s = CellSet::new(
                    n,
                    (0..n * n)
                        .filter(|_| rng.random_bool(0.3))
                        .map(|k| (k / n, k % n)),
                )
                .unwrap();
                let exact = count_avoiding(&s).unwrap();
                let brute = count_avoiding_by_enumeration(&s, 10).unwrap();
                assert_eq!(exact, BigUint::from(brute));
            }
        }
    }

    #[test]
    fn conditional_examples() {
        let s = cells(3, &[(1, 1), (2, 2)]);
        let p = conditional_avoid_probability(&s, &[(0, 0)], Strategy::Exact).unwrap();
        assert_eq!(p.value(), 0.5);
        let q = conditional_avoid_probability(&s, &[], Strategy::Exact).unwrap();
        assert_eq!(q, avoid_probability(&s, Strategy::Exact).unwrap());
        let forced = cells(2, &[(2, 2)]);
        let z = conditional_avoid_probability(&forced, &[(0, 0)], Strategy::Exact).unwrap();
        assert_eq!(z.value(), 0.0);
        assert!(conditional_avoid_probability(&s, &[(0, 0), (0, 1)], Strategy::Exact).is_err());
        let e = conditional_avoid_probability(&CellSet::empty(4), &[(1, 2)], Strategy::Exact)
            .unwrap();
        assert_eq!(e.value(), 1.0);
    }

    #[test]
    fn capacity_error_above_cap() {
        let s = CellSet::new(30, (0..30).map(|i| (i, (i + 1) % 30))).unwrap();
        assert!(matches!(count_avoiding(&s), Err(Error::Capacity { .. })));
    }

    #[test]
    fn sampled_agrees_with_exact() {
        let s = cells(5, &[(1, 1), (2, 2), (3, 3), (1, 2)]);
        let exact = avoid_probability(&s, Strategy::Exact).unwrap().value();
        let mc = avoid_probability(
            &s,
            Strategy::MonteCarlo {
                samples: 100_000,
                seed: 3,
            },
        )
        .unwrap()
        .measurement;
        assert!((mc.value - exact).abs() <= mc.half_width * 4.0 / Z_99 + 1e-12);
    }

    #[test]
    fn ratio_conversion_for_huge_factorials() {
        let s = CellSet::new(200, [(0, 0)]).unwrap();
        let p = avoid_probability(&s, Strategy::Exact).unwrap();
        assert!((p.value() - (1.0 - 1.0 / 200.0)).abs() < 1e-15);
    }
}
