//! Small numeric helpers shared by the analysis modules.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Two-sided normal quantile used for all Monte Carlo confidence intervals
/// (99% coverage).
pub const Z_99: f64 = 2.58;

/// Deterministic RNG used everywhere a seed is accepted.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a task index (splitmix64 finalizer), so parallel
/// sweeps get per-task seeds independent of scheduling.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Nearest element of `{-1, 0, 1}`; ties at ±1/2 go to 0.
pub fn round_pm1(x: f64) -> i8 {
    if x > 0.5 {
        1
    } else if x < -0.5 {
        -1
    } else {
        0
    }
}

/// Nearest element of `{0, 1}`; the tie at 1/2 goes to 0.
pub fn round_01(x: f64) -> f64 {
    if x > 0.5 {
        1.0
    } else {
        0.0
    }
}

pub fn dist_01(x: f64) -> f64 {
    libm::fabs(x).min(libm::fabs(x - 1.0))
}

pub fn dist_pm1(x: f64) -> f64 {
    libm::fabs(x - f64::from(round_pm1(x)))
}

pub fn round_int(x: f64) -> f64 {
    libm::round(x)
}

pub fn dist_int(x: f64) -> f64 {
    libm::fabs(x - libm::round(x))
}

pub fn is_boolean(x: f64, tau: f64) -> bool {
    dist_01(x) <= tau
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// `n!` as a `u64`, or `None` on overflow.
pub fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

pub fn binomial2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}
