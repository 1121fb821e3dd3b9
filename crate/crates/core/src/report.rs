//! Measurement and result types shared by the analysis pipelines.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::linfn::LinearFunction;
use crate::perm::{Cell, CellSet};

/// How a quantity was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Exact,
    MonteCarlo { samples: usize },
}

/// How a quantity should be computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

impl Strategy {
    /// Exact when `n` is enumerable, otherwise sampling.
    pub fn auto(n: usize, exact_threshold: usize, samples: usize, seed: u64) -> Strategy {
        if n <= exact_threshold {
            Strategy::Exact
        } else {
            Strategy::MonteCarlo { samples, seed }
        }
    }
}

/// A measured number with its provenance. Exact values have a zero
/// half-width; sampled values carry a 99% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub value: f64,
    pub regime: Regime,
    pub half_width: f64,
    /// Set for sampled maxima, which only bound the true value from below.
    pub lower_bound_only: bool,
}

impl Measurement {
    pub fn exact(value: f64) -> Self {
        Measurement {
            value,
            regime: Regime::Exact,
            half_width: 0.0,
            lower_bound_only: false,
        }
    }

    pub fn sampled(value: f64, samples: usize, half_width: f64) -> Self {
        Measurement {
            value,
            regime: Regime::MonteCarlo { samples },
            half_width,
            lower_bound_only: false,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.regime == Regime::Exact
    }

    /// Upper end of the confidence interval.
    pub fn upper(&self) -> f64 {
        self.value + self.half_width
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Row,
    Col,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Row => "row",
            Orientation::Col => "col",
        })
    }
}

/// A dictator `Σ_{j∈T} x[index][j]` (row) or `Σ_{i∈T} x[i][index]` (column),
/// complemented when `flipped`. An empty target set is the constant 0 (or 1
/// when flipped).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dictator {
    pub orientation: Orientation,
    pub index: usize,
    pub targets: Vec<usize>,
    pub flipped: bool,
}

impl Dictator {
    pub fn cells(&self) -> Vec<Cell> {
        self.targets
            .iter()
            .map(|&t| match self.orientation {
                Orientation::Row => (self.index, t),
                Orientation::Col => (t, self.index),
            })
            .collect()
    }

    /// The dictator as a linear function on `S_n`.
    pub fn to_linear(&self, n: usize) -> LinearFunction {
        let sum = LinearFunction::indicator_sum(n, self.cells()).expect("dictator cells are in range");
        if self.flipped {
            sum.complement()
        } else {
            sum
        }
    }

    /// The constant `0` (or `1` when `flipped`) in dictator form.
    pub fn constant(flipped: bool) -> Dictator {
        Dictator {
            orientation: Orientation::Row,
            index: 0,
            targets: Vec::new(),
            flipped,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.targets.is_empty()
    }

    /// Value at a permutation given as its image.
    pub fn eval(&self, image: &[usize]) -> f64 {
        let hit = match self.orientation {
            Orientation::Row => self.targets.contains(&image[self.index]),
            Orientation::Col => self
                .targets
                .iter()
                .any(|&i| image[i] == self.index),
        };
        if hit != self.flipped {
            1.0
        } else {
            0.0
        }
    }

    /// Same function with at most `n/2` targets, complementing the target set
    /// and toggling `flipped` otherwise. At exactly `n/2` the set containing
    /// target 0 is kept.
    pub fn normalized(&self, n: usize) -> Dictator {
        let mut d = self.clone();
        d.targets.sort_unstable();
        d.targets.dedup();
        let half_without_zero = 2 * d.targets.len() == n && d.targets.first() != Some(&0);
        if 2 * d.targets.len() > n || half_without_zero {
            d.targets = (0..n).filter(|t| !d.targets.contains(t)).collect();
            d.flipped = !d.flipped;
        }
        d
    }

    /// Pointwise equality: same function on `S_n`.
    pub fn same_function(&self, other: &Dictator, n: usize) -> bool {
        if n <= 3 {
            // Small groups have extra coincidences such as x[0][0] = x[1][1] on S_2.
            let mut same = true;
            crate::perm::for_each_permutation(n, n, |p, _| {
                same &= self.eval(p.image()) == other.eval(p.image());
            })
            .expect("n is within its own threshold");
            return same;
        }
        let a = self.normalized(n);
        let b = other.normalized(n);
        if a.flipped != b.flipped {
            // Only possible when both are constants of the same value via |T| = n.
            return false;
        }
        if a.targets.is_empty() && b.targets.is_empty() {
            return true;
        }
        if a.targets.len() == 1 && b.targets.len() == 1 {
            // x[i][j] is both a row and a column dictator.
            return a.cells() == b.cells();
        }
        a.targets == b.targets && a.orientation == b.orientation && a.index == b.index
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Family,
    Dictator,
    ConstantZero,
    ConstantOne,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Family => "family",
            Verdict::Dictator => "dictator",
            Verdict::ConstantZero => "constant_zero",
            Verdict::ConstantOne => "constant_one",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    L2,
    L0,
    Linf,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::L2 => "l2",
            Metric::L0 => "l0",
            Metric::Linf => "linf",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub anchor: Option<Cell>,
    /// Anchor scores `(S1, S2)` for L2, or the discrete counts for L0/L∞.
    pub anchor_scores: Option<(f64, f64)>,
    pub sparse_support: usize,
    pub sporadic_support: usize,
    pub bad_cells: usize,
    pub support_cap: usize,
    pub support_cap_exceeded: bool,
    pub discarded_cells: Vec<Cell>,
    pub nondisjoint_pairs: usize,
    pub min_line_zeros: Option<usize>,
    pub notes: Vec<String>,
}

/// Outcome of one of the analysis pipelines.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureReport {
    pub metric: Metric,
    pub n: usize,
    pub verdict: Verdict,
    /// Recovered family `C`; the approximant is `Σ_C x` (or `1 − Σ_C x`
    /// when `flipped`).
    pub family: CellSet,
    pub dictator: Option<Dictator>,
    pub flipped: bool,
    /// Input distance: to Boolean (linear input) or to linear (table input).
    pub epsilon: Measurement,
    /// `E[(f − g)²]` for the family approximant `g`.
    pub closeness: Measurement,
    /// `Pr[f ≠ g]` for the family approximant.
    pub disagreement: Option<Measurement>,
    /// `Pr[f ≠ max_C x]` (Boolean table input only).
    pub disagreement_max: Option<Measurement>,
    /// `E[(f − d)²]` for the dictator-mode output.
    pub dictator_closeness: Option<Measurement>,
    /// `Pr[f ≠ d]` for the dictator-mode output.
    pub dictator_disagreement: Option<Measurement>,
    pub diagnostics: Diagnostics,
}
