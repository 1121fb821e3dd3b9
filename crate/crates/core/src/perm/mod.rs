//! Permutations of `[n]`, cell sets, square systems and avoidance
//! probabilities.

mod avoid;
mod cells;
mod permutation;
mod square;

pub use avoid::{
    avoid_probability, conditional_avoid_probability, count_avoiding,
    count_avoiding_by_enumeration, factorial_big, ExactRatio, ProbabilityEstimate,
    RYSER_LINE_CAP,
};
pub use cells::{Cell, CellSet};
pub use permutation::{
    enumerate_permutations, for_each_permutation, resample, sample_permutation, Permutation,
    Permutations,
};
pub use square::{sample_square_system, Square, SquareSystem};
