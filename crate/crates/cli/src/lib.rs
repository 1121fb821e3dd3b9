//! File formats, run configuration and verification suites behind the
//! `snfkn` command-line tool.

pub mod io;
pub mod suites;

use snfkn_core::l2::AnalysisOptions;
use snfkn_core::linf::LinfOptions;

/// Why a command failed. Each variant maps to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    /// The analysis premise does not hold, or the configuration is rejected.
    #[error("{0}")]
    Rejected(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl From<snfkn_core::Error> for Failure {
    fn from(e: snfkn_core::Error) -> Self {
        Failure::Rejected(e.to_string())
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) | Failure::Malformed(_) | Failure::Csv(_) => 1,
            Failure::Rejected(_) | Failure::Verification(_) => 2,
        }
    }
}

/// Constants left open by the theory, with their defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knobs {
    /// Heavy-line factor `K` of the dictator decision.
    pub k_heavy: f64,
    /// Largest accepted L∞ bound `ε₀`.
    pub eps0: f64,
    /// Line threshold `N` of the L∞ structural path.
    pub line_threshold: usize,
    /// Support cap, as a multiple of `n`.
    pub support_cap_factor: usize,
    pub tau: f64,
}

impl Default for Knobs {
    fn default() -> Self {
        let a = AnalysisOptions::default();
        let l = LinfOptions::default();
        Knobs {
            k_heavy: a.k_heavy,
            eps0: l.eps0,
            line_threshold: l.line_threshold,
            support_cap_factor: a.support_cap_factor,
            tau: a.tau,
        }
    }
}

/// Settings shared by `analyze` and `verify`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub exact_threshold: usize,
    pub samples: usize,
    pub seed: u64,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub knobs: Knobs,
}

/// Fewest samples accepted for a Monte Carlo measurement.
pub const MIN_SAMPLES: usize = 1000;

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            exact_threshold: snfkn_core::DEFAULT_EXACT_THRESHOLD,
            samples: 100_000,
            seed: 0,
            delta: None,
            epsilon: None,
            knobs: Knobs::default(),
        }
    }
}

impl RunConfig {
    /// Rejects too few samples when instances of size `n` will be sampled.
    pub fn check_samples(&self, n: usize) -> Result<(), Failure> {
        if n > self.exact_threshold && self.samples < MIN_SAMPLES {
            return Err(Failure::Rejected(format!(
                "n = {n} is above the exact threshold {}, so at least {MIN_SAMPLES} samples are needed (got {})",
                self.exact_threshold, self.samples
            )));
        }
        Ok(())
    }

    pub fn analysis_options(&self) -> AnalysisOptions {
        AnalysisOptions {
            exact_threshold: self.exact_threshold,
            samples: self.samples,
            seed: self.seed,
            delta: self.delta,
            k_heavy: self.knobs.k_heavy,
            support_cap_factor: self.knobs.support_cap_factor,
            tau: self.knobs.tau,
            ..AnalysisOptions::default()
        }
    }

    pub fn linf_options(&self) -> LinfOptions {
        let d = LinfOptions::default();
        LinfOptions {
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            eps0: self.knobs.eps0,
            line_threshold: self.knobs.line_threshold,
            exact_threshold: self.exact_threshold,
            samples: self.samples,
            seed: self.seed,
            tau: self.knobs.tau,
            ..d
        }
    }
}
