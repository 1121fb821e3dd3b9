//! Verification suites: seeded experiments that check the identities and
//! recovery guarantees on generated instances, one CSV row per trial.

mod identities;
mod recovery;

use std::fmt;
use std::io::Write;

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use snfkn_core::numeric::{derive_seed, SeededRng};
use snfkn_core::{Dictator, Orientation};

use crate::{Failure, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    #[value(name = "covariance")]
    Covariance,
    #[value(name = "pair-overlap")]
    PairOverlap,
    #[value(name = "cube-fkn")]
    CubeFkn,
    #[value(name = "dictator-recovery-l2")]
    DictatorRecoveryL2,
    #[value(name = "dictator-recovery-l0")]
    DictatorRecoveryL0,
    #[value(name = "dictator-recovery-linf")]
    DictatorRecoveryLinf,
    #[value(name = "converse-family")]
    ConverseFamily,
    #[value(name = "tightness-tradeoff")]
    TightnessTradeoff,
    #[value(name = "avoidance")]
    Avoidance,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Covariance,
        Suite::PairOverlap,
        Suite::CubeFkn,
        Suite::DictatorRecoveryL2,
        Suite::DictatorRecoveryL0,
        Suite::DictatorRecoveryLinf,
        Suite::ConverseFamily,
        Suite::TightnessTradeoff,
        Suite::Avoidance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Covariance => "covariance",
            Suite::PairOverlap => "pair-overlap",
            Suite::CubeFkn => "cube-fkn",
            Suite::DictatorRecoveryL2 => "dictator-recovery-l2",
            Suite::DictatorRecoveryL0 => "dictator-recovery-l0",
            Suite::DictatorRecoveryLinf => "dictator-recovery-linf",
            Suite::ConverseFamily => "converse-family",
            Suite::TightnessTradeoff => "tightness-tradeoff",
            Suite::Avoidance => "avoidance",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Failure;

    fn from_str(s: &str) -> Result<Self, Failure> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Failure::Rejected(format!("unknown suite {s:?}")))
    }
}

/// Parameters of a suite run. Unset fields take the suite's defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteConfig {
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub run: RunConfig,
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(v) => Some(v as f64),
            Value::Float(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:e}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(v) => f.write_str(v),
        }
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

macro_rules! row {
    ($($v:expr),* $(,)?) => { vec![$($crate::suites::Value::from($v)),*] };
}
pub(crate) use row;

/// One trial: its CSV row and any hard-assertion failures.
pub(crate) struct Trial {
    pub row: Vec<Value>,
    pub failures: Vec<String>,
}

impl Trial {
    pub fn new(row: Vec<Value>) -> Self {
        Trial {
            row,
            failures: Vec::new(),
        }
    }

    pub fn check(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(msg());
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    /// Fitted constants and totals, written as the final CSV row.
    pub summary: Vec<(&'static str, Value)>,
    pub failures: Vec<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn column(&self, name: &str) -> Vec<&Value> {
        let k = self
            .header
            .iter()
            .position(|h| *h == name)
            .unwrap_or_else(|| panic!("no column {name:?} in {}", self.suite.name()));
        self.rows.iter().filter_map(|r| r.get(k)).collect()
    }

    pub fn floats(&self, name: &str) -> Vec<f64> {
        self.column(name).into_iter().filter_map(Value::as_f64).collect()
    }

    pub fn summary_value(&self, key: &str) -> Option<&Value> {
        self.summary.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), Failure> {
        let mut wr = csv::WriterBuilder::new().flexible(true).from_writer(w);
        wr.write_record(&self.header)?;
        for r in &self.rows {
            wr.write_record(r.iter().map(ToString::to_string))?;
        }
        let mut last = vec!["summary".to_string(), format!("passed={}", self.passed())];
        last.extend(self.summary.iter().map(|(k, v)| format!("{k}={v}")));
        wr.write_record(&last)?;
        wr.flush()?;
        Ok(())
    }
}

/// Runs a suite. Trials run in parallel on the current rayon pool; rows keep
/// trial order, so the output does not depend on the worker count.
pub fn run(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteOutcome, Failure> {
    match suite {
        Suite::Covariance => identities::covariance(cfg),
        Suite::PairOverlap => identities::pair_overlap(cfg),
        Suite::CubeFkn => identities::cube_fkn(cfg),
        Suite::Avoidance => identities::avoidance(cfg),
        Suite::ConverseFamily => identities::converse_family(cfg),
        Suite::DictatorRecoveryL2 => recovery::dictator_recovery_l2(cfg),
        Suite::DictatorRecoveryL0 => recovery::dictator_recovery_l0(cfg),
        Suite::DictatorRecoveryLinf => recovery::dictator_recovery_linf(cfg),
        Suite::TightnessTradeoff => recovery::tightness_tradeoff(cfg),
    }
}

/// Evaluates `jobs` in parallel, turning errors into failure rows.
pub(crate) fn run_jobs<J: Sync>(
    jobs: &[J],
    width: usize,
    f: impl Fn(&J) -> Result<Trial, Failure> + Sync,
) -> (Vec<Vec<Value>>, Vec<String>) {
    let results: Vec<(Result<Trial, Failure>, usize)> =
        jobs.par_iter().enumerate().map(|(k, j)| (f(j), k)).collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (res, k) in results {
        match res {
            Ok(t) => {
                failures.extend(t.failures.into_iter().map(|m| format!("job {k}: {m}")));
                rows.push(t.row);
            }
            Err(e) => {
                failures.push(format!("job {k}: {e}"));
                let mut r = vec![Value::Text(format!("error: {e}"))];
                r.resize(width.max(1), Value::Text(String::new()));
                rows.push(r);
            }
        }
    }
    (rows, failures)
}

/// Seed of job `(group, trial)` under the run seed.
pub(crate) fn job_seed(cfg: &SuiteConfig, group: usize, trial: usize) -> u64 {
    derive_seed(cfg.run.seed, ((group as u64) << 32) | trial as u64)
}

/// A dictator on a random line with `k` random targets.
pub(crate) fn random_dictator(n: usize, k: usize, flipped: bool, rng: &mut SeededRng) -> Dictator {
    let orientation = if rng.random_bool(0.5) {
        Orientation::Row
    } else {
        Orientation::Col
    };
    let index = rng.random_range(0..n);
    let mut targets = sample(rng, n, k).into_vec();
    targets.sort_unstable();
    Dictator {
        orientation,
        index,
        targets,
        flipped,
    }
}

pub(crate) fn targets_text(d: &Dictator) -> String {
    d.targets.iter().map(|t| (t + 1).to_string()).collect::<Vec<_>>().join(" ")
}

pub(crate) fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}
