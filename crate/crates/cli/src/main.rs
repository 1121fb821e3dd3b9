use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use snfkn::io::{instance_to_string, parse_instance, report_summary, report_to_string, write_census, Instance};
use snfkn::suites::{run, Suite, SuiteConfig};
use snfkn::{Failure, Knobs, RunConfig};
use snfkn_core::gen::{
    apply_noise, apply_noise_table, gen_dictator, gen_disjoint_family, gen_tightness, FamilyMode, NoiseModel,
};
use snfkn_core::l0::{analyze_l0, square_census, CensusOptions};
use snfkn_core::l2::{analyze_l2, disjointness_stats, family_approximant, L2Input};
use snfkn_core::linf::analyze_linf;
use snfkn_core::linfn::l2_between;
use snfkn_core::report::Strategy;
use snfkn_core::{CellSet, Orientation, StructureReport};

#[derive(Parser)]
#[command(name = "snfkn", version, about = "Structure recovery for nearly-Boolean linear functions on S_n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze an instance and write a structure report as JSON.
    Analyze(AnalyzeArgs),
    /// Generate an instance file.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Run a verification suite and write one CSV row per trial.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    L2,
    L0,
    Linf,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Samples per Monte Carlo measurement.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Largest n enumerated exactly.
    #[arg(long, default_value_t = snfkn_core::DEFAULT_EXACT_THRESHOLD)]
    exact_threshold: usize,
    /// Dictator mode: assumed balance δ ≤ Pr[f = 1] ≤ 1 − δ.
    #[arg(long)]
    delta: Option<f64>,
    /// Claimed L∞ bound ε.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Heavy-line factor K.
    #[arg(long = "k-heavy")]
    k_heavy: Option<f64>,
    /// Largest accepted L∞ bound ε₀.
    #[arg(long)]
    eps0: Option<f64>,
    /// Line threshold N of the L∞ structural path.
    #[arg(long)]
    line_threshold: Option<usize>,
    /// Support cap as a multiple of n.
    #[arg(long)]
    support_cap: Option<usize>,
    /// Tolerance for exact-value judgments.
    #[arg(long)]
    tau: Option<f64>,
}

impl Common {
    fn config(&self) -> RunConfig {
        let d = Knobs::default();
        RunConfig {
            exact_threshold: self.exact_threshold,
            samples: self.samples,
            seed: self.seed,
            delta: self.delta,
            epsilon: self.epsilon,
            knobs: Knobs {
                k_heavy: self.k_heavy.unwrap_or(d.k_heavy),
                eps0: self.eps0.unwrap_or(d.eps0),
                line_threshold: self.line_threshold.unwrap_or(d.line_threshold),
                support_cap_factor: self.support_cap.unwrap_or(d.support_cap_factor),
                tau: self.tau.unwrap_or(d.tau),
            },
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, value_enum)]
    metric: MetricArg,
    #[arg(long)]
    input: PathBuf,
    /// Report destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// L0 only: also write the square census as CSV.
    #[arg(long)]
    census: Option<PathBuf>,
    /// With --census: count compatible pairs of defect-free squares.
    #[arg(long)]
    compatible_pairs: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientationArg {
    Row,
    Col,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Uniform,
    HeavyLine,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Uniform,
    Gaussian,
    CorruptK,
    Flip,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// A dictator Σ_{t∈T} x[i][t] (row) or Σ_{t∈T} x[t][i] (column).
    Dictator {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "row")]
        orientation: OrientationArg,
        /// One-based line index.
        #[arg(long)]
        index: usize,
        /// One-based targets, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<usize>,
        #[arg(long)]
        flipped: bool,
        /// Write the full value table instead of the coefficients.
        #[arg(long)]
        table: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A family of m cosets, written as its indicator sum.
    Family {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value = "uniform")]
        mode: ModeArg,
        /// Heavy-line mode: cells off the line.
        #[arg(long, default_value_t = 0)]
        k_off: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two partial rows of sizes ⌊δn⌋ and ⌊(ε/δ)n⌋.
    Tightness {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A noisy copy of an instance file.
    Noisy {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        noise: NoiseArg,
        /// Uniform half-width, Gaussian σ, corruption magnitude or flip probability.
        #[arg(long)]
        amplitude: f64,
        /// Corrupt-k: number of coefficients replaced.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path)?;
    parse_instance(&text).map_err(|e| match e {
        Failure::Malformed(m) => Failure::Malformed(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Recomputes the reported closeness by enumeration.
fn reverify(report: &StructureReport, inst: &Instance, cfg: &RunConfig) -> Result<(), Failure> {
    if !report.closeness.is_exact() || report.n > cfg.exact_threshold {
        return Ok(());
    }
    let g = family_approximant(&report.family, report.flipped);
    let check = match inst {
        Instance::Linear(f) => l2_between(f, &g, Strategy::Exact, cfg.exact_threshold)?,
        Instance::Table(t) => l2_between(t, &g, Strategy::Exact, cfg.exact_threshold)?,
    };
    let claimed = report.closeness.value;
    if (check.value - claimed).abs() > 1e-9 * claimed.abs().max(1.0) {
        return Err(Failure::Verification(format!(
            "reported closeness {claimed} but enumeration gives {}",
            check.value
        )));
    }
    Ok(())
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let cfg = a.common.config();
    let inst = read_instance(&a.input)?;
    if let Instance::Linear(f) = &inst {
        cfg.check_samples(f.n())?;
    }
    let linear = |inst: &Instance| match inst {
        Instance::Linear(f) => Ok(f.clone()),
        Instance::Table(_) => Err(Failure::Rejected("this metric needs a linear function, not a value table".into())),
    };
    let report = match a.metric {
        MetricArg::L2 => {
            let input = match &inst {
                Instance::Linear(f) => L2Input::Linear(f),
                Instance::Table(t) => L2Input::Table(t),
            };
            analyze_l2(input, &cfg.analysis_options())?
        }
        MetricArg::L0 => {
            let f = linear(&inst)?;
            if let Some(path) = &a.census {
                let opts = CensusOptions {
                    tau: cfg.knobs.tau,
                    seed: cfg.seed,
                    compatible_pairs: a.compatible_pairs,
                    ..CensusOptions::default()
                };
                write_census(&square_census(&f, &opts)?, fs::File::create(path)?)?;
            }
            analyze_l0(&f, &cfg.analysis_options())?
        }
        MetricArg::Linf => analyze_linf(&linear(&inst)?, &cfg.linf_options())?,
    };
    reverify(&report, &inst, &cfg)?;
    write_output(a.out.as_deref(), &report_to_string(&report))?;
    eprint!("{}", report_summary(&report));
    Ok(())
}

fn one_based(k: usize, n: usize) -> Result<usize, Failure> {
    if k == 0 || k > n {
        return Err(Failure::Rejected(format!("index {k} is outside 1..={n}")));
    }
    Ok(k - 1)
}

fn cmd_generate(kind: GenerateKind) -> Result<(), Failure> {
    let (inst, out) = match kind {
        GenerateKind::Dictator {
            n,
            orientation,
            index,
            targets,
            flipped,
            table,
            out,
        } => {
            let o = match orientation {
                OrientationArg::Row => Orientation::Row,
                OrientationArg::Col => Orientation::Col,
            };
            let t = targets.iter().map(|&t| one_based(t, n)).collect::<Result<Vec<_>, _>>()?;
            let mut f = gen_dictator(n, o, one_based(index, n)?, &t)?;
            if flipped {
                f = f.complement();
            }
            let inst = if table {
                Instance::Table(f.table(snfkn_core::DEFAULT_EXACT_THRESHOLD)?)
            } else {
                Instance::Linear(f)
            };
            (inst, out)
        }
        GenerateKind::Family {
            n,
            m,
            mode,
            k_off,
            seed,
            out,
        } => {
            let mode = match mode {
                ModeArg::Uniform => FamilyMode::Uniform,
                ModeArg::HeavyLine => FamilyMode::HeavyLine { k_off },
            };
            let fam = gen_disjoint_family(n, m, mode, seed)?;
            let (m, p) = disjointness_stats(&fam.cells);
            eprintln!("{m} cells, {p} non-disjoint pairs, E[h(h-1)] = {}", snfkn_core::l2::expected_pair_overlap(&fam));
            if let FamilyMode::HeavyLine { k_off } = mode {
                let line = (0..n).max_by_key(|&i| fam.cells.iter().filter(|c| c.0 == i).count()).unwrap_or(0);
                let off = CellSet::new(n, fam.cells.iter().copied().filter(|c| c.0 != line))?;
                let predicted = (m - k_off) * k_off + disjointness_stats(&off).1;
                eprintln!("heavy line: (m - k_off) k_off + P_off = {predicted}");
            }
            (Instance::Linear(fam.sum_function()), out)
        }
        GenerateKind::Tightness { n, delta, epsilon, out } => (Instance::Linear(gen_tightness(n, delta, epsilon)?), out),
        GenerateKind::Noisy {
            input,
            noise,
            amplitude,
            k,
            seed,
            out,
        } => {
            let model = match noise {
                NoiseArg::Uniform => NoiseModel::Uniform { amplitude },
                NoiseArg::Gaussian => NoiseModel::Gaussian { sigma: amplitude },
                NoiseArg::CorruptK => NoiseModel::CorruptK { k, magnitude: amplitude },
                NoiseArg::Flip => NoiseModel::FlipOutputs { prob: amplitude },
            };
            let inst = match read_instance(&input)? {
                Instance::Linear(f) => Instance::Linear(apply_noise(&f, model, seed)?),
                Instance::Table(t) => Instance::Table(apply_noise_table(&t, model, seed)?),
            };
            (inst, out)
        }
    };
    write_output(out.as_deref(), &instance_to_string(&inst))
}

fn threads() -> Result<Option<usize>, Failure> {
    match std::env::var("SNFKN_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .map(Some)
            .ok_or_else(|| Failure::Rejected(format!("SNFKN_THREADS must be a positive integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let cfg = SuiteConfig {
        n: a.n,
        trials: a.trials,
        run: a.common.config(),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads()? {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| Failure::Rejected(e.to_string()))?;
    let outcome = pool.install(|| run(a.suite, &cfg))?;
    let mut buf = Vec::new();
    outcome.write_csv(&mut buf)?;
    match a.out.as_deref() {
        Some(p) => fs::write(p, &buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    for (k, v) in &outcome.summary {
        eprintln!("{k} = {v}");
    }
    for f in outcome.failures.iter().take(20) {
        eprintln!("FAIL {f}");
    }
    eprintln!(
        "{}: {} rows, {}",
        a.suite.name(),
        outcome.rows.len(),
        if outcome.passed() { "all checks passed" } else { "checks failed" }
    );
    if outcome.passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!("{} check(s) failed", outcome.failures.len())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Generate { kind } => cmd_generate(kind),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
