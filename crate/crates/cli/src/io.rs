//! File formats. Indices in files are one-based; the core library is
//! zero-based.

use std::io::Write;

use serde::{Deserialize, Serialize};
use snfkn_core::l0::SquareCensus;
use snfkn_core::{
    Cell, CellSet, Dictator, Grid, LinearFunction, Measurement, Orientation, Regime, StructureReport,
    ValueTable,
};

use crate::Failure;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffJson {
    pub i: usize,
    pub j: usize,
    pub c: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearJson {
    pub n: usize,
    pub constant: f64,
    pub coeffs: Vec<CoeffJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableJson {
    pub n: usize,
    /// Values in lexicographic order of the permutations.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct CellJson {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct DictatorJson {
    pub orientation: String,
    pub index: usize,
    pub targets: Vec<usize>,
    pub flipped: bool,
}

/// An instance file: a linear function or a full value table.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Linear(LinearFunction),
    Table(ValueTable),
}

impl Instance {
    pub fn n(&self) -> usize {
        match self {
            Instance::Linear(f) => f.n(),
            Instance::Table(t) => t.n(),
        }
    }
}

fn malformed(msg: impl Into<String>) -> Failure {
    Failure::Malformed(msg.into())
}

fn one_based(k: usize, n: usize, what: &str) -> Result<usize, Failure> {
    if k == 0 || k > n {
        return Err(malformed(format!("{what} {k} is outside 1..={n}")));
    }
    Ok(k - 1)
}

pub fn cell_json((i, j): Cell) -> CellJson {
    CellJson { i: i + 1, j: j + 1 }
}

pub fn linear_to_json(f: &LinearFunction) -> LinearJson {
    LinearJson {
        n: f.n(),
        constant: f.constant(),
        coeffs: f
            .coeff()
            .cells()
            .filter(|(_, &c)| c != 0.0)
            .map(|((i, j), &c)| CoeffJson { i: i + 1, j: j + 1, c })
            .collect(),
    }
}

pub fn linear_from_json(v: &LinearJson) -> Result<LinearFunction, Failure> {
    let n = v.n;
    if n == 0 {
        return Err(malformed("n must be >= 1"));
    }
    let mut grid = Grid::filled(n, 0.0);
    let mut seen = vec![false; n * n];
    for t in &v.coeffs {
        let (i, j) = (one_based(t.i, n, "row")?, one_based(t.j, n, "column")?);
        if std::mem::replace(&mut seen[i * n + j], true) {
            return Err(malformed(format!("duplicate coefficient for cell ({}, {})", t.i, t.j)));
        }
        grid[(i, j)] = t.c;
    }
    LinearFunction::new(v.constant, grid).map_err(|e| malformed(e.to_string()))
}

pub fn table_to_json(t: &ValueTable) -> TableJson {
    TableJson {
        n: t.n(),
        values: t.values().to_vec(),
    }
}

pub fn table_from_json(v: TableJson) -> Result<ValueTable, Failure> {
    ValueTable::new(v.n, v.values).map_err(|e| malformed(e.to_string()))
}

pub fn dictator_to_json(d: &Dictator) -> DictatorJson {
    DictatorJson {
        orientation: d.orientation.to_string(),
        index: d.index + 1,
        targets: d.targets.iter().map(|t| t + 1).collect(),
        flipped: d.flipped,
    }
}

pub fn dictator_from_json(v: &DictatorJson, n: usize) -> Result<Dictator, Failure> {
    let orientation = match v.orientation.as_str() {
        "row" => Orientation::Row,
        "col" => Orientation::Col,
        other => return Err(malformed(format!("orientation must be row or col, found {other:?}"))),
    };
    let targets = v
        .targets
        .iter()
        .map(|&t| one_based(t, n, "target"))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dictator {
        orientation,
        index: one_based(v.index, n, "line index")?,
        targets,
        flipped: v.flipped,
    })
}

fn json_error(e: serde_json::Error) -> Failure {
    malformed(format!("line {}, column {}: {e}", e.line(), e.column()))
}

/// Parses an instance file, telling the two formats apart by their keys.
pub fn parse_instance(text: &str) -> Result<Instance, Failure> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(json_error)?;
    let obj = value
        .as_object()
        .ok_or_else(|| malformed("instance must be a JSON object"))?;
    if obj.contains_key("coeffs") {
        let v: LinearJson = serde_json::from_str(text).map_err(json_error)?;
        Ok(Instance::Linear(linear_from_json(&v)?))
    } else if obj.contains_key("values") {
        let v: TableJson = serde_json::from_str(text).map_err(json_error)?;
        Ok(Instance::Table(table_from_json(v)?))
    } else {
        Err(malformed("instance needs either \"coeffs\" or \"values\""))
    }
}

pub fn instance_to_string(inst: &Instance) -> String {
    let s = match inst {
        Instance::Linear(f) => serde_json::to_string_pretty(&linear_to_json(f)),
        Instance::Table(t) => serde_json::to_string_pretty(&table_to_json(t)),
    };
    let mut s = s.expect("instance serialization cannot fail");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasurementJson {
    pub value: f64,
    pub regime: &'static str,
    pub samples: Option<usize>,
    pub half_width: f64,
    pub lower_bound_only: bool,
}

pub fn measurement_json(m: &Measurement) -> MeasurementJson {
    let (regime, samples) = match m.regime {
        Regime::Exact => ("exact", None),
        Regime::MonteCarlo { samples } => ("monte_carlo", Some(samples)),
    };
    MeasurementJson {
        value: m.value,
        regime,
        samples,
        half_width: m.half_width,
        lower_bound_only: m.lower_bound_only,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsJson {
    pub epsilon: MeasurementJson,
    pub closeness: MeasurementJson,
    pub disagreement: Option<MeasurementJson>,
    pub disagreement_max: Option<MeasurementJson>,
    pub dictator_closeness: Option<MeasurementJson>,
    pub dictator_disagreement: Option<MeasurementJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsJson {
    pub anchor: Option<CellJson>,
    pub anchor_scores: Option<[f64; 2]>,
    pub sparse_support: usize,
    pub sporadic_support: usize,
    pub bad_cells: usize,
    pub support_cap: usize,
    pub support_cap_exceeded: bool,
    pub discarded_cells: Vec<CellJson>,
    pub nondisjoint_pairs: usize,
    pub min_line_zeros: Option<usize>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportJson {
    pub metric: String,
    pub n: usize,
    pub verdict: String,
    pub cells: Vec<CellJson>,
    pub flipped: bool,
    pub dictator: Option<DictatorJson>,
    pub metrics: MetricsJson,
    pub diagnostics: DiagnosticsJson,
}

pub fn cells_json(c: &CellSet) -> Vec<CellJson> {
    c.iter().copied().map(cell_json).collect()
}

pub fn report_json(r: &StructureReport) -> ReportJson {
    let d = &r.diagnostics;
    ReportJson {
        metric: r.metric.to_string(),
        n: r.n,
        verdict: r.verdict.to_string(),
        cells: cells_json(&r.family),
        flipped: r.flipped,
        dictator: r.dictator.as_ref().map(dictator_to_json),
        metrics: MetricsJson {
            epsilon: measurement_json(&r.epsilon),
            closeness: measurement_json(&r.closeness),
            disagreement: r.disagreement.as_ref().map(measurement_json),
            disagreement_max: r.disagreement_max.as_ref().map(measurement_json),
            dictator_closeness: r.dictator_closeness.as_ref().map(measurement_json),
            dictator_disagreement: r.dictator_disagreement.as_ref().map(measurement_json),
        },
        diagnostics: DiagnosticsJson {
            anchor: d.anchor.map(cell_json),
            anchor_scores: d.anchor_scores.map(|(a, b)| [a, b]),
            sparse_support: d.sparse_support,
            sporadic_support: d.sporadic_support,
            bad_cells: d.bad_cells,
            support_cap: d.support_cap,
            support_cap_exceeded: d.support_cap_exceeded,
            discarded_cells: d.discarded_cells.iter().copied().map(cell_json).collect(),
            nondisjoint_pairs: d.nondisjoint_pairs,
            min_line_zeros: d.min_line_zeros,
            notes: d.notes.clone(),
        },
    }
}

pub fn report_to_string(r: &StructureReport) -> String {
    let mut s = serde_json::to_string_pretty(&report_json(r)).expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// Short human-readable account of a report.
pub fn report_summary(r: &StructureReport) -> String {
    let mut out = format!(
        "{} analysis, n = {}: verdict {}{}\n",
        r.metric,
        r.n,
        r.verdict,
        if r.flipped { " (complemented)" } else { "" }
    );
    let fmt = |m: &Measurement| match m.regime {
        Regime::Exact => format!("{:.6e} (exact)", m.value),
        Regime::MonteCarlo { samples } => format!("{:.6e} ± {:.2e} ({samples} samples)", m.value, m.half_width),
    };
    out += &format!("  epsilon      {}\n", fmt(&r.epsilon));
    out += &format!("  closeness    {}\n", fmt(&r.closeness));
    if let Some(m) = &r.disagreement {
        out += &format!("  disagreement {}\n", fmt(m));
    }
    if let Some(d) = &r.dictator {
        let t: Vec<String> = d.targets.iter().map(|t| (t + 1).to_string()).collect();
        out += &format!(
            "  dictator     {} {} -> {{{}}}{}\n",
            d.orientation,
            d.index + 1,
            t.join(", "),
            if d.flipped { ", complemented" } else { "" }
        );
    }
    let cells: Vec<String> = r.family.iter().map(|&(i, j)| format!("({},{})", i + 1, j + 1)).collect();
    out += &format!("  cells        {} [{}]\n", cells.len(), cells.join(" "));
    for note in &r.diagnostics.notes {
        out += &format!("  note         {note}\n");
    }
    out
}

/// Writes a census as a one-row CSV.
pub fn write_census<W: Write>(c: &SquareCensus, w: W) -> Result<(), Failure> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["n", "total", "r0_count", "r1_count", "rho0", "rho1", "regime", "compatible_r0_pairs"])?;
    let regime = match c.regime {
        Regime::Exact => "exact".to_string(),
        Regime::MonteCarlo { samples } => format!("monte_carlo:{samples}"),
    };
    wr.write_record([
        c.n.to_string(),
        c.total.to_string(),
        c.r0_count.to_string(),
        c.r1_count.to_string(),
        c.rho0().to_string(),
        c.rho1().to_string(),
        regime,
        c.compatible_r0_pairs.map(|p| p.to_string()).unwrap_or_default(),
    ])?;
    wr.flush()?;
    Ok(())
}
