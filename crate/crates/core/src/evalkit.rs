//! Baseline retrievers and precision/recall evaluation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::hpga::{run_hpga, GaConfig, RankedList};
use crate::kmeans::ClusterSet;
use crate::vsm::{cosine, DocVectors, TermVector};

/// The nine recall levels 0.1 through 0.9.
pub const RECALL_LEVELS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Relevance judgments: query id → relevant document ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    pub judgments: BTreeMap<u32, BTreeSet<DocId>>,
}

impl Qrels {
    /// Whitespace-separated `query-id doc-id [ignored...]` lines.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut judgments: BTreeMap<u32, BTreeSet<DocId>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let mut cols = line.split_whitespace();
            let Some(first) = cols.next() else { continue };
            let ids = first
                .parse::<u32>()
                .ok()
                .zip(cols.next().and_then(|c| c.parse::<DocId>().ok()))
                .filter(|&(q, d)| q > 0 && d > 0);
            let (q, d) = ids.ok_or_else(|| {
                Error::parse(source, i + 1, "expected positive integer query and doc ids")
            })?;
            judgments.entry(q).or_default().insert(d);
        }
        Ok(Qrels { judgments })
    }

    pub fn relevant(&self, query: u32) -> Option<&BTreeSet<DocId>> {
        self.judgments.get(&query)
    }
}

pub fn load_qrels(path: &Path) -> Result<Qrels> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Qrels::parse(&text, &path.display().to_string())
}

/// Recall and precision over the top `cutoff` entries.
pub fn recall_precision(
    ranked: &RankedList,
    relevant: &BTreeSet<DocId>,
    cutoff: usize,
) -> Result<(f64, f64)> {
    if relevant.is_empty() {
        return Err(Error::EmptyRelevant(ranked.query_id.unwrap_or(0)));
    }
    if cutoff == 0 {
        return Err(Error::Config("cutoff must be at least 1".into()));
    }
    let hits = ranked
        .doc_ids()
        .take(cutoff)
        .filter(|d| relevant.contains(d))
        .count() as f64;
    Ok((hits / relevant.len() as f64, hits / cutoff as f64))
}

/// Precision at the nine recall levels plus their mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRow {
    pub precision: [f64; 9],
    pub avg: f64,
}

impl PrecisionRow {
    pub fn new(precision: [f64; 9]) -> Self {
        PrecisionRow {
            precision,
            avg: precision.iter().sum::<f64>() / 9.0,
        }
    }

    /// Per-level mean of several rows.
    pub fn mean(rows: &[PrecisionRow]) -> Self {
        let mut acc = [0.0; 9];
        for r in rows {
            for (a, p) in acc.iter_mut().zip(r.precision) {
                *a += p;
            }
        }
        if !rows.is_empty() {
            for a in &mut acc {
                *a /= rows.len() as f64;
            }
        }
        PrecisionRow::new(acc)
    }
}

/// Interpolated precision: at level `r`, the best precision at any cutoff
/// whose recall reaches `r`, or 0 if recall never gets there.
pub fn interpolated_precision_row(
    ranked: &RankedList,
    relevant: &BTreeSet<DocId>,
) -> Result<PrecisionRow> {
    if relevant.is_empty() {
        return Err(Error::EmptyRelevant(ranked.query_id.unwrap_or(0)));
    }
    let total = relevant.len() as f64;
    let mut points = Vec::new();
    let mut hits = 0usize;
    for (i, d) in ranked.doc_ids().enumerate() {
        if relevant.contains(&d) {
            hits += 1;
            points.push((hits as f64 / total, hits as f64 / (i + 1) as f64));
        }
    }
    // Only cutoffs ending on a relevant document can hold the maximum.
    let mut precision = [0.0; 9];
    for (slot, &level) in precision.iter_mut().zip(RECALL_LEVELS.iter()) {
        *slot = points
            .iter()
            .filter(|&&(r, _)| r >= level - 1e-12)
            .map(|&(_, p)| p)
            .fold(0.0, f64::max);
    }
    Ok(PrecisionRow::new(precision))
}

/// Harmonic mean of recall and precision; 0 when both are 0.
pub fn f_measure(r: f64, p: f64) -> f64 {
    if r + p == 0.0 {
        0.0
    } else {
        2.0 * r * p / (r + p)
    }
}

/// Exhaustive cosine ranking of every indexed document.
pub fn classic_ir_rank(q: &TermVector, vectors: &DocVectors) -> RankedList {
    RankedList::from_scores(None, vectors.iter().map(|(&d, v)| (d, cosine(v, q))))
}

/// The genetic search run as a single population over the whole corpus.
pub fn ga_ir_rank(q: &TermVector, vectors: &DocVectors, cfg: &GaConfig) -> Result<RankedList> {
    let cs = ClusterSet::single(vectors)?;
    run_hpga(vectors, &cs, &[0], q, cfg)
}

/// Percentage-point differences per level, kept exact; see [`ImprovementRow::display_cells`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovementRow {
    pub cells: [f64; 9],
    pub avg: f64,
}

impl ImprovementRow {
    /// Cells rounded to whole percentage points.
    pub fn display_cells(&self) -> [String; 9] {
        self.cells.map(format_integer)
    }

    pub fn display_avg(&self) -> String {
        format_truncated(self.avg, 4)
    }
}

pub fn improvement_row(ours: &PrecisionRow, baseline: &PrecisionRow) -> ImprovementRow {
    let mut cells = [0.0; 9];
    for (c, (a, b)) in cells
        .iter_mut()
        .zip(ours.precision.iter().zip(&baseline.precision))
    {
        *c = (a - b) * 100.0;
    }
    ImprovementRow {
        cells,
        avg: cells.iter().sum::<f64>() / 9.0,
    }
}

fn format_integer(x: f64) -> String {
    let r = x.round();
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r:.0}")
    }
}

/// Truncates toward zero at `digits` decimals and trims trailing zeros.
/// Values within 1e-9 of the next grid point snap to it first.
pub fn format_truncated(x: f64, digits: i32) -> String {
    let scale = 10f64.powi(digits);
    let scaled = x * scale;
    let snapped = if (scaled - scaled.round()).abs() < 1e-9 * scale {
        scaled.round()
    } else {
        scaled.trunc()
    };
    let v = snapped / scale;
    let mut s = format!("{:.*}", digits as usize, v);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

/// Averaged results for one engine over a query set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub label: String,
    pub per_query: Vec<(u32, PrecisionRow)>,
    pub averaged: PrecisionRow,
    pub f_measure: PrecisionRow,
    /// Queries without judgments, excluded from the averages.
    pub skipped: usize,
}

impl EvalReport {
    /// Averages per-query rows; `f_measure` pairs each recall level with the
    /// averaged precision at that level.
    pub fn from_rows(label: &str, per_query: Vec<(u32, PrecisionRow)>, skipped: usize) -> Self {
        let rows: Vec<PrecisionRow> = per_query.iter().map(|(_, r)| *r).collect();
        let averaged = PrecisionRow::mean(&rows);
        let mut f = [0.0; 9];
        for (slot, (&r, &p)) in f
            .iter_mut()
            .zip(RECALL_LEVELS.iter().zip(&averaged.precision))
        {
            *slot = f_measure(r, p);
        }
        EvalReport {
            label: label.to_string(),
            per_query,
            averaged,
            f_measure: PrecisionRow::new(f),
            skipped,
        }
    }

    pub fn evaluated(&self) -> usize {
        self.per_query.len()
    }

    /// CSV in the nine-level table layout. `exact` writes full-precision
    /// values instead of the two-decimal display form.
    pub fn to_csv(&self, per_query: bool, exact: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {} queries evaluated={} skipped={}",
            self.label,
            self.evaluated(),
            self.skipped
        );
        out.push_str(&csv_header());
        push_row(&mut out, "precision", &self.averaged, exact);
        push_row(&mut out, "f_measure", &self.f_measure, exact);
        if per_query {
            for (q, row) in &self.per_query {
                push_row(&mut out, &format!("query_{q}"), row, exact);
            }
        }
        out
    }
}

pub fn csv_header() -> String {
    let mut s = String::from("recall");
    for l in RECALL_LEVELS {
        let _ = write!(s, ",{l}");
    }
    s.push_str(",avg\n");
    s
}

fn push_row(out: &mut String, label: &str, row: &PrecisionRow, exact: bool) {
    out.push_str(label);
    for p in row.precision {
        if exact {
            let _ = write!(out, ",{p}");
        } else {
            let _ = write!(out, ",{p:.2}");
        }
    }
    if exact {
        let _ = writeln!(out, ",{}", row.avg);
    } else {
        let _ = writeln!(out, ",{}", format_truncated(row.avg, 4));
    }
}

/// Three-row comparison table: both precision rows and the improvement row.
pub fn comparison_csv(
    a_label: &str,
    a: &PrecisionRow,
    b_label: &str,
    b: &PrecisionRow,
    exact: bool,
) -> String {
    let imp = improvement_row(a, b);
    let mut out = csv_header();
    push_row(&mut out, &format!("{a_label} precision"), a, exact);
    push_row(&mut out, &format!("{b_label} precision"), b, exact);
    out.push_str("improvement");
    if exact {
        for c in imp.cells {
            let _ = write!(out, ",{c}");
        }
        let _ = writeln!(out, ",{}", imp.avg);
    } else {
        for c in imp.display_cells() {
            let _ = write!(out, ",{c}");
        }
        let _ = writeln!(out, ",{}", imp.display_avg());
    }
    out
}

/// Reads the `precision` row back from a report written by [`EvalReport::to_csv`].
pub fn parse_precision_row(text: &str, source: &str) -> Result<PrecisionRow> {
    for (i, line) in text.lines().enumerate() {
        let mut cols = line.split(',');
        if cols.next() != Some("precision") {
            continue;
        }
        let values: Vec<f64> = cols
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(source, i + 1, "non-numeric precision cell"))?;
        if values.len() != 10 {
            return Err(Error::parse(
                source,
                i + 1,
                "expected nine levels and an average",
            ));
        }
        let mut p = [0.0; 9];
        p.copy_from_slice(&values[..9]);
        return Ok(PrecisionRow::new(p));
    }
    Err(Error::parse(source, 0, "no precision row found"))
}
