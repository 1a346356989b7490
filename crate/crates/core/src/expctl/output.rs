//! CSV outputs of a matrix run and the textual comparison report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::expctl::matrix::{Cell, RunRecord, METRICS};
use crate::defense::DefenseMode;
use crate::expctl::scenario::Variant;
use crate::metrics::stats::{aggregate, Summary};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}, record {record}: {msg}")]
    Format { path: String, record: usize, msg: String },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.display().to_string(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv { path: path.display().to_string(), source }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x}"))
}

fn interval_field(c: &Cell) -> String {
    c.replay_interval.map_or_else(|| "NA".to_string(), |r| format!("{r}"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub cell: Cell,
    pub metric: &'static str,
    pub summary: Option<Summary<f64>>,
}

/// Per cell and metric summaries, in first-seen cell order. Undefined run
/// values are skipped.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut order: Vec<Cell> = Vec::new();
    for r in records {
        if !order.contains(&r.cell) {
            order.push(r.cell);
        }
    }
    let mut rows = Vec::new();
    for cell in order {
        for metric in METRICS {
            let vals: Vec<f64> = records
                .iter()
                .filter(|r| r.cell == cell)
                .filter_map(|r| r.values.get(metric).copied().flatten())
                .collect();
            rows.push(SummaryRow { cell, metric, summary: aggregate(&vals) });
        }
    }
    rows
}

pub fn lookup<'a>(rows: &'a [SummaryRow], cell: &Cell, metric: &str) -> Option<&'a Summary<f64>> {
    rows.iter()
        .find(|r| r.cell == *cell && r.metric == metric)
        .and_then(|r| r.summary.as_ref())
}

pub fn write_runs(path: &Path, records: &[RunRecord]) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["cell", "variant", "mobility", "replay_interval", "replication", "seed", "metric", "value"])
        .map_err(csv_err(path))?;
    for r in records {
        for (metric, v) in &r.values {
            w.write_record([
                r.cell.id(),
                r.cell.variant.to_string(),
                r.cell.mobility_label().to_string(),
                interval_field(&r.cell),
                r.replication.to_string(),
                r.seed.to_string(),
                metric.to_string(),
                fmt_opt(*v),
            ])
            .map_err(csv_err(path))?;
        }
    }
    w.flush().map_err(io(path))
}

/// Reads a runs file back. Metrics not known to this build are ignored.
pub fn read_runs(path: &Path) -> Result<Vec<RunRecord>, OutputError> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut out: Vec<RunRecord> = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let bad = |msg: String| OutputError::Format { path: path.display().to_string(), record: i + 1, msg };
        if rec.len() != 8 {
            return Err(bad(format!("expected 8 fields, found {}", rec.len())));
        }
        let spec = if &rec[3] == "NA" {
            format!("{},{}", &rec[1], &rec[2])
        } else {
            format!("{},{},{}", &rec[1], &rec[2], &rec[3])
        };
        let cell = Cell::parse(&spec).map_err(bad)?;
        let replication: usize = rec[4].parse().map_err(|e| bad(format!("replication: {e}")))?;
        let seed: u64 = rec[5].parse().map_err(|e| bad(format!("seed: {e}")))?;
        let Some(metric) = METRICS.iter().copied().find(|m| *m == &rec[6]) else {
            continue;
        };
        let value = if &rec[7] == "NA" {
            None
        } else {
            Some(rec[7].parse::<f64>().map_err(|e| bad(format!("value: {e}")))?)
        };
        match out.iter_mut().find(|r| r.cell == cell && r.replication == replication) {
            Some(r) => {
                r.values.insert(metric, value);
            }
            None => {
                let mut values = BTreeMap::new();
                values.insert(metric, value);
                out.push(RunRecord { cell, replication, seed, values });
            }
        }
    }
    Ok(out)
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<(), OutputError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(["cell", "variant", "mobility", "replay_interval", "metric", "n", "mean", "ci95"])
        .map_err(csv_err(path))?;
    for r in rows {
        let (n, mean, ci) = match r.summary {
            Some(s) => (s.n.to_string(), fmt_opt(Some(s.mean)), fmt_opt(s.ci95)),
            None => ("0".into(), "NA".into(), "NA".into()),
        };
        w.write_record([
            r.cell.id(),
            r.cell.variant.to_string(),
            r.cell.mobility_label().to_string(),
            interval_field(&r.cell),
            r.metric.to_string(),
            n,
            mean,
            ci,
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io(path))
}

fn intervals(rows: &[SummaryRow], mobile: Option<bool>) -> Vec<f64> {
    let mut v: Vec<f64> = rows
        .iter()
        .filter(|r| mobile.is_none_or(|m| r.cell.mobile == m))
        .filter_map(|r| r.cell.replay_interval)
        .collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn variants(rows: &[SummaryRow]) -> Vec<Variant> {
    let mut v: Vec<Variant> = Vec::new();
    for r in rows {
        if !v.contains(&r.cell.variant) {
            v.push(r.cell.variant);
        }
    }
    v
}

/// Mean and half-width of a variant at a replay interval. The attack-free
/// reference has a single value repeated across intervals.
fn point(rows: &[SummaryRow], variant: Variant, mobile: bool, interval: f64, metric: &str) -> (String, String) {
    let cell = Cell { variant, mobile, replay_interval: variant.attacked().then_some(interval) };
    match lookup(rows, &cell, metric) {
        Some(s) => (fmt_opt(Some(s.mean)), fmt_opt(s.ci95)),
        None => ("NA".into(), "NA".into()),
    }
}

/// One figure series file per metric and mobility mode: a row per replay
/// interval and a mean/ci column pair per variant.
pub fn write_figures(dir: &Path, rows: &[SummaryRow]) -> Result<(), OutputError> {
    let vars = variants(rows);
    for mobile in [false, true] {
        if !rows.iter().any(|r| r.cell.mobile == mobile) {
            continue;
        }
        let label = if mobile { "mobile" } else { "static" };
        let xs = intervals(rows, Some(mobile));
        for metric in ["pdr", "ae2ed", "apc"] {
            let path = dir.join(format!("fig_{metric}_{label}.csv"));
            let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
            let mut header = vec!["replay_interval".to_string()];
            for v in &vars {
                header.push(format!("{v}_mean"));
                header.push(format!("{v}_ci95"));
            }
            w.write_record(&header).map_err(csv_err(&path))?;
            for &x in &xs {
                let mut rec = vec![format!("{x}")];
                for &v in &vars {
                    let (m, c) = point(rows, v, mobile, x, metric);
                    rec.push(m);
                    rec.push(c);
                }
                w.write_record(&rec).map_err(csv_err(&path))?;
            }
            w.flush().map_err(io(&path))?;
        }
    }
    let path = dir.join("fig_fpr.csv");
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    let defended: Vec<Variant> = vars.iter().copied().filter(|v| v.defense() != DefenseMode::None).collect();
    let mut header = vec!["mobility".to_string(), "replay_interval".to_string()];
    for v in &defended {
        header.push(format!("{v}_mean"));
        header.push(format!("{v}_ci95"));
    }
    w.write_record(&header).map_err(csv_err(&path))?;
    for mobile in [false, true] {
        if !rows.iter().any(|r| r.cell.mobile == mobile) {
            continue;
        }
        for x in intervals(rows, Some(mobile)) {
            let mut rec = vec![if mobile { "mobile" } else { "static" }.to_string(), format!("{x}")];
            for &v in &defended {
                let (m, c) = point(rows, v, mobile, x, "fpr");
                rec.push(m);
                rec.push(c);
            }
            w.write_record(&rec).map_err(csv_err(&path))?;
        }
    }
    w.flush().map_err(io(&path))
}

/// Fixed-width table of mean +- half-width per cell and metric. Missing
/// values show as a dash.
pub fn comparison(rows: &[SummaryRow]) -> String {
    let mut cells: Vec<Cell> = Vec::new();
    for r in rows {
        if !cells.contains(&r.cell) {
            cells.push(r.cell);
        }
    }
    let mut s = String::new();
    let _ = write!(s, "{:<26}", "cell");
    for m in METRICS {
        let _ = write!(s, " {:>22}", m);
    }
    s.push('\n');
    for c in &cells {
        let _ = write!(s, "{:<26}", c.id());
        for m in METRICS {
            let field = match lookup(rows, c, m) {
                Some(x) => match x.ci95 {
                    Some(h) => format!("{:.4} +- {:.4}", x.mean, h),
                    None => format!("{:.4}", x.mean),
                },
                None => "-".to_string(),
            };
            let _ = write!(s, " {:>22}", field);
        }
        s.push('\n');
    }
    s
}

/// Writes every output file of a matrix run into `dir`.
pub fn write_all(dir: &Path, records: &[RunRecord]) -> Result<Vec<SummaryRow>, OutputError> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    write_runs(&dir.join("runs.csv"), records)?;
    let rows = summarize(records);
    write_summary(&dir.join("summary.csv"), &rows)?;
    write_figures(dir, &rows)?;
    let cmp = dir.join("comparison.txt");
    fs::write(&cmp, comparison(&rows)).map_err(io(&cmp))?;
    Ok(rows)
}
