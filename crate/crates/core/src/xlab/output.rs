use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::run::{Summary, SummaryRow, TrialRecord};
use super::XlabError;
use crate::limits::{ReferenceDistribution, TheoremId};

/// One JSON object per line.
pub fn emit_records(records: &[TrialRecord], path: &Path) -> Result<(), XlabError> {
    let file = File::create(path).map_err(|e| XlabError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| XlabError::io(path, e.into()))?;
        writeln!(w, "{line}").map_err(|e| XlabError::io(path, e))?;
    }
    w.flush().map_err(|e| XlabError::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>, XlabError> {
    let file = File::open(path).map_err(|e| XlabError::io(path, e))?;
    let mut out = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| XlabError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| XlabError::Parse(format!("{}:{}: {e}", path.display(), k + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

fn csv_err(path: &Path, e: csv::Error) -> XlabError {
    XlabError::io(path, std::io::Error::other(e.to_string()))
}

/// CSV keyed by `n`; missing values are empty cells.
pub fn emit_summary(summary: &Summary, path: &Path) -> Result<(), XlabError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    if summary.rows.is_empty() {
        // Header only.
        w.write_record(SUMMARY_HEADER).map_err(|e| csv_err(path, e))?;
    }
    for row in &summary.rows {
        w.serialize(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| XlabError::io(path, e))
}

const SUMMARY_HEADER: [&str; 14] = [
    "n",
    "count",
    "failures",
    "ks",
    "ks_large_part",
    "q05",
    "q25",
    "q50",
    "q75",
    "q95",
    "median_width",
    "median_large_part",
    "median_gap",
    "median_kkt",
];

pub fn read_summary(path: &Path, theorem: TheoremId) -> Result<Summary, XlabError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let rows = r
        .deserialize::<SummaryRow>()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| XlabError::Parse(format!("{}: {e}", path.display())))?;
    Ok(Summary { theorem, rows })
}

/// Rows `(n, x, empirical_cdf, reference_cdf)` at the sorted normalized
/// statistics of each `n`. The reference column is empty without a
/// reference.
pub fn emit_plotdata(records: &[TrialRecord], reference: Option<&ReferenceDistribution>, path: &Path) -> Result<(), XlabError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(["n", "x", "empirical_cdf", "reference_cdf"])
        .map_err(|e| csv_err(path, e))?;
    let mut ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        let mut xs: Vec<f64> = records
            .iter()
            .filter(|r| r.n == n && r.error.is_none())
            .filter_map(|r| r.normalized_statistic)
            .collect();
        xs.sort_by(f64::total_cmp);
        let m = xs.len() as f64;
        for (i, &x) in xs.iter().enumerate() {
            let refc = reference.map(|f| format!("{:?}", f.cdf(x))).unwrap_or_default();
            w.write_record([n.to_string(), format!("{x:?}"), format!("{:?}", (i + 1) as f64 / m), refc])
                .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(|e| XlabError::io(path, e))
}
