//! CSV schema: a header row where score columns are named `domain:<name>`
//! and label columns `label:<name>`.
//!
//! * multiclass: one label column holding class names;
//! * multilabel: one 0/1 column per label;
//! * label ranking: one column per rank position holding label indices,
//!   padded with `-1`.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::data::dataset::Dataset;
use crate::error::{PolygridError, Result};
use crate::labels::{decode_ranking, encode_ranking, Assignment, Task};

fn csv_err(line: u64, reason: impl Into<String>) -> PolygridError {
    PolygridError::Csv {
        line: line as usize,
        reason: reason.into(),
    }
}

pub fn read_csv<R: Read>(reader: R, task: Task, name: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_err(1, e.to_string()))?.clone();
    let mut domain_cols = Vec::new();
    let mut domain_names = Vec::new();
    let mut label_cols = Vec::new();
    let mut label_headers = Vec::new();
    for (c, h) in headers.iter().enumerate() {
        if let Some(n) = h.strip_prefix("domain:") {
            domain_cols.push(c);
            domain_names.push(n.to_string());
        } else if let Some(n) = h.strip_prefix("label:") {
            label_cols.push(c);
            label_headers.push(n.to_string());
        } else {
            return Err(csv_err(1, format!("column {h:?} lacks a domain: or label: prefix")));
        }
    }
    if domain_cols.is_empty() {
        return Err(csv_err(1, "no domain: columns"));
    }
    if task == Task::Multiclass && label_cols.len() > 1 {
        return Err(csv_err(1, "multiclass data needs exactly one label column"));
    }

    let mut raw = Vec::new();
    let mut label_cells: Vec<Vec<String>> = Vec::new();
    let mut lines = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut row = Vec::with_capacity(domain_cols.len());
        for (&c, dn) in domain_cols.iter().zip(&domain_names) {
            let cell = rec.get(c).unwrap_or("");
            if cell.is_empty() {
                return Err(csv_err(line, format!("missing score for domain {dn:?}")));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| csv_err(line, format!("non-numeric score {cell:?} for domain {dn:?}")))?;
            if v < 0.0 || !v.is_finite() {
                return Err(csv_err(
                    line,
                    format!("score {cell} for domain {dn:?} must be non-negative"),
                ));
            }
            row.push(v);
        }
        raw.push(row);
        label_cells.push(label_cols.iter().map(|&c| rec.get(c).unwrap_or("").to_string()).collect());
        lines.push(line);
    }
    let mut ds = Dataset::from_raw(name, domain_names, raw)?;
    if label_cols.is_empty() {
        return Ok(ds);
    }
    let (assignment, label_names) = match task {
        Task::Multiclass => {
            let names: Vec<String> = label_cells
                .iter()
                .map(|r| r[0].clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if let Some(i) = label_cells.iter().position(|r| r[0].is_empty()) {
                return Err(csv_err(lines[i], "missing class label"));
            }
            let classes = label_cells
                .iter()
                .map(|r| names.iter().position(|n| *n == r[0]).unwrap())
                .collect();
            (Assignment::multiclass(names.len(), classes)?, names)
        }
        Task::Multilabel => {
            let mut rows = Vec::with_capacity(label_cells.len());
            for (r, &line) in label_cells.iter().zip(&lines) {
                rows.push(
                    r.iter()
                        .map(|c| match c.as_str() {
                            "1" => Ok(true),
                            "0" => Ok(false),
                            _ => Err(csv_err(line, format!("label cell {c:?} is not 0 or 1"))),
                        })
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            (Assignment::multilabel(label_headers.len(), rows)?, label_headers)
        }
        Task::LabelRanking => {
            let n = label_cols.len();
            let mut rows = Vec::with_capacity(label_cells.len());
            for (r, &line) in label_cells.iter().zip(&lines) {
                let enc = r
                    .iter()
                    .map(|c| {
                        c.parse::<i64>()
                            .map_err(|_| csv_err(line, format!("rank cell {c:?} is not an integer")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(decode_ranking(rows.len(), &enc, n).map_err(|e| csv_err(line, e.to_string()))?);
            }
            let names = (0..n).map(|j| format!("L{j}")).collect();
            (Assignment::ranking(n, rows)?, names)
        }
    };
    ds = ds.with_assignment(assignment, label_names)?;
    Ok(ds)
}

pub fn load_csv(path: &Path, task: Task) -> Result<Dataset> {
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    read_csv(File::open(path)?, task, &name)
}

/// Writes raw scores and labels in the schema [`read_csv`] accepts.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| PolygridError::Io(e.to_string());
    let mut header: Vec<String> = ds.domain_names.iter().map(|d| format!("domain:{d}")).collect();
    match &ds.y {
        Some(Assignment::Multiclass { .. }) => header.push("label:class".into()),
        Some(Assignment::Multilabel { .. }) => {
            header.extend(ds.label_names.iter().map(|l| format!("label:{l}")))
        }
        Some(Assignment::Ranking { n, .. }) => header.extend((0..*n).map(|p| format!("label:rank{p}"))),
        None => {}
    }
    w.write_record(&header).map_err(io)?;
    for (i, row) in ds.raw.iter().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        match &ds.y {
            Some(Assignment::Multiclass { classes, .. }) => rec.push(ds.label_names[classes[i]].clone()),
            Some(Assignment::Multilabel { rows, .. }) => {
                rec.extend(rows[i].iter().map(|&b| if b { "1" } else { "0" }.to_string()))
            }
            Some(Assignment::Ranking { n, rows }) => {
                rec.extend(encode_ranking(&rows[i], *n).iter().map(|v| v.to_string()))
            }
            None => {}
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(ds: &Dataset, path: &Path) -> Result<()> {
    write_csv(ds, File::create(path)?)
}
