//! Text encodings for traces and reports. Everything is rendered into memory
//! first so a failing run leaves no partial output behind.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::Value;
use tpldca::{Example32Row, IterateRecord, SolveTrace};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn trace_csv(trace: &SolveTrace) -> Result<String> {
    let header = [
        "k",
        "f",
        "merit",
        "step_norm",
        "inner_iters",
        "gap_descent",
        "gap_strict",
    ];
    let rows = trace.records.iter().map(|r: &IterateRecord| {
        vec![
            r.k.to_string(),
            fmt_f64(r.f_value),
            fmt_f64(r.merit),
            fmt_f64(r.step_norm),
            r.inner_iterations.to_string(),
            fmt_f64(r.gap_descent),
            fmt_f64(r.gap_strict),
        ]
    });
    csv_text(&header, rows)
}

/// `None` when the record carries no series.
pub fn inner_series_csv(record: &IterateRecord) -> Result<Option<String>> {
    let Some(series) = &record.series else {
        return Ok(None);
    };
    let rows = series.iter().map(|s| {
        vec![
            s.i.to_string(),
            fmt_f64(s.gap_descent),
            fmt_f64(s.gap_strict),
        ]
    });
    csv_text(&["i", "gap_descent", "gap_strict"], rows).map(Some)
}

pub fn example32_csv(rows: &[Example32Row]) -> Result<String> {
    let rows = rows.iter().map(|r| {
        vec![
            r.i.to_string(),
            fmt_f64(r.z),
            fmt_f64(r.dist_exact),
            fmt_f64(r.rhs),
        ]
    });
    csv_text(&["i", "z", "dist_exact", "rhs"], rows)
}

pub fn ap_table_csv(rows: &[(f64, &'static str)]) -> Result<String> {
    csv_text(
        &["eps", "solution_set"],
        rows.iter().map(|(e, s)| vec![fmt_f64(*e), s.to_string()]),
    )
}

/// A flat JSON object; `BTreeMap` keeps the keys in lexicographic order.
pub type Flat = BTreeMap<String, Value>;

pub fn num(x: f64) -> Value {
    // non-finite values have no JSON encoding
    Value::from(x)
}

pub fn vec_value(v: &tpldca::Vector) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

pub fn json_text(map: &Flat) -> Result<String> {
    let mut s = serde_json::to_string_pretty(map)?;
    s.push('\n');
    Ok(s)
}

/// Files to be written once every computation has succeeded.
#[derive(Default)]
pub struct Outbox {
    files: Vec<(PathBuf, String)>,
}

impl Outbox {
    pub fn add(&mut self, path: PathBuf, contents: String) {
        self.files.push((path, contents));
    }

    pub fn paths(&self) -> impl Iterator<Item = &Path> {
        self.files.iter().map(|(p, _)| p.as_path())
    }

    pub fn flush(self) -> Result<()> {
        for (path, contents) in self.files {
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(&path, contents)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}
