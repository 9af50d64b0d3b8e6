use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Rows for the flat formats: one per report when the value carries a
/// `reports` list, otherwise one per top-level field.
fn rows(value: &Value) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let compact = |v: &Value| match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if let Some(reports) = value.get("reports").and_then(Value::as_array) {
        let rows = reports
            .iter()
            .map(|r| {
                ["claim", "status", "paper_ref", "witness"]
                    .iter()
                    .map(|f| compact(&r[*f]))
                    .collect()
            })
            .collect();
        (vec!["claim", "status", "paper_ref", "witness"], rows)
    } else if let Some(obj) = value.as_object() {
        let rows = obj.iter().map(|(k, v)| vec![k.clone(), compact(v)]).collect();
        (vec!["field", "value"], rows)
    } else {
        (vec!["value"], vec![vec![compact(value)]])
    }
}

pub fn emit(value: &Value, format: Format) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let (header, rows) = rows(value);
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            w.flush()?;
        }
        Format::Table => {
            let (header, rows) = rows(value);
            // the witness column is left unpadded since it can be long
            let last = header.len() - 1;
            let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for r in &rows {
                for (w, cell) in widths.iter_mut().zip(r) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let line = |cells: Vec<&str>| -> String {
                cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        if i == last {
                            c.to_string()
                        } else {
                            format!("{c:<w$}", w = widths[i])
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            writeln!(out, "{}", line(header.clone()))?;
            for r in &rows {
                writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
            }
        }
    }
    Ok(())
}
