//! Questionnaire CSV: header `group,item_1,...,item_d`, one row per
//! questionnaire, empty field for a missing answer.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use typeprint::report::format_float;
use typeprint::{QuestionnaireMatrix, Scale, Violation};

/// Diagnostic positions are 1-based file lines and columns.
fn position(row: usize, item: usize) -> String {
    format!("line {}, column {}", row + 2, item + 2)
}

fn describe(v: &Violation) -> String {
    match v {
        Violation::OutOfScale { row, item, value } => {
            format!("{}: value {value} outside the response scale", position(*row, *item))
        }
        Violation::NonFinite { row, item } => format!("{}: non-finite value", position(*row, *item)),
        Violation::Ragged { row, expected, actual } => {
            format!("line {}: {actual} items, expected {expected}", row + 2)
        }
        other => other.to_string(),
    }
}

pub fn read_matrix<R: Read>(input: R, scale: Scale) -> Result<QuestionnaireMatrix> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input);
    let header = reader.headers().context("reading CSV header")?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        bail!("empty CSV: expected a header `group,item_1,...`");
    }
    if &header[0] != "group" {
        bail!("line 1, column 1: expected `group`, found `{}`", &header[0]);
    }
    if header.len() < 2 {
        bail!("line 1: no item columns");
    }
    let d = header.len() - 1;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.with_context(|| format!("line {line}: malformed CSV record"))?;
        if record.len() != d + 1 {
            bail!("line {line}: {} fields, expected {}", record.len(), d + 1);
        }
        let label = record[0].trim();
        if label.is_empty() {
            bail!("line {line}, column 1: empty group label");
        }
        let mut row = Vec::with_capacity(d);
        for (j, field) in record.iter().skip(1).enumerate() {
            let field = field.trim();
            if field.is_empty() {
                row.push(None);
            } else {
                let v: f64 = field
                    .parse()
                    .map_err(|_| anyhow::anyhow!("line {line}, column {}: `{field}` is not a number", j + 2))?;
                row.push(Some(v));
            }
        }
        labels.push(label.to_owned());
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("no questionnaire rows");
    }
    let violations = typeprint::validate(&rows, &labels, scale);
    if !violations.is_empty() {
        let shown: Vec<String> = violations.iter().take(10).map(describe).collect();
        let more = if violations.len() > 10 {
            format!("\n  ... and {} more", violations.len() - 10)
        } else {
            String::new()
        };
        bail!("invalid input:\n  {}{more}", shown.join("\n  "));
    }
    Ok(QuestionnaireMatrix::from_rows(rows, labels, scale)?)
}

pub fn write_matrix<W: Write>(m: &QuestionnaireMatrix, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["group".to_string()];
    header.extend((1..=m.n_items()).map(|j| format!("item_{j}")));
    w.write_record(&header)?;
    for i in 0..m.n_rows() {
        let mut rec = vec![m.label(i).to_string()];
        rec.extend(m.row(i).iter().map(|v| v.map(format_float).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
