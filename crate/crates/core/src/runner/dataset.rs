//! Dataset files: numeric CSV with header, LIBSVM sparse rows, and the
//! whitespace `x y label` layout used by 2-D shape benchmarks.

use std::path::Path;

use crate::data::DataMatrix;
use crate::error::{BfcError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Header line, then numeric rows; the last column is the regressand.
    Csv,
    /// `target index:value ...` with 1-based indices, densified.
    Libsvm,
    /// Whitespace-separated features followed by an integer label.
    Xyl,
}

impl std::str::FromStr for DataFormat {
    type Err = BfcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(DataFormat::Csv),
            "libsvm" | "svmlight" => Ok(DataFormat::Libsvm),
            "xyl" | "shape" | "txt" => Ok(DataFormat::Xyl),
            other => Err(BfcError::InvalidArgument(format!(
                "unknown format '{other}' (expected csv, libsvm or xyl)"
            ))),
        }
    }
}

impl DataFormat {
    /// Guess from the file extension; shape files default to `Xyl`.
    pub fn from_path(path: &Path) -> DataFormat {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
        {
            Some(e) if e == "csv" => DataFormat::Csv,
            Some(e) if e == "libsvm" || e == "svm" || e == "scale" => DataFormat::Libsvm,
            _ => DataFormat::Xyl,
        }
    }
}

/// Features plus optional regressand and optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DataMatrix,
    pub y: Option<Vec<f64>>,
    pub labels: Option<Vec<i64>>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }

    pub fn select(&self, rows: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(rows),
            y: self
                .y
                .as_ref()
                .map(|y| rows.iter().map(|&r| y[r]).collect()),
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&r| l[r]).collect()),
        }
    }
}

pub fn load_dataset(path: &Path, format: DataFormat) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text, format, &path.display().to_string())
}

fn parse_err(origin: &str, line: usize, message: impl Into<String>) -> BfcError {
    BfcError::Parse {
        path: origin.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_num(tok: &str, origin: &str, line: usize) -> Result<f64> {
    let v: f64 = tok
        .trim()
        .parse()
        .map_err(|_| parse_err(origin, line, format!("not a number: '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(origin, line, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#') || t.starts_with('%')
}

/// Parses dataset text; `origin` names the source in error messages.
pub fn parse_dataset(text: &str, format: DataFormat, origin: &str) -> Result<Dataset> {
    match format {
        DataFormat::Csv => parse_csv(text, origin),
        DataFormat::Libsvm => parse_libsvm(text, origin),
        DataFormat::Xyl => parse_xyl(text, origin),
    }
}

fn parse_csv(text: &str, origin: &str) -> Result<Dataset> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !is_skippable(l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(origin, 1, "empty file"))?;
    let cols = header.split(',').count();
    if cols < 2 {
        return Err(parse_err(
            origin,
            1,
            "need at least one feature and a target column",
        ));
    }
    let d = cols - 1;
    let mut data = Vec::new();
    let mut y = Vec::new();
    for (ln, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(parse_err(
                origin,
                ln + 1,
                format!("expected {cols} fields, found {}", fields.len()),
            ));
        }
        for f in &fields[..d] {
            data.push(parse_num(f, origin, ln + 1)?);
        }
        y.push(parse_num(fields[d], origin, ln + 1)?);
    }
    Ok(Dataset {
        x: DataMatrix::new(y.len(), d, data)?,
        y: Some(y),
        labels: None,
    })
}

fn parse_libsvm(text: &str, origin: &str) -> Result<Dataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut y = Vec::new();
    let mut d = 0;
    for (ln, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        let mut toks = line.split_whitespace();
        y.push(parse_num(toks.next().unwrap(), origin, ln + 1)?);
        let mut row = Vec::new();
        for tok in toks {
            let (i, v) = tok.split_once(':').ok_or_else(|| {
                parse_err(origin, ln + 1, format!("expected index:value, got '{tok}'"))
            })?;
            let i: usize = i
                .parse()
                .ok()
                .filter(|&i| i >= 1)
                .ok_or_else(|| parse_err(origin, ln + 1, format!("bad feature index '{i}'")))?;
            d = d.max(i);
            row.push((i - 1, parse_num(v, origin, ln + 1)?));
        }
        rows.push(row);
    }
    let d = d.max(1);
    let mut data = vec![0.0; rows.len() * d];
    for (r, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            data[r * d + j] = v;
        }
    }
    Ok(Dataset {
        x: DataMatrix::new(rows.len(), d, data)?,
        y: Some(y),
        labels: None,
    })
}

fn parse_xyl(text: &str, origin: &str) -> Result<Dataset> {
    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut cols = None;
    for (ln, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        let toks: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        if toks.len() < 2 {
            return Err(parse_err(
                origin,
                ln + 1,
                "need at least one feature and a label",
            ));
        }
        match cols {
            None => cols = Some(toks.len()),
            Some(c) if c != toks.len() => {
                return Err(parse_err(
                    origin,
                    ln + 1,
                    format!("expected {c} fields, found {}", toks.len()),
                ))
            }
            _ => {}
        }
        let (feat, label) = toks.split_at(toks.len() - 1);
        for f in feat {
            data.push(parse_num(f, origin, ln + 1)?);
        }
        let l = parse_num(label[0], origin, ln + 1)?;
        if l.fract() != 0.0 {
            return Err(parse_err(
                origin,
                ln + 1,
                format!("label '{}' is not an integer", label[0]),
            ));
        }
        labels.push(l as i64);
    }
    let d = cols.map_or(1, |c| c - 1);
    Ok(Dataset {
        x: DataMatrix::new(labels.len(), d, data)?,
        y: None,
        labels: Some(labels),
    })
}
