//! Reading two-group data from files.

use std::fs::File;
use std::path::Path;

use mwvar::{Error, Result, TwoSample};

fn parse_value(field: &str, path: &Path, line: u64) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("{}:{line}: cannot parse {field:?} as a number", path.display())))?;
    if !v.is_finite() {
        return Err(Error::InvalidParameter(format!("{}:{line}: non-finite value {field:?}", path.display())));
    }
    Ok(v)
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(file))
}

fn is_blank(record: &csv::StringRecord) -> bool {
    record.iter().all(str::is_empty)
}

/// One value per line. A non-numeric first line is treated as a header.
pub fn read_column(path: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, record) in reader(path)?.records().enumerate() {
        let record = record?;
        if is_blank(&record) {
            continue;
        }
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        let field = &record[0];
        if i == 0 && field.parse::<f64>().is_err() {
            continue;
        }
        out.push(parse_value(field, path, line)?);
    }
    Ok(out)
}

/// Two columns `group,value` with group labels 1 and 2. A non-numeric first
/// line is treated as a header.
pub fn read_labelled(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let (mut g1, mut g2) = (Vec::new(), Vec::new());
    for (i, record) in reader(path)?.records().enumerate() {
        let record = record?;
        if is_blank(&record) {
            continue;
        }
        let line = record.position().map_or(i as u64 + 1, |p| p.line());
        if record.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "{}:{line}: expected 2 columns (group,value), found {}",
                path.display(),
                record.len()
            )));
        }
        if i == 0 && record[1].parse::<f64>().is_err() {
            continue;
        }
        let value = parse_value(&record[1], path, line)?;
        match &record[0] {
            "1" => g1.push(value),
            "2" => g2.push(value),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "{}:{line}: group label must be 1 or 2, found {other:?}",
                    path.display()
                )))
            }
        }
    }
    Ok((g1, g2))
}

pub fn load(group1: Option<&Path>, group2: Option<&Path>, data: Option<&Path>) -> Result<TwoSample> {
    let (g1, g2) = match (group1, group2, data) {
        (Some(a), Some(b), None) => (read_column(a)?, read_column(b)?),
        (None, None, Some(d)) => read_labelled(d)?,
        _ => {
            return Err(Error::InvalidParameter(
                "give either --group1 and --group2, or --data".into(),
            ))
        }
    };
    TwoSample::new(g1, g2)
}
