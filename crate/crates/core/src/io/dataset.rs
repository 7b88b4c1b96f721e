use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::{parse_error, read_text, write_text};
use crate::error::{Error, Result};
use crate::model::{Dataset, Family};

/// Parses `nodes <n>` followed by one `i j` pair per line (0-indexed).
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_edge_list(text: &str, path: &Path) -> Result<DMatrix<f64>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "missing `nodes <n>` header"))?;
    let mut parts = header.split_whitespace();
    let n: usize = match (parts.next(), parts.next(), parts.next()) {
        (Some("nodes"), Some(v), None) => v
            .parse()
            .map_err(|_| parse_error(path, hline, format!("bad node count '{v}'")))?,
        _ => return Err(parse_error(path, hline, "expected header `nodes <n>`")),
    };
    let mut a = DMatrix::zeros(n, n);
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_error(path, lineno, format!("expected `i j`, got '{line}'")));
        }
        let mut idx = [0usize; 2];
        for (slot, f) in idx.iter_mut().zip(&fields) {
            *slot = f
                .parse()
                .map_err(|_| parse_error(path, lineno, format!("bad node index '{f}'")))?;
            if *slot >= n {
                return Err(parse_error(
                    path,
                    lineno,
                    format!("node {} out of range for {n} nodes", *slot),
                ));
            }
        }
        let [i, j] = idx;
        if i == j {
            return Err(parse_error(path, lineno, format!("self-loop at node {i}")));
        }
        if a[(i, j)] != 0.0 {
            return Err(parse_error(path, lineno, format!("duplicate edge {i} {j}")));
        }
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    Ok(a)
}

/// Canonical edge list: header, then pairs with i < j in lexicographic order.
pub fn format_edge_list(a: &DMatrix<f64>) -> String {
    let n = a.nrows();
    let mut out = format!("nodes {n}\n");
    for i in 0..n {
        for j in (i + 1)..n {
            if a[(i, j)] != 0.0 {
                writeln!(out, "{i} {j}").expect("writing to a String");
            }
        }
    }
    out
}

pub fn read_edge_list(path: &Path) -> Result<DMatrix<f64>> {
    parse_edge_list(&read_text(path)?, path)
}

pub fn write_edge_list(path: &Path, a: &DMatrix<f64>) -> Result<()> {
    write_text(path, &format_edge_list(a))
}

/// Attribute matrix with column names and a missingness mask.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributeTable {
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
    pub observed: DMatrix<bool>,
}

pub fn read_attributes(path: &Path) -> Result<AttributeTable> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let q = names.len();
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let line = r + 2;
        let record = record.map_err(|e| parse_error(path, line, e.to_string()))?;
        if record.len() != q {
            return Err(parse_error(
                path,
                line,
                format!("expected {q} fields, found {}", record.len()),
            ));
        }
        let row = record
            .iter()
            .map(|f| {
                if f == "NA" {
                    Ok(None)
                } else {
                    f.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(Some)
                        .ok_or_else(|| parse_error(path, line, format!("bad value '{f}'")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    Ok(AttributeTable {
        names,
        values: DMatrix::from_fn(n, q, |i, j| rows[i][j].unwrap_or(0.0)),
        observed: DMatrix::from_fn(n, q, |i, j| rows[i][j].is_some()),
    })
}

pub fn write_attributes(path: &Path, names: &[String], data: &Dataset) -> Result<()> {
    if names.len() != data.q() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {} attributes",
            names.len(),
            data.q()
        )));
    }
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidData(e.to_string());
    w.write_record(names).map_err(io)?;
    for i in 0..data.n() {
        let row: Vec<String> = (0..data.q())
            .map(|j| {
                if data.is_observed(i, j) {
                    data.attributes()[(i, j)].to_string()
                } else {
                    "NA".to_string()
                }
            })
            .collect();
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidData(e.to_string()))?;
    write_text(path, &String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Reads a network and, optionally, its attribute table.
pub fn read_dataset(
    edges: &Path,
    attributes: Option<&Path>,
    family: Family,
) -> Result<(Dataset, Vec<String>)> {
    let a = read_edge_list(edges)?;
    let n = a.nrows();
    let table = match attributes {
        Some(p) => {
            let t = read_attributes(p)?;
            if t.values.nrows() != n {
                return Err(Error::InvalidData(format!(
                    "{} has {} rows but the network has {n} nodes",
                    p.display(),
                    t.values.nrows()
                )));
            }
            t
        }
        None => AttributeTable {
            names: Vec::new(),
            values: DMatrix::zeros(n, 0),
            observed: DMatrix::from_element(n, 0, true),
        },
    };
    let data = Dataset::new(a, table.values, family, table.observed)?;
    Ok((data, table.names))
}

/// Writes `edges.txt` and, when there are attributes, `attributes.csv`.
pub fn write_dataset(dir: &Path, data: &Dataset, names: &[String]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_edge_list(&dir.join("edges.txt"), data.adjacency())?;
    if data.q() > 0 {
        write_attributes(&dir.join("attributes.csv"), names, data)?;
    }
    Ok(())
}
