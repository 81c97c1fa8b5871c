//! Dataset readers (dense CSV, sparse LIBSVM) and result writers.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::GraphEstimate;
use crate::selector::SelectionReport;
use crate::sparse::SparseDesign;
use crate::synth::{summarize, BenchResult, MethodSummary};

/// Reads LIBSVM text; `p` is the largest feature index seen.
pub fn read_libsvm(path: impl AsRef<Path>) -> Result<(SparseDesign, Vec<f64>)> {
    read_libsvm_with(path, None)
}

/// Like [`read_libsvm`], with an optional explicit feature count.
pub fn read_libsvm_with(path: impl AsRef<Path>, n_features: Option<usize>) -> Result<(SparseDesign, Vec<f64>)> {
    parse_libsvm(BufReader::new(File::open(path)?), n_features)
}

/// Parses lines of the form `<label> <index>:<value> ...` with 1-based,
/// strictly increasing indices. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn parse_libsvm<R: BufRead>(reader: R, n_features: Option<usize>) -> Result<(SparseDesign, Vec<f64>)> {
    let mut y = Vec::new();
    let mut row_ptr = vec![0];
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    let mut max_index = 0;
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line?;
        let mut tokens = line.split_whitespace();
        let Some(label) = tokens.next() else { continue };
        let label: f64 = label.parse().map_err(|_| Error::Parse {
            line: line_no,
            reason: format!("invalid label `{label}`"),
        })?;
        if !label.is_finite() {
            return Err(Error::NonFiniteValue { line: line_no });
        }
        let mut previous = 0;
        for token in tokens {
            let (index, value) = token.split_once(':').ok_or_else(|| Error::Parse {
                line: line_no,
                reason: format!("expected index:value, found `{token}`"),
            })?;
            let index: usize = match index.parse() {
                Ok(i) if i >= 1 => i,
                _ => {
                    return Err(Error::Parse {
                        line: line_no,
                        reason: format!("invalid feature index `{index}`"),
                    })
                }
            };
            let value: f64 = value.parse().map_err(|_| Error::Parse {
                line: line_no,
                reason: format!("invalid value `{value}`"),
            })?;
            if index == previous {
                return Err(Error::DuplicateIndex { line: line_no, index });
            }
            if index < previous {
                return Err(Error::Parse {
                    line: line_no,
                    reason: format!("feature index {index} after {previous}: indices must increase"),
                });
            }
            if !value.is_finite() {
                return Err(Error::NonFiniteValue { line: line_no });
            }
            if let Some(p) = n_features {
                if index > p {
                    return Err(Error::Parse {
                        line: line_no,
                        reason: format!("feature index {index} exceeds the declared {p} features"),
                    });
                }
            }
            previous = index;
            max_index = max_index.max(index);
            if value != 0.0 {
                col_idx.push(index - 1);
                values.push(value);
            }
        }
        y.push(label);
        row_ptr.push(col_idx.len());
    }
    let p = n_features.unwrap_or(max_index);
    Ok((SparseDesign::from_csr(y.len(), p, row_ptr, col_idx, values), y))
}

/// Which CSV column holds the response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseColumn {
    Name(String),
    /// 1-based position.
    Index(usize),
}

impl std::str::FromStr for ResponseColumn {
    type Err = std::convert::Infallible;

    /// A bare positive integer is a position; anything else is a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) if i >= 1 => ResponseColumn::Index(i),
            _ => ResponseColumn::Name(s.to_string()),
        })
    }
}

/// Raw numeric table read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub names: Vec<String>,
    pub data: DenseMatrix,
}

/// Raw design and response from a CSV file; the caller standardizes.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvDataset {
    pub feature_names: Vec<String>,
    pub x: DenseMatrix,
    pub y: Vec<f64>,
}

/// Reads a rectangular numeric CSV with a header row.
pub fn read_csv_matrix(path: impl AsRef<Path>) -> Result<CsvTable> {
    parse_csv_matrix(File::open(path)?)
}

pub fn parse_csv_matrix<R: Read>(reader: R) -> Result<CsvTable> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
    let names: Vec<String> = csv
        .headers()
        .map_err(|e| csv_error(e, 1))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| csv_error(e, rows.len() + 2))?;
        let line = record.position().map_or(rows.len() + 2, |p| p.line() as usize);
        if record.len() != names.len() {
            return Err(Error::RaggedRows {
                line,
                expected: names.len(),
                found: record.len(),
            });
        }
        let row = record
            .iter()
            .zip(&names)
            .map(|(cell, name)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(Error::NonFiniteValue { line }),
                Err(_) => Err(Error::Parse {
                    line,
                    reason: format!("column `{name}`: invalid number `{cell}`"),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let data = if rows.is_empty() {
        DenseMatrix::zeros(0, names.len())
    } else {
        DenseMatrix::from_rows(&rows)?
    };
    Ok(CsvTable { names, data })
}

fn csv_error(e: csv::Error, line: usize) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            reason: format!("{other:?}"),
        },
    }
}

pub fn read_csv_dataset(path: impl AsRef<Path>, response: &ResponseColumn) -> Result<CsvDataset> {
    split_response(read_csv_matrix(path)?, response)
}

/// Removes the response column from a table.
pub fn split_response(table: CsvTable, response: &ResponseColumn) -> Result<CsvDataset> {
    let position = match response {
        ResponseColumn::Name(name) => table.names.iter().position(|h| h == name),
        ResponseColumn::Index(i) => (*i <= table.names.len()).then(|| i - 1),
    }
    .ok_or_else(|| {
        Error::MissingColumn(match response {
            ResponseColumn::Name(name) => name.clone(),
            ResponseColumn::Index(i) => format!("#{i}"),
        })
    })?;
    let keep: Vec<usize> = (0..table.names.len()).filter(|&j| j != position).collect();
    Ok(CsvDataset {
        feature_names: keep.iter().map(|&j| table.names[j].clone()).collect(),
        x: table.data.select_columns(&keep),
        y: table.data.column(position).to_vec(),
    })
}

/// Rows with header `method,replicate,hamming,fp,fn,wall_time_s`.
pub fn write_bench_csv<W: Write>(writer: W, rows: &[BenchResult]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    if rows.is_empty() {
        csv.write_record(["method", "replicate", "hamming", "fp", "fn", "wall_time_s"])
            .map_err(|e| csv_error(e, 0))?;
    }
    for row in rows {
        csv.serialize(row).map_err(|e| csv_error(e, 0))?;
    }
    csv.flush()?;
    Ok(())
}

/// Benchmark rows plus per-method mean and standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutput {
    pub results: Vec<BenchResult>,
    pub summary: Vec<MethodSummary>,
}

impl BenchOutput {
    pub fn new(results: Vec<BenchResult>) -> Self {
        let summary = summarize(&results);
        BenchOutput { results, summary }
    }
}

pub fn write_json<W: Write, T: Serialize>(mut writer: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writeln!(writer)?;
    Ok(())
}

pub fn read_report_json<R: Read>(reader: R) -> Result<SelectionReport> {
    Ok(serde_json::from_reader(reader)?)
}

/// Selected features as `feature,coefficient` rows, optionally named.
pub fn write_support_csv<W: Write>(writer: W, report: &SelectionReport, names: Option<&[String]>) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["feature", "name", "coefficient"]).map_err(|e| csv_error(e, 0))?;
    for &j in &report.support {
        let name = names.and_then(|n| n.get(j - 1)).map_or("", String::as_str);
        let coef = report.beta_tilde.0[j - 1];
        csv.write_record([j.to_string(), name.to_string(), coef.to_string()])
            .map_err(|e| csv_error(e, 0))?;
    }
    csv.flush()?;
    Ok(())
}

/// Design columns named `x1..xp` followed by the response `y`.
pub fn write_dataset_csv<W: Write>(writer: W, x: &DenseMatrix, y: &[f64]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let header = (1..=x.ncols()).map(|j| format!("x{j}")).chain(std::iter::once("y".to_string()));
    csv.write_record(header).map_err(|e| csv_error(e, 0))?;
    for (i, yi) in y.iter().enumerate() {
        let row = x.row(i).into_iter().chain(std::iter::once(*yi)).map(|v| v.to_string());
        csv.write_record(row).map_err(|e| csv_error(e, 0))?;
    }
    csv.flush()?;
    Ok(())
}

/// Edge list, one `i,j` pair per line with `i < j`.
pub fn write_edges_csv<W: Write>(writer: W, graph: &GraphEstimate) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["i", "j"]).map_err(|e| csv_error(e, 0))?;
    for &(i, j) in &graph.edges {
        csv.write_record([i.to_string(), j.to_string()]).map_err(|e| csv_error(e, 0))?;
    }
    csv.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub p: usize,
    pub n_edges: usize,
    pub degrees: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
    pub per_node_supports: Vec<Vec<usize>>,
}

impl From<&GraphEstimate> for GraphSummary {
    fn from(graph: &GraphEstimate) -> Self {
        GraphSummary {
            p: graph.p,
            n_edges: graph.edges.len(),
            degrees: graph.degrees(),
            edges: graph.edges.iter().copied().collect(),
            per_node_supports: graph.per_node_supports.clone(),
        }
    }
}
