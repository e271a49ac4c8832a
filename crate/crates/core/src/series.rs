//! Ordered observations with optional row labels, CSV ingestion, and
//! price-to-return conversion.

use crate::error::{Error, Result};
use std::collections::HashSet;
use std::fs::File;
use std::path::Path;

/// A multivariate time series: `len()` observations of dimension `dim()`,
/// optionally labeled (timestamps, month names, ...). Labels are unique
/// and one per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    observations: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
    dim: usize,
}

impl Series {
    pub fn new(observations: Vec<Vec<f64>>, labels: Option<Vec<String>>) -> Result<Self> {
        let len = observations.len();
        if len == 0 {
            return Err(Error::EmptySeries);
        }
        let dim = observations[0].len();
        if dim == 0 {
            return Err(Error::EmptySeries);
        }
        for (index, row) in observations.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    got: row.len(),
                    expected: dim,
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteObservation { index });
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != len {
                return Err(Error::LabelCountMismatch {
                    labels: labels.len(),
                    rows: len,
                });
            }
            let mut seen = HashSet::new();
            for label in labels {
                if !seen.insert(label.as_str()) {
                    return Err(Error::DuplicateLabel {
                        label: label.clone(),
                    });
                }
            }
        }
        Ok(Self {
            observations,
            labels,
            dim,
        })
    }

    pub fn observations(&self) -> &[Vec<f64>] {
        &self.observations
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Converts a univariate price series to its log returns. Return `t`
    /// inherits the label of price `t + 1`: each return is stamped with the
    /// period it ends on.
    pub fn log_returns(&self) -> Result<Series> {
        if self.dim != 1 {
            return Err(Error::NotUnivariate { dim: self.dim });
        }
        let prices: Vec<f64> = self.observations.iter().map(|row| row[0]).collect();
        let returns = log_returns(&prices)?;
        let labels = self
            .labels
            .as_ref()
            .map(|labels| labels[1..].to_vec());
        Series::new(returns.into_iter().map(|r| vec![r]).collect(), labels)
    }
}

/// Log returns of a positive price series: `ln(p[t+1] / p[t])`.
pub fn log_returns(prices: &[f64]) -> Result<Vec<f64>> {
    if prices.len() < 2 {
        return Err(Error::TooShortForReturns { len: prices.len() });
    }
    for (i, &p) in prices.iter().enumerate() {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::NonPositivePrice {
                index: i + 1,
                value: p,
            });
        }
    }
    Ok(prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

/// How a delimited file should be read.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvOptions {
    pub has_header: bool,
    /// Header name, or a 0-based column index given as digits. That column
    /// becomes the row labels instead of a data dimension.
    pub label_column: Option<String>,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: true,
            label_column: None,
            delimiter: b',',
        }
    }
}

/// Loads a delimited text file: every non-label column becomes one data
/// dimension, in file order. Lines starting with `#` are skipped, so the
/// emitted plot-data format reads back in unchanged.
pub fn load_csv(path: &Path, options: &CsvOptions) -> Result<Series> {
    let shown_path = path.display().to_string();
    let file = File::open(path).map_err(|source| Error::Io {
        path: shown_path.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .delimiter(options.delimiter)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers: Option<Vec<String>> = if options.has_header {
        let record = reader.headers().map_err(|source| Error::Csv {
            path: shown_path.clone(),
            source,
        })?;
        Some(record.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut label_index: Option<usize> = None;
    if let Some(wanted) = &options.label_column {
        label_index = headers
            .as_ref()
            .and_then(|names| names.iter().position(|name| name == wanted));
        if label_index.is_none() {
            label_index = Some(wanted.parse::<usize>().map_err(|_| {
                Error::LabelColumnNotFound {
                    column: wanted.clone(),
                }
            })?);
        }
    }

    let column_name = |index: usize| -> String {
        match &headers {
            Some(names) if index < names.len() => names[index].clone(),
            _ => (index + 1).to_string(),
        }
    };

    let mut observations: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let mut width: Option<usize> = headers.as_ref().map(|h| h.len());

    for (data_row, record) in reader.records().enumerate() {
        let row = data_row + 1;
        let record = record.map_err(|source| match source.kind() {
            csv::ErrorKind::UnequalLengths {
                expected_len, len, ..
            } => Error::RaggedRow {
                row,
                got: *len as usize,
                expected: *expected_len as usize,
            },
            _ => Error::Csv {
                path: shown_path.clone(),
                source,
            },
        })?;
        let this_width = record.len();
        let expected = *width.get_or_insert(this_width);
        if this_width != expected {
            return Err(Error::RaggedRow {
                row,
                got: this_width,
                expected,
            });
        }
        if let Some(label) = label_index {
            if label >= this_width {
                return Err(Error::LabelColumnNotFound {
                    column: options.label_column.clone().unwrap_or_default(),
                });
            }
        }
        let mut data_cells = Vec::with_capacity(this_width.saturating_sub(1));
        for (index, cell) in record.iter().enumerate() {
            if Some(index) == label_index {
                labels.push(cell.to_string());
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| Error::ParseCell {
                row,
                column: column_name(index),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonFiniteCell {
                    row,
                    column: column_name(index),
                });
            }
            data_cells.push(value);
        }
        if data_cells.is_empty() {
            return Err(Error::NoNumericColumns { path: shown_path });
        }
        observations.push(data_cells);
    }

    if observations.is_empty() {
        return Err(Error::EmptyCsv { path: shown_path });
    }
    let labels = if label_index.is_some() {
        Some(labels)
    } else {
        None
    };
    Series::new(observations, labels)
}
