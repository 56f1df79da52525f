//! CSV ingestion, per-group partitioning and report serialization.

mod report;

pub use report::{
    write_power_curve, write_report, write_simulation_report, ReportDocument, ReportEntry,
    ReportFormat, SCHEMA_VERSION,
};

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Basis, GaussianOutcomeFamily, ObservedSample, Term};
use crate::Dataset;
use crate::score::{AnalysisSpec, Variant};

/// A basis term written over covariate names: `1`, `x`, `x^2` or `a*b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermSpec {
    Intercept,
    Raw(String),
    Square(String),
    Product(String, String),
}

impl FromStr for TermSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpec(format!("cannot parse basis term {s:?}"));
        let name = |t: &str| {
            let t = t.trim();
            if t.is_empty() || t.contains(['^', '*']) {
                Err(bad())
            } else {
                Ok(t.to_string())
            }
        };
        if s == "1" {
            Ok(TermSpec::Intercept)
        } else if let Some(base) = s.strip_suffix("^2") {
            Ok(TermSpec::Square(name(base)?))
        } else if let Some((a, b)) = s.split_once('*') {
            Ok(TermSpec::Product(name(a)?, name(b)?))
        } else {
            Ok(TermSpec::Raw(name(s)?))
        }
    }
}

impl fmt::Display for TermSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermSpec::Intercept => write!(f, "1"),
            TermSpec::Raw(a) => write!(f, "{a}"),
            TermSpec::Square(a) => write!(f, "{a}^2"),
            TermSpec::Product(a, b) => write!(f, "{a}*{b}"),
        }
    }
}

/// Parses a comma-separated term list such as `1,x,x^2`.
pub fn parse_terms(list: &str) -> Result<Vec<TermSpec>> {
    list.split(',').map(str::parse).collect()
}

/// Which file columns feed the model, and how.
///
/// Covariates are stored in declaration order after a synthesized
/// intercept, so covariate `k` of `covariate_columns` is column `k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub outcome_column: String,
    pub covariate_columns: Vec<String>,
    /// Covariates of the logistic propensity; `None` uses all of them.
    pub propensity_columns: Option<Vec<String>>,
    /// Mean terms; `None` is the intercept plus every covariate.
    pub mean_basis: Option<Vec<TermSpec>>,
    /// Log-variance terms; `None` is the intercept alone.
    pub logvar_basis: Option<Vec<TermSpec>>,
}

impl ColumnSpec {
    pub fn new(outcome: impl Into<String>, covariates: &[&str]) -> Self {
        Self {
            outcome_column: outcome.into(),
            covariate_columns: covariates.iter().map(|s| s.to_string()).collect(),
            propensity_columns: None,
            mean_basis: None,
            logvar_basis: None,
        }
    }

    fn covariate_index(&self, name: &str) -> Result<usize> {
        self.covariate_columns
            .iter()
            .position(|c| c == name)
            .map(|k| k + 1)
            .ok_or_else(|| Error::InvalidSpec(format!("{name:?} is not a declared covariate")))
    }

    fn term(&self, t: &TermSpec) -> Result<Term> {
        Ok(match t {
            TermSpec::Intercept => Term::Intercept,
            TermSpec::Raw(a) => Term::Raw(self.covariate_index(a)?),
            TermSpec::Square(a) => Term::Square(self.covariate_index(a)?),
            TermSpec::Product(a, b) => {
                Term::Product(self.covariate_index(a)?, self.covariate_index(b)?)
            }
        })
    }

    fn basis(&self, terms: &[TermSpec]) -> Result<Basis> {
        if terms.is_empty() {
            return Err(Error::InvalidSpec("empty basis".into()));
        }
        Ok(Basis::new(
            terms.iter().map(|t| self.term(t)).collect::<Result<_>>()?,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        if self.covariate_columns.contains(&self.outcome_column) {
            return Err(Error::InvalidSpec(format!(
                "outcome {:?} is also listed as a covariate",
                self.outcome_column
            )));
        }
        for (i, c) in self.covariate_columns.iter().enumerate() {
            if c.is_empty() {
                return Err(Error::InvalidSpec("empty covariate name".into()));
            }
            if self.covariate_columns[..i].contains(c) {
                return Err(Error::InvalidSpec(format!("covariate {c:?} listed twice")));
            }
        }
        self.analysis_spec().map(|_| ())
    }

    pub fn mean_basis(&self) -> Result<Basis> {
        match &self.mean_basis {
            Some(terms) => self.basis(terms),
            None => Ok(Basis::linear(self.covariate_columns.len() + 1)),
        }
    }

    pub fn logvar_basis(&self) -> Result<Basis> {
        match &self.logvar_basis {
            Some(terms) => self.basis(terms),
            None => Ok(Basis::new(vec![Term::Intercept])),
        }
    }

    /// The model configuration in column indices.
    pub fn analysis_spec(&self) -> Result<AnalysisSpec> {
        let propensity_columns = match &self.propensity_columns {
            None => None,
            Some(names) => {
                let mut cols = vec![0];
                for name in names {
                    let k = self.covariate_index(name)?;
                    if !cols.contains(&k) {
                        cols.push(k);
                    }
                }
                Some(cols)
            }
        };
        let mean = self.mean_basis()?;
        Ok(AnalysisSpec {
            propensity_columns,
            family: GaussianOutcomeFamily::new(mean.clone(), self.logvar_basis()?),
            location_basis: mean,
        })
    }
}

/// A `test` run: columns, variants, level, grouping and output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub columns: ColumnSpec,
    pub variants: Vec<Variant>,
    pub alpha: f64,
    pub group_by: Option<String>,
    pub output: Option<PathBuf>,
    pub format: ReportFormat,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if self.variants.is_empty() {
            return Err(Error::InvalidSpec("no test variant requested".into()));
        }
        self.columns.validate()
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("NA")
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::NonNumericCell {
            row,
            column: column.to_string(),
            value: cell.to_string(),
        }),
    }
}

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::IoFailure(format!("{}: {e}", path.display())))
}

fn header_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

/// Reads a dataset and, if `label_column` is given, that column's raw text.
///
/// Rows are numbered from 1 for the first data line after the header.
fn read_rows(
    path: &Path,
    spec: &ColumnSpec,
    label_column: Option<&str>,
) -> Result<(Dataset, Vec<String>)> {
    spec.validate()?;
    let mut reader = open(path)?;
    let headers = reader
        .headers()
        .map_err(|e| Error::IoFailure(e.to_string()))?
        .clone();
    let y_idx = header_index(&headers, &spec.outcome_column)?;
    let x_idx = spec
        .covariate_columns
        .iter()
        .map(|c| header_index(&headers, c))
        .collect::<Result<Vec<_>>>()?;
    let label_idx = label_column.map(|c| header_index(&headers, c)).transpose()?;

    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::IoFailure(format!("row {row}: {e}")))?;
        let cell = |j: usize| record.get(j).unwrap_or("");
        let y = match cell(y_idx) {
            c if is_missing(c) => None,
            c => Some(parse_cell(c, row, &spec.outcome_column)?),
        };
        let mut x = Vec::with_capacity(x_idx.len() + 1);
        x.push(1.0);
        for (&j, name) in x_idx.iter().zip(&spec.covariate_columns) {
            let c = cell(j);
            if is_missing(c) {
                return Err(Error::MissingCovariate {
                    row,
                    column: name.clone(),
                });
            }
            x.push(parse_cell(c, row, name)?);
        }
        samples.push(ObservedSample::new(y, x)?);
        if let Some(j) = label_idx {
            labels.push(cell(j).to_string());
        }
    }
    Ok((Dataset::new(samples)?, labels))
}

/// Reads the columns named by `spec` from a headed CSV file.
///
/// An empty or `NA` outcome cell marks the row as missing; covariate cells
/// must all be numeric.
pub fn read_csv(path: impl AsRef<Path>, spec: &ColumnSpec) -> Result<Dataset> {
    read_rows(path.as_ref(), spec, None).map(|(data, _)| data)
}

/// Reads a file and splits it by the text of `group_column`.
pub fn read_csv_grouped(
    path: impl AsRef<Path>,
    spec: &ColumnSpec,
    group_column: &str,
) -> Result<Vec<(String, Dataset)>> {
    let (data, labels) = read_rows(path.as_ref(), spec, Some(group_column))?;
    group_by(&data, &labels)
}

/// Partitions rows by label. Groups come out in sorted label order and keep
/// the input row order within each group.
pub fn group_by(data: &Dataset, labels: &[String]) -> Result<Vec<(String, Dataset)>> {
    if labels.len() != data.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} rows",
            labels.len(),
            data.n()
        )));
    }
    let mut rows: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, label) in labels.iter().enumerate() {
        rows.entry(label.as_str()).or_default().push(i);
    }
    rows.into_iter()
        .map(|(label, idx)| Ok((label.to_string(), data.subset(&idx)?)))
        .collect()
}

/// Writes a dataset as CSV with the given outcome and covariate names.
/// Missing outcomes are written as `NA`; the intercept is not written.
pub fn write_dataset_csv(
    data: &Dataset,
    outcome: &str,
    covariates: &[&str],
    path: impl AsRef<Path>,
) -> Result<()> {
    if covariates.len() + 1 != data.p() {
        return Err(Error::DimensionMismatch(format!(
            "{} names for {} covariates",
            covariates.len(),
            data.p() - 1
        )));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![outcome];
    header.extend_from_slice(covariates);
    w.write_record(&header)?;
    for s in data.iter() {
        let mut rec = vec![s.y().map_or_else(|| "NA".to_string(), |y| y.to_string())];
        rec.extend(s.x()[1..].iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::IoFailure(e.to_string()))?;
    report::write_atomic(path.as_ref(), &bytes)
}
