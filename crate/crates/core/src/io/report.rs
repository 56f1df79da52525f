use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Dataset;
use crate::score::{Analysis, ScoreTestResult, Variant};
use crate::sim::{PowerCurve, RejectionRateReport};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::InvalidSpec(format!("unknown report format {s:?}"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

/// Convergence record of an iterative null fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub converged: bool,
    pub iterations: usize,
    pub loglik: f64,
}

/// One (group, variant) row of a test report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub group: Option<String>,
    pub n: usize,
    pub n_observed: usize,
    pub missing_fraction: f64,
    pub propensity_fit: FitDiagnostics,
    /// Outcome fit behind S1; S2's least-squares fit is closed form.
    pub outcome_fit: Option<FitDiagnostics>,
    pub test: ScoreTestResult<f64>,
}

impl ReportEntry {
    /// One entry per test in `analysis`, in its order.
    pub fn from_analysis(group: Option<&str>, data: &Dataset, analysis: &Analysis<f64>) -> Vec<Self> {
        let pf = &analysis.propensity;
        analysis
            .results
            .iter()
            .map(|r| ReportEntry {
                group: group.map(str::to_string),
                n: data.n(),
                n_observed: data.n_observed(),
                missing_fraction: data.missing_fraction(),
                propensity_fit: FitDiagnostics {
                    converged: pf.converged,
                    iterations: pf.iterations,
                    loglik: pf.loglik,
                },
                outcome_fit: match r.variant {
                    Variant::S1 => analysis.outcome.as_ref().map(|of| FitDiagnostics {
                        converged: of.converged,
                        iterations: of.iterations,
                        loglik: of.loglik,
                    }),
                    Variant::S2 => None,
                },
                test: r.clone(),
            })
            .collect()
    }
}

/// Top-level JSON test report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub results: Vec<ReportEntry>,
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`,
/// so a failed run never leaves a partial file.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::IoFailure(e.to_string()))?;
    Ok(())
}

fn json_bytes<S: Serialize>(value: &S) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::IoFailure(e.to_string()))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Writes test results, one CSV row or JSON entry per (group, variant).
pub fn write_report(entries: &[ReportEntry], path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    if entries.is_empty() {
        return Err(Error::EmptyReport);
    }
    let bytes = match format {
        ReportFormat::Json => json_bytes(&ReportDocument {
            schema_version: SCHEMA_VERSION,
            results: entries.to_vec(),
        })?,
        ReportFormat::Csv => csv_bytes(
            &[
                "group",
                "variant",
                "n",
                "n_observed",
                "missing_fraction",
                "statistic",
                "sigma_sq_hat",
                "z",
                "p_value",
                "propensity_converged",
                "outcome_converged",
            ],
            entries.iter().map(|e| {
                vec![
                    opt(e.group.as_deref()),
                    e.test.variant.to_string(),
                    e.n.to_string(),
                    e.n_observed.to_string(),
                    e.missing_fraction.to_string(),
                    e.test.statistic.to_string(),
                    e.test.sigma_sq_hat.to_string(),
                    e.test.z.to_string(),
                    e.test.p_value.to_string(),
                    e.propensity_fit.converged.to_string(),
                    opt(e.outcome_fit.as_ref().map(|f| f.converged)),
                ]
            }),
        )?,
    };
    write_atomic(path.as_ref(), &bytes)
}

#[derive(Serialize)]
struct SimulationDocument<'a> {
    schema_version: u32,
    report: &'a RejectionRateReport,
}

/// Writes a rejection-rate study, one CSV row per variant.
pub fn write_simulation_report(
    report: &RejectionRateReport,
    path: impl AsRef<Path>,
    format: ReportFormat,
) -> Result<()> {
    let bytes = match format {
        ReportFormat::Json => json_bytes(&SimulationDocument {
            schema_version: SCHEMA_VERSION,
            report,
        })?,
        ReportFormat::Csv => csv_bytes(
            &[
                "variant",
                "rate",
                "std_error",
                "rejections",
                "valid",
                "replications",
                "fit_failures",
                "alpha",
                "seed",
            ],
            [Variant::S1, Variant::S2].into_iter().map(|v| {
                let r = report.rate(v);
                vec![
                    v.to_string(),
                    r.rate.to_string(),
                    r.std_error.to_string(),
                    r.rejections.to_string(),
                    r.valid.to_string(),
                    report.replications.to_string(),
                    report.fit_failure_count.to_string(),
                    report.alpha.to_string(),
                    report.seed.to_string(),
                ]
            }),
        )?,
    };
    write_atomic(path.as_ref(), &bytes)
}

#[derive(Serialize)]
struct CurveDocument<'a> {
    schema_version: u32,
    departure: &'a str,
    points: Vec<crate::sim::CurvePoint>,
    reports: &'a [RejectionRateReport],
}

/// Writes a power curve as a plot-ready table: one CSV row per (grid value,
/// variant).
pub fn write_power_curve(curve: &PowerCurve, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    if curve.reports.is_empty() {
        return Err(Error::EmptyReport);
    }
    let bytes = match format {
        ReportFormat::Json => json_bytes(&CurveDocument {
            schema_version: SCHEMA_VERSION,
            departure: curve.departure.name(),
            points: curve.points(),
            reports: &curve.reports,
        })?,
        ReportFormat::Csv => csv_bytes(
            &[curve.departure.name(), "variant", "rate", "std_error", "valid", "failures"],
            curve.points().into_iter().map(|p| {
                vec![
                    p.value.to_string(),
                    p.variant.to_string(),
                    p.rate.to_string(),
                    p.std_error.to_string(),
                    p.valid.to_string(),
                    p.failures.to_string(),
                ]
            }),
        )?,
    };
    write_atomic(path.as_ref(), &bytes)
}
