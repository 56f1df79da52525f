use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StudyConfig;
use crate::error::{Error, Result};
use crate::numerics::RngStream;
use crate::score::{analyze, ScoreTestResult, Variant};

/// Failure share above which a report carries a warning.
pub const FAILURE_WARNING_FRACTION: f64 = 0.01;

/// The numbers kept from one test in one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub variant: Variant,
    pub statistic: f64,
    pub sigma_sq_hat: f64,
    pub z: f64,
    pub p_value: f64,
}

impl From<&ScoreTestResult<f64>> for TestSummary {
    fn from(r: &ScoreTestResult<f64>) -> Self {
        Self {
            variant: r.variant,
            statistic: r.statistic,
            sigma_sq_hat: r.sigma_sq_hat,
            z: r.z,
            p_value: r.p_value,
        }
    }
}

/// Result of replication `index`, drawn from stream `index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: u64,
    /// S1 then S2; empty when the replication failed.
    pub tests: Vec<TestSummary>,
    /// Error name of the failing step.
    pub failure: Option<String>,
}

impl Replication {
    pub fn test(&self, variant: Variant) -> Option<&TestSummary> {
        self.tests.iter().find(|t| t.variant == variant)
    }
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    if threads == Some(0) {
        return Err(Error::InvalidSpec("thread count must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))
}

fn replicate(cfg: &StudyConfig, seed: u64, index: u64) -> Replication {
    let spec = cfg.analysis_spec();
    let outcome = cfg
        .generate(RngStream::new(seed, index))
        .and_then(|data| analyze(&data, &spec, &[Variant::S1, Variant::S2]));
    match outcome {
        Ok(a) => Replication {
            index,
            tests: a.results.iter().map(TestSummary::from).collect(),
            failure: None,
        },
        Err(e) => Replication {
            index,
            tests: Vec::new(),
            failure: Some(e.name().to_string()),
        },
    }
}

/// Runs replications `0..replications`, in index order in the output
/// whatever the thread schedule. `threads = None` uses all cores.
pub fn run_replications(
    cfg: &StudyConfig,
    replications: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<Vec<Replication>> {
    cfg.validate()?;
    if replications == 0 {
        return Err(Error::InvalidSpec("at least one replication is required".into()));
    }
    let pool = pool(threads)?;
    Ok(pool.install(|| {
        (0..replications as u64)
            .into_par_iter()
            .map(|r| replicate(cfg, seed, r))
            .collect()
    }))
}

/// Empirical rejection rate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub rejections: usize,
    /// Replications that produced a test.
    pub valid: usize,
    pub rate: f64,
    pub std_error: f64,
}

impl RateEstimate {
    fn new(rejections: usize, valid: usize) -> Self {
        let rate = rejections as f64 / valid as f64;
        Self {
            rejections,
            valid,
            rate,
            std_error: (rate * (1.0 - rate) / valid as f64).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRateReport {
    pub config: StudyConfig,
    pub replications: usize,
    pub alpha: f64,
    pub seed: u64,
    pub rate_s1: RateEstimate,
    pub rate_s2: RateEstimate,
    pub fit_failure_count: usize,
    /// Failures by error name.
    pub failure_kinds: BTreeMap<String, usize>,
    pub warning: Option<String>,
}

impl RejectionRateReport {
    pub fn rate(&self, variant: Variant) -> &RateEstimate {
        match variant {
            Variant::S1 => &self.rate_s1,
            Variant::S2 => &self.rate_s2,
        }
    }

    /// Aggregates finished replications; failed ones leave the denominator.
    pub fn from_replications(
        config: StudyConfig,
        reps: &[Replication],
        alpha: f64,
        seed: u64,
    ) -> Self {
        let mut failure_kinds = BTreeMap::new();
        for f in reps.iter().filter_map(|r| r.failure.as_ref()) {
            *failure_kinds.entry(f.clone()).or_insert(0) += 1;
        }
        let fit_failure_count = failure_kinds.values().sum::<usize>();
        let rate = |v: Variant| {
            let tests: Vec<&TestSummary> = reps.iter().filter_map(|r| r.test(v)).collect();
            let rejections = tests.iter().filter(|t| t.p_value < alpha).count();
            RateEstimate::new(rejections, tests.len())
        };
        let warning = (fit_failure_count as f64 > FAILURE_WARNING_FRACTION * reps.len() as f64)
            .then(|| {
                format!(
                    "{fit_failure_count} of {} replications failed to fit and were excluded",
                    reps.len()
                )
            });
        Self {
            replications: reps.len(),
            alpha,
            seed,
            rate_s1: rate(Variant::S1),
            rate_s2: rate(Variant::S2),
            fit_failure_count,
            failure_kinds,
            warning,
            config,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Rejection rates of both tests at level `alpha`.
pub fn run_rejection_study(
    cfg: &StudyConfig,
    replications: usize,
    alpha: f64,
    seed: u64,
    threads: Option<usize>,
) -> Result<RejectionRateReport> {
    check_alpha(alpha)?;
    let reps = run_replications(cfg, replications, seed, threads)?;
    Ok(RejectionRateReport::from_replications(
        cfg.clone(),
        &reps,
        alpha,
        seed,
    ))
}

/// The parameter varied along a power curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Departure {
    /// `c₁` of design 1.
    C1,
    /// `γ` of design 2.
    Gamma,
}

impl Departure {
    pub fn name(self) -> &'static str {
        match self {
            Departure::C1 => "c1",
            Departure::Gamma => "gamma",
        }
    }

    /// `base` with the departure parameter set to `value`.
    pub fn apply(self, base: &StudyConfig, value: f64) -> Result<StudyConfig> {
        match (self, base) {
            (Departure::C1, StudyConfig::Example1(c)) => {
                let mut c = c.clone();
                c.c1 = value;
                Ok(StudyConfig::Example1(c))
            }
            (Departure::Gamma, StudyConfig::Example2(c)) => {
                let mut c = c.clone();
                c.gamma = value;
                Ok(StudyConfig::Example2(c))
            }
            _ => Err(Error::InvalidSpec(format!(
                "departure '{}' does not apply to this design",
                self.name()
            ))),
        }
    }
}

/// One flattened point of a power curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub value: f64,
    pub variant: Variant,
    pub rate: f64,
    pub std_error: f64,
    pub valid: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub departure: Departure,
    pub grid: Vec<f64>,
    /// One report per grid value, in grid order.
    pub reports: Vec<RejectionRateReport>,
}

impl PowerCurve {
    /// Plot-ready rows, grid-major, S1 before S2.
    pub fn points(&self) -> Vec<CurvePoint> {
        self.grid
            .iter()
            .zip(&self.reports)
            .flat_map(|(&value, rep)| {
                [Variant::S1, Variant::S2].map(|v| {
                    let r = rep.rate(v);
                    CurvePoint {
                        value,
                        variant: v,
                        rate: r.rate,
                        std_error: r.std_error,
                        valid: r.valid,
                        failures: rep.fit_failure_count,
                    }
                })
            })
            .collect()
    }
}

/// Rejection studies along `grid`. Every point reuses `seed`, so
/// neighbouring points share their random draws.
pub fn power_curve(
    base: &StudyConfig,
    departure: Departure,
    grid: &[f64],
    replications: usize,
    alpha: f64,
    seed: u64,
    threads: Option<usize>,
) -> Result<PowerCurve> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec("power-curve grid is empty".into()));
    }
    check_alpha(alpha)?;
    let reports = grid
        .iter()
        .map(|&v| {
            let cfg = departure.apply(base, v)?;
            run_rejection_study(&cfg, replications, alpha, seed, threads)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerCurve {
        departure,
        grid: grid.to_vec(),
        reports,
    })
}
