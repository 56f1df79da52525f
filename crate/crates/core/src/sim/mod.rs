//! Data generators for the two simulation designs and a replication engine
//! for rejection rates and power curves.

mod study;

pub use study::{
    power_curve, run_rejection_study, run_replications, CurvePoint, Departure, PowerCurve, RateEstimate,
    RejectionRateReport, Replication, TestSummary, FAILURE_WARNING_FRACTION,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{logistic, Basis, Dataset, GaussianOutcomeFamily, ObservedSample, Term};
use crate::numerics::{normal_cdf, RngStream};
use crate::score::AnalysisSpec;

/// Outcome transform inside the probit missingness model of design 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WVariant {
    /// `w(y) = y`
    Identity,
    /// `w(y) = 0.4 y²`
    Quad04,
    /// `w(y) = 2.5 · 1{y > 1}`
    Indicator,
}

impl WVariant {
    pub fn eval(self, y: f64) -> f64 {
        match self {
            WVariant::Identity => y,
            WVariant::Quad04 => 0.4 * y * y,
            WVariant::Indicator => {
                if y > 1.0 {
                    2.5
                } else {
                    0.0
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WVariant::Identity => "identity",
            WVariant::Quad04 => "quad04",
            WVariant::Indicator => "indicator",
        }
    }
}

impl std::str::FromStr for WVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" | "y" => Ok(WVariant::Identity),
            "quad04" | "0.4y^2" => Ok(WVariant::Quad04),
            "indicator" | "2.5i(y>1)" => Ok(WVariant::Indicator),
            other => Err(Error::InvalidSpec(format!("unknown w variant '{other}'"))),
        }
    }
}

/// Default probit intercept of design 1.
pub const DEFAULT_C0: f64 = 0.5;

/// `Z ~ N(0,1)`, `U | Z ~ N(1 − Z, 1)`, `Y | U, Z ~ N(1 + U + b_z Z, 1)`,
/// observed with probability `Φ(c₀ + c₁ w(Y) + c₂ U)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example1Config {
    pub n: usize,
    pub b_z: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub w: WVariant,
}

impl Example1Config {
    /// `b_z = 0.5`, `c₀ = 0.5`, `c₁ = c₂ = 0`, `w(y) = y`.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            b_z: 0.5,
            c0: DEFAULT_C0,
            c1: 0.0,
            c2: 0.0,
            w: WVariant::Identity,
        }
    }
}

/// `X ~ N(0,1)`, `Y | X ~ N(ξ₁x + ξ₂x², exp(ξ₃ + ξ₄x))`, observed with
/// probability `logistic(β₀ + β₁x + γy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example2Config {
    pub n: usize,
    pub xi_true: [f64; 4],
    pub beta0: f64,
    pub beta1: f64,
    pub gamma: f64,
    /// Fit S1 with a constant variance instead of `exp(ξ₃ + ξ₄x)`.
    #[serde(default)]
    pub homoskedastic_fit: bool,
}

impl Example2Config {
    /// `ξ = (−1, 1, 0.5, 0)`, `(β₀, β₁) = (0.85, 0)`.
    pub fn homoskedastic(n: usize, gamma: f64) -> Self {
        Self {
            n,
            xi_true: [-1.0, 1.0, 0.5, 0.0],
            beta0: 0.85,
            beta1: 0.0,
            gamma,
            homoskedastic_fit: false,
        }
    }

    /// `ξ = (1, 1, 0.5, 1)`, `(β₀, β₁) = (0.5, 0.5)`.
    pub fn heteroskedastic(n: usize, gamma: f64) -> Self {
        Self {
            n,
            xi_true: [1.0, 1.0, 0.5, 1.0],
            beta0: 0.5,
            beta1: 0.5,
            gamma,
            homoskedastic_fit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "example")]
pub enum StudyConfig {
    #[serde(rename = "1")]
    Example1(Example1Config),
    #[serde(rename = "2")]
    Example2(Example2Config),
}

impl StudyConfig {
    pub fn n(&self) -> usize {
        match self {
            StudyConfig::Example1(c) => c.n,
            StudyConfig::Example2(c) => c.n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = match self {
            StudyConfig::Example1(c) => [c.b_z, c.c0, c.c1, c.c2].iter().all(|v| v.is_finite()),
            StudyConfig::Example2(c) => c
                .xi_true
                .iter()
                .chain(&[c.beta0, c.beta1, c.gamma])
                .all(|v| v.is_finite()),
        };
        if self.n() == 0 {
            return Err(Error::InvalidSpec("sample size must be at least 1".into()));
        }
        if !finite {
            return Err(Error::InvalidSpec("non-finite design parameter".into()));
        }
        Ok(())
    }

    pub fn generate(&self, stream: RngStream) -> Result<Dataset<f64>> {
        match self {
            StudyConfig::Example1(c) => generate_example1(c, stream),
            StudyConfig::Example2(c) => generate_example2(c, stream),
        }
    }

    /// Null models fitted in each replication.
    ///
    /// Design 1 models the outcome on `(1, U, Z)`, with unit variance for
    /// S1, and the propensity on `(1, U)`: `Z` is the design's instrument and
    /// does not enter the missingness. With `Z` in the propensity as well, a
    /// linear outcome mean lies in the propensity span and both statistics
    /// degenerate. Design 2 uses the mean `ξ₁x + ξ₂x²` for both tests and
    /// the log-variance `ξ₃ + ξ₄x` for S1.
    pub fn analysis_spec(&self) -> AnalysisSpec {
        match self {
            StudyConfig::Example1(_) => {
                let basis = Basis::linear(3);
                AnalysisSpec {
                    propensity_columns: Some(vec![0, 1]),
                    family: GaussianOutcomeFamily::unit_variance(basis.clone()),
                    location_basis: basis,
                }
            }
            StudyConfig::Example2(c) => {
                let mean = Basis::new(vec![Term::Raw(1), Term::Square(1)]);
                let family = if c.homoskedastic_fit {
                    GaussianOutcomeFamily::homoskedastic(mean.clone())
                } else {
                    GaussianOutcomeFamily::new(mean.clone(), Basis::linear(2))
                };
                AnalysisSpec {
                    propensity_columns: None,
                    family,
                    location_basis: mean,
                }
            }
        }
    }
}

impl From<Example1Config> for StudyConfig {
    fn from(c: Example1Config) -> Self {
        StudyConfig::Example1(c)
    }
}

impl From<Example2Config> for StudyConfig {
    fn from(c: Example2Config) -> Self {
        StudyConfig::Example2(c)
    }
}

/// A generated row before the outcome is erased.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct FullRow {
    pub y: f64,
    pub observed: bool,
    pub x: Vec<f64>,
}

fn into_dataset(rows: Vec<FullRow>) -> Result<Dataset<f64>> {
    let samples = rows
        .into_iter()
        .map(|r| ObservedSample::new(r.observed.then_some(r.y), r.x))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(samples)
}

pub(crate) fn draw_example1(cfg: &Example1Config, stream: RngStream) -> Vec<FullRow> {
    let mut rng = stream.rng();
    (0..cfg.n)
        .map(|_| {
            let z = rng.standard_normal();
            let u = 1.0 - z + rng.standard_normal();
            let y = 1.0 + u + cfg.b_z * z + rng.standard_normal();
            let p = normal_cdf(cfg.c0 + cfg.c1 * cfg.w.eval(y) + cfg.c2 * u);
            FullRow {
                y,
                observed: rng.bernoulli(p),
                x: vec![1.0, u, z],
            }
        })
        .collect()
}

pub(crate) fn draw_example2(cfg: &Example2Config, stream: RngStream) -> Vec<FullRow> {
    let [xi1, xi2, xi3, xi4] = cfg.xi_true;
    let mut rng = stream.rng();
    (0..cfg.n)
        .map(|_| {
            let x = rng.standard_normal();
            let sd = (0.5 * (xi3 + xi4 * x)).exp();
            let y = xi1 * x + xi2 * x * x + sd * rng.standard_normal();
            let p = logistic(cfg.beta0 + cfg.beta1 * x + cfg.gamma * y);
            FullRow {
                y,
                observed: rng.bernoulli(p),
                x: vec![1.0, x],
            }
        })
        .collect()
}

/// Draws one dataset from design 1; covariates are stored as `(1, U, Z)`.
pub fn generate_example1(cfg: &Example1Config, stream: RngStream) -> Result<Dataset<f64>> {
    StudyConfig::Example1(cfg.clone()).validate()?;
    into_dataset(draw_example1(cfg, stream))
}

/// Draws one dataset from design 2; covariates are stored as `(1, X)`.
pub fn generate_example2(cfg: &Example2Config, stream: RngStream) -> Result<Dataset<f64>> {
    StudyConfig::Example2(cfg.clone()).validate()?;
    into_dataset(draw_example2(cfg, stream))
}
