//! The S1 and S2 score statistics, their plug-in variances, standardized
//! two-sided p-values and the local-alternative power predictor.

mod parametric;
mod power;
mod report;
mod semiparametric;

pub use parametric::{score_statistic_s1, variance_s1, VarianceComponentsS1};
pub use power::analytic_local_power;
pub use report::{test_report, Components, ScoreTestResult, Variant};
pub use semiparametric::{score_statistic_s2, variance_s2, VarianceComponentsS2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    fit_location, fit_outcome_parametric, fit_propensity_null_on, Basis, Dataset,
    GaussianOutcomeFamily, LocationFit, ParametricOutcomeFit, PropensityFit,
};
use crate::numerics::{Cholesky, Mat, Scalar};

/// Factors a component matrix, attaching its name and a dump of every
/// component on failure.
fn factor_component<T: Scalar>(
    m: &Mat<T>,
    context: &'static str,
    dump: impl FnOnce() -> String,
) -> Result<Cholesky<T>> {
    Cholesky::factor(m).map_err(|e| match e {
        Error::SingularMatrix { pivot, .. } => Error::SingularMatrix {
            context,
            pivot,
            detail: dump(),
        },
        other => other,
    })
}

/// Rejects a variance that is not positive beyond rounding of its
/// largest terms.
fn check_positive<T: Scalar>(
    variant: &'static str,
    sigma_sq: T,
    magnitude: T,
    dump: impl FnOnce() -> String,
) -> Result<()> {
    let floor = T::epsilon() * T::lit(1e3) * magnitude;
    if sigma_sq > floor && sigma_sq.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeVariance {
            variant,
            sigma_sq: sigma_sq.as_f64(),
            components: dump(),
        })
    }
}

/// S1 test from already fitted null models.
pub fn score_test_s1<T: Scalar>(
    data: &Dataset<T>,
    pf: &PropensityFit<T>,
    of: &ParametricOutcomeFit<T>,
) -> Result<ScoreTestResult<T>> {
    let s = score_statistic_s1(data, pf, of)?;
    test_report(s, variance_s1(data, pf, of)?, data.n())
}

/// S2 test from already fitted null models.
pub fn score_test_s2<T: Scalar>(
    data: &Dataset<T>,
    pf: &PropensityFit<T>,
    lf: &LocationFit<T>,
) -> Result<ScoreTestResult<T>> {
    let s = score_statistic_s2(data, pf, lf)?;
    test_report(s, variance_s2(data, pf, lf)?, data.n())
}

/// What to fit before testing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSpec {
    /// Covariate columns of the logistic propensity, including the
    /// intercept column 0. `None` uses every column.
    pub propensity_columns: Option<Vec<usize>>,
    /// Outcome density for S1.
    pub family: GaussianOutcomeFamily,
    /// Mean model for S2.
    pub location_basis: Basis,
}

/// Null fits and test results for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis<T> {
    pub propensity: PropensityFit<T>,
    pub outcome: Option<ParametricOutcomeFit<T>>,
    pub location: Option<LocationFit<T>>,
    /// One entry per requested variant, in request order.
    pub results: Vec<ScoreTestResult<T>>,
}

/// Fits the null models the requested variants need and runs the tests.
pub fn analyze<T: Scalar>(
    data: &Dataset<T>,
    spec: &AnalysisSpec,
    variants: &[Variant],
) -> Result<Analysis<T>> {
    if variants.is_empty() {
        return Err(Error::InvalidSpec("no test variant requested".into()));
    }
    let columns = spec
        .propensity_columns
        .clone()
        .unwrap_or_else(|| (0..data.p()).collect());
    let propensity = fit_propensity_null_on(data, &columns)?;
    let mut outcome = None;
    let mut location = None;
    let mut results = Vec::with_capacity(variants.len());
    for &v in variants {
        let result = match v {
            Variant::S1 => {
                if outcome.is_none() {
                    outcome = Some(fit_outcome_parametric(data, &spec.family)?);
                }
                score_test_s1(data, &propensity, outcome.as_ref().expect("fitted above"))?
            }
            Variant::S2 => {
                if location.is_none() {
                    location = Some(fit_location(data, &spec.location_basis)?);
                }
                score_test_s2(data, &propensity, location.as_ref().expect("fitted above"))?
            }
        };
        results.push(result);
    }
    Ok(Analysis {
        propensity,
        outcome,
        location,
        results,
    })
}
