//! Partially observed samples and the null-hypothesis fits: the logistic
//! propensity model, the parametric Gaussian outcome model and the
//! least-squares location model.

mod basis;
mod location;
mod outcome;
mod propensity;

pub use basis::{Basis, Term};
pub use location::{fit_location, LocationFit};
pub use outcome::{
    fit_outcome_parametric, outcome_moment_gradients, outcome_moments, quadrature_expectation,
    quadrature_moments, ConditionalDensity, GaussianOutcomeFamily, MomentGradients,
    ParametricOutcomeFit,
};
pub use propensity::{fit_propensity_null, fit_propensity_null_on, logistic, PropensityFit};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Cholesky, Mat, Scalar};

/// One row: covariates `x` (with `x[0] = 1`) and the outcome when observed.
///
/// The missingness indicator is `d = 1` exactly when `y` is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservedSample<T> {
    y: Option<T>,
    x: Vec<T>,
}

impl<T: Scalar> ObservedSample<T> {
    pub fn new(y: Option<T>, x: Vec<T>) -> Result<Self> {
        if x.first() != Some(&T::one()) {
            return Err(Error::InvalidData(
                "covariate vector must start with the constant 1".into(),
            ));
        }
        if x.iter().any(|v| !v.is_finite()) || y.is_some_and(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite value in sample".into()));
        }
        Ok(Self { y, x })
    }

    pub fn observed(y: T, x: Vec<T>) -> Result<Self> {
        Self::new(Some(y), x)
    }

    pub fn missing(x: Vec<T>) -> Result<Self> {
        Self::new(None, x)
    }

    pub fn y(&self) -> Option<T> {
        self.y
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn is_observed(&self) -> bool {
        self.y.is_some()
    }

    /// Missingness indicator as a scalar, 1 when observed.
    pub fn d(&self) -> T {
        if self.y.is_some() {
            T::one()
        } else {
            T::zero()
        }
    }
}

/// A collection of samples sharing covariate dimension `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T> {
    samples: Vec<ObservedSample<T>>,
    p: usize,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(samples: Vec<ObservedSample<T>>) -> Result<Self> {
        let p = samples.first().ok_or(Error::EmptyDataset)?.x.len();
        if let Some(i) = samples.iter().position(|s| s.x.len() != p) {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} covariates, expected {p}",
                samples[i].x.len()
            )));
        }
        Ok(Self { samples, p })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn samples(&self) -> &[ObservedSample<T>] {
        &self.samples
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ObservedSample<T>> {
        self.samples.iter()
    }

    pub fn n_observed(&self) -> usize {
        self.samples.iter().filter(|s| s.is_observed()).count()
    }

    pub fn missing_fraction(&self) -> f64 {
        (self.n() - self.n_observed()) as f64 / self.n() as f64
    }

    /// Complete cases as `(row index, outcome, covariates)`.
    pub fn complete_cases(&self) -> impl Iterator<Item = (usize, T, &[T])> + '_ {
        self.samples
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.y.map(|y| (i, y, s.x.as_slice())))
    }

    /// Same rows with every observed outcome passed through `f`.
    pub fn map_outcomes(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| ObservedSample::new(s.y.map(&f), s.x.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples)
    }

    /// Same rows with covariate column `j` multiplied by `c`.
    pub fn scale_covariate(&self, j: usize, c: T) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let mut x = s.x.clone();
                x[j] = x[j] * c;
                ObservedSample::new(s.y, x)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples)
    }

    /// Rows selected by index, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Result<Self> {
        Self::new(rows.iter().map(|&i| self.samples[i].clone()).collect())
    }
}

/// Solves `G u = r` for a Gram matrix after scaling it to unit diagonal, so
/// that badly scaled but linearly independent columns are not mistaken for
/// collinear ones.
pub(crate) fn solve_gram<T: Scalar>(
    gram: &Mat<T>,
    rhs: &[T],
    what: &'static str,
) -> Result<Vec<T>> {
    let k = gram.rows();
    let mut scale = Vec::with_capacity(k);
    for j in 0..k {
        let d = gram[(j, j)];
        if !(d > T::zero()) {
            return Err(Error::RankDeficientDesign(what));
        }
        scale.push(d.sqrt().recip());
    }
    let mut scaled = gram.clone();
    for i in 0..k {
        for j in 0..k {
            scaled[(i, j)] = gram[(i, j)] * scale[i] * scale[j];
        }
    }
    scaled.symmetrize_from_lower();
    let chol = Cholesky::factor(&scaled).map_err(|_| Error::RankDeficientDesign(what))?;
    let b: Vec<T> = rhs.iter().zip(&scale).map(|(&r, &s)| r * s).collect();
    Ok(chol
        .solve(&b)
        .into_iter()
        .zip(&scale)
        .map(|(u, &s)| u * s)
        .collect())
}

/// Rounding noise in an `n`-term log-likelihood sum. Line searches accept
/// any trial within this of the current value, so that Newton steps near
/// the optimum are not halved into no-ops.
pub(crate) fn rounding_slack<T: Scalar>(loglik: T, n: usize) -> T {
    T::epsilon() * T::lit(64.0) * (loglik.abs() + T::from_usize_lossy(n))
}

pub(crate) fn inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}
