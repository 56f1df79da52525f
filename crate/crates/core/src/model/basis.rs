use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Scalar;

/// A basis function over a covariate vector `x` (where `x[0] = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Intercept,
    Raw(usize),
    Square(usize),
    Product(usize, usize),
}

impl Term {
    pub fn eval<T: Scalar>(&self, x: &[T]) -> T {
        match *self {
            Term::Intercept => T::one(),
            Term::Raw(j) => x[j],
            Term::Square(j) => x[j] * x[j],
            Term::Product(i, j) => x[i] * x[j],
        }
    }

    fn max_index(&self) -> usize {
        match *self {
            Term::Intercept => 0,
            Term::Raw(j) | Term::Square(j) => j,
            Term::Product(i, j) => i.max(j),
        }
    }
}

/// Ordered list of terms; a model is linear in the coefficients over it.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Basis(pub Vec<Term>);

impl Basis {
    pub fn new(terms: Vec<Term>) -> Self {
        Self(terms)
    }

    /// Intercept plus every raw covariate of a `p`-vector.
    pub fn linear(p: usize) -> Self {
        Self(
            std::iter::once(Term::Intercept)
                .chain((1..p).map(Term::Raw))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.0
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        self.0.iter().map(|t| t.eval(x)).collect()
    }

    /// `Σ coef_j · term_j(x)`
    pub fn combine<T: Scalar>(&self, coef: &[T], x: &[T]) -> T {
        self.0
            .iter()
            .zip(coef)
            .fold(T::zero(), |acc, (t, &c)| acc + c * t.eval(x))
    }

    /// Checks every term addresses a column of a `p`-vector.
    pub fn validate(&self, p: usize) -> Result<()> {
        match self.0.iter().find(|t| t.max_index() >= p) {
            Some(t) => Err(Error::DimensionMismatch(format!(
                "basis term {t:?} out of range for {p} covariates"
            ))),
            None => Ok(()),
        }
    }
}

impl From<Vec<Term>> for Basis {
    fn from(terms: Vec<Term>) -> Self {
        Self(terms)
    }
}
