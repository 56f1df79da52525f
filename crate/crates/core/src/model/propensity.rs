use serde::{Deserialize, Serialize};

use super::{inf_norm, rounding_slack, solve_gram, Dataset};
use crate::error::{Error, Result};
use crate::numerics::{Mat, Scalar};

const MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 40;
/// Coefficient magnitude treated as evidence of separation.
const SEPARATION_BOUND: f64 = 30.0;

/// Logistic function `e^t / (1 + e^t)`.
pub fn logistic<T: Scalar>(t: T) -> T {
    if t >= T::zero() {
        (T::one() + (-t).exp()).recip()
    } else {
        let e = t.exp();
        e / (T::one() + e)
    }
}

/// `log(1 + e^t)` without overflow.
fn softplus<T: Scalar>(t: T) -> T {
    t.max(T::zero()) + (-t.abs()).exp().ln_1p()
}

/// Null-hypothesis logistic propensity fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropensityFit<T> {
    /// Covariate columns entering the linear predictor; always includes 0.
    pub columns: Vec<usize>,
    pub beta_hat: Vec<T>,
    /// `(1/n) Σ π(1−π) x xᵀ` at `beta_hat`.
    pub info_matrix: Mat<T>,
    pub loglik: T,
    pub iterations: usize,
    pub converged: bool,
    pub n: usize,
    pub n_observed: usize,
}

impl<T: Scalar> PropensityFit<T> {
    /// Evaluates the fit summaries at an arbitrary coefficient vector.
    pub fn at(data: &Dataset<T>, columns: Vec<usize>, beta: Vec<T>) -> Result<Self> {
        check_columns(data, &columns)?;
        if beta.len() != columns.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} columns",
                beta.len(),
                columns.len()
            )));
        }
        let eval = evaluate(data, &columns, &beta);
        let mut info = eval.hessian;
        info.scale(T::from_usize_lossy(data.n()).recip());
        Ok(Self {
            columns,
            beta_hat: beta,
            info_matrix: info,
            loglik: eval.loglik,
            iterations: 0,
            converged: false,
            n: data.n(),
            n_observed: data.n_observed(),
        })
    }

    /// The propensity covariates picked out of a full covariate vector.
    pub fn design_row(&self, x: &[T]) -> Vec<T> {
        self.columns.iter().map(|&j| x[j]).collect()
    }

    pub fn linear_predictor(&self, x: &[T]) -> T {
        self.columns
            .iter()
            .zip(&self.beta_hat)
            .fold(T::zero(), |acc, (&j, &b)| acc + b * x[j])
    }

    /// Fitted probability of observing the outcome.
    pub fn probability(&self, x: &[T]) -> T {
        logistic(self.linear_predictor(x))
    }

    /// `∇ℓ₁` at `beta_hat`.
    pub fn gradient(&self, data: &Dataset<T>) -> Vec<T> {
        evaluate(data, &self.columns, &self.beta_hat).gradient
    }

    pub(crate) fn check_against(&self, data: &Dataset<T>) -> Result<()> {
        if self.n != data.n() || self.n_observed != data.n_observed() {
            return Err(Error::FitMismatch(format!(
                "propensity fit on n = {} ({} observed), dataset n = {} ({} observed)",
                self.n,
                self.n_observed,
                data.n(),
                data.n_observed()
            )));
        }
        if self.columns.iter().any(|&j| j >= data.p()) || self.columns.len() != self.beta_hat.len()
        {
            return Err(Error::FitMismatch(
                "propensity columns do not fit the covariate dimension".into(),
            ));
        }
        Ok(())
    }
}

struct Evaluation<T> {
    loglik: T,
    gradient: Vec<T>,
    hessian: Mat<T>,
}

fn evaluate<T: Scalar>(data: &Dataset<T>, columns: &[usize], beta: &[T]) -> Evaluation<T> {
    let k = columns.len();
    let mut loglik = T::zero();
    let mut gradient = vec![T::zero(); k];
    let mut hessian = Mat::zeros(k, k);
    let mut row = vec![T::zero(); k];
    for s in data.iter() {
        for (r, &j) in row.iter_mut().zip(columns) {
            *r = s.x()[j];
        }
        let t = row
            .iter()
            .zip(beta)
            .fold(T::zero(), |a, (&x, &b)| a + x * b);
        let pi = logistic(t);
        let d = s.d();
        loglik = loglik + d * t - softplus(t);
        let resid = d - pi;
        for (g, &x) in gradient.iter_mut().zip(&row) {
            *g = *g + resid * x;
        }
        let w = pi * (T::one() - pi);
        for a in 0..k {
            let wa = w * row[a];
            for b in 0..=a {
                hessian[(a, b)] = hessian[(a, b)] + wa * row[b];
            }
        }
    }
    hessian.symmetrize_from_lower();
    Evaluation {
        loglik,
        gradient,
        hessian,
    }
}

fn check_columns<T: Scalar>(data: &Dataset<T>, columns: &[usize]) -> Result<()> {
    if columns.first() != Some(&0) {
        return Err(Error::InvalidData(
            "propensity columns must start with the intercept column 0".into(),
        ));
    }
    if let Some(&j) = columns.iter().find(|&&j| j >= data.p()) {
        return Err(Error::DimensionMismatch(format!(
            "propensity column {j} out of range for {} covariates",
            data.p()
        )));
    }
    Ok(())
}

/// Maximizes the null log-likelihood `ℓ₁(β)` over every covariate column.
pub fn fit_propensity_null<T: Scalar>(data: &Dataset<T>) -> Result<PropensityFit<T>> {
    fit_propensity_null_on(data, &(0..data.p()).collect::<Vec<_>>())
}

/// Maximizes `ℓ₁(β)` using only the given covariate columns.
///
/// Newton's method from β = 0 with step halving whenever the log-likelihood
/// fails to increase. Converged once `‖∇ℓ₁‖∞ ≤ 1e-8 · n`.
pub fn fit_propensity_null_on<T: Scalar>(
    data: &Dataset<T>,
    columns: &[usize],
) -> Result<PropensityFit<T>> {
    check_columns(data, columns)?;
    let n_obs = data.n_observed();
    if n_obs == 0 || n_obs == data.n() {
        return Err(Error::InvalidData(
            "propensity fit needs both observed and missing outcomes".into(),
        ));
    }
    let k = columns.len();
    let mut gram = Mat::zeros(k, k);
    for s in data.iter() {
        let row: Vec<T> = columns.iter().map(|&j| s.x()[j]).collect();
        gram.add_outer(T::one(), &row, &row);
    }
    solve_gram(&gram, &vec![T::zero(); k], "propensity covariates")?;

    let tol = T::fit_tolerance() * T::from_usize_lossy(data.n());
    let bound = T::lit(SEPARATION_BOUND);
    let mut beta = vec![T::zero(); k];
    let mut eval = evaluate(data, columns, &beta);
    let mut iterations = 0;
    loop {
        let grad_norm = inf_norm(&eval.gradient);
        if grad_norm <= tol {
            break;
        }
        if iterations == MAX_ITER {
            return Err(Error::NoConvergence {
                what: "propensity Newton iteration",
                iterations,
                gradient_norm: grad_norm.as_f64(),
            });
        }
        iterations += 1;
        let step =
            solve_gram(&eval.hessian, &eval.gradient, "propensity information").map_err(|_| {
                let (index, value) = largest(&beta);
                Error::Separation { index, value }
            })?;
        let slack = rounding_slack(eval.loglik, data.n());
        let mut scale = T::one();
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<T> = beta
                .iter()
                .zip(&step)
                .map(|(&b, &s)| b + scale * s)
                .collect();
            let trial_eval = evaluate(data, columns, &trial);
            if trial_eval.loglik >= eval.loglik - slack {
                accepted = Some((trial, trial_eval));
                break;
            }
            scale = scale * T::lit(0.5);
        }
        let Some((next, next_eval)) = accepted else {
            // No ascent along the Newton direction: at the rounding floor.
            break;
        };
        if let Some(index) = next.iter().position(|b| b.abs() > bound) {
            return Err(Error::Separation {
                index,
                value: next[index].as_f64(),
            });
        }
        beta = next;
        eval = next_eval;
    }
    let grad_norm = inf_norm(&eval.gradient);
    if grad_norm > tol {
        return Err(Error::NoConvergence {
            what: "propensity Newton iteration",
            iterations,
            gradient_norm: grad_norm.as_f64(),
        });
    }
    let mut info = eval.hessian;
    info.scale(T::from_usize_lossy(data.n()).recip());
    Ok(PropensityFit {
        columns: columns.to_vec(),
        beta_hat: beta,
        info_matrix: info,
        loglik: eval.loglik,
        iterations,
        converged: true,
        n: data.n(),
        n_observed: n_obs,
    })
}

fn largest<T: Scalar>(beta: &[T]) -> (usize, f64) {
    beta.iter().enumerate().fold((0, 0.0), |acc, (i, b)| {
        if b.abs().as_f64() > acc.1.abs() {
            (i, b.as_f64())
        } else {
            acc
        }
    })
}
