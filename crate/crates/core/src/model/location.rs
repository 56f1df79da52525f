use serde::{Deserialize, Serialize};

use super::{solve_gram, Basis, Dataset};
use crate::error::{Error, Result};
use crate::numerics::{Mat, Scalar};

/// Complete-case least-squares fit of `μ(x, θ) = Σ θ_j term_j(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationFit<T> {
    pub mean_basis: Basis,
    pub theta_hat: Vec<T>,
    /// `(row index, y − μ(x, θ̂))` over complete cases.
    pub residuals: Vec<(usize, T)>,
    pub n: usize,
    pub n_observed: usize,
}

impl<T: Scalar> LocationFit<T> {
    pub fn mean(&self, x: &[T]) -> T {
        self.mean_basis.combine(&self.theta_hat, x)
    }

    /// `∇θ μ(x, θ̂)`, the basis evaluated at `x`.
    pub fn mean_gradient(&self, x: &[T]) -> Vec<T> {
        self.mean_basis.eval(x)
    }

    /// `Σ dᵢ (yᵢ − μ(xᵢ, θ̂)) ∇θ μ(xᵢ, θ̂)`
    pub fn normal_equations(&self, data: &Dataset<T>) -> Vec<T> {
        let mut g = vec![T::zero(); self.theta_hat.len()];
        for (_, y, x) in data.complete_cases() {
            let r = y - self.mean(x);
            for (gj, a) in g.iter_mut().zip(self.mean_gradient(x)) {
                *gj = *gj + r * a;
            }
        }
        g
    }

    pub fn residual_variance(&self) -> T {
        let ss = self
            .residuals
            .iter()
            .fold(T::zero(), |acc, &(_, r)| acc + r * r);
        ss / T::from_usize_lossy(self.residuals.len())
    }

    pub(crate) fn check_against(&self, data: &Dataset<T>) -> Result<()> {
        if self.n != data.n()
            || self.n_observed != data.n_observed()
            || self.residuals.len() != data.n_observed()
        {
            return Err(Error::FitMismatch(format!(
                "location fit on n = {} ({} observed), dataset n = {} ({} observed)",
                self.n,
                self.n_observed,
                data.n(),
                data.n_observed()
            )));
        }
        if self.theta_hat.len() != self.mean_basis.len()
            || self.mean_basis.validate(data.p()).is_err()
        {
            return Err(Error::FitMismatch(
                "location basis does not fit the covariate dimension".into(),
            ));
        }
        Ok(())
    }
}

/// Least squares over the complete cases, `θ̂ = argmin Σ dᵢ {yᵢ − μ(xᵢ, θ)}²`.
pub fn fit_location<T: Scalar>(data: &Dataset<T>, mean_basis: &Basis) -> Result<LocationFit<T>> {
    if mean_basis.is_empty() {
        return Err(Error::InvalidSpec("location basis is empty".into()));
    }
    mean_basis.validate(data.p())?;
    let r = mean_basis.len();
    let n_obs = data.n_observed();
    if n_obs < r + 1 {
        return Err(Error::InvalidData(format!(
            "{n_obs} complete cases for {r} location parameters"
        )));
    }
    let mut gram = Mat::zeros(r, r);
    let mut rhs = vec![T::zero(); r];
    for (_, y, x) in data.complete_cases() {
        let a = mean_basis.eval(x);
        gram.add_outer(T::one(), &a, &a);
        for (v, &aj) in rhs.iter_mut().zip(&a) {
            *v = *v + aj * y;
        }
    }
    let mut theta = solve_gram(&gram, &rhs, "location basis")?;
    // One round of iterative refinement on the normal equations.
    let mut fit = LocationFit {
        mean_basis: mean_basis.clone(),
        theta_hat: theta.clone(),
        residuals: Vec::new(),
        n: data.n(),
        n_observed: n_obs,
    };
    let correction = solve_gram(&gram, &fit.normal_equations(data), "location basis")?;
    theta
        .iter_mut()
        .zip(&correction)
        .for_each(|(t, c)| *t = *t + *c);
    fit.theta_hat = theta;
    fit.residuals = data
        .complete_cases()
        .map(|(i, y, x)| (i, y - fit.mean(x)))
        .collect();
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ObservedSample, Term};
    use crate::numerics::RngStream;

    #[test]
    fn exact_fit_through_origin() {
        let rows = (0..6)
            .map(|i| {
                let x = i as f64 - 2.0;
                ObservedSample::new((i != 3).then_some(3.0 * x), vec![1.0, x]).unwrap()
            })
            .collect();
        let data = Dataset::new(rows).unwrap();
        let fit = fit_location(&data, &Basis::new(vec![Term::Raw(1)])).unwrap();
        assert!((fit.theta_hat[0] - 3.0).abs() < 1e-14);
        assert!(fit.residuals.iter().all(|&(_, r)| r.abs() < 1e-13));
        assert_eq!(fit.residuals.len(), 5);
        assert!(fit.residuals.iter().all(|&(i, _)| i != 3));
    }

    #[test]
    fn normal_equations_hold() {
        let mut rng = RngStream::new(31, 0).rng();
        let rows = (0..5_000)
            .map(|_| {
                let u = 300.0 + 100.0 * rng.standard_normal();
                let z = rng.standard_normal();
                let y = 2.0 + 0.01 * u - z + rng.standard_normal();
                ObservedSample::new(rng.bernoulli(0.7).then_some(y), vec![1.0, u, z]).unwrap()
            })
            .collect();
        let data = Dataset::new(rows).unwrap();
        let basis = Basis::new(vec![
            Term::Intercept,
            Term::Raw(1),
            Term::Raw(2),
            Term::Square(1),
        ]);
        let fit = fit_location(&data, &basis).unwrap();
        let g = fit.normal_equations(&data);
        assert!(g.iter().all(|v| v.abs() <= 1e-8 * data.n() as f64), "{g:?}");
    }

    #[test]
    fn rank_deficiency() {
        let rows = (0..6)
            .map(|i| ObservedSample::observed(i as f64, vec![1.0, 1.0]).unwrap())
            .collect();
        let data = Dataset::new(rows).unwrap();
        assert!(matches!(
            fit_location(&data, &Basis::linear(2)),
            Err(Error::RankDeficientDesign(_))
        ));
    }
}
