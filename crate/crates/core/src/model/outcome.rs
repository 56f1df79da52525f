use serde::{Deserialize, Serialize};

use super::{inf_norm, solve_gram, Basis, Dataset};
use crate::error::{Error, Result};
use crate::numerics::{gauss_hermite_nodes, Mat, Scalar, DEFAULT_GH_ORDER};

const MAX_CYCLES: usize = 200;
const MAX_HALVINGS: usize = 40;
/// Smallest admissible fitted conditional variance.
const VARIANCE_FLOOR: f64 = 1e-12;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// A conditional density `f(y | x, ξ)` that can be integrated numerically.
///
/// Families without closed-form moments get them from Gauss–Hermite
/// quadrature centred at `location_scale`.
pub trait ConditionalDensity<T: Scalar> {
    fn dim_xi(&self) -> usize;

    fn log_density(&self, y: T, x: &[T], xi: &[T]) -> T;

    /// Centre and spread used to place the quadrature nodes.
    fn location_scale(&self, x: &[T], xi: &[T]) -> (T, T);

    /// `(∫ y f dy, ∫ y² f dy)`
    fn moments(&self, x: &[T], xi: &[T]) -> (T, T) {
        quadrature_moments(self, x, xi, DEFAULT_GH_ORDER)
    }
}

/// `∫ g(y) f(y | x, ξ) dy` by Gauss–Hermite quadrature.
///
/// With `y = μ + √2 s t` the integrand becomes
/// `√2 s · g(y) f(y) e^{t²} · e^{−t²}`; the bracketed factor is a
/// polynomial times a constant whenever `f` is the normal density with the
/// same `(μ, s)`, so such integrals are exact up to the rule's degree.
pub fn quadrature_expectation<T, D>(
    density: &D,
    x: &[T],
    xi: &[T],
    order: usize,
    g: impl Fn(T) -> T,
) -> Result<T>
where
    T: Scalar,
    D: ConditionalDensity<T> + ?Sized,
{
    let (nodes, weights) = gauss_hermite_nodes::<T>(order)?;
    let (mu, s) = density.location_scale(x, xi);
    let root2_s = T::lit(std::f64::consts::SQRT_2) * s;
    Ok(nodes.iter().zip(&weights).fold(T::zero(), |acc, (&t, &w)| {
        let y = mu + root2_s * t;
        let log_f = density.log_density(y, x, xi) + t * t;
        acc + w * root2_s * g(y) * log_f.exp()
    }))
}

/// First two moments by quadrature.
pub fn quadrature_moments<T, D>(density: &D, x: &[T], xi: &[T], order: usize) -> (T, T)
where
    T: Scalar,
    D: ConditionalDensity<T> + ?Sized,
{
    let m1 = quadrature_expectation(density, x, xi, order, |y| y).expect("valid order");
    let m2 = quadrature_expectation(density, x, xi, order, |y| y * y).expect("valid order");
    (m1, m2)
}

/// `N(mean(x), exp(logvar(x)))` with both functions linear in their own
/// coefficient block of `ξ = (ξ_mean, ξ_logvar)`.
///
/// An empty log-variance basis fixes the variance at 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaussianOutcomeFamily {
    pub mean_basis: Basis,
    pub logvar_basis: Basis,
}

impl GaussianOutcomeFamily {
    pub fn new(mean_basis: Basis, logvar_basis: Basis) -> Self {
        Self {
            mean_basis,
            logvar_basis,
        }
    }

    /// Constant unknown variance.
    pub fn homoskedastic(mean_basis: Basis) -> Self {
        Self::new(mean_basis, Basis::new(vec![super::Term::Intercept]))
    }

    /// Variance fixed at 1.
    pub fn unit_variance(mean_basis: Basis) -> Self {
        Self::new(mean_basis, Basis::default())
    }

    pub fn dim_xi(&self) -> usize {
        self.mean_basis.len() + self.logvar_basis.len()
    }

    pub fn split<'a, T>(&self, xi: &'a [T]) -> (&'a [T], &'a [T]) {
        xi.split_at(self.mean_basis.len())
    }

    pub fn mean<T: Scalar>(&self, x: &[T], xi: &[T]) -> T {
        self.mean_basis.combine(self.split(xi).0, x)
    }

    pub fn logvar<T: Scalar>(&self, x: &[T], xi: &[T]) -> T {
        self.logvar_basis.combine(self.split(xi).1, x)
    }

    pub fn variance<T: Scalar>(&self, x: &[T], xi: &[T]) -> T {
        self.logvar(x, xi).exp()
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.mean_basis.is_empty() {
            return Err(Error::InvalidSpec("mean basis is empty".into()));
        }
        self.mean_basis.validate(p)?;
        self.logvar_basis.validate(p)
    }

    /// Fisher information of `ξ` at covariates `x`:
    /// `a aᵀ / σ²` on the mean block, `b bᵀ / 2` on the log-variance block.
    pub fn fisher_information<T: Scalar>(&self, x: &[T], xi: &[T]) -> Mat<T> {
        let q = self.dim_xi();
        let r = self.mean_basis.len();
        let a = self.mean_basis.eval(x);
        let b = self.logvar_basis.eval(x);
        let prec = self.variance(x, xi).recip();
        let mut info = Mat::zeros(q, q);
        for i in 0..r {
            for j in 0..r {
                info[(i, j)] = prec * a[i] * a[j];
            }
        }
        let half = T::lit(0.5);
        for i in 0..b.len() {
            for j in 0..b.len() {
                info[(r + i, r + j)] = half * b[i] * b[j];
            }
        }
        info
    }
}

impl<T: Scalar> ConditionalDensity<T> for GaussianOutcomeFamily {
    fn dim_xi(&self) -> usize {
        GaussianOutcomeFamily::dim_xi(self)
    }

    fn log_density(&self, y: T, x: &[T], xi: &[T]) -> T {
        let eta = self.logvar(x, xi);
        let r = y - self.mean(x, xi);
        -T::lit(0.5) * (T::lit(LN_2PI) + eta + r * r * (-eta).exp())
    }

    fn location_scale(&self, x: &[T], xi: &[T]) -> (T, T) {
        (self.mean(x, xi), self.variance(x, xi).sqrt())
    }

    fn moments(&self, x: &[T], xi: &[T]) -> (T, T) {
        let m = self.mean(x, xi);
        (m, m * m + self.variance(x, xi))
    }
}

/// Complete-case maximum-likelihood fit of a [`GaussianOutcomeFamily`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricOutcomeFit<T> {
    pub family: GaussianOutcomeFamily,
    /// Mean coefficients followed by log-variance coefficients.
    pub xi_hat: Vec<T>,
    pub loglik: T,
    pub iterations: usize,
    pub converged: bool,
    pub n: usize,
    pub n_observed: usize,
}

impl<T: Scalar> ParametricOutcomeFit<T> {
    pub fn mean_coefficients(&self) -> &[T] {
        self.family.split(&self.xi_hat).0
    }

    pub fn logvar_coefficients(&self) -> &[T] {
        self.family.split(&self.xi_hat).1
    }

    /// `∇ξ ℓ₂` at `xi_hat`.
    pub fn gradient(&self, data: &Dataset<T>) -> Vec<T> {
        let cc = CompleteCases::collect(data, &self.family);
        let (gm, gv) = cc.gradient(self.mean_coefficients(), self.logvar_coefficients());
        gm.into_iter().chain(gv).collect()
    }

    pub(crate) fn check_against(&self, data: &Dataset<T>) -> Result<()> {
        if self.n != data.n() || self.n_observed != data.n_observed() {
            return Err(Error::FitMismatch(format!(
                "outcome fit on n = {} ({} observed), dataset n = {} ({} observed)",
                self.n,
                self.n_observed,
                data.n(),
                data.n_observed()
            )));
        }
        if self.xi_hat.len() != self.family.dim_xi() || self.family.validate(data.p()).is_err() {
            return Err(Error::FitMismatch(
                "outcome family does not fit the covariate dimension".into(),
            ));
        }
        Ok(())
    }
}

/// Basis evaluations over the complete cases, computed once per fit.
struct CompleteCases<T> {
    y: Vec<T>,
    a: Vec<Vec<T>>,
    b: Vec<Vec<T>>,
}

impl<T: Scalar> CompleteCases<T> {
    fn collect(data: &Dataset<T>, family: &GaussianOutcomeFamily) -> Self {
        let mut cc = Self {
            y: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
        };
        for (_, y, x) in data.complete_cases() {
            cc.y.push(y);
            cc.a.push(family.mean_basis.eval(x));
            cc.b.push(family.logvar_basis.eval(x));
        }
        cc
    }

    fn len(&self) -> usize {
        self.y.len()
    }

    fn eta(&self, i: usize, xi_v: &[T]) -> T {
        crate::numerics::dot(&self.b[i], xi_v)
    }

    fn resid(&self, i: usize, xi_m: &[T]) -> T {
        self.y[i] - crate::numerics::dot(&self.a[i], xi_m)
    }

    fn loglik(&self, xi_m: &[T], xi_v: &[T]) -> T {
        (0..self.len()).fold(T::zero(), |acc, i| {
            let eta = self.eta(i, xi_v);
            let r = self.resid(i, xi_m);
            acc - T::lit(0.5) * (T::lit(LN_2PI) + eta + r * r * (-eta).exp())
        })
    }

    fn gradient(&self, xi_m: &[T], xi_v: &[T]) -> (Vec<T>, Vec<T>) {
        let mut gm = vec![T::zero(); xi_m.len()];
        let mut gv = vec![T::zero(); xi_v.len()];
        for i in 0..self.len() {
            let prec = (-self.eta(i, xi_v)).exp();
            let r = self.resid(i, xi_m);
            for (g, &a) in gm.iter_mut().zip(&self.a[i]) {
                *g = *g + a * r * prec;
            }
            let h = T::lit(0.5) * (r * r * prec - T::one());
            for (g, &b) in gv.iter_mut().zip(&self.b[i]) {
                *g = *g + b * h;
            }
        }
        (gm, gv)
    }

    /// Weighted least squares for the mean given the log-variance.
    fn mean_step(&self, xi_v: &[T]) -> Result<Vec<T>> {
        let r = self.a.first().map_or(0, Vec::len);
        let mut gram = Mat::zeros(r, r);
        let mut rhs = vec![T::zero(); r];
        for i in 0..self.len() {
            let w = (-self.eta(i, xi_v)).exp();
            gram.add_outer(w, &self.a[i], &self.a[i]);
            for (v, &a) in rhs.iter_mut().zip(&self.a[i]) {
                *v = *v + w * a * self.y[i];
            }
        }
        solve_gram(&gram, &rhs, "outcome mean basis")
    }

    /// Damped Newton step for the log-variance given the mean.
    fn logvar_step(&self, xi_m: &[T], xi_v: &[T]) -> Result<Vec<T>> {
        let k = xi_v.len();
        let mut grad = vec![T::zero(); k];
        let mut neg_hess = Mat::zeros(k, k);
        let half = T::lit(0.5);
        for i in 0..self.len() {
            let r = self.resid(i, xi_m);
            let scaled = r * r * (-self.eta(i, xi_v)).exp();
            for (g, &b) in grad.iter_mut().zip(&self.b[i]) {
                *g = *g + half * b * (scaled - T::one());
            }
            neg_hess.add_outer(half * scaled, &self.b[i], &self.b[i]);
        }
        let step = solve_gram(&neg_hess, &grad, "outcome log-variance basis")?;
        let base = self.loglik(xi_m, xi_v);
        let slack = super::rounding_slack(base, self.len());
        let mut scale = T::one();
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<T> = xi_v
                .iter()
                .zip(&step)
                .map(|(&v, &s)| v + scale * s)
                .collect();
            if self.loglik(xi_m, &trial) >= base - slack {
                return Ok(trial);
            }
            scale = scale * half;
        }
        Ok(xi_v.to_vec())
    }
}

/// Maximizes the complete-case Gaussian log-likelihood `ℓ₂(ξ)`.
///
/// Alternates an exact weighted-least-squares update of the mean
/// coefficients with a damped Newton update of the log-variance
/// coefficients until `‖∇ℓ₂‖∞ ≤ 1e-8 · n`.
pub fn fit_outcome_parametric<T: Scalar>(
    data: &Dataset<T>,
    family: &GaussianOutcomeFamily,
) -> Result<ParametricOutcomeFit<T>> {
    family.validate(data.p())?;
    let cc = CompleteCases::collect(data, family);
    if cc.len() < family.dim_xi() + 1 {
        return Err(Error::InvalidData(format!(
            "{} complete cases for {} outcome parameters",
            cc.len(),
            family.dim_xi()
        )));
    }
    let q_v = family.logvar_basis.len();

    let mut xi_m = cc.mean_step(&vec![T::zero(); q_v])?;
    let mean_sq = (0..cc.len()).fold(T::zero(), |acc, i| acc + cc.resid(i, &xi_m).powi(2))
        / T::from_usize_lossy(cc.len());
    let floor = T::lit(VARIANCE_FLOOR);
    let degenerate = |row: usize, xi_m: &[T]| Error::DegenerateVariance {
        row,
        mean_coefficients: xi_m.iter().map(|v| v.as_f64()).collect(),
    };
    let mut xi_v = vec![T::zero(); q_v];
    if q_v > 0 {
        if mean_sq < floor {
            let first = data.complete_cases().next().map_or(0, |(i, _, _)| i);
            return Err(degenerate(first, &xi_m));
        }
        // Least-squares projection of the constant log(mean r²) onto the
        // log-variance basis.
        let mut gram = Mat::zeros(q_v, q_v);
        let mut rhs = vec![T::zero(); q_v];
        let target = mean_sq.ln();
        for b in &cc.b {
            gram.add_outer(T::one(), b, b);
            for (v, &bj) in rhs.iter_mut().zip(b) {
                *v = *v + bj * target;
            }
        }
        xi_v = solve_gram(&gram, &rhs, "outcome log-variance basis")?;
    }

    let tol = T::fit_tolerance() * T::from_usize_lossy(data.n());
    // The mean-block gradient carries units of 1/y; measured in outcome
    // standard deviations the stopping rule does not depend on the scale
    // of y. It is never looser than the raw rule.
    let spread = mean_sq.sqrt().max(T::one());
    let mut iterations = 0;
    let mut converged = false;
    for cycle in 0..=MAX_CYCLES {
        let (gm, gv) = cc.gradient(&xi_m, &xi_v);
        if (inf_norm(&gm) * spread).max(inf_norm(&gv)) <= tol {
            converged = true;
            iterations = cycle;
            break;
        }
        if cycle == MAX_CYCLES {
            return Err(Error::NoConvergence {
                what: "outcome likelihood alternation",
                iterations: cycle,
                gradient_norm: inf_norm(&gm).max(inf_norm(&gv)).as_f64(),
            });
        }
        xi_m = cc.mean_step(&xi_v)?;
        if q_v > 0 {
            xi_v = cc.logvar_step(&xi_m, &xi_v)?;
            if let Some(i) = (0..cc.len()).find(|&i| cc.eta(i, &xi_v).exp() < floor) {
                return Err(degenerate(i, &xi_m));
            }
        }
    }

    let xi_hat: Vec<T> = xi_m.iter().chain(&xi_v).copied().collect();
    if let Some(row) = data
        .iter()
        .position(|s| !(family.variance(s.x(), &xi_hat) >= floor))
    {
        return Err(degenerate(row, &xi_m));
    }
    Ok(ParametricOutcomeFit {
        family: family.clone(),
        loglik: cc.loglik(&xi_m, &xi_v),
        xi_hat,
        iterations,
        converged,
        n: data.n(),
        n_observed: data.n_observed(),
    })
}

/// `(∫ y f(y|x, ξ̂) dy, ∫ y² f(y|x, ξ̂) dy)`
pub fn outcome_moments<T: Scalar>(fit: &ParametricOutcomeFit<T>, x: &[T]) -> (T, T) {
    ConditionalDensity::<T>::moments(&fit.family, x, &fit.xi_hat)
}

/// Derivative integrals at one covariate vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentGradients<T> {
    /// `∫ y ∇ξ f(y|x, ξ̂) dy`
    pub d_m1_d_xi: Vec<T>,
    /// `∫ {∇ξξᵀ log f(y|x, ξ̂)} f(y|x, ξ̂) dy`
    pub integrated_hessian: Mat<T>,
}

/// Closed forms for the Gaussian family: the first is the gradient of the
/// mean (zero on the log-variance block), the second the negative Fisher
/// information.
pub fn outcome_moment_gradients<T: Scalar>(
    fit: &ParametricOutcomeFit<T>,
    x: &[T],
) -> MomentGradients<T> {
    let fam = &fit.family;
    let mut d_m1 = fam.mean_basis.eval(x);
    d_m1.resize(fam.dim_xi(), T::zero());
    let mut h = fam.fisher_information(x, &fit.xi_hat);
    h.scale(-T::one());
    MomentGradients {
        d_m1_d_xi: d_m1,
        integrated_hessian: h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{location::fit_location, ObservedSample, Term};
    use crate::numerics::{Cholesky, RngStream};

    fn quad_basis() -> Basis {
        Basis::new(vec![Term::Intercept, Term::Raw(1), Term::Square(1)])
    }

    /// `y | x ~ N(mean_coef · (1, x, x²), exp(lv0 + lv1·x))`, all observed
    /// except every fifth row.
    fn gaussian_data(n: usize, mean: [f64; 3], lv: [f64; 2], seed: u64) -> Dataset<f64> {
        let mut rng = RngStream::new(seed, 0).rng();
        let rows = (0..n)
            .map(|i| {
                let x = rng.standard_normal();
                let m = mean[0] + mean[1] * x + mean[2] * x * x;
                let sd = (0.5 * (lv[0] + lv[1] * x)).exp();
                let y = m + sd * rng.standard_normal();
                ObservedSample::new((i % 5 != 0).then_some(y), vec![1.0, x]).unwrap()
            })
            .collect();
        Dataset::new(rows).unwrap()
    }

    fn std_errors(data: &Dataset<f64>, fit: &ParametricOutcomeFit<f64>) -> Vec<f64> {
        let q = fit.family.dim_xi();
        let mut info = Mat::<f64>::zeros(q, q);
        for (_, _, x) in data.complete_cases() {
            let fi = fit.family.fisher_information(x, &fit.xi_hat);
            for i in 0..q {
                for j in 0..q {
                    info[(i, j)] += fi[(i, j)];
                }
            }
        }
        let cov = Cholesky::factor(&info).unwrap().inverse();
        (0..q).map(|j| cov[(j, j)].sqrt()).collect()
    }

    #[test]
    fn homoskedastic_truth_recovered() {
        let data = gaussian_data(100_000, [2.0, -1.0, 1.0], [0.5, 0.0], 21);
        let fam = GaussianOutcomeFamily::homoskedastic(quad_basis());
        let fit = fit_outcome_parametric(&data, &fam).unwrap();
        assert!(fit.converged);
        let se = std_errors(&data, &fit);
        for (j, truth) in [2.0, -1.0, 1.0, 0.5].into_iter().enumerate() {
            assert!(
                (fit.xi_hat[j] - truth).abs() < 3.0 * se[j],
                "ξ[{j}] = {} ± {}",
                fit.xi_hat[j],
                se[j]
            );
        }
        assert!(inf_norm(&fit.gradient(&data)) <= 1e-8 * data.n() as f64);
    }

    #[test]
    fn heteroskedastic_truth_recovered() {
        let data = gaussian_data(100_000, [0.0, -1.0, 1.0], [0.5, 0.4], 22);
        let fam = GaussianOutcomeFamily::new(
            Basis::new(vec![Term::Raw(1), Term::Square(1)]),
            Basis::new(vec![Term::Intercept, Term::Raw(1)]),
        );
        let fit = fit_outcome_parametric(&data, &fam).unwrap();
        let se = std_errors(&data, &fit);
        for (j, truth) in [-1.0, 1.0, 0.5, 0.4].into_iter().enumerate() {
            assert!((fit.xi_hat[j] - truth).abs() < 3.0 * se[j]);
        }
        assert!(inf_norm(&fit.gradient(&data)) <= 1e-8 * data.n() as f64);
    }

    #[test]
    fn homoskedastic_mean_equals_least_squares() {
        let data = gaussian_data(3_000, [1.0, 0.5, -0.3], [0.0, 0.7], 23);
        let fam = GaussianOutcomeFamily::homoskedastic(quad_basis());
        let fit = fit_outcome_parametric(&data, &fam).unwrap();
        let ls = fit_location(&data, &quad_basis()).unwrap();
        for (a, b) in fit.mean_coefficients().iter().zip(&ls.theta_hat) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_outcome_is_degenerate() {
        let rows = (0..10)
            .map(|i| {
                ObservedSample::new((i % 3 != 0).then_some(4.25), vec![1.0, i as f64]).unwrap()
            })
            .collect();
        let data = Dataset::new(rows).unwrap();
        let fam = GaussianOutcomeFamily::homoskedastic(Basis::new(vec![Term::Intercept]));
        match fit_outcome_parametric(&data, &fam) {
            Err(Error::DegenerateVariance {
                mean_coefficients, ..
            }) => assert!((mean_coefficients[0] - 4.25).abs() < 1e-12),
            other => panic!("expected DegenerateVariance, got {other:?}"),
        }
    }

    #[test]
    fn too_few_or_collinear_complete_cases() {
        let rows = (0..4)
            .map(|i| ObservedSample::new((i < 2).then_some(i as f64), vec![1.0, i as f64]).unwrap())
            .collect();
        let data = Dataset::new(rows).unwrap();
        let fam = GaussianOutcomeFamily::homoskedastic(Basis::linear(2));
        assert!(matches!(
            fit_outcome_parametric(&data, &fam),
            Err(Error::InvalidData(_))
        ));
        let rows = (0..8)
            .map(|i| ObservedSample::observed(i as f64, vec![1.0, 2.0]).unwrap())
            .collect();
        let data = Dataset::new(rows).unwrap();
        assert!(matches!(
            fit_outcome_parametric(&data, &fam),
            Err(Error::RankDeficientDesign(_))
        ));
    }

    fn fit_with(family: GaussianOutcomeFamily, xi: Vec<f64>) -> ParametricOutcomeFit<f64> {
        ParametricOutcomeFit {
            family,
            xi_hat: xi,
            loglik: 0.0,
            iterations: 0,
            converged: true,
            n: 1,
            n_observed: 1,
        }
    }

    #[test]
    fn closed_form_moments() {
        let std = fit_with(
            GaussianOutcomeFamily::unit_variance(Basis::new(vec![Term::Intercept])),
            vec![0.0],
        );
        assert_eq!(outcome_moments(&std, &[1.0]), (0.0, 1.0));
        let fam = GaussianOutcomeFamily::homoskedastic(Basis::new(vec![Term::Intercept]));
        let f = fit_with(fam, vec![2.0, 3.0f64.ln()]);
        let (m1, m2) = outcome_moments(&f, &[1.0]);
        assert!((m1 - 2.0).abs() < 1e-15 && (m2 - 7.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let fam = GaussianOutcomeFamily::new(quad_basis(), Basis::linear(2));
        let xi = [0.3, -1.2, 0.8, 0.4, -0.7];
        for &xv in &[-2.0, -0.3, 0.0, 1.1, 2.5] {
            let x = [1.0, xv];
            let closed = ConditionalDensity::<f64>::moments(&fam, &x, &xi);
            let quad = quadrature_moments(&fam, &x, &xi, DEFAULT_GH_ORDER);
            assert!((closed.0 - quad.0).abs() < 1e-10 * (1.0 + closed.0.abs()));
            assert!((closed.1 - quad.1).abs() < 1e-10 * (1.0 + closed.1.abs()));
        }
    }

    #[test]
    fn moment_gradients_linear_mean() {
        let fam = GaussianOutcomeFamily::homoskedastic(Basis::linear(2));
        let f = fit_with(fam, vec![0.5, 1.5, 0.2]);
        let g = outcome_moment_gradients(&f, &[1.0, 2.0]);
        assert_eq!(g.d_m1_d_xi, vec![1.0, 2.0, 0.0]);
        let std = fit_with(
            GaussianOutcomeFamily::homoskedastic(Basis::new(vec![Term::Intercept])),
            vec![0.0, 0.0],
        );
        let g = outcome_moment_gradients(&std, &[1.0]);
        assert!((g.integrated_hessian[(0, 0)] + 1.0).abs() < 1e-15);
        assert!((g.integrated_hessian[(1, 1)] + 0.5).abs() < 1e-15);
        assert_eq!(g.integrated_hessian[(0, 1)], 0.0);
    }

    #[test]
    fn single_precision_fit() {
        let data = gaussian_data(2_000, [1.0, 0.5, -0.3], [0.0, 0.0], 24);
        let rows: Vec<ObservedSample<f32>> = data
            .iter()
            .map(|s| {
                ObservedSample::new(
                    s.y().map(|v| v as f32),
                    s.x().iter().map(|&v| v as f32).collect(),
                )
                .unwrap()
            })
            .collect();
        let data32 = Dataset::new(rows).unwrap();
        let fam = GaussianOutcomeFamily::homoskedastic(quad_basis());
        let a = fit_outcome_parametric(&data, &fam).unwrap();
        let b = fit_outcome_parametric(&data32, &fam).unwrap();
        for (u, v) in a.xi_hat.iter().zip(&b.xi_hat) {
            assert!((u - *v as f64).abs() < 1e-3);
        }
    }
}
