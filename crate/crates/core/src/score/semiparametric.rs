use serde::{Deserialize, Serialize};

use super::{check_positive, factor_component};
use crate::error::Result;
use crate::model::{Dataset, LocationFit, PropensityFit};
use crate::numerics::{dot, Mat, Scalar};

/// `S₂ = Σ [dᵢ(1 − π̂ᵢ)yᵢ − (1 − dᵢ) π̂ᵢ μ(xᵢ, θ̂)]`
pub fn score_statistic_s2<T: Scalar>(
    data: &Dataset<T>,
    pf: &PropensityFit<T>,
    lf: &LocationFit<T>,
) -> Result<T> {
    pf.check_against(data)?;
    lf.check_against(data)?;
    Ok(data.iter().fold(T::zero(), |acc, s| {
        let pi = pf.probability(s.x());
        match s.y() {
            Some(y) => acc + (T::one() - pi) * y,
            None => acc - pi * lf.mean(s.x()),
        }
    }))
}

/// Plug-in estimates behind the variance of `n^{-1/2} S₂`, robust to a
/// conditional variance that depends on the covariates.
///
/// All entries are averages over the `n` rows; `r = y − μ(x, θ̂)` on
/// complete cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceComponentsS2<T> {
    /// `Σ π(1−π) x xᵀ`
    pub a_hat: Mat<T>,
    /// `Σ π(1−π) x μ`
    pub a1_hat: Vec<T>,
    /// `Σ (1−π)² (d r² + π μ²)`
    pub a2_hat: T,
    /// `Σ π(1−π) ∇θμ`
    pub b3_hat: Vec<T>,
    /// `Σ π²(1−π) μ²`
    pub b4_hat: T,
    /// `Σ π ∇θμ ∇θμᵀ`
    pub c1_hat: Mat<T>,
    /// `Σ d r² ∇θμ ∇θμᵀ`
    pub c2_hat: Mat<T>,
    /// `Σ (1−π) d r² ∇θμ`
    pub c3_hat: Vec<T>,
    /// Complete-case mean of `r²`.
    pub residual_variance: T,
    pub sigma2_sq_hat: T,
}

impl<T: Scalar> VarianceComponentsS2<T> {
    /// Accumulates the components and assembles `σ̂₂²` without checking its
    /// sign. Fails only when `Â` or `Ĉ₁` cannot be factored.
    pub fn from_fits(
        data: &Dataset<T>,
        pf: &PropensityFit<T>,
        lf: &LocationFit<T>,
    ) -> Result<Self> {
        pf.check_against(data)?;
        lf.check_against(data)?;
        let p = pf.columns.len();
        let r = lf.theta_hat.len();
        let mut a1 = vec![T::zero(); p];
        let mut b3 = vec![T::zero(); r];
        let mut c3 = vec![T::zero(); r];
        let mut c1 = Mat::zeros(r, r);
        let mut c2 = Mat::zeros(r, r);
        let (mut a2, mut b4) = (T::zero(), T::zero());
        for s in data.iter() {
            let x = s.x();
            let pi = pf.probability(x);
            let q = T::one() - pi;
            let w = pi * q;
            let mu = lf.mean(x);
            let g = lf.mean_gradient(x);
            let resid_sq = s.y().map_or(T::zero(), |y| (y - mu) * (y - mu));
            for (acc, xj) in a1.iter_mut().zip(pf.design_row(x)) {
                *acc = *acc + w * xj * mu;
            }
            a2 = a2 + q * q * (resid_sq + pi * mu * mu);
            b4 = b4 + w * pi * mu * mu;
            for (j, &gj) in g.iter().enumerate() {
                b3[j] = b3[j] + w * gj;
                c3[j] = c3[j] + q * resid_sq * gj;
            }
            c1.add_outer(pi, &g, &g);
            if s.is_observed() {
                c2.add_outer(resid_sq, &g, &g);
            }
        }
        let inv_n = T::from_usize_lossy(data.n()).recip();
        for v in a1.iter_mut().chain(b3.iter_mut()).chain(c3.iter_mut()) {
            *v = *v * inv_n;
        }
        c1.scale(inv_n);
        c2.scale(inv_n);
        let mut out = Self {
            a_hat: pf.info_matrix.clone(),
            a1_hat: a1,
            a2_hat: a2 * inv_n,
            b3_hat: b3,
            b4_hat: b4 * inv_n,
            c1_hat: c1,
            c2_hat: c2,
            c3_hat: c3,
            residual_variance: lf.residual_variance(),
            sigma2_sq_hat: T::nan(),
        };
        out.sigma2_sq_hat = out.assemble()?;
        Ok(out)
    }

    /// `Â₂ + B̂₄ − Â₁ᵀÂ⁻¹Â₁ + B̂₃ᵀĈ₁⁻¹Ĉ₂Ĉ₁⁻¹B̂₃ − 2B̂₃ᵀĈ₁⁻¹Ĉ₃`
    pub fn assemble(&self) -> Result<T> {
        let (base, h) = self.base_and_direction()?;
        Ok(base + self.c2_hat.quad_form(&h) - T::lit(2.0) * dot(&h, &self.c3_hat))
    }

    /// The constant-variance form
    /// `Â₂ + B̂₄ − Â₁ᵀÂ⁻¹Â₁ − B̂₃ᵀĈ₁⁻¹B̂₃ · v̂` with `v̂` the complete-case
    /// residual variance. Agrees with [`assemble`](Self::assemble) in large
    /// samples when the errors are homoskedastic.
    pub fn homoskedastic_reduction(&self) -> Result<T> {
        let (base, h) = self.base_and_direction()?;
        Ok(base - dot(&h, &self.b3_hat) * self.residual_variance)
    }

    /// Mean of `n^{-1/2} S₂` per unit of `γ₀` under local alternatives,
    /// `Â₂ + B̂₄ − Â₁ᵀÂ⁻¹Â₁ − B̂₃ᵀĈ₁⁻¹Ĉ₃`.
    pub fn drift_per_unit_gamma(&self) -> Result<T> {
        let (base, h) = self.base_and_direction()?;
        Ok(base - dot(&h, &self.c3_hat))
    }

    /// `B̂₃ᵀĈ₁⁻¹Ĉ₃`
    pub fn cross_term(&self) -> Result<T> {
        let (_, h) = self.base_and_direction()?;
        Ok(dot(&h, &self.c3_hat))
    }

    /// `(Â₂ + B̂₄ − Â₁ᵀÂ⁻¹Â₁, Ĉ₁⁻¹B̂₃)`
    fn base_and_direction(&self) -> Result<(T, Vec<T>)> {
        let a = factor_component(&self.a_hat, "A_hat", || self.dump())?;
        let c1 = factor_component(&self.c1_hat, "C1_hat", || self.dump())?;
        let base = self.a2_hat + self.b4_hat - a.inv_quad_form(&self.a1_hat);
        Ok((base, c1.solve(&self.b3_hat)))
    }

    pub(crate) fn magnitude(&self) -> T {
        self.a2_hat.abs() + self.b4_hat.abs()
    }

    pub fn dump(&self) -> String {
        format!("{self:?}")
    }
}

/// Components with a checked, strictly positive `σ̂₂²`.
pub fn variance_s2<T: Scalar>(
    data: &Dataset<T>,
    pf: &PropensityFit<T>,
    lf: &LocationFit<T>,
) -> Result<VarianceComponentsS2<T>> {
    let comp = VarianceComponentsS2::from_fits(data, pf, lf)?;
    check_positive("S2", comp.sigma2_sq_hat, comp.magnitude(), || comp.dump())?;
    Ok(comp)
}
