use serde::{Deserialize, Serialize};

use super::{check_positive, factor_component};
use crate::error::Result;
use crate::model::{
    outcome_moment_gradients, outcome_moments, Dataset, ParametricOutcomeFit, PropensityFit,
};
use crate::numerics::{Mat, Scalar};

/// `S₁ = Σ [dᵢ(1 − π̂ᵢ)yᵢ − (1 − dᵢ) π̂ᵢ m₁(xᵢ)]` with `m₁(x) = ∫ y f(y|x, ξ̂) dy`.
pub fn score_statistic_s1<T: Scalar>(
    data: &Dataset<T>,
    pf: &PropensityFit<T>,
    of: &ParametricOutcomeFit<T>,
) -> Result<T> {
    pf.check_against(data)?;
    of.check_against(data)?;
    Ok(data.iter().fold(T::zero(), |acc, s| {
        let pi = pf.probability(s.x());
        match s.y() {
            Some(y) => acc + (T::one() - pi) * y,
            None => acc - pi * outcome_moments(of, s.x()).0,
        }
    }))
}

/// Plug-in estimates behind the variance of `n^{-1/2} S₁`.
///
/// All entries are averages over the `n` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceComponentsS1<T> {
    /// `Σ π(1−π) x xᵀ`
    pub a_hat: Mat<T>,
    /// `Σ π ∫ −∇ξξ log f · f dy`
    pub b_hat: Mat<T>,
    /// `Σ π(1−π) x m₁`
    pub a1_hat: Vec<T>,
    /// `Σ π(1−π) ∫ y ∇ξ f dy`
    pub b1_hat: Vec<T>,
    /// `Σ π(1−π)² m₂`
    pub a2_hat: T,
    /// `Σ π²(1−π) m₁²`
    pub b2_hat: T,
    pub sigma1_sq_hat: T,
}

impl<T: Scalar> VarianceComponentsS1<T> {
    /// Accumulates the components and assembles `σ̂₁²` without checking its
    /// sign. Fails only when `Â` or `B̂` cannot be factored.
    pub fn from_fits(
        data: &Dataset<T>,
        pf: &PropensityFit<T>,
        of: &ParametricOutcomeFit<T>,
    ) -> Result<Self> {
        pf.check_against(data)?;
        of.check_against(data)?;
        let p = pf.columns.len();
        let q = of.family.dim_xi();
        let mut b_hat = Mat::zeros(q, q);
        let mut a1 = vec![T::zero(); p];
        let mut b1 = vec![T::zero(); q];
        let (mut a2, mut b2) = (T::zero(), T::zero());
        for s in data.iter() {
            let x = s.x();
            let pi = pf.probability(x);
            let w = pi * (T::one() - pi);
            let (m1, m2) = outcome_moments(of, x);
            let grads = outcome_moment_gradients(of, x);
            for i in 0..q {
                for j in 0..q {
                    b_hat[(i, j)] = b_hat[(i, j)] - pi * grads.integrated_hessian[(i, j)];
                }
            }
            for (acc, xj) in a1.iter_mut().zip(pf.design_row(x)) {
                *acc = *acc + w * xj * m1;
            }
            for (acc, g) in b1.iter_mut().zip(&grads.d_m1_d_xi) {
                *acc = *acc + w * *g;
            }
            a2 = a2 + w * (T::one() - pi) * m2;
            b2 = b2 + w * pi * m1 * m1;
        }
        let inv_n = T::from_usize_lossy(data.n()).recip();
        b_hat.scale(inv_n);
        b_hat.symmetrize_from_lower();
        a1.iter_mut()
            .chain(b1.iter_mut())
            .for_each(|v| *v = *v * inv_n);
        let mut out = Self {
            a_hat: pf.info_matrix.clone(),
            b_hat,
            a1_hat: a1,
            b1_hat: b1,
            a2_hat: a2 * inv_n,
            b2_hat: b2 * inv_n,
            sigma1_sq_hat: T::nan(),
        };
        out.sigma1_sq_hat = out.assemble()?;
        Ok(out)
    }

    /// `Â₂ + B̂₂ − Â₁ᵀÂ⁻¹Â₁ − B̂₁ᵀB̂⁻¹B̂₁` from the stored components.
    pub fn assemble(&self) -> Result<T> {
        let a = factor_component(&self.a_hat, "A_hat", || self.dump())?;
        let b = factor_component(&self.b_hat, "B_hat", || self.dump())?;
        Ok(self.a2_hat + self.b2_hat
            - a.inv_quad_form(&self.a1_hat)
            - b.inv_quad_form(&self.b1_hat))
    }

    /// Scale against which a vanishing `σ̂₁²` is judged.
    pub(crate) fn magnitude(&self) -> T {
        self.a2_hat.abs() + self.b2_hat.abs()
    }

    pub fn dump(&self) -> String {
        format!("{self:?}")
    }

    /// `B̂₁ᵀB̂⁻¹B̂₁` and `Â₁ᵀÂ⁻¹Â₁`, for diagnostics.
    pub fn projections(&self) -> Result<(T, T)> {
        let a = factor_component(&self.a_hat, "A_hat", || self.dump())?;
        let b = factor_component(&self.b_hat, "B_hat", || self.dump())?;
        Ok((a.inv_quad_form(&self.a1_hat), b.inv_quad_form(&self.b1_hat)))
    }
}

/// Components with a checked, strictly positive `σ̂₁²`.
pub fn variance_s1<T: Scalar>(
    data: &Dataset<T>,
    pf: &PropensityFit<T>,
    of: &ParametricOutcomeFit<T>,
) -> Result<VarianceComponentsS1<T>> {
    let comp = VarianceComponentsS1::from_fits(data, pf, of)?;
    check_positive("S1", comp.sigma1_sq_hat, comp.magnitude(), || comp.dump())?;
    Ok(comp)
}
