use super::Variant;
use crate::error::{Error, Result};
use crate::numerics::{normal_cdf, normal_quantile, Scalar};

/// Large-sample rejection probability under `γ = n^{-1/2} γ₀`.
///
/// `sigma` is `σ₁` or `σ₂` (not squared). For `S1` the non-centrality is
/// `γ₀ σ₁`. For `S2` it is `γ₀ δ̃ / σ₂`, where `s2_drift = δ̃` is the mean
/// shift of `n^{-1/2} S₂` per unit `γ₀`, e.g. from
/// [`VarianceComponentsS2::drift_per_unit_gamma`](super::VarianceComponentsS2::drift_per_unit_gamma).
pub fn analytic_local_power<T: Scalar>(
    gamma0: T,
    sigma: T,
    alpha: T,
    variant: Variant,
    s2_drift: Option<T>,
) -> Result<T> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(Error::InvalidAlpha(alpha.as_f64()));
    }
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    let lambda = match (variant, s2_drift) {
        (Variant::S1, _) => gamma0 * sigma,
        (Variant::S2, Some(drift)) => gamma0 * drift / sigma,
        (Variant::S2, None) => {
            return Err(Error::InvalidSpec(
                "S2 local power needs the drift per unit gamma".into(),
            ))
        }
    };
    let crit = normal_quantile(T::one() - alpha * T::lit(0.5));
    Ok(normal_cdf(-crit + lambda) + normal_cdf(-crit - lambda))
}
