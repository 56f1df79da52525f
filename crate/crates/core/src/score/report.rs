use serde::{Deserialize, Serialize};

use super::{check_positive, VarianceComponentsS1, VarianceComponentsS2};
use crate::error::{Error, Result};
use crate::numerics::{normal_cdf, Scalar};

/// Which of the two statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    /// Parametric outcome model.
    S1,
    /// Least-squares location model.
    S2,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::S1 => "S1",
            Variant::S2 => "S2",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S1" => Ok(Variant::S1),
            "S2" => Ok(Variant::S2),
            other => Err(Error::InvalidSpec(format!("unknown variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Components<T> {
    S1(VarianceComponentsS1<T>),
    S2(VarianceComponentsS2<T>),
}

impl<T: Scalar> Components<T> {
    pub fn variant(&self) -> Variant {
        match self {
            Components::S1(_) => Variant::S1,
            Components::S2(_) => Variant::S2,
        }
    }

    pub fn sigma_sq(&self) -> T {
        match self {
            Components::S1(c) => c.sigma1_sq_hat,
            Components::S2(c) => c.sigma2_sq_hat,
        }
    }

    fn magnitude(&self) -> T {
        match self {
            Components::S1(c) => c.magnitude(),
            Components::S2(c) => c.magnitude(),
        }
    }

    fn dump(&self) -> String {
        match self {
            Components::S1(c) => c.dump(),
            Components::S2(c) => c.dump(),
        }
    }
}

impl<T> From<VarianceComponentsS1<T>> for Components<T> {
    fn from(c: VarianceComponentsS1<T>) -> Self {
        Components::S1(c)
    }
}

impl<T> From<VarianceComponentsS2<T>> for Components<T> {
    fn from(c: VarianceComponentsS2<T>) -> Self {
        Components::S2(c)
    }
}

/// Outcome of one two-sided score test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTestResult<T> {
    pub variant: Variant,
    pub statistic: T,
    pub sigma_sq_hat: T,
    /// `statistic / (√n σ̂)`
    pub z: T,
    /// `2 − 2Φ(|z|)`
    pub p_value: T,
    pub n: usize,
    pub components: Components<T>,
}

impl<T: Scalar> ScoreTestResult<T> {
    /// Rejects the missing-at-random hypothesis at level `alpha`.
    pub fn rejects(&self, alpha: T) -> bool {
        self.p_value < alpha
    }
}

/// Standardizes a statistic against its variance components.
pub fn test_report<T: Scalar>(
    statistic: T,
    components: impl Into<Components<T>>,
    n: usize,
) -> Result<ScoreTestResult<T>> {
    let components = components.into();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let sigma_sq = components.sigma_sq();
    check_positive(
        components.variant().name(),
        sigma_sq,
        components.magnitude(),
        || components.dump(),
    )?;
    let z = statistic / (T::from_usize_lossy(n) * sigma_sq).sqrt();
    // Φ(−|z|) keeps full relative precision far in the tail.
    let p_value = (T::lit(2.0) * normal_cdf(-z.abs())).min(T::one());
    Ok(ScoreTestResult {
        variant: components.variant(),
        statistic,
        sigma_sq_hat: sigma_sq,
        z,
        p_value,
        n,
        components,
    })
}
