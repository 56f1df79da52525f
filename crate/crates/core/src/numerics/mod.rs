//! Numerical substrate: dense linear algebra, the normal distribution,
//! Gauss–Hermite quadrature and reproducible random streams.

mod linalg;
mod quadrature;
mod rng;
mod special;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

pub use linalg::{dot, solve_spd, Cholesky, Lu, Mat};
pub use quadrature::{gauss_hermite_nodes, DEFAULT_GH_ORDER};
pub use rng::{RngStream, StreamRng};
pub use special::{normal_cdf, normal_pdf, normal_quantile};

/// Floating point scalar the statistical core is written against.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Lossless-enough conversion of an `f64` literal.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative gradient tolerance for the maximum-likelihood fits.
    ///
    /// 1e-8 in double precision; looser in single precision where 1e-8 is
    /// below the rounding floor of an n-term sum.
    fn fit_tolerance() -> Self {
        Self::lit(1e-8).max(Self::epsilon() * Self::lit(1e3))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
