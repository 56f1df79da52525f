//! Score tests of missing at random (MAR) against missing not at random
//! (MNAR) under a logistic propensity model.
//!
//! The statistical core is generic over [`numerics::Scalar`]; the aliases
//! below pin it to `f64`, which is what the simulation and I/O layers use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod model;
pub mod numerics;
pub mod score;
pub mod sim;

pub use error::{Error, Result};
pub use numerics::Scalar;

pub type Mat = numerics::Mat<f64>;
pub type ObservedSample = model::ObservedSample<f64>;
pub type Dataset = model::Dataset<f64>;
pub type PropensityFit = model::PropensityFit<f64>;
pub type ParametricOutcomeFit = model::ParametricOutcomeFit<f64>;
pub type LocationFit = model::LocationFit<f64>;
pub type ScoreTestResult = score::ScoreTestResult<f64>;
pub type VarianceComponentsS1 = score::VarianceComponentsS1<f64>;
pub type VarianceComponentsS2 = score::VarianceComponentsS2<f64>;
pub type Analysis = score::Analysis<f64>;
