//! Statistical models used by the team-composition analyses: Welch and exact
//! binomial tests, random-intercept linear mixed models, diagonal Gaussian
//! mixtures and single-breakpoint segmented regression.

mod error;
mod gmm;
mod hypothesis;
mod linalg;
mod lmm;
mod optimize;
mod piecewise;

pub use error::{Result, StatsError};
pub use gmm::{gmm_fit, GmmComponent, GmmFit, GmmOptions};
pub use hypothesis::{exact_binomial_test, welch_t_test, WelchTest};
pub use lmm::{
    fit_lmm, FixedColumn, FixedEffect, LmmFit, LmmOptions, MixedModelData, RandomFactor,
    RandomIntercept, VarianceComponent, INTERCEPT,
};
pub use piecewise::{piecewise_fit, PiecewiseFit};
