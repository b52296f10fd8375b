//! Active sampling of a 2-D workspace to identify an unknown linear
//! boundary.
//!
//! A unicycle agent with a finite action grid probes labeled positions. In
//! the noiseless setting the collected labels shrink a convex version space
//! of candidate lines until estimators pin the boundary down; in the noisy
//! setting an exact discrete Bayesian filter over noise-sign sequences
//! maintains credible parameter sets instead.
//!
//! Modules follow the pipeline: [`geometry`] (version-space polygon and
//! queries), [`world`] (truth, dynamics, noise, scenario files),
//! [`control_det`] / [`control_stoch`] (one-step problems and sampling
//! loops), [`belief`] (the filter), [`estimator`] (line estimates),
//! [`oracle`] (independent brute-force checks), [`cli`] (experiment runner
//! and artifact emission).

pub mod belief;
pub mod cli;
pub mod control_det;
pub mod control_stoch;
pub mod estimator;
pub mod geometry;
pub mod oracle;
pub mod world;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
