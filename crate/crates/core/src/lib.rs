//! Joint network and compute allocation for microservice pipelines running on
//! a multi-tier edge/cloud fabric.
//!
//! The crate models the infrastructure ([`fabric`]) and the application
//! ([`appgraph`]), fits affine resource-coupling models from measured
//! performance grids ([`coupling`]), and picks a placement plus allocation
//! that trades total resource usage against achievable performance
//! ([`orchestrator`], backed by the embedded simplex in [`lp`]). The
//! [`harness`] module loads scenario files, runs capacity sweeps against a
//! static baseline, scores detection logs and writes reports.

pub mod appgraph;
pub mod cli;
pub mod coupling;
pub mod error;
pub mod fabric;
pub mod harness;
pub mod lp;
pub mod orchestrator;
pub mod validate;

pub use error::{Error, Result};
