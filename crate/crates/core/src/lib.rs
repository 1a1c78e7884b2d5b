//! Stochastic-geometry model of vehicle sidelink safety broadcast sharing
//! spectrum with cellular downlink.
//!
//! Roads form a Poisson line process, vehicles are Poisson on each road, base
//! stations and users are planar Poisson processes. A user within `rho` of a
//! vehicle receives the vehicle's broadcast; every other user is served by its
//! nearest base station. [`simulator`] estimates association, SIR coverage,
//! zero-cell load and effective rate by Monte Carlo; [`analytic`] evaluates the
//! same quantities by nested adaptive quadrature.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod config;
pub mod error;
pub mod geometry;
pub mod simulator;
pub mod stats;

pub use analytic::{CoverageResult, QuadratureSpec};
pub use config::{DerivedQuantities, NetworkConfig};
pub use error::{
    AnalyticError, ConfigError, GeometryError, QuadratureError, SimError, ValidationError,
};
pub use geometry::{LineSet, Point2, Realization, VehicleSet};
pub use simulator::{Link, SimPlan};
pub use stats::Estimate;
