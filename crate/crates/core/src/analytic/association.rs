use std::f64::consts::FRAC_PI_2;

use super::quadrature::{integrate, QuadratureSpec};
use super::{CoverageResult, NU};
use crate::config::NetworkConfig;
use crate::error::AnalyticError;

/// `int_0^rho 1 - exp(-2 mu sqrt(rho^2 - u^2)) du`, integrated over `u = rho sin(phi)`
/// so the square-root endpoint at `u = rho` disappears.
pub(crate) fn empty_disk_exponent(
    mu: f64,
    rho: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64), AnalyticError> {
    if rho == 0.0 || mu == 0.0 {
        return Ok((0.0, 0.0));
    }
    let q = integrate(
        |phi| {
            let c = phi.cos();
            -(-2.0 * mu * rho * c).exp_m1() * rho * c
        },
        0.0,
        FRAC_PI_2,
        spec,
    )?;
    Ok((q.value, q.error))
}

/// Probability that the typical user lies within `rho` of some vehicle.
pub fn p_assoc_sl(
    lambda_l: f64,
    mu: f64,
    rho: f64,
    spec: &QuadratureSpec,
) -> Result<CoverageResult, AnalyticError> {
    let (integral, err) = empty_disk_exponent(mu, rho, spec)?;
    let exponent = 2.0 * lambda_l * integral;
    let value = -(-exponent).exp_m1();
    let est_abs_error = 2.0 * lambda_l * err * (-exponent).exp();
    Ok(CoverageResult {
        value,
        est_abs_error,
    })
}

/// Complement of [`p_assoc_sl`].
pub fn p_assoc_dl(
    lambda_l: f64,
    mu: f64,
    rho: f64,
    spec: &QuadratureSpec,
) -> Result<CoverageResult, AnalyticError> {
    let sl = p_assoc_sl(lambda_l, mu, rho, spec)?;
    Ok(CoverageResult {
        value: 1.0 - sl.value,
        est_abs_error: sl.est_abs_error,
    })
}

/// Mean areas of the zero cell inside and outside the vehicle region, km².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCellAreas {
    pub in_region: f64,
    pub outside_region: f64,
    pub est_abs_error: f64,
}

/// `((nu / lambda_b) P(0 in D), (nu / lambda_b) P(0 not in D))`.
pub fn mean_zero_cell_areas(
    cfg: &NetworkConfig,
    spec: &QuadratureSpec,
) -> Result<ZeroCellAreas, AnalyticError> {
    let sl = p_assoc_sl(cfg.lambda_l, cfg.mu, cfg.rho, spec)?;
    let scale = NU / cfg.lambda_b;
    let in_region = scale * sl.value;
    Ok(ZeroCellAreas {
        in_region,
        outside_region: scale - in_region,
        est_abs_error: scale * sl.est_abs_error,
    })
}
