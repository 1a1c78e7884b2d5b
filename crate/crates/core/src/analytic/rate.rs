use std::cell::Cell;

use super::coverage::{dl_coverage, sl_coverage};
use super::quadrature::{try_integrate, QuadratureSpec};
use super::{p_assoc_dl, CoverageResult, NU};
use crate::config::NetworkConfig;
use crate::error::{AnalyticError, QuadratureError};

/// Panels are extended until the coverage integrand falls below this for two
/// consecutive panel ends.
const RATE_INTEGRAND_FLOOR: f64 = 1e-10;
const MAX_RATE_BITS: f64 = 1024.0;

/// Pieces of the effective-rate formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParts {
    /// `E[log2(1 + SIR); DL] = int_0^inf P(SIR > 2^x - 1, DL) dx`, bits/s/Hz.
    pub mean_dl_rate: f64,
    pub mean_dl_rate_error: f64,
    pub p_dl: f64,
    pub p_dl_error: f64,
    /// Effective rate per user.
    pub rate: f64,
    pub est_abs_error: f64,
}

fn mean_dl_rate(cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<(f64, f64), AnalyticError> {
    let inner_err = Cell::new(0.0f64);
    let mut eval = |x: f64| -> Result<f64, QuadratureError> {
        let tau = (x * std::f64::consts::LN_2).exp_m1();
        let c = dl_coverage(cfg, tau, spec).map_err(into_quadrature)?;
        inner_err.set(inner_err.get().max(c.est_abs_error));
        Ok(c.value)
    };

    let mut total = 0.0;
    let mut err = 0.0;
    let mut below = 0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi <= MAX_RATE_BITS {
        // Later panels only need to be accurate relative to the running total.
        let panel_spec = QuadratureSpec {
            abs_tol: spec.abs_tol.max(0.1 * spec.rel_tol * total),
            ..*spec
        };
        let q = try_integrate(&mut eval, lo, hi, &panel_spec)?;
        total += q.value;
        err += q.error + inner_err.replace(0.0) * (hi - lo);
        if eval(hi)? < RATE_INTEGRAND_FLOOR {
            below += 1;
            if below == 2 {
                return Ok((total, err));
            }
        } else {
            below = 0;
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(AnalyticError::InvalidArgument(
        "rate integrand did not decay within the bit range",
    ))
}

fn into_quadrature(e: AnalyticError) -> QuadratureError {
    match e {
        AnalyticError::Quadrature(q) => q,
        AnalyticError::InvalidArgument(m) => QuadratureError::InvalidSpec(m),
    }
}

pub fn effective_rate_parts(
    cfg: &NetworkConfig,
    spec: &QuadratureSpec,
) -> Result<RateParts, AnalyticError> {
    let (num, num_err) = mean_dl_rate(cfg, spec)?;
    let p_dl = p_assoc_dl(cfg.lambda_l, cfg.mu, cfg.rho, spec)?;
    Ok(rate_from_parts(
        cfg,
        num,
        num_err,
        p_dl.value,
        p_dl.est_abs_error,
    ))
}

fn rate_from_parts(
    cfg: &NetworkConfig,
    num: f64,
    num_err: f64,
    p_dl: f64,
    p_dl_err: f64,
) -> RateParts {
    let load = NU * cfg.lambda_u * p_dl;
    let rate = cfg.lambda_b * num / load;
    let est_abs_error = rate * (num_err / num.abs().max(f64::MIN_POSITIVE) + p_dl_err / p_dl);
    RateParts {
        mean_dl_rate: num,
        mean_dl_rate_error: num_err,
        p_dl,
        p_dl_error: p_dl_err,
        rate,
        est_abs_error,
    }
}

impl RateParts {
    /// Same rate numerator under a different user density.
    pub fn with_user_density(&self, cfg: &NetworkConfig, lambda_u: f64) -> RateParts {
        let cfg = NetworkConfig { lambda_u, ..*cfg };
        rate_from_parts(
            &cfg,
            self.mean_dl_rate,
            self.mean_dl_rate_error,
            self.p_dl,
            self.p_dl_error,
        )
    }
}

/// Mean downlink rate of the typical user divided by the mean number of
/// downlink users sharing its base station, bits/s/Hz.
pub fn effective_rate(cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64, AnalyticError> {
    Ok(effective_rate_parts(cfg, spec)?.rate)
}

fn sidelink_success(
    cfg: &NetworkConfig,
    spec: &QuadratureSpec,
) -> Result<CoverageResult, AnalyticError> {
    let tau = cfg.epsilon.exp2() - 1.0;
    if tau > 0.0 {
        sl_coverage(cfg, tau, spec)
    } else {
        super::p_assoc_sl(cfg.lambda_l, cfg.mu, cfg.rho, spec)
    }
}

/// `w_s P(SIR > 2^eps - 1, SL) + w_d T`.
pub fn network_utility(
    cfg: &NetworkConfig,
    w_s: f64,
    w_d: f64,
    spec: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    Ok(network_utility_with_error(cfg, w_s, w_d, spec)?.0)
}

/// [`network_utility`] and its error bound.
pub fn network_utility_with_error(
    cfg: &NetworkConfig,
    w_s: f64,
    w_d: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64), AnalyticError> {
    if !(w_s >= 0.0 && w_d >= 0.0) {
        return Err(AnalyticError::InvalidArgument(
            "weights must be nonnegative",
        ));
    }
    let sl = if w_s > 0.0 {
        sidelink_success(cfg, spec)?
    } else {
        CoverageResult::ZERO
    };
    let (t, t_err) = if w_d > 0.0 {
        let p = effective_rate_parts(cfg, spec)?;
        (p.rate, p.est_abs_error)
    } else {
        (0.0, 0.0)
    };
    Ok((
        w_s * sl.value + w_d * t,
        w_s * sl.est_abs_error + w_d * t_err,
    ))
}

/// Sidelink rate `eps P(SIR > 2^eps - 1, SL)` plus the effective downlink rate.
pub fn total_rate(cfg: &NetworkConfig, spec: &QuadratureSpec) -> Result<f64, AnalyticError> {
    Ok(total_rate_with_error(cfg, spec)?.0)
}

/// [`total_rate`] and its error bound.
pub fn total_rate_with_error(
    cfg: &NetworkConfig,
    spec: &QuadratureSpec,
) -> Result<(f64, f64), AnalyticError> {
    let t = effective_rate_parts(cfg, spec)?;
    if cfg.epsilon == 0.0 || cfg.rho == 0.0 {
        return Ok((t.rate, t.est_abs_error));
    }
    let sl = sidelink_success(cfg, spec)?;
    Ok((
        cfg.epsilon * sl.value + t.rate,
        cfg.epsilon * sl.est_abs_error + t.est_abs_error,
    ))
}
