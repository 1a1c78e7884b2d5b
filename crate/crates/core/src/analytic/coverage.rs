//! Joint SIR coverage probabilities for the downlink and sidelink cases.
//!
//! Both are triple-nested integrals. The interference kernel seen from a
//! transmitter at distance `d` is `1 / (1 + d^alpha / c)` where `c` absorbs the
//! threshold, the serving distance and the power ratio. Inner integrals run along
//! a road at perpendicular distance `r`; middle integrals run over the road's
//! displacement; the outer integral runs over the serving distance.

use std::cell::Cell;
use std::f64::consts::{FRAC_PI_2, PI};

use super::quadrature::{
    try_integrate, try_integrate_algebraic_tail, try_integrate_to_infinity, QuadratureSpec,
    TailRule,
};
use super::CoverageResult;
use crate::config::NetworkConfig;
use crate::error::{AnalyticError, QuadratureError};

/// Largest relative perturbation seen across the evaluations of an integrand.
#[derive(Default)]
struct RelLedger(Cell<f64>);

impl RelLedger {
    fn note(&self, rel: f64) {
        if rel.is_finite() && rel > self.0.get() {
            self.0.set(rel);
        }
    }

    fn get(&self) -> f64 {
        self.0.get()
    }
}

/// Inner integrands are positive, so a pure relative tolerance is attainable and
/// keeps the propagated relative error meaningful where the integral is tiny.
fn relative_only(spec: &QuadratureSpec, factor: f64) -> QuadratureSpec {
    QuadratureSpec {
        rel_tol: spec.rel_tol * factor,
        abs_tol: f64::MIN_POSITIVE,
        ..*spec
    }
}

#[derive(Clone, Copy)]
struct Nesting {
    half_alpha: f64,
    inv_alpha: f64,
    outer: QuadratureSpec,
    middle: QuadratureSpec,
    inner: QuadratureSpec,
}

impl Nesting {
    fn new(alpha: f64, spec: &QuadratureSpec) -> Self {
        Self {
            half_alpha: 0.5 * alpha,
            inv_alpha: 1.0 / alpha,
            outer: *spec,
            middle: relative_only(spec, 0.1),
            inner: relative_only(spec, 0.01),
        }
    }

    /// `int_lower^inf u / (1 + u^alpha / c) du`: planar Poisson interferers
    /// beyond `lower`, divided by `2 pi lambda`.
    fn planar(&self, lower: f64, c: f64) -> Result<(f64, f64), QuadratureError> {
        if c == 0.0 {
            return Ok((0.0, 0.0));
        }
        let scale = lower.max(c.powf(self.inv_alpha));
        let alpha = 2.0 * self.half_alpha;
        let q = try_integrate_algebraic_tail(
            |u| Ok(u / (1.0 + u.powf(alpha) / c)),
            lower,
            scale,
            alpha - 1.0,
            &self.inner,
        )?;
        Ok((q.value, q.error))
    }

    /// `int_lower^inf 1 / (1 + (r^2 + u^2)^(alpha/2) / c) du`: one side of a road at
    /// perpendicular distance `r`, starting `lower` along it from the foot point.
    fn along_road(&self, r: f64, lower: f64, c: f64) -> Result<(f64, f64), QuadratureError> {
        if c == 0.0 {
            return Ok((0.0, 0.0));
        }
        let r2 = r * r;
        let scale = r.hypot(c.powf(self.inv_alpha));
        let ha = self.half_alpha;
        let q = try_integrate_algebraic_tail(
            |u| Ok(1.0 / (1.0 + (r2 + u * u).powf(ha) / c)),
            lower,
            scale,
            2.0 * ha,
            &self.inner,
        )?;
        Ok((q.value, q.error))
    }

    /// `int_0^radius 1 - exp(-2 mu sqrt(radius^2 - r^2) - 2 mu G(r)) dr` where `G`
    /// is [`Self::along_road`] from the edge of the disk of `radius`: roads
    /// crossing the disk carry no vehicle inside it and interfere from outside.
    fn roads_crossing(&self, mu: f64, radius: f64, c: f64) -> Result<(f64, f64), QuadratureError> {
        if mu == 0.0 || radius == 0.0 {
            return Ok((0.0, 0.0));
        }
        let ledger = RelLedger::default();
        let q = try_integrate(
            |phi| {
                let (s, co) = phi.sin_cos();
                let half = radius * co;
                let (g, g_err) = self.along_road(radius * s, half, c)?;
                let y = 2.0 * mu * (half + g);
                let one_minus = -(-y).exp_m1();
                if one_minus > 0.0 {
                    ledger.note(2.0 * mu * g_err * (-y).exp() / one_minus);
                }
                Ok(one_minus * half)
            },
            0.0,
            FRAC_PI_2,
            &self.middle,
        )?;
        Ok((q.value, q.error + ledger.get() * q.value.abs()))
    }

    /// `int_from^inf 1 - exp(-2 mu G(r)) dr` with `G` the full-road
    /// [`Self::along_road`]: roads that do not cross the disk of radius `from`.
    fn roads_outside(&self, mu: f64, from: f64, c: f64) -> Result<(f64, f64), QuadratureError> {
        if mu == 0.0 || c == 0.0 {
            return Ok((0.0, 0.0));
        }
        let ledger = RelLedger::default();
        let scale = from.max(c.powf(self.inv_alpha));
        let q = try_integrate_algebraic_tail(
            |r| {
                let (g, g_err) = self.along_road(r, 0.0, c)?;
                let y = 2.0 * mu * g;
                let one_minus = -(-y).exp_m1();
                if one_minus > 0.0 {
                    ledger.note(2.0 * mu * g_err * (-y).exp() / one_minus);
                }
                Ok(one_minus)
            },
            from,
            scale,
            2.0 * self.half_alpha - 1.0,
            &self.middle,
        )?;
        Ok((q.value, q.error + ledger.get() * q.value.abs()))
    }
}

fn check_tau(tau: f64) -> Result<(), AnalyticError> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(AnalyticError::InvalidArgument(
            "tau must be positive and finite",
        ))
    }
}

/// Joint probability that the typical user is outside the vehicle region and
/// its downlink SIR exceeds `tau`.
pub fn dl_coverage(
    cfg: &NetworkConfig,
    tau: f64,
    spec: &QuadratureSpec,
) -> Result<CoverageResult, AnalyticError> {
    check_tau(tau)?;
    let nest = Nesting::new(cfg.alpha, spec);
    let lambda_b = cfg.lambda_b;
    let roads = cfg.lambda_l > 0.0 && cfg.mu > 0.0;
    let eta = cfg.eta();
    let ledger = RelLedger::default();

    let integrand = |x: f64| -> Result<f64, QuadratureError> {
        let xa = x.powf(cfg.alpha);
        let c_b = tau * xa;
        let (k1, k1_err) = nest.planar(x, c_b)?;
        let mut exponent = PI * lambda_b * x * x + 2.0 * PI * lambda_b * k1;
        let mut exponent_err = 2.0 * PI * lambda_b * k1_err;
        if roads {
            let c_v = c_b * eta;
            let (k2, k2_err) = nest.roads_crossing(cfg.mu, cfg.rho, c_v)?;
            let (k3, k3_err) = nest.roads_outside(cfg.mu, cfg.rho, c_v)?;
            exponent += 2.0 * cfg.lambda_l * (k2 + k3);
            exponent_err += 2.0 * cfg.lambda_l * (k2_err + k3_err);
        }
        ledger.note(exponent_err);
        Ok(2.0 * PI * lambda_b * x * (-exponent).exp())
    };

    // Base-station interference alone is scale free: K1(x) = x^2 k(tau), so the
    // integrand is dominated by 2 pi lambda_b x exp(-pi lambda_b (1 + 2 k) x^2).
    let (k, _) = nest.planar(1.0, tau)?;
    let envelope = PI * lambda_b * (1.0 + 2.0 * k);
    let scale = 1.0 / envelope.sqrt();
    let (q, tail) = match spec.tail_rule {
        TailRule::EnvelopeCutoff => {
            // int_{x_max}^inf of the envelope is at most abs_tol
            let x_max = ((1.0 / spec.abs_tol).ln() / envelope).sqrt();
            (
                try_integrate(integrand, 0.0, x_max, &nest.outer)?,
                spec.abs_tol,
            )
        }
        TailRule::RationalMap => (
            try_integrate_to_infinity(integrand, 0.0, scale, &nest.outer)?,
            0.0,
        ),
    };
    let est_abs_error = q.error + tail + q.value.abs() * ledger.get();
    Ok(CoverageResult {
        value: q.value,
        est_abs_error,
    })
}

/// Joint probability that the typical user is inside the vehicle region and its
/// sidelink SIR from the nearest vehicle exceeds `tau`.
pub fn sl_coverage(
    cfg: &NetworkConfig,
    tau: f64,
    spec: &QuadratureSpec,
) -> Result<CoverageResult, AnalyticError> {
    check_tau(tau)?;
    if cfg.rho == 0.0 || cfg.lambda_l == 0.0 || cfg.mu == 0.0 {
        return Ok(CoverageResult::ZERO);
    }
    let nest = Nesting::new(cfg.alpha, spec);
    let mu = cfg.mu;
    let eta = cfg.eta();
    let ledger = RelLedger::default();

    let integrand = |x: f64| -> Result<f64, QuadratureError> {
        let c_s = tau * x.powf(cfg.alpha);
        let c_b = c_s / eta;

        // Density of the nearest vehicle at distance x on a road, with that road's
        // remaining vehicles interfering; r = x sin(phi) removes 1/sqrt(x^2 - r^2).
        let inner_ledger = RelLedger::default();
        let serving = try_integrate(
            |phi| {
                let (s, co) = phi.sin_cos();
                let half = x * co;
                let (g, g_err) = nest.along_road(x * s, half, c_s)?;
                inner_ledger.note(2.0 * mu * g_err);
                Ok((-2.0 * mu * (half + g)).exp())
            },
            0.0,
            FRAC_PI_2,
            &nest.middle,
        )?;
        let l0 = 4.0 * cfg.lambda_l * mu * x * serving.value;
        let l0_rel = if serving.value > 0.0 {
            serving.error / serving.value + inner_ledger.get()
        } else {
            0.0
        };

        let (l1, l1_err) = nest.planar(0.0, c_b)?;
        let (l2, l2_err) = nest.roads_crossing(mu, x, c_s)?;
        let (l3, l3_err) = nest.roads_outside(mu, x, c_s)?;
        let exponent = 2.0 * PI * cfg.lambda_b * l1 + 2.0 * cfg.lambda_l * (l2 + l3);
        let exponent_err =
            2.0 * PI * cfg.lambda_b * l1_err + 2.0 * cfg.lambda_l * (l2_err + l3_err);
        ledger.note(l0_rel + exponent_err);
        Ok(l0 * (-exponent).exp())
    };

    let q = try_integrate(integrand, 0.0, cfg.rho, &nest.outer)?;
    Ok(CoverageResult {
        value: q.value,
        est_abs_error: q.error + q.value.abs() * ledger.get(),
    })
}

/// Sum of the downlink and sidelink joint coverages.
pub fn total_coverage(
    cfg: &NetworkConfig,
    tau: f64,
    spec: &QuadratureSpec,
) -> Result<CoverageResult, AnalyticError> {
    let dl = dl_coverage(cfg, tau, spec)?;
    let sl = sl_coverage(cfg, tau, spec)?;
    Ok(CoverageResult {
        value: dl.value + sl.value,
        est_abs_error: dl.est_abs_error + sl.est_abs_error,
    })
}

/// `int_0^inf u / (1 + u^alpha / c) du = c^(2/alpha) (pi/alpha) / sin(2 pi / alpha)`.
#[cfg(test)]
fn planar_closed_form(alpha: f64, c: f64) -> f64 {
    c.powf(2.0 / alpha) * (PI / alpha) / (2.0 * PI / alpha).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::p_assoc_sl;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn planar_kernel_matches_closed_form() {
        for alpha in [2.5, 3.0, 4.0] {
            let nest = Nesting::new(alpha, &spec());
            for c in [1e-3, 0.7, 20.0] {
                let (v, _) = nest.planar(0.0, c).unwrap();
                let exact = planar_closed_form(alpha, c);
                assert!(
                    (v / exact - 1.0).abs() < 1e-6,
                    "alpha={alpha} c={c} {v} {exact}"
                );
            }
        }
    }

    #[test]
    fn road_kernel_alpha_four() {
        // alpha = 4, c = 1, r = 0: int_0^inf du / (1 + u^4) = pi / (2 sqrt 2)
        let nest = Nesting::new(4.0, &spec());
        let (v, _) = nest.along_road(0.0, 0.0, 1.0).unwrap();
        assert!((v - PI / (2.0 * 2f64.sqrt())).abs() < 1e-8);
    }

    #[test]
    fn sl_is_zero_without_broadcast_radius() {
        let cfg = NetworkConfig {
            rho: 0.0,
            ..NetworkConfig::reference()
        };
        assert_eq!(
            sl_coverage(&cfg, 1.0, &spec()).unwrap(),
            CoverageResult::ZERO
        );
    }

    #[test]
    fn rejects_bad_threshold() {
        let cfg = NetworkConfig::reference();
        assert!(dl_coverage(&cfg, 0.0, &spec()).is_err());
        assert!(sl_coverage(&cfg, f64::NAN, &spec()).is_err());
    }

    #[test]
    fn huge_threshold_gives_no_coverage() {
        let cfg = NetworkConfig::reference();
        assert!(dl_coverage(&cfg, 1e9, &spec()).unwrap().value.abs() < 1e-6);
        assert!(sl_coverage(&cfg, 1e9, &spec()).unwrap().value.abs() < 1e-6);
    }

    #[test]
    fn tail_rules_agree() {
        let cfg = NetworkConfig::reference();
        let a = dl_coverage(&cfg, 1.0, &spec()).unwrap();
        let b = dl_coverage(
            &cfg,
            1.0,
            &QuadratureSpec {
                tail_rule: TailRule::RationalMap,
                ..spec()
            },
        )
        .unwrap();
        assert!((a.value - b.value).abs() <= a.est_abs_error + b.est_abs_error);
    }

    #[test]
    fn joint_never_exceeds_marginal() {
        let cfg = NetworkConfig::reference();
        let sl_assoc = p_assoc_sl(cfg.lambda_l, cfg.mu, cfg.rho, &spec())
            .unwrap()
            .value;
        for tau in [0.1, 1.0, 10.0] {
            let dl = dl_coverage(&cfg, tau, &spec()).unwrap();
            let sl = sl_coverage(&cfg, tau, &spec()).unwrap();
            assert!(dl.value <= 1.0 - sl_assoc + dl.est_abs_error);
            assert!(sl.value <= sl_assoc + sl.est_abs_error);
        }
    }
}
