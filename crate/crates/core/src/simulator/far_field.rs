//! Interference from outside the simulation window.
//!
//! Base stations beyond the window contribute their mean. Vehicles are
//! clustered on roads, and a road's total contribution fluctuates far more than
//! a planar process would: replacing it by a constant leaves a bias that only
//! decays like `1 / R` when `alpha = 3`. So roads are sampled out to a much
//! larger radius and only the vehicles on each road beyond the window are
//! replaced by their conditional mean given the road.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::analytic::quadrature::{try_integrate, QuadratureSpec};
use crate::config::NetworkConfig;
use crate::geometry::{poisson_count, LineSet};

/// Roads are sampled out to this multiple of the window radius.
pub const ROAD_REACH: f64 = 50.0;

const TABLE_SIZE: usize = 2048;

/// `T(phi) = S(phi) / sin(phi)^(alpha - 1)` with `S(phi) = int_0^phi sin^(alpha - 2)`,
/// tabulated on `[0, pi/2]`.
///
/// For a road at perpendicular distance `d`, the part beyond distance `x` from
/// the origin on one side satisfies
/// `int |y|^-alpha dl = x^(1 - alpha) T(phi)` with `sin(phi) = d / x`. `T` is
/// smooth and bounded, so interpolation is accurate even for `phi` near 0.
#[derive(Debug, Clone)]
struct RoadKernel {
    alpha: f64,
    table: Vec<f64>,
    step: f64,
}

impl RoadKernel {
    fn new(alpha: f64) -> Self {
        let step = FRAC_PI_2 / (TABLE_SIZE - 1) as f64;
        let spec = QuadratureSpec::default().tightened(1e-3);
        let a = alpha - 2.0;
        let table = (0..TABLE_SIZE)
            .map(|i| {
                let phi = i as f64 * step;
                if i == 0 {
                    return 1.0 / (alpha - 1.0);
                }
                // S(phi) / sin(phi)^(alpha-1) with t = psi / phi keeps the integrand O(1)
                let sp = phi.sin();
                try_integrate(
                    |t| Ok(phi * ((t * phi).sin() / sp).powf(a) / sp),
                    0.0,
                    1.0,
                    &spec,
                )
                .map(|q| q.value)
                .unwrap_or(f64::NAN)
            })
            .collect();
        Self { alpha, table, step }
    }

    fn t(&self, phi: f64) -> f64 {
        let pos = (phi / self.step).clamp(0.0, (TABLE_SIZE - 1) as f64);
        let i = (pos as usize).min(TABLE_SIZE - 2);
        let f = pos - i as f64;
        self.table[i] * (1.0 - f) + self.table[i + 1] * f
    }

    /// `int |y|^-alpha dl` over one side of a road at distance `d`, for points
    /// at distance at least `x >= d` from the origin.
    fn beyond(&self, d: f64, x: f64) -> f64 {
        let phi = (d / x).min(1.0).asin();
        x.powf(1.0 - self.alpha) * self.t(phi)
    }

    /// Both sides of a road at distance `d`, for points with distance to the
    /// origin in `[inner, outer]`.
    fn annulus(&self, d: f64, inner: f64, outer: f64) -> f64 {
        if d >= outer {
            return 0.0;
        }
        let from = inner.max(d);
        2.0 * (self.beyond(d, from) - self.beyond(d, outer))
    }
}

/// Far-field interference model for one configuration and window.
#[derive(Debug, Clone)]
pub struct FarField {
    window_radius: f64,
    road_reach: f64,
    lambda_l: f64,
    vehicle_weight: f64,
    /// Mean of the base stations beyond the window and of all vehicles beyond
    /// `road_reach`.
    constant: f64,
    kernel: RoadKernel,
}

impl FarField {
    pub fn new(cfg: &NetworkConfig, window_radius: f64) -> Self {
        let road_reach = ROAD_REACH * window_radius;
        let tail = |r: f64| r.powf(2.0 - cfg.alpha) / (cfg.alpha - 2.0);
        let constant = 2.0 * PI * cfg.lambda_b * cfg.p_b * tail(window_radius)
            + 2.0 * PI * cfg.lambda_l * cfg.mu * cfg.p_v * tail(road_reach);
        Self {
            window_radius,
            road_reach,
            lambda_l: cfg.lambda_l,
            vehicle_weight: cfg.mu * cfg.p_v,
            constant,
            kernel: RoadKernel::new(cfg.alpha),
        }
    }

    /// Draws the roads that miss the window and returns the total far-field
    /// interference: constant tail, conditional means on the window's own roads
    /// beyond the window, and conditional means on the outer roads.
    pub fn sample<R: Rng + ?Sized>(&self, window_roads: &LineSet, rng: &mut R) -> f64 {
        if self.vehicle_weight == 0.0 || self.lambda_l == 0.0 {
            return self.constant;
        }
        let (inner, outer) = (self.window_radius, self.road_reach);
        let mut roads = 0.0;
        for line in &window_roads.lines {
            roads += self.kernel.annulus(line.r.abs(), inner, outer);
        }
        let n = poisson_count(2.0 * self.lambda_l * (outer - inner), rng);
        for _ in 0..n {
            let d = rng.random_range(inner..outer);
            roads += self.kernel.annulus(d, inner, outer);
        }
        self.constant + self.vehicle_weight * roads
    }

    /// Mean of [`Self::sample`]: all interference beyond the window.
    pub fn mean(&self, cfg: &NetworkConfig) -> f64 {
        super::far_field_interference(cfg, self.window_radius)
    }
}
