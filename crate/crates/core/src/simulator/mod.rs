//! Monte Carlo estimators for the typical user at the origin.
//!
//! Replication `i` draws all of its randomness from
//! [`replication_rng`]`(seed, i)`, so results depend only on `(cfg, plan)` and not
//! on how replications are scheduled across threads.

mod cells;
mod far_field;
mod sir;

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::SimError;
use crate::geometry::{
    advance_vehicles, in_vehicle_region, nearest, sample_lines, sample_planar_ppp, sample_vehicles,
    sample_vehicles_extended, Point2, Realization,
};
use crate::stats::{compensated_sum, replication_rng, Estimate};

use cells::{covered, vehicles_near, Cell, PROBES_PER_CELL};
pub use far_field::{FarField, ROAD_REACH};
pub use sir::{
    far_field_interference, sample_sir, sample_sir_with_far_field, sir_from, Association, Fades,
    SirSample,
};

/// Multiplier on the default window `max(10 rho, 10/sqrt(pi lambda_b), 10/sqrt(lambda_l mu))`.
///
/// Interference from beyond the window is not truncated but modelled by
/// [`FarField`], which leaves a residual bias below Monte Carlo noise at the
/// default window (checked by window doubling in the integration tests).
pub const WINDOW_FACTOR: f64 = 1.0;

/// `log2(1 + SIR)` is capped here in the rate estimator.
pub const RATE_CAP_BITS: f64 = 60.0;

/// Replication streams for the zero-cell estimators start here so they never
/// overlap the SIR streams of the same seed.
const CELL_STREAM_BASE: u64 = 1 << 48;

const MAX_DEGENERATE_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Link {
    Sidelink,
    Downlink,
    Total,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimPlan {
    pub window_radius: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub guard_note: String,
}

/// Smallest admissible window for `cfg`: `max(10 rho, 10 / sqrt(pi lambda_b))`.
pub fn minimum_window(cfg: &NetworkConfig) -> f64 {
    (10.0 * cfg.rho).max(10.0 / (PI * cfg.lambda_b).sqrt())
}

pub fn default_window(cfg: &NetworkConfig) -> f64 {
    let vehicles = cfg.lambda_l * cfg.mu;
    let base = if vehicles > 0.0 {
        minimum_window(cfg).max(10.0 / vehicles.sqrt())
    } else {
        minimum_window(cfg)
    };
    WINDOW_FACTOR * base
}

impl SimPlan {
    pub fn new(cfg: &NetworkConfig, n_samples: u64, seed: u64) -> Self {
        let window_radius = default_window(cfg);
        Self {
            window_radius,
            n_samples,
            seed,
            guard_note: format!(
                "window {window_radius:.3} km; base stations beyond it by their mean, roads out to \
                 {ROAD_REACH} x the window by their conditional mean; bias checked by window doubling"
            ),
        }
    }

    pub fn with_window(mut self, window_radius: f64) -> Self {
        self.window_radius = window_radius;
        self
    }

    pub fn validate(&self, cfg: &NetworkConfig) -> Result<(), SimError> {
        if self.n_samples < 1 {
            return Err(SimError::InvalidPlan("n_samples must be ≥ 1".into()));
        }
        let min = minimum_window(cfg);
        if !(self.window_radius >= min * (1.0 - 1e-12)) {
            return Err(SimError::InvalidPlan(format!(
                "window radius {} below minimum {min}",
                self.window_radius
            )));
        }
        Ok(())
    }
}

/// SIR draws from independent realizations, shared by every threshold and link.
#[derive(Debug, Clone)]
pub struct CoverageSamples {
    pub samples: Vec<SirSample>,
    pub degenerate: u64,
    pub seed: u64,
}

impl CoverageSamples {
    fn indicators(&self, tau: f64, link: Link) -> Vec<f64> {
        self.samples
            .iter()
            .map(|s| {
                let hit = s.sir > tau
                    && match link {
                        Link::Sidelink => s.association == Association::Sidelink,
                        Link::Downlink => s.association == Association::Downlink,
                        Link::Total => true,
                    };
                f64::from(u8::from(hit))
            })
            .collect()
    }

    /// Joint probability of `SIR > tau` and the association of `link`.
    ///
    /// The `Total` mean is the sum of the sidelink and downlink means.
    pub fn coverage(&self, tau: f64, link: Link) -> Estimate {
        let est = Estimate::from_samples(&self.indicators(tau, link), self.seed);
        if link == Link::Total {
            let sl = Estimate::from_samples(&self.indicators(tau, Link::Sidelink), self.seed);
            let dl = Estimate::from_samples(&self.indicators(tau, Link::Downlink), self.seed);
            return Estimate {
                mean: sl.mean + dl.mean,
                ..est
            };
        }
        est
    }

    /// `log2(1 + SIR)` on downlink draws (0 on sidelink), capped at
    /// [`RATE_CAP_BITS`]; returns the per-sample values and the cap-hit count.
    pub fn downlink_rates(&self) -> (Vec<f64>, u64) {
        let mut hits = 0;
        let v = self
            .samples
            .iter()
            .map(|s| {
                if s.association != Association::Downlink {
                    return 0.0;
                }
                let bits = s.sir.ln_1p() / std::f64::consts::LN_2;
                if bits >= RATE_CAP_BITS {
                    hits += 1;
                    RATE_CAP_BITS
                } else {
                    bits
                }
            })
            .collect();
        (v, hits)
    }
}

fn check_degenerate(degenerate: u64, n: u64) -> Result<(), SimError> {
    if degenerate as f64 >= MAX_DEGENERATE_FRACTION * n as f64 && degenerate > 0 {
        return Err(SimError::TooManyDegenerate {
            count: degenerate,
            samples: n,
        });
    }
    Ok(())
}

/// Draws `plan.n_samples` SIR samples, each from its own realization in the plan
/// window with the far-field mean interference added. Degenerate realizations
/// are redrawn and counted.
pub fn sample_coverage(cfg: &NetworkConfig, plan: &SimPlan) -> Result<CoverageSamples, SimError> {
    cfg.validate()?;
    plan.validate(cfg)?;
    let far = FarField::new(cfg, plan.window_radius);
    let draws: Vec<(SirSample, u64)> = (0..plan.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = replication_rng(plan.seed, i);
            let mut degenerate = 0;
            loop {
                let real = Realization::sample(cfg, plan.window_radius, plan.seed, &mut rng);
                let fades = Fades::draw(&real, &mut rng);
                let tail = far.sample(&real.lines, &mut rng);
                match sir_from(&real, &fades, cfg, f64::INFINITY, tail) {
                    Ok(s) => return Ok((s, degenerate)),
                    Err(SimError::Degenerate | SimError::InfiniteSir) => degenerate += 1,
                    Err(e) => return Err(e),
                }
                if degenerate > 1000 {
                    return Err(SimError::TooManyDegenerate {
                        count: degenerate,
                        samples: 1,
                    });
                }
            }
        })
        .collect::<Result<_, _>>()?;
    let degenerate = draws.iter().map(|d| d.1).sum();
    check_degenerate(degenerate, plan.n_samples)?;
    Ok(CoverageSamples {
        samples: draws.into_iter().map(|d| d.0).collect(),
        degenerate,
        seed: plan.seed,
    })
}

pub fn estimate_coverage(
    cfg: &NetworkConfig,
    tau: f64,
    link: Link,
    plan: &SimPlan,
) -> Result<Estimate, SimError> {
    if !(tau > 0.0) {
        return Err(SimError::InvalidPlan("tau must be positive".into()));
    }
    Ok(sample_coverage(cfg, plan)?.coverage(tau, link))
}

/// Association indicators at time `t` after the vehicles start moving.
///
/// Only roads within `rho` of the origin matter, so lines are sampled in the
/// disk of radius `rho`; vehicles are placed on chords lengthened by `speed t`
/// at both ends, advanced, and clipped back to the disk.
fn association_indicators(cfg: &NetworkConfig, plan: &SimPlan, t: f64) -> Vec<f64> {
    let shift = cfg.speed * t;
    (0..plan.n_samples)
        .into_par_iter()
        .map(|i| {
            if cfg.rho == 0.0 {
                return 0.0;
            }
            let mut rng = replication_rng(plan.seed, i);
            let lines = sample_lines(cfg.lambda_l, cfg.rho, &mut rng);
            let vehicles = if shift > 0.0 {
                let v = sample_vehicles_extended(&lines, cfg.mu, shift, &mut rng);
                advance_vehicles(&v, &lines, cfg.speed, t)
            } else {
                sample_vehicles(&lines, cfg.mu, &mut rng)
            };
            f64::from(u8::from(in_vehicle_region(
                Point2::ORIGIN,
                &vehicles,
                cfg.rho,
            )))
        })
        .collect()
}

/// Sidelink and downlink association probabilities. The downlink mean is the
/// exact complement of the sidelink mean.
pub fn estimate_association(
    cfg: &NetworkConfig,
    plan: &SimPlan,
) -> Result<(Estimate, Estimate), SimError> {
    estimate_association_at(cfg, plan, 0.0)
}

/// [`estimate_association`] after the vehicles have moved for time `t`.
pub fn estimate_association_at(
    cfg: &NetworkConfig,
    plan: &SimPlan,
    t: f64,
) -> Result<(Estimate, Estimate), SimError> {
    cfg.validate()?;
    plan.validate(cfg)?;
    if !(t >= 0.0) {
        return Err(SimError::InvalidPlan("t must be nonnegative".into()));
    }
    let sl = Estimate::from_samples(&association_indicators(cfg, plan, t), plan.seed);
    let dl = Estimate {
        mean: 1.0 - sl.mean,
        ..sl
    };
    Ok((sl, dl))
}

/// The zero cell of one realization: the Voronoi cell of the base station
/// nearest the origin.
fn zero_cell<R: Rng + ?Sized>(
    cfg: &NetworkConfig,
    plan: &SimPlan,
    rng: &mut R,
) -> Option<(Cell, Vec<Point2>)> {
    let real = Realization::sample(cfg, plan.window_radius, plan.seed, rng);
    let z = nearest(&real.base_stations, Point2::ORIGIN).ok()?;
    let cell = Cell::new(z.point, &real.base_stations, 2.0 * plan.window_radius);
    let near = vehicles_near(&cell, &real.vehicles, cfg.rho);
    Some((cell, near))
}

/// Mean number of users served on the downlink by the typical user's base
/// station: users of an independent Poisson process in the zero cell and
/// outside the vehicle region.
pub fn estimate_zero_cell_load(cfg: &NetworkConfig, plan: &SimPlan) -> Result<Estimate, SimError> {
    cfg.validate()?;
    plan.validate(cfg)?;
    let counts: Vec<f64> = (0..plan.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = replication_rng(plan.seed, CELL_STREAM_BASE + i);
            let (cell, near) = zero_cell(cfg, plan, &mut rng).ok_or(SimError::Degenerate)?;
            // The cell lies inside its bounding disk, so users elsewhere never count.
            let users = sample_planar_ppp(cfg.lambda_u, cell.bounding_radius(), &mut rng);
            let z = cell.nucleus();
            let n = users
                .into_iter()
                .map(|u| Point2::new(u.x + z.x, u.y + z.y))
                .filter(|u| cell.contains(*u) && !covered(*u, &near, cfg.rho))
                .count();
            Ok(n as f64)
        })
        .collect::<Result<_, SimError>>()?;
    Ok(Estimate::from_samples(&counts, plan.seed))
}

/// Hit-or-miss areas of the zero cell inside and outside the vehicle region.
pub fn estimate_zero_cell_areas(
    cfg: &NetworkConfig,
    plan: &SimPlan,
) -> Result<(Estimate, Estimate), SimError> {
    cfg.validate()?;
    plan.validate(cfg)?;
    let areas: Vec<(f64, f64)> = (0..plan.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = replication_rng(plan.seed, CELL_STREAM_BASE + i);
            let (cell, near) = zero_cell(cfg, plan, &mut rng).ok_or(SimError::Degenerate)?;
            let (mut inside, mut outside) = (0usize, 0usize);
            for _ in 0..PROBES_PER_CELL {
                let y = cell.probe(&mut rng);
                if cell.contains(y) {
                    if covered(y, &near, cfg.rho) {
                        inside += 1;
                    } else {
                        outside += 1;
                    }
                }
            }
            let unit = cell.bounding_area() / PROBES_PER_CELL as f64;
            Ok((inside as f64 * unit, outside as f64 * unit))
        })
        .collect::<Result<_, SimError>>()?;
    let (a, b): (Vec<f64>, Vec<f64>) = areas.into_iter().unzip();
    Ok((
        Estimate::from_samples(&a, plan.seed),
        Estimate::from_samples(&b, plan.seed),
    ))
}

/// Second moment of the area of the typical Poisson–Voronoi cell: a nucleus is
/// added at the origin of a Poisson process of intensity `lambda_b`, and the
/// squared area is estimated without bias as the product of two independent
/// hit-or-miss area estimates.
pub fn estimate_voronoi_area_moment(lambda_b: f64, plan: &SimPlan) -> Result<Estimate, SimError> {
    if !(lambda_b > 0.0 && lambda_b.is_finite()) {
        return Err(SimError::InvalidPlan("lambda_b must be positive".into()));
    }
    if plan.n_samples < 1 {
        return Err(SimError::InvalidPlan("n_samples must be ≥ 1".into()));
    }
    let half = PROBES_PER_CELL / 2;
    let moments: Vec<f64> = (0..plan.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = replication_rng(plan.seed, CELL_STREAM_BASE + i);
            let others = sample_planar_ppp(lambda_b, plan.window_radius, &mut rng);
            let cell = Cell::new(Point2::ORIGIN, &others, 2.0 * plan.window_radius);
            let mut area = || {
                let hits = (0..half)
                    .filter(|_| cell.contains(cell.probe(&mut rng)))
                    .count();
                cell.bounding_area() * hits as f64 / half as f64
            };
            let a1 = area();
            let a2 = area();
            a1 * a2
        })
        .collect();
    Ok(Estimate::from_samples(&moments, plan.seed))
}

/// Monte Carlo effective rate with its two ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    /// Ratio estimate; its standard error comes from the delta method.
    pub rate: Estimate,
    /// `E[log2(1 + SIR); DL]`.
    pub mean_dl_rate: Estimate,
    pub load: Estimate,
    pub cap_hits: u64,
}

pub fn rate_from(mean_dl_rate: Estimate, load: Estimate, cap_hits: u64) -> RateEstimate {
    let a = mean_dl_rate.mean;
    let b = load.mean;
    let ratio = a / b;
    let se = ((mean_dl_rate.std_error / b).powi(2) + (a * load.std_error / (b * b)).powi(2)).sqrt();
    RateEstimate {
        rate: Estimate {
            mean: ratio,
            std_error: se,
            n_samples: mean_dl_rate.n_samples.min(load.n_samples),
            seed: mean_dl_rate.seed,
        },
        mean_dl_rate,
        load,
        cap_hits,
    }
}

/// Effective rate: Monte Carlo mean downlink rate over Monte Carlo zero-cell load.
pub fn estimate_effective_rate(
    cfg: &NetworkConfig,
    plan: &SimPlan,
) -> Result<RateEstimate, SimError> {
    let samples = sample_coverage(cfg, plan)?;
    let (rates, cap_hits) = samples.downlink_rates();
    let num = Estimate::from_samples(&rates, plan.seed);
    let load = estimate_zero_cell_load(cfg, plan)?;
    Ok(rate_from(num, load, cap_hits))
}

/// Monte Carlo estimate of `a P(SIR > 2^eps - 1, SL) + b T`, where `T` is the
/// effective rate. Each coverage draw contributes
/// `a 1{SL, SIR > 2^eps - 1} + b log2(1 + SIR) 1{DL} / load`; the load comes
/// from independent streams and its uncertainty is added by the delta method.
fn estimate_rate_mix(
    cfg: &NetworkConfig,
    plan: &SimPlan,
    a: f64,
    b: f64,
) -> Result<Estimate, SimError> {
    let samples = sample_coverage(cfg, plan)?;
    let (rates, _) = samples.downlink_rates();
    let load = estimate_zero_cell_load(cfg, plan)?;
    let tau = cfg.epsilon.exp2() - 1.0;
    let mix: Vec<f64> = samples
        .samples
        .iter()
        .zip(&rates)
        .map(|(s, r)| {
            let sidelink = s.association == Association::Sidelink && s.sir > tau;
            a * f64::from(u8::from(sidelink)) + b * r / load.mean
        })
        .collect();
    let mut est = Estimate::from_samples(&mix, plan.seed);
    let mean_rate = compensated_sum(rates.iter().copied()) / rates.len() as f64;
    let load_term = b * mean_rate * load.std_error / (load.mean * load.mean);
    est.std_error = est.std_error.hypot(load_term);
    Ok(est)
}

/// Monte Carlo network utility with the config's weights.
pub fn estimate_network_utility(cfg: &NetworkConfig, plan: &SimPlan) -> Result<Estimate, SimError> {
    estimate_rate_mix(cfg, plan, cfg.w_s, cfg.w_d)
}

/// Monte Carlo total rate: `eps P(SIR > 2^eps - 1, SL) + T`.
pub fn estimate_total_rate(cfg: &NetworkConfig, plan: &SimPlan) -> Result<Estimate, SimError> {
    let a = if cfg.rho == 0.0 { 0.0 } else { cfg.epsilon };
    estimate_rate_mix(cfg, plan, a, 1.0)
}
