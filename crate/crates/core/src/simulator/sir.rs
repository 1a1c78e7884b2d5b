//! One typical-user SIR draw from a realization.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::SimError;
use crate::geometry::{Point2, Realization};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Association {
    Sidelink,
    Downlink,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SirSample {
    pub association: Association,
    pub serving_distance: f64,
    pub sir: f64,
}

/// Unit-mean exponential fades, one per transmitter, in realization order.
#[derive(Debug, Clone, PartialEq)]
pub struct Fades {
    pub base_stations: Vec<f64>,
    pub vehicles: Vec<f64>,
}

impl Fades {
    pub fn draw<R: Rng + ?Sized>(real: &Realization, rng: &mut R) -> Self {
        let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| Exp1.sample(rng)).collect() };
        let base_stations = draw(real.base_stations.len());
        let vehicles = draw(real.vehicles.len());
        Self {
            base_stations,
            vehicles,
        }
    }
}

/// Mean received power from every transmitter beyond `radius`, for unit-mean fades:
/// `2 pi (lambda_b p_b + lambda_l mu p_v) radius^(2 - alpha) / (alpha - 2)`.
pub fn far_field_interference(cfg: &NetworkConfig, radius: f64) -> f64 {
    let k = 2.0 * PI * (cfg.lambda_b * cfg.p_b + cfg.lambda_l * cfg.mu * cfg.p_v);
    k * radius.powf(2.0 - cfg.alpha) / (cfg.alpha - 2.0)
}

/// Serving transmitter under the association rule: the nearest vehicle if it is
/// within `rho` (closed ball), otherwise the nearest base station.
fn serving(real: &Realization, rho: f64) -> Result<(Association, usize, f64), SimError> {
    let nearest_sq = |pts: &mut dyn Iterator<Item = Point2>| -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in pts.enumerate() {
            let d2 = p.norm_sq();
            if best.is_none_or(|(_, b)| d2 < b) {
                best = Some((i, d2));
            }
        }
        best
    };
    if let Some((i, d2)) = nearest_sq(&mut real.vehicles.positions()) {
        if d2 <= rho * rho {
            return Ok((Association::Sidelink, i, d2.sqrt()));
        }
    }
    match nearest_sq(&mut real.base_stations.iter().copied()) {
        Some((i, d2)) => Ok((Association::Downlink, i, d2.sqrt())),
        None => Err(SimError::Degenerate),
    }
}

/// SIR at the origin counting only transmitters within `cutoff` of it, plus a
/// deterministic `tail` interference term.
pub fn sir_from(
    real: &Realization,
    fades: &Fades,
    cfg: &NetworkConfig,
    cutoff: f64,
    tail: f64,
) -> Result<SirSample, SimError> {
    let (association, serving_index, serving_distance) = serving(real, cfg.rho)?;
    let cutoff_sq = cutoff * cutoff;
    let half_alpha = 0.5 * cfg.alpha;
    let gain = |d2: f64| d2.powf(-half_alpha);

    let mut signal = 0.0;
    let mut interference = 0.0;
    for (i, (p, h)) in real.vehicles.positions().zip(&fades.vehicles).enumerate() {
        let d2 = p.norm_sq();
        let rx = cfg.p_v * h * gain(d2);
        if association == Association::Sidelink && i == serving_index {
            signal = rx;
        } else if d2 <= cutoff_sq {
            interference += rx;
        }
    }
    for (i, (p, h)) in real
        .base_stations
        .iter()
        .zip(&fades.base_stations)
        .enumerate()
    {
        let d2 = p.norm_sq();
        let rx = cfg.p_b * h * gain(d2);
        if association == Association::Downlink && i == serving_index {
            signal = rx;
        } else if d2 <= cutoff_sq {
            interference += rx;
        }
    }
    interference += tail;
    if interference <= 0.0 {
        return Err(SimError::InfiniteSir);
    }
    Ok(SirSample {
        association,
        serving_distance,
        sir: signal / interference,
    })
}

/// Draws fresh fades and returns the SIR with interference from every
/// transmitter in the realization and nothing beyond it.
pub fn sample_sir<R: Rng + ?Sized>(
    real: &Realization,
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<SirSample, SimError> {
    let fades = Fades::draw(real, rng);
    sir_from(real, &fades, cfg, f64::INFINITY, 0.0)
}

/// Like [`sample_sir`], plus the mean interference from outside the window.
pub fn sample_sir_with_far_field<R: Rng + ?Sized>(
    real: &Realization,
    cfg: &NetworkConfig,
    rng: &mut R,
) -> Result<SirSample, SimError> {
    let fades = Fades::draw(real, rng);
    let tail = far_field_interference(cfg, real.window_radius);
    sir_from(real, &fades, cfg, f64::INFINITY, tail)
}
