//! Model parameters shared by the sampler, the Monte Carlo estimators and the
//! quadrature evaluators.
//!
//! Units: distances in km, line and linear intensities per km, planar
//! intensities per km², powers linear (not dB).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ValidationError};

/// All parameters of the spatial and channel model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Line (road) intensity, lines per km.
    pub lambda_l: f64,
    /// Vehicles per km of road.
    pub mu: f64,
    /// Base stations per km².
    pub lambda_b: f64,
    /// Users per km².
    pub lambda_u: f64,
    /// Sidelink broadcast / association radius, km.
    pub rho: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    pub p_b: f64,
    pub p_v: f64,
    /// Vehicle speed, km per unit time. Only used by the motion tests.
    #[serde(default)]
    pub speed: f64,
    /// Sidelink encoding rate, bits/s/Hz.
    pub epsilon: f64,
    pub w_s: f64,
    pub w_d: f64,
}

/// Quantities derived from a validated [`NetworkConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    /// Transmit power ratio `p_v / p_b`.
    pub eta: f64,
    /// Mean number of vehicles per km², `lambda_l * mu`.
    ///
    /// Roads of cylinder intensity `lambda_l / pi` over `(r, theta)` in
    /// `R x (0, pi)` have `lambda_l` km of road per km², and the sidelink
    /// association probability depends on exactly this density.
    pub vehicle_area_density: f64,
}

/// Names of every field, in declaration order. Used for CSV headers and sweeps.
pub const FIELD_NAMES: [&str; 12] = [
    "lambda_l", "mu", "lambda_b", "lambda_u", "rho", "alpha", "p_b", "p_v", "speed", "epsilon",
    "w_s", "w_d",
];

impl NetworkConfig {
    /// Reference parameter set used by the coverage and rate studies:
    /// `lambda_l = mu = lambda_b = 5`, `lambda_u = 200`, `rho = 0.05`, `alpha = 3`, equal powers.
    pub fn reference() -> Self {
        Self {
            lambda_l: 5.0,
            mu: 5.0,
            lambda_b: 5.0,
            lambda_u: 200.0,
            rho: 0.05,
            alpha: 3.0,
            p_b: 1.0,
            p_v: 1.0,
            speed: 0.0,
            epsilon: 1.0,
            w_s: 0.5,
            w_d: 0.5,
        }
    }

    /// Returns the config unchanged iff every model invariant holds, otherwise the
    /// first violated one.
    pub fn validate(self) -> Result<Self, ValidationError> {
        for (name, value) in FIELD_NAMES.iter().zip(self.values()) {
            if !value.is_finite() {
                return Err(ValidationError::NotFinite { field: name });
            }
        }
        let checks: [(bool, &'static str); 13] = [
            (self.lambda_l >= 0.0, "lambda_l must be nonnegative"),
            (self.mu >= 0.0, "mu must be nonnegative"),
            (self.lambda_b > 0.0, "lambda_b must be positive"),
            (self.lambda_u > 0.0, "lambda_u must be positive"),
            (self.rho >= 0.0, "rho must be nonnegative"),
            (self.alpha > 2.0, "alpha must exceed 2"),
            (self.p_b > 0.0, "p_b must be positive"),
            (self.p_v > 0.0, "p_v must be positive"),
            (self.speed >= 0.0, "speed must be nonnegative"),
            (self.epsilon >= 0.0, "epsilon must be nonnegative"),
            (self.w_s >= 0.0, "w_s must be nonnegative"),
            (self.w_d >= 0.0, "w_d must be nonnegative"),
            (
                self.lambda_u > self.lambda_b,
                "lambda_u must exceed lambda_b",
            ),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(ValidationError::Violated(msg)),
            None => Ok(self),
        }
    }

    pub fn derive(&self) -> DerivedQuantities {
        DerivedQuantities {
            eta: self.p_v / self.p_b,
            vehicle_area_density: self.lambda_l * self.mu,
        }
    }

    pub fn eta(&self) -> f64 {
        self.p_v / self.p_b
    }

    /// Field values in [`FIELD_NAMES`] order.
    pub fn values(&self) -> [f64; 12] {
        [
            self.lambda_l,
            self.mu,
            self.lambda_b,
            self.lambda_u,
            self.rho,
            self.alpha,
            self.p_b,
            self.p_v,
            self.speed,
            self.epsilon,
            self.w_s,
            self.w_d,
        ]
    }

    pub fn get(&self, field: &str) -> Option<f64> {
        FIELD_NAMES
            .iter()
            .position(|f| *f == field)
            .map(|i| self.values()[i])
    }

    /// Returns a copy with `field` replaced, or `None` for an unknown field name.
    /// The result is not validated.
    pub fn with(&self, field: &str, value: f64) -> Option<Self> {
        let mut c = *self;
        let slot = match field {
            "lambda_l" => &mut c.lambda_l,
            "mu" => &mut c.mu,
            "lambda_b" => &mut c.lambda_b,
            "lambda_u" => &mut c.lambda_u,
            "rho" => &mut c.rho,
            "alpha" => &mut c.alpha,
            "p_b" => &mut c.p_b,
            "p_v" => &mut c.p_v,
            "speed" => &mut c.speed,
            "epsilon" => &mut c.epsilon,
            "w_s" => &mut c.w_s,
            "w_d" => &mut c.w_d,
            _ => return None,
        };
        *slot = value;
        Some(c)
    }

    /// Parses a flat TOML document. Unknown keys are rejected.
    pub fn from_toml_str(s: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(s)?;
        Ok(cfg.validate()?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }
}
