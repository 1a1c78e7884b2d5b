//! Numerical evaluation of the closed-form results: association probabilities,
//! joint downlink and sidelink SIR coverage, zero-cell areas, effective rate,
//! network utility and total rate.

mod association;
mod coverage;
pub mod quadrature;
mod rate;

pub use association::{mean_zero_cell_areas, p_assoc_dl, p_assoc_sl, ZeroCellAreas};
pub use coverage::{dl_coverage, sl_coverage, total_coverage};
pub use quadrature::{integrate, integrate_to_infinity, Quadrature, QuadratureSpec, TailRule};
pub use rate::{
    effective_rate, effective_rate_parts, network_utility, network_utility_with_error, total_rate,
    total_rate_with_error, RateParts,
};

/// Second moment of the area of the typical Poisson–Voronoi cell at unit
/// intensity.
pub const NU: f64 = 1.280;

pub fn nu() -> f64 {
    NU
}

/// A probability evaluated by quadrature together with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageResult {
    pub value: f64,
    pub est_abs_error: f64,
}

impl CoverageResult {
    pub const ZERO: CoverageResult = CoverageResult {
        value: 0.0,
        est_abs_error: 0.0,
    };

    /// Whether the value is a probability up to its error bound.
    pub fn is_probability(&self) -> bool {
        self.est_abs_error >= 0.0
            && self.value >= -self.est_abs_error
            && self.value <= 1.0 + self.est_abs_error
    }
}
