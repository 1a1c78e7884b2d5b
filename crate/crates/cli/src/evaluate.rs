//! Per-config evaluation of one metric by quadrature, by simulation, or both.

use serde::Serialize;
use v2x_core::analytic::{
    dl_coverage, effective_rate_parts, network_utility_with_error, p_assoc_sl, sl_coverage,
    total_coverage, total_rate_with_error, NU,
};
use v2x_core::simulator::{
    estimate_association, estimate_effective_rate, estimate_network_utility, estimate_total_rate,
    estimate_voronoi_area_moment, sample_coverage,
};
use v2x_core::{
    AnalyticError, CoverageResult, Estimate, Link, NetworkConfig, QuadratureSpec, SimError, SimPlan,
};

use crate::request::{Metric, Mode, RunRequest};

/// `NU` is quoted to three decimals; half a unit in the last place.
const NU_ROUNDING: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Quadrature value against a Monte Carlo estimate of the same quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationRow {
    pub metric: Metric,
    pub config: NetworkConfig,
    pub tau_or_epsilon: Option<f64>,
    pub analytic: f64,
    pub analytic_error: f64,
    pub mc: Estimate,
    pub z_score: f64,
    pub verdict: Verdict,
}

impl ValidationRow {
    /// Pass iff `|analytic - mc| <= 3 std_error + est_abs_error`.
    pub fn new(
        metric: Metric,
        config: NetworkConfig,
        tau_or_epsilon: Option<f64>,
        analytic: (f64, f64),
        mc: Estimate,
    ) -> Self {
        let (value, error) = analytic;
        let pass = (value - mc.mean).abs() <= 3.0 * mc.std_error + error;
        Self {
            metric,
            config,
            tau_or_epsilon,
            analytic: value,
            analytic_error: error,
            mc,
            z_score: mc.z_score(value),
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        }
    }
}

/// One output line. Columns that do not apply to the mode are empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    #[serde(flatten)]
    pub config: NetworkConfig,
    pub metric: Metric,
    pub tau_or_epsilon: Option<f64>,
    /// Quadrature value in analytic and validate modes, MC mean otherwise.
    pub value: Option<f64>,
    pub std_error_or_quad_error: Option<f64>,
    pub n_samples: Option<u64>,
    pub seed: Option<u64>,
    pub window_radius: Option<f64>,
    pub mc_mean: Option<f64>,
    pub mc_std_error: Option<f64>,
    pub z_score: Option<f64>,
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
}

impl Row {
    fn empty(config: NetworkConfig, metric: Metric, tau_or_epsilon: Option<f64>) -> Self {
        Row {
            config,
            metric,
            tau_or_epsilon,
            value: None,
            std_error_or_quad_error: None,
            n_samples: None,
            seed: None,
            window_radius: None,
            mc_mean: None,
            mc_std_error: None,
            z_score: None,
            verdict: None,
            error: None,
        }
    }

    pub fn failed(
        config: NetworkConfig,
        metric: Metric,
        tau_or_epsilon: Option<f64>,
        error: String,
    ) -> Self {
        Row {
            error: Some(error),
            ..Row::empty(config, metric, tau_or_epsilon)
        }
    }

    fn from_validation(v: ValidationRow, window_radius: f64) -> Self {
        Row {
            value: Some(v.analytic),
            std_error_or_quad_error: Some(v.analytic_error),
            n_samples: Some(v.mc.n_samples),
            seed: Some(v.mc.seed),
            window_radius: Some(window_radius),
            mc_mean: Some(v.mc.mean),
            mc_std_error: Some(v.mc.std_error),
            z_score: Some(v.z_score),
            verdict: Some(v.verdict),
            ..Row::empty(v.config, v.metric, v.tau_or_epsilon)
        }
    }
}

/// Evaluation points of a metric: the tau grid, the config's epsilon, or a
/// single point without a threshold.
pub fn points(cfg: &NetworkConfig, metric: Metric, tau_grid: &[f64]) -> Vec<Option<f64>> {
    if metric.uses_tau() {
        tau_grid.iter().copied().map(Some).collect()
    } else if metric.uses_epsilon() {
        vec![Some(cfg.epsilon)]
    } else {
        vec![None]
    }
}

fn describe(metric: Metric, point: Option<f64>) -> String {
    match point {
        Some(t) if metric.uses_tau() => format!("{metric} at tau={t}"),
        Some(e) => format!("{metric} at epsilon={e}"),
        None => metric.to_string(),
    }
}

/// Quadrature value and error bound at one point.
pub fn analytic(
    cfg: &NetworkConfig,
    metric: Metric,
    point: Option<f64>,
    spec: &QuadratureSpec,
) -> Result<(f64, f64), String> {
    let tau = point.unwrap_or(0.0);
    type Coverage =
        fn(&NetworkConfig, f64, &QuadratureSpec) -> Result<CoverageResult, AnalyticError>;
    let coverage = |f: Coverage| f(cfg, tau, spec).map(|c| (c.value, c.est_abs_error));
    let out = match metric {
        Metric::Assoc => {
            p_assoc_sl(cfg.lambda_l, cfg.mu, cfg.rho, spec).map(|c| (c.value, c.est_abs_error))
        }
        Metric::DlCov => coverage(dl_coverage),
        Metric::SlCov => coverage(sl_coverage),
        Metric::TotalCov => coverage(total_coverage),
        Metric::EffRate => effective_rate_parts(cfg, spec).map(|p| (p.rate, p.est_abs_error)),
        Metric::Utility => network_utility_with_error(cfg, cfg.w_s, cfg.w_d, spec),
        Metric::TotalRate => total_rate_with_error(cfg, spec),
        Metric::Nu => Ok((NU, NU_ROUNDING)),
    };
    out.map_err(|e| format!("{}: {e}", describe(metric, point)))
}

/// Monte Carlo estimates at every point, sharing one set of draws, and the
/// window radius used.
pub fn montecarlo(
    cfg: &NetworkConfig,
    metric: Metric,
    points: &[Option<f64>],
    n_samples: u64,
    seed: u64,
) -> Result<(Vec<Estimate>, f64), String> {
    let plan = SimPlan::new(cfg, n_samples, seed);
    let window = plan.window_radius;
    let fail = |e: SimError| format!("{metric} (simulation): {e}");
    let single = |e: Estimate| (vec![e; points.len()], window);
    match metric {
        Metric::Assoc => estimate_association(cfg, &plan)
            .map(|(sl, _)| single(sl))
            .map_err(fail),
        Metric::DlCov | Metric::SlCov | Metric::TotalCov => {
            let link = match metric {
                Metric::DlCov => Link::Downlink,
                Metric::SlCov => Link::Sidelink,
                _ => Link::Total,
            };
            let samples = sample_coverage(cfg, &plan).map_err(fail)?;
            let est = points
                .iter()
                .map(|t| samples.coverage(t.unwrap_or(0.0), link))
                .collect();
            Ok((est, window))
        }
        Metric::EffRate => estimate_effective_rate(cfg, &plan)
            .map(|r| single(r.rate))
            .map_err(fail),
        Metric::Utility => estimate_network_utility(cfg, &plan)
            .map(single)
            .map_err(fail),
        Metric::TotalRate => estimate_total_rate(cfg, &plan).map(single).map_err(fail),
        Metric::Nu => {
            // ν does not depend on the roads; only the cell scale matters.
            let window = 10.0 / (std::f64::consts::PI * cfg.lambda_b).sqrt();
            let plan = plan.with_window(window);
            let m = estimate_voronoi_area_moment(cfg.lambda_b, &plan).map_err(fail)?;
            let s = cfg.lambda_b * cfg.lambda_b;
            let e = Estimate {
                mean: m.mean * s,
                std_error: m.std_error * s,
                ..m
            };
            Ok((vec![e; points.len()], window))
        }
    }
}

/// All rows of one config, in point order.
pub fn evaluate(cfg: &NetworkConfig, req: &RunRequest) -> Vec<Row> {
    let metric = req.metric;
    let pts = points(cfg, metric, &req.tau_grid);
    let spec = QuadratureSpec::default();
    let seed = req.seed.unwrap_or(0);

    let analytic_rows = || pts.iter().map(|&p| (p, analytic(cfg, metric, p, &spec)));
    match req.mode {
        Mode::Analytic => analytic_rows()
            .map(|(p, r)| match r {
                Ok((value, error)) => Row {
                    value: Some(value),
                    std_error_or_quad_error: Some(error),
                    ..Row::empty(*cfg, metric, p)
                },
                Err(e) => Row::failed(*cfg, metric, p, e),
            })
            .collect(),
        Mode::Montecarlo => match montecarlo(cfg, metric, &pts, req.n_samples, seed) {
            Ok((est, window)) => pts
                .iter()
                .zip(est)
                .map(|(&p, e)| Row {
                    value: Some(e.mean),
                    std_error_or_quad_error: Some(e.std_error),
                    n_samples: Some(e.n_samples),
                    seed: Some(e.seed),
                    window_radius: Some(window),
                    ..Row::empty(*cfg, metric, p)
                })
                .collect(),
            Err(e) => pts
                .iter()
                .map(|&p| Row::failed(*cfg, metric, p, e.clone()))
                .collect(),
        },
        Mode::Validate => {
            let mc = montecarlo(cfg, metric, &pts, req.n_samples, seed);
            analytic_rows()
                .enumerate()
                .map(|(i, (p, a))| match (a.as_ref(), &mc) {
                    (Ok(a), Ok((est, window))) => Row::from_validation(
                        ValidationRow::new(metric, *cfg, p, *a, est[i]),
                        *window,
                    ),
                    (Err(e), _) | (_, Err(e)) => Row::failed(*cfg, metric, p, e.clone()),
                })
                .collect()
        }
    }
}
