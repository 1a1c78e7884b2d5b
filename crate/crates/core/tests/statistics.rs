//! Statistical checks of the samplers and Monte Carlo estimators.

use std::f64::consts::PI;

use v2x_core::analytic::{effective_rate_parts, network_utility_with_error, total_rate_with_error};
use v2x_core::geometry::{
    advance_vehicles, sample_lines, sample_planar_ppp, sample_vehicles, sample_vehicles_extended,
};
use v2x_core::simulator::{
    estimate_association, estimate_association_at, estimate_effective_rate,
    estimate_network_utility, estimate_total_rate, estimate_zero_cell_load, sample_coverage,
};
use v2x_core::stats::replication_rng;
use v2x_core::{Estimate, Link, NetworkConfig, QuadratureSpec, SimPlan};

const SEED: u64 = 4_242;

fn draws(n: u64, seed: u64, f: impl Fn(&mut rand_chacha::ChaCha8Rng) -> f64) -> Estimate {
    let v: Vec<f64> = (0..n).map(|i| f(&mut replication_rng(seed, i))).collect();
    Estimate::from_samples(&v, seed)
}

fn combined_se(a: &Estimate, b: &Estimate) -> f64 {
    a.std_error.hypot(b.std_error)
}

#[test]
fn line_count_is_poisson_with_mean_two_lambda_r() {
    let n = 20_000;
    let counts: Vec<f64> = (0..n)
        .map(|i| {
            sample_lines(5.0, 1.0, &mut replication_rng(SEED, i))
                .lines
                .len() as f64
        })
        .collect();
    let e = Estimate::from_samples(&counts, SEED);
    assert!(e.agrees_with(10.0, 4.0, 0.0), "{e:?}");
    // Poisson: variance equals mean
    let var = e.std_error.powi(2) * n as f64;
    assert!((var / 10.0 - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn vehicle_area_density_is_lambda_l_mu() {
    let (lambda_l, mu, radius) = (5.0, 3.0, 1.5);
    let e = draws(20_000, SEED + 1, |rng| {
        let lines = sample_lines(lambda_l, radius, rng);
        sample_vehicles(&lines, mu, rng).len() as f64 / (PI * radius * radius)
    });
    assert!(e.agrees_with(lambda_l * mu, 4.0, 0.0), "{e:?}");
}

#[test]
fn base_station_count_matches_intensity() {
    let e = draws(20_000, SEED + 2, |rng| {
        sample_planar_ppp(7.0, 2.0, rng).len() as f64
    });
    assert!(e.agrees_with(7.0 * PI * 4.0, 4.0, 0.0), "{e:?}");
}

#[test]
fn association_is_invariant_under_motion() {
    let cfg = NetworkConfig {
        speed: 0.03,
        rho: 0.1,
        ..NetworkConfig::reference()
    };
    let still = estimate_association(&cfg, &SimPlan::new(&cfg, 200_000, SEED))
        .unwrap()
        .0;
    for t in [1.0, 10.0] {
        let moved = estimate_association_at(&cfg, &SimPlan::new(&cfg, 200_000, SEED + 7), t)
            .unwrap()
            .0;
        assert!(
            (moved.mean - still.mean).abs() < 4.0 * combined_se(&moved, &still),
            "t={t}: {moved:?} vs {still:?}"
        );
    }
}

/// Histogram of the number of vehicles in the disk of radius 0.5, at time 0 and
/// after moving. A 2 x k chi-square homogeneity test at the 0.1% level.
#[test]
fn vehicle_counts_are_stationary_under_motion() {
    const BINS: [usize; 6] = [12, 15, 18, 21, 24, 27];
    // 0.999 quantile of chi-square with 6 degrees of freedom
    const CRITICAL: f64 = 22.458;
    let (lambda_l, mu, speed, t) = (5.0, 5.0, 0.05, 4.0);
    let histogram = |seed: u64, moved: bool| {
        let mut h = [0f64; BINS.len() + 1];
        for i in 0..20_000 {
            let mut rng = replication_rng(seed, i);
            let lines = sample_lines(lambda_l, 1.0, &mut rng);
            let count = if moved {
                let v = sample_vehicles_extended(&lines, mu, speed * t, &mut rng);
                advance_vehicles(&v, &lines, speed, t)
                    .positions()
                    .filter(|p| p.norm() <= 0.5)
                    .count()
            } else {
                sample_vehicles(&lines, mu, &mut rng)
                    .positions()
                    .filter(|p| p.norm() <= 0.5)
                    .count()
            };
            h[BINS.iter().position(|&b| count <= b).unwrap_or(BINS.len())] += 1.0;
        }
        h
    };
    let a = histogram(SEED + 3, false);
    let b = histogram(SEED + 4, true);
    let (na, nb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    let chi2: f64 = a
        .iter()
        .zip(&b)
        .map(|(&x, &y)| {
            let pooled = (x + y) / (na + nb);
            let (ea, eb) = (pooled * na, pooled * nb);
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum();
    assert!(chi2 < CRITICAL, "chi2 = {chi2}, {a:?} vs {b:?}");
}

/// Far-field handling: doubling the window must not move the coverage estimate
/// by more than two combined standard errors.
#[test]
fn window_doubling_does_not_move_coverage() {
    let cfg = NetworkConfig::reference();
    let plan = SimPlan::new(&cfg, 20_000, SEED);
    let wide = plan.clone().with_window(2.0 * plan.window_radius);
    let near = sample_coverage(&cfg, &plan).unwrap();
    let far = sample_coverage(
        &cfg,
        &SimPlan {
            seed: SEED + 1,
            ..wide
        },
    )
    .unwrap();
    for link in [Link::Sidelink, Link::Downlink] {
        let a = near.coverage(1.0, link);
        let b = far.coverage(1.0, link);
        assert!(
            (a.mean - b.mean).abs() < 2.0 * combined_se(&a, &b),
            "{link:?}: {a:?} vs {b:?}"
        );
    }
}

#[test]
fn zero_cell_load_without_vehicle_region() {
    let cfg = NetworkConfig {
        rho: 0.0,
        ..NetworkConfig::reference()
    };
    let load = estimate_zero_cell_load(&cfg, &SimPlan::new(&cfg, 10_000, SEED)).unwrap();
    let ratio = load.mean * cfg.lambda_b / cfg.lambda_u;
    assert!((ratio - 1.28).abs() <= 0.03, "ratio {ratio} ({load:?})");
}

#[test]
fn zero_cell_load_scales_with_user_density() {
    let cfg = NetworkConfig::reference();
    let plan = SimPlan::new(&cfg, 5_000, SEED);
    let one = estimate_zero_cell_load(&cfg, &plan).unwrap();
    let two = estimate_zero_cell_load(
        &NetworkConfig {
            lambda_u: 2.0 * cfg.lambda_u,
            ..cfg
        },
        &plan,
    )
    .unwrap();
    // Same cells, so the two runs are strongly correlated; the bound is loose.
    assert!(
        (two.mean - 2.0 * one.mean).abs() < 4.0 * (2.0 * one.std_error).hypot(two.std_error),
        "{one:?} {two:?}"
    );
}

#[test]
fn effective_rate_without_vehicles_matches_cellular_formula() {
    let mc_cfg = NetworkConfig {
        rho: 0.0,
        mu: 0.0,
        ..NetworkConfig::reference()
    };
    let cellular = NetworkConfig {
        lambda_l: 0.0,
        ..mc_cfg
    };
    let analytic = effective_rate_parts(&cellular, &QuadratureSpec::default()).unwrap();
    let mc = estimate_effective_rate(&mc_cfg, &SimPlan::new(&mc_cfg, 20_000, SEED)).unwrap();
    assert_eq!(mc.cap_hits, 0);
    assert!(
        mc.rate
            .agrees_with(analytic.rate, 4.0, analytic.est_abs_error),
        "{:?} vs {}",
        mc.rate,
        analytic.rate
    );
}

#[test]
fn utility_and_total_rate_match_quadrature() {
    let cfg = NetworkConfig {
        rho: 0.15,
        ..NetworkConfig::reference()
    };
    let plan = SimPlan::new(&cfg, 20_000, SEED);
    let spec = QuadratureSpec::default();

    let (u, u_err) = network_utility_with_error(&cfg, cfg.w_s, cfg.w_d, &spec).unwrap();
    let mc = estimate_network_utility(&cfg, &plan).unwrap();
    assert!(mc.agrees_with(u, 3.0, u_err), "utility {mc:?} vs {u}");

    let (t, t_err) = total_rate_with_error(&cfg, &spec).unwrap();
    let mc = estimate_total_rate(&cfg, &plan).unwrap();
    assert!(mc.agrees_with(t, 3.0, t_err), "total rate {mc:?} vs {t}");
}
