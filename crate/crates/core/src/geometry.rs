//! Spatial model: planar Poisson processes, the Poisson line process in
//! cylinder coordinates, Cox vehicles on the lines, the union-of-disks vehicle
//! region and vehicle motion.
//!
//! Everything is sampled inside a disk window of radius `R` centred at the
//! origin, where the typical user sits.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn dist_sq(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        self.dist_sq(other).sqrt()
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// A line `{p : p . (cos theta, sin theta) = r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Line {
    /// Signed displacement from the origin, km.
    pub r: f64,
    /// Normal angle in `[0, pi)`.
    pub theta: f64,
}

impl From<[f64; 2]> for Line {
    fn from([r, theta]: [f64; 2]) -> Self {
        Self { r, theta }
    }
}

impl From<Line> for [f64; 2] {
    fn from(l: Line) -> Self {
        [l.r, l.theta]
    }
}

impl Line {
    pub fn normal(&self) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (c, s)
    }

    /// Point at signed arc-length `offset` from the foot of the perpendicular.
    pub fn point_at(&self, offset: f64) -> Point2 {
        let (s, c) = self.theta.sin_cos();
        Point2::new(self.r * c - offset * s, self.r * s + offset * c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSet {
    pub lines: Vec<Line>,
    pub window_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub position: Point2,
    pub line_index: usize,
    /// Signed km along the line, measured from the foot of the perpendicular.
    pub offset: f64,
    /// +1 or -1.
    pub direction: i8,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleSet {
    pub vehicles: Vec<Vehicle>,
}

impl VehicleSet {
    pub fn len(&self) -> usize {
        self.vehicles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vehicles.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = Point2> + '_ {
        self.vehicles.iter().map(|v| v.position)
    }
}

/// One sampled network inside a disk window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub lines: LineSet,
    pub vehicles: VehicleSet,
    pub base_stations: Vec<Point2>,
    pub window_radius: f64,
    pub seed: u64,
}

impl Realization {
    /// Samples lines, vehicles and base stations in the disk of `window_radius`.
    /// `seed` is recorded for provenance only; randomness comes from `rng`.
    pub fn sample<R: Rng + ?Sized>(
        cfg: &NetworkConfig,
        window_radius: f64,
        seed: u64,
        rng: &mut R,
    ) -> Self {
        let lines = sample_lines(cfg.lambda_l, window_radius, rng);
        let vehicles = sample_vehicles(&lines, cfg.mu, rng);
        let base_stations = sample_planar_ppp(cfg.lambda_b, window_radius, rng);
        Self {
            lines,
            vehicles,
            base_stations,
            window_radius,
            seed,
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// Draws a Poisson count; a nonpositive mean gives zero.
pub fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for nonpositive or non-finite means.
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    d.sample(rng) as usize
}

/// Lines hitting the disk of radius `window_radius`: the cylinder process
/// restricted to `|r| <= R` has mean `(lambda_l / pi) * 2R * pi = 2 lambda_l R` points.
pub fn sample_lines<R: Rng + ?Sized>(lambda_l: f64, window_radius: f64, rng: &mut R) -> LineSet {
    let n = poisson_count(2.0 * lambda_l * window_radius, rng);
    let lines = (0..n)
        .map(|_| Line {
            r: rng.random_range(-window_radius..=window_radius),
            theta: rng.random_range(0.0..PI),
        })
        .collect();
    LineSet {
        lines,
        window_radius,
    }
}

pub fn chord_half_length(r: f64, window_radius: f64) -> Result<f64, GeometryError> {
    if r.abs() > window_radius {
        return Err(GeometryError::OutsideWindow {
            r,
            radius: window_radius,
        });
    }
    Ok((window_radius * window_radius - r * r).max(0.0).sqrt())
}

fn half_chord(line: &Line, window_radius: f64) -> f64 {
    chord_half_length(line.r, window_radius).unwrap_or(0.0)
}

/// Independent linear Poisson processes of intensity `mu` on the window chord of
/// every line, each vehicle with a fair random direction.
pub fn sample_vehicles<R: Rng + ?Sized>(lines: &LineSet, mu: f64, rng: &mut R) -> VehicleSet {
    sample_vehicles_extended(lines, mu, 0.0, rng)
}

/// Like [`sample_vehicles`], but on every chord lengthened by `margin` at both
/// ends. Vehicles in the margins lie outside the window; they exist so that
/// [`advance_vehicles`] can move traffic into the window.
pub fn sample_vehicles_extended<R: Rng + ?Sized>(
    lines: &LineSet,
    mu: f64,
    margin: f64,
    rng: &mut R,
) -> VehicleSet {
    let mut vehicles = Vec::new();
    if mu <= 0.0 {
        return VehicleSet { vehicles };
    }
    for (line_index, line) in lines.lines.iter().enumerate() {
        let half = half_chord(line, lines.window_radius) + margin;
        let n = poisson_count(2.0 * mu * half, rng);
        for _ in 0..n {
            let offset = rng.random_range(-half..=half);
            let direction = if rng.random::<bool>() { 1 } else { -1 };
            vehicles.push(Vehicle {
                position: line.point_at(offset),
                line_index,
                offset,
                direction,
            });
        }
    }
    VehicleSet { vehicles }
}

/// Homogeneous planar Poisson process on the disk of radius `window_radius`.
pub fn sample_planar_ppp<R: Rng + ?Sized>(
    lambda: f64,
    window_radius: f64,
    rng: &mut R,
) -> Vec<Point2> {
    let n = poisson_count(lambda * PI * window_radius * window_radius, rng);
    (0..n)
        .map(|_| {
            let rad = window_radius * rng.random::<f64>().sqrt();
            let (s, c) = rng.random_range(0.0..2.0 * PI).sin_cos();
            Point2::new(rad * c, rad * s)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    pub index: usize,
    pub point: Point2,
    pub distance: f64,
}

/// Nearest point by Euclidean distance; ties go to the lowest index.
pub fn nearest(points: &[Point2], query: Point2) -> Result<Nearest, GeometryError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        let d2 = p.dist_sq(&query);
        if best.is_none_or(|(_, b)| d2 < b) {
            best = Some((i, d2));
        }
    }
    best.map(|(index, d2)| Nearest {
        index,
        point: points[index],
        distance: d2.sqrt(),
    })
    .ok_or(GeometryError::EmptySet)
}

/// Whether `query` lies in the union of closed disks of radius `rho` around the vehicles.
pub fn in_vehicle_region(query: Point2, vehicles: &VehicleSet, rho: f64) -> bool {
    let r2 = rho * rho;
    vehicles.positions().any(|p| p.dist_sq(&query) <= r2)
}

/// Moves every vehicle `direction * speed * t` along its line and drops those that
/// leave their window chord.
pub fn advance_vehicles(vehicles: &VehicleSet, lines: &LineSet, speed: f64, t: f64) -> VehicleSet {
    let shift = speed * t;
    let vehicles = vehicles
        .vehicles
        .iter()
        .filter_map(|v| {
            let line = &lines.lines[v.line_index];
            let offset = v.offset + f64::from(v.direction) * shift;
            (offset.abs() <= half_chord(line, lines.window_radius)).then(|| Vehicle {
                position: if shift == 0.0 {
                    v.position
                } else {
                    line.point_at(offset)
                },
                offset,
                ..*v
            })
        })
        .collect();
    VehicleSet { vehicles }
}
