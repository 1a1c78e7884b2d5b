//! Voronoi cells of the base-station process, handled implicitly: membership of
//! a point is decided by nearest-nucleus comparison and areas by hit-or-miss.

use std::f64::consts::PI;

use rand::Rng;

use crate::geometry::{Point2, VehicleSet};

pub(crate) const PROBES_PER_CELL: usize = 10_000;
const SECTORS: usize = 12;

/// The Voronoi cell of `nucleus` among `others`.
pub(crate) struct Cell {
    nucleus: Point2,
    /// Other nuclei sorted by distance to `nucleus`, with that distance.
    others: Vec<(f64, Point2)>,
    /// The cell lies in the closed disk of this radius around the nucleus.
    bounding_radius: f64,
}

impl Cell {
    /// `fallback_radius` bounds the cell when some direction has no neighbour.
    pub(crate) fn new(nucleus: Point2, others: &[Point2], fallback_radius: f64) -> Self {
        let mut sorted: Vec<(f64, Point2)> = others
            .iter()
            .filter(|p| **p != nucleus)
            .map(|p| (p.dist(&nucleus), *p))
            .collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

        // A point at distance d from the nucleus whose direction is within 30
        // degrees of a neighbour at distance b is closer to that neighbour once
        // b < sqrt(3) d. Sectors of 30 degrees therefore bound the cell by
        // max over sectors of (nearest neighbour distance) / sqrt(3).
        let mut sector_min = [f64::INFINITY; SECTORS];
        for (d, p) in &sorted {
            let angle = (p.y - nucleus.y).atan2(p.x - nucleus.x) + PI;
            let k = ((angle / (2.0 * PI) * SECTORS as f64) as usize).min(SECTORS - 1);
            if sector_min[k].is_infinite() {
                sector_min[k] = *d;
            }
        }
        let widest = sector_min.iter().fold(0.0f64, |m, d| m.max(*d));
        let bounding_radius = if widest.is_finite() {
            widest / 3f64.sqrt()
        } else {
            fallback_radius
        };
        Self {
            nucleus,
            others: sorted,
            bounding_radius,
        }
    }

    pub(crate) fn nucleus(&self) -> Point2 {
        self.nucleus
    }

    pub(crate) fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    /// Whether `y` is at least as close to the nucleus as to every other point.
    pub(crate) fn contains(&self, y: Point2) -> bool {
        let d2 = y.dist_sq(&self.nucleus);
        let reach = 2.0 * d2.sqrt();
        for (dz, p) in &self.others {
            // |y - p| >= |p - z| - |y - z| > |y - z| beyond this point
            if *dz > reach {
                break;
            }
            if y.dist_sq(p) < d2 {
                return false;
            }
        }
        true
    }

    /// Uniform point in the bounding disk.
    pub(crate) fn probe<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2 {
        let r = self.bounding_radius * rng.random::<f64>().sqrt();
        let (s, c) = rng.random_range(0.0..2.0 * PI).sin_cos();
        Point2::new(self.nucleus.x + r * c, self.nucleus.y + r * s)
    }

    pub(crate) fn bounding_area(&self) -> f64 {
        PI * self.bounding_radius * self.bounding_radius
    }
}

/// Vehicles that can cover some point of the cell.
pub(crate) fn vehicles_near(cell: &Cell, vehicles: &VehicleSet, rho: f64) -> Vec<Point2> {
    let reach = cell.bounding_radius + rho;
    let reach_sq = reach * reach;
    vehicles
        .positions()
        .filter(|p| p.dist_sq(&cell.nucleus) <= reach_sq)
        .collect()
}

pub(crate) fn covered(y: Point2, vehicles: &[Point2], rho: f64) -> bool {
    let r2 = rho * rho;
    vehicles.iter().any(|v| v.dist_sq(&y) <= r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_lattice_cell() {
        // nucleus at origin with the four lattice neighbours at distance 1 plus
        // diagonals: the cell is the square [-1/2, 1/2]^2.
        let mut others = Vec::new();
        for i in -2i32..=2 {
            for j in -2i32..=2 {
                if (i, j) != (0, 0) {
                    others.push(Point2::new(f64::from(i), f64::from(j)));
                }
            }
        }
        let cell = Cell::new(Point2::ORIGIN, &others, 10.0);
        assert!(cell.contains(Point2::new(0.49, 0.49)));
        assert!(!cell.contains(Point2::new(0.51, 0.0)));
        // half-diagonal sqrt(2)/2 must fit in the bound
        assert!(cell.bounding_radius() >= 0.5f64.sqrt());
    }

    #[test]
    fn empty_sector_falls_back() {
        let cell = Cell::new(Point2::ORIGIN, &[Point2::new(1.0, 0.0)], 7.0);
        assert_eq!(cell.bounding_radius(), 7.0);
        assert!(cell.contains(Point2::new(-5.0, 0.0)));
        assert!(!cell.contains(Point2::new(0.6, 0.0)));
    }
}
