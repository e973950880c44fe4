use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        math::hypot(self.x - other.x, self.y - other.y)
    }
}

/// Positions and headings of every SU and of the PU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub su_positions: Vec<Point>,
    pub pu_position: Point,
    /// Radians in `[0, 2π)`.
    pub su_headings: Vec<f64>,
    pub pu_heading: f64,
}

impl Topology {
    pub fn n_su(&self) -> usize {
        self.su_positions.len()
    }

    /// Distance from SU `su` to the PU.
    pub fn pu_distance(&self, su: usize) -> f64 {
        self.su_positions[su].distance(&self.pu_position)
    }

    pub fn contained_in(&self, side: f64) -> bool {
        let inside = |p: &Point| (0.0..=side).contains(&p.x) && (0.0..=side).contains(&p.y);
        self.su_positions.iter().all(inside) && inside(&self.pu_position)
    }
}

fn uniform_point<R: Rng + ?Sized>(side: f64, rng: &mut R) -> Point {
    let x = rng.random::<f64>() * side;
    let y = rng.random::<f64>() * side;
    Point::new(x, y)
}

fn uniform_heading<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>() * TAU
}

/// Uniform deployment of `n_su` SUs and one PU over the square.
pub fn init_topology<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Topology {
    let side = cfg.area_side_m;
    let mut su_positions = Vec::with_capacity(cfg.n_su);
    let mut su_headings = Vec::with_capacity(cfg.n_su);
    for _ in 0..cfg.n_su {
        su_positions.push(uniform_point(side, rng));
        su_headings.push(uniform_heading(rng));
    }
    let pu_position = uniform_point(side, rng);
    let pu_heading = uniform_heading(rng);
    Topology { su_positions, pu_position, su_headings, pu_heading }
}

fn wrap_angle(theta: f64) -> f64 {
    let r = libm::fmod(theta, TAU);
    let r = if r < 0.0 { r + TAU } else { r };
    // fmod of a value just below 0 can round up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Fold `c` back into `[0, side]`; returns the folded value and whether an
/// odd number of reflections happened.
fn reflect(mut c: f64, side: f64) -> (f64, bool) {
    let mut flipped = false;
    loop {
        if c < 0.0 {
            c = -c;
        } else if c > side {
            c = 2.0 * side - c;
        } else {
            return (c, flipped);
        }
        flipped = !flipped;
    }
}

/// Move one node `dist` metres along `heading`, reflecting off the walls of
/// the `[0, side]²` square. Each wall hit mirrors the heading.
pub fn advance_node(pos: Point, heading: f64, dist: f64, side: f64) -> (Point, f64) {
    let (x, flip_x) = reflect(pos.x + dist * libm::cos(heading), side);
    let (y, flip_y) = reflect(pos.y + dist * libm::sin(heading), side);
    let mut h = heading;
    if flip_x {
        h = PI - h;
    }
    if flip_y {
        h = -h;
    }
    (Point::new(x, y), wrap_angle(h))
}

/// One sensing period of random-direction mobility: every node travels
/// `v·Δt`, bounces off the area boundary, then its heading is perturbed by a
/// uniform jitter of ±`heading_jitter_deg`.
pub fn step_mobility<R: Rng + ?Sized>(topo: &Topology, cfg: &ScenarioConfig, rng: &mut R) -> Topology {
    let dist = cfg.step_distance_m();
    let side = cfg.area_side_m;
    let jitter = cfg.heading_jitter_deg.to_radians();
    let mut step = |p: Point, h: f64| {
        let (p, h) = advance_node(p, h, dist, side);
        let dh = (rng.random::<f64>() * 2.0 - 1.0) * jitter;
        (p, wrap_angle(h + dh))
    };
    let mut su_positions = Vec::with_capacity(topo.n_su());
    let mut su_headings = Vec::with_capacity(topo.n_su());
    for (&p, &h) in topo.su_positions.iter().zip(&topo.su_headings) {
        let (p, h) = step(p, h);
        su_positions.push(p);
        su_headings.push(h);
    }
    let (pu_position, pu_heading) = step(topo.pu_position, topo.pu_heading);
    Topology { su_positions, pu_position, su_headings, pu_heading }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Lineage};

    #[test]
    fn deployment_fits_the_area() {
        let cfg = ScenarioConfig::default();
        let topo = init_topology(&cfg, &mut stream(1, Lineage::Topology, 0));
        assert_eq!(topo.su_positions.len(), 32);
        assert_eq!(topo.su_headings.len(), 32);
        assert!(topo.contained_in(200.0));
        assert!(topo.su_headings.iter().all(|h| (0.0..TAU).contains(h)));
    }

    #[test]
    fn deployment_replays() {
        let cfg = ScenarioConfig::default();
        let a = init_topology(&cfg, &mut stream(42, Lineage::Topology, 0));
        let b = init_topology(&cfg, &mut stream(42, Lineage::Topology, 0));
        assert_eq!(a, b);
    }

    #[test]
    fn step_length_is_v_dt() {
        // 3 km/h for 2 s
        let dist = (3000.0 / 3600.0) * 2.0;
        assert!((dist - 1.666_666_666_666_666_7_f64).abs() < 1e-15);
        let cfg = ScenarioConfig::default();
        assert!((cfg.step_distance_m() - dist).abs() < 1e-15);
        let (p, h) = advance_node(Point::new(100.0, 100.0), 0.3, dist, 200.0);
        assert!((p.distance(&Point::new(100.0, 100.0)) - dist).abs() < 1e-12);
        assert_eq!(h, 0.3);
    }

    #[test]
    fn zero_velocity_freezes_positions() {
        let cfg = ScenarioConfig { velocity_mps: 0.0, ..Default::default() };
        let mut rng = stream(3, Lineage::Topology, 0);
        let topo = init_topology(&cfg, &mut rng);
        let next = step_mobility(&topo, &cfg, &mut rng);
        assert_eq!(next.su_positions, topo.su_positions);
        assert_eq!(next.pu_position, topo.pu_position);
    }

    #[test]
    fn wall_reflection() {
        let (p, h) = advance_node(Point::new(0.5, 100.0), PI, 5.0 / 3.0, 200.0);
        assert!((p.x - (5.0 / 3.0 - 0.5)).abs() < 1e-12);
        assert!((p.x - 1.166_666_666_666_666_7).abs() < 1e-12);
        assert!((p.y - 100.0).abs() < 1e-12);
        assert!(h.abs() < 1e-12 || (h - TAU).abs() < 1e-12);
    }

    #[test]
    fn corner_reflection_mirrors_both_axes() {
        let start = Point::new(199.5, 199.5);
        let (p, h) = advance_node(start, PI / 4.0, 2.0, 200.0);
        assert!(p.x < 200.0 && p.y < 200.0);
        assert!((h - 5.0 * PI / 4.0).abs() < 1e-12);
    }
}
