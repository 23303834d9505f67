#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajproto::geometry::{Point2, Trajectory};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points<R: Rng>(rng: &mut R, m: usize, range: f64) -> Vec<Point2<f64>> {
    (0..m)
        .map(|_| Point2::new(rng.random_range(-range..range), rng.random_range(-range..range)))
        .collect()
}

/// Random walk with a guaranteed net displacement, so it normalizes.
pub fn random_walk<R: Rng>(rng: &mut R, id: &str, m: usize) -> Trajectory<f64> {
    loop {
        let mut p = Point2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
        let drift = Point2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let mut pts = vec![p];
        for _ in 1..m {
            p = p + drift + Point2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            pts.push(p);
        }
        let t = Trajectory::new(id, pts).unwrap();
        if (t.last() - t.first()).norm() > 1e-3 {
            return t;
        }
    }
}

/// Central-difference agreement: relative 1e-4, or absolute 1e-8 near zero.
pub fn grad_close(analytic: f64, numeric: f64) -> bool {
    let diff = (analytic - numeric).abs();
    diff <= 1e-8 || diff <= 1e-4 * analytic.abs().max(numeric.abs())
}
