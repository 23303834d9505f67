//! Synthetic labeled trajectories in four motion patterns: constant
//! velocity, linear acceleration, and left/right curves.

use std::f64::consts::TAU;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{csv_err, Error, Result};
use crate::geometry::{Dataset, Point2, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MotionPattern {
    Constant,
    Accelerated,
    CurveLeft,
    CurveRight,
}

impl MotionPattern {
    pub const ALL: [MotionPattern; 4] = [
        MotionPattern::Constant,
        MotionPattern::Accelerated,
        MotionPattern::CurveLeft,
        MotionPattern::CurveRight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MotionPattern::Constant => "constant",
            MotionPattern::Accelerated => "accelerated",
            MotionPattern::CurveLeft => "curve_left",
            MotionPattern::CurveRight => "curve_right",
        }
    }
}

impl fmt::Display for MotionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MotionPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MotionPattern::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("unknown motion pattern `{s}`"),
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TurnDirection {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgtdConfig {
    pub constant: usize,
    pub accelerated: usize,
    pub curve_left: usize,
    pub curve_right: usize,
    pub m: usize,
    /// Mean per-step displacement.
    pub base_speed_mean: f64,
    pub base_speed_std: f64,
    /// Ratio of final to initial speed for accelerated samples.
    pub accel_factor_range: (f64, f64),
    /// Total heading change of curved samples, in degrees.
    pub curve_angle_range_deg: (f64, f64),
    /// `(x_min, x_max, y_min, y_max)` of start points.
    pub start_region: (f64, f64, f64, f64),
    pub seed: u64,
}

impl Default for SgtdConfig {
    fn default() -> Self {
        Self {
            constant: 125,
            accelerated: 33,
            curve_left: 29,
            curve_right: 13,
            m: 31,
            base_speed_mean: 1.0,
            base_speed_std: 0.2,
            accel_factor_range: (1.5, 2.5),
            curve_angle_range_deg: (80.0, 90.0),
            start_region: (0.0, 100.0, 0.0, 100.0),
            seed: 7,
        }
    }
}

impl SgtdConfig {
    pub fn total(&self) -> usize {
        self.constant + self.accelerated + self.curve_left + self.curve_right
    }

    pub fn count(&self, pattern: MotionPattern) -> usize {
        match pattern {
            MotionPattern::Constant => self.constant,
            MotionPattern::Accelerated => self.accelerated,
            MotionPattern::CurveLeft => self.curve_left,
            MotionPattern::CurveRight => self.curve_right,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.total() == 0 {
            return bad("total sample count must be at least 1");
        }
        if self.m < 2 {
            return bad("M must be at least 2");
        }
        if !(self.base_speed_mean > 0.0 && self.base_speed_mean.is_finite()) {
            return bad("base_speed_mean must be positive");
        }
        if !(self.base_speed_std >= 0.0 && self.base_speed_std.is_finite()) {
            return bad("base_speed_std must be non-negative");
        }
        let (f_lo, f_hi) = self.accel_factor_range;
        if !(f_lo > 1.0 && f_hi >= f_lo && f_hi.is_finite()) {
            return bad("accel_factor_range must satisfy 1 < lo <= hi");
        }
        let (a_lo, a_hi) = self.curve_angle_range_deg;
        if !(a_lo >= 0.0 && a_hi >= a_lo && a_hi < 180.0) {
            return bad("curve_angle_range_deg must satisfy 0 <= lo <= hi < 180");
        }
        let (x0, x1, y0, y1) = self.start_region;
        if !(x1 >= x0 && y1 >= y0 && [x0, x1, y0, y1].iter().all(|v| v.is_finite())) {
            return bad("start_region must be a finite box");
        }
        Ok(())
    }
}

/// Random draws behind one generated sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kinematics {
    pub start: Point2<f64>,
    /// Initial heading in radians.
    pub heading: f64,
    /// Initial per-step displacement.
    pub speed: f64,
    /// Final/initial speed ratio (accelerated samples only).
    pub accel_factor: Option<f64>,
    /// Signed total heading change in radians (curves only).
    pub turn: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedSample {
    pub trajectory: Trajectory<f64>,
    pub kinematics: Kinematics,
}

fn draw_common<R: Rng>(rng: &mut R, cfg: &SgtdConfig) -> (Point2<f64>, f64, f64) {
    let (x0, x1, y0, y1) = cfg.start_region;
    let start = Point2::new(rng.random_range(x0..=x1), rng.random_range(y0..=y1));
    let heading = rng.random_range(0.0..TAU);
    let normal = Normal::new(cfg.base_speed_mean, cfg.base_speed_std).expect("validated speed law");
    let floor = 0.1 * cfg.base_speed_mean;
    let speed = loop {
        let v = normal.sample(rng);
        if v >= floor {
            break v;
        }
    };
    (start, heading, speed)
}

fn integrate(id: &str, start: Point2<f64>, steps: impl Iterator<Item = Point2<f64>>) -> Trajectory<f64> {
    let mut points = vec![start];
    let mut p = start;
    for step in steps {
        p = p + step;
        points.push(p);
    }
    Trajectory::new(id, points).expect("generated points are finite")
}

pub fn gen_constant<R: Rng>(rng: &mut R, cfg: &SgtdConfig) -> GeneratedSample {
    let (start, heading, speed) = draw_common(rng, cfg);
    let step = Point2::new(heading.cos(), heading.sin()) * speed;
    GeneratedSample {
        trajectory: integrate("constant", start, (1..cfg.m).map(|_| step)),
        kinematics: Kinematics {
            start,
            heading,
            speed,
            accel_factor: None,
            turn: None,
        },
    }
}

/// Step speed ramps linearly from `v0` to `f * v0` over the `M - 1` steps.
pub fn gen_accelerated<R: Rng>(rng: &mut R, cfg: &SgtdConfig) -> GeneratedSample {
    let (start, heading, speed) = draw_common(rng, cfg);
    let (lo, hi) = cfg.accel_factor_range;
    let factor = rng.random_range(lo..=hi);
    let dir = Point2::new(heading.cos(), heading.sin());
    let last = (cfg.m - 2).max(1) as f64;
    let steps = (0..cfg.m - 1).map(move |k| dir * (speed * (1.0 + (factor - 1.0) * k as f64 / last)));
    GeneratedSample {
        trajectory: integrate("accelerated", start, steps),
        kinematics: Kinematics {
            start,
            heading,
            speed,
            accel_factor: Some(factor),
            turn: None,
        },
    }
}

/// Constant speed with a constant turn rate; the heading changes by the
/// drawn total angle between the first and the last step.
pub fn gen_curve<R: Rng>(rng: &mut R, cfg: &SgtdConfig, direction: TurnDirection) -> GeneratedSample {
    let (start, heading, speed) = draw_common(rng, cfg);
    let (lo, hi) = cfg.curve_angle_range_deg;
    let magnitude = rng.random_range(lo..=hi).to_radians();
    let turn = match direction {
        TurnDirection::Left => magnitude,
        TurnDirection::Right => -magnitude,
    };
    let per_step = if cfg.m > 2 { turn / (cfg.m - 2) as f64 } else { 0.0 };
    let steps = (0..cfg.m - 1).map(move |k| {
        let h = heading + per_step * k as f64;
        Point2::new(h.cos(), h.sin()) * speed
    });
    let id = match direction {
        TurnDirection::Left => "curve_left",
        TurnDirection::Right => "curve_right",
    };
    GeneratedSample {
        trajectory: integrate(id, start, steps),
        kinematics: Kinematics {
            start,
            heading,
            speed,
            accel_factor: None,
            turn: Some(turn),
        },
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub dataset: Dataset<f64>,
    pub labels: Vec<MotionPattern>,
}

pub fn generate_sgtd(cfg: &SgtdConfig) -> Result<LabeledDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pairs = Vec::with_capacity(cfg.total());
    for pattern in MotionPattern::ALL {
        for _ in 0..cfg.count(pattern) {
            let sample = match pattern {
                MotionPattern::Constant => gen_constant(&mut rng, cfg),
                MotionPattern::Accelerated => gen_accelerated(&mut rng, cfg),
                MotionPattern::CurveLeft => gen_curve(&mut rng, cfg, TurnDirection::Left),
                MotionPattern::CurveRight => gen_curve(&mut rng, cfg, TurnDirection::Right),
            };
            pairs.push((sample.trajectory, pattern));
        }
    }
    pairs.shuffle(&mut rng);
    let width = (pairs.len().saturating_sub(1)).to_string().len().max(3);
    let (samples, labels) = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (t, l))| (t.with_id(format!("sgtd-{i:0width$}")), l))
        .unzip();
    Ok(LabeledDataset {
        dataset: Dataset::new(samples)?,
        labels,
    })
}

/// Writes `sample_id,label` rows with a header.
pub fn write_labels_csv<W: Write>(ds: &LabeledDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sample_id", "label"]).map_err(csv_err)?;
    for (s, l) in ds.dataset.samples().iter().zip(&ds.labels) {
        w.write_record([s.id(), l.as_str()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
