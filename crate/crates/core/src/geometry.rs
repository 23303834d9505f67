//! Planar points, fixed-length trajectories and similarity transforms.
//!
//! Every other module works in terms of these value types. They are
//! validated on construction and immutable afterwards.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    /// Counter-clockwise quarter turn.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    #[inline]
    pub fn rotate(self, cos: T, sin: T) -> Self {
        Self::new(cos * self.x - sin * self.y, sin * self.x + cos * self.y)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn cast<U: Scalar>(self) -> Point2<U> {
        Point2::new(
            U::from_f64(self.x.to_f64().unwrap_or(f64::NAN)).unwrap_or(U::nan()),
            U::from_f64(self.y.to_f64().unwrap_or(f64::NAN)).unwrap_or(U::nan()),
        )
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> Mul<T> for Point2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: T) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

impl<T: Scalar> Neg for Point2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// A fixed-length sequence of planar points with an identifier.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    id: String,
    points: Vec<Point2<T>>,
}

impl<T: Scalar> Trajectory<T> {
    /// Fails unless there are at least two points and all are finite.
    pub fn new(id: impl Into<String>, points: Vec<Point2<T>>) -> Result<Self> {
        let id = id.into();
        if points.len() < 2 {
            return Err(Error::InvalidTrajectory {
                id,
                reason: format!("needs at least 2 points, got {}", points.len()),
            });
        }
        if let Some(j) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidTrajectory {
                id,
                reason: format!("point {j} is not finite"),
            });
        }
        Ok(Self { id, points })
    }

    /// Caller guarantees the invariants (used for outputs of transforms on
    /// already-validated inputs).
    pub(crate) fn from_parts(id: String, points: Vec<Point2<T>>) -> Self {
        debug_assert!(points.len() >= 2);
        Self { id, points }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn points(&self) -> &[Point2<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false for a valid trajectory; present for API symmetry.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> Point2<T> {
        self.points[0]
    }

    pub fn last(&self) -> Point2<T> {
        self.points[self.points.len() - 1]
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn into_points(self) -> Vec<Point2<T>> {
        self.points
    }

    pub fn cast<U: Scalar>(&self) -> Trajectory<U> {
        Trajectory {
            id: self.id.clone(),
            points: self.points.iter().map(|p| p.cast()).collect(),
        }
    }
}

/// Samples that all share the sequence length `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    samples: Vec<Trajectory<T>>,
    m: usize,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(samples: Vec<Trajectory<T>>) -> Result<Self> {
        let m = samples
            .first()
            .map(Trajectory::len)
            .ok_or_else(|| Error::EmptyResult("dataset has no samples".into()))?;
        if let Some(bad) = samples.iter().find(|s| s.len() != m) {
            return Err(Error::LengthMismatch {
                expected: m,
                found: bad.len(),
            });
        }
        Ok(Self { samples, m })
    }

    pub fn samples(&self) -> &[Trajectory<T>] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Trajectory<T>> {
        self.samples
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// `x' = s * R(alpha) * x + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityTransform<T> {
    translation: Point2<T>,
    alpha: T,
    scale: T,
}

impl<T: Scalar> SimilarityTransform<T> {
    pub fn new(translation: Point2<T>, alpha: T, scale: T) -> Result<Self> {
        if !(translation.is_finite() && alpha.is_finite() && scale.is_finite()) {
            return Err(Error::InvalidTransform("non-finite field".into()));
        }
        if scale <= T::zero() {
            return Err(Error::InvalidTransform(format!("scale {scale} is not positive")));
        }
        Ok(Self {
            translation,
            alpha,
            scale,
        })
    }

    pub fn identity() -> Self {
        Self {
            translation: Point2::zero(),
            alpha: T::zero(),
            scale: T::one(),
        }
    }

    pub fn translation(&self) -> Point2<T> {
        self.translation
    }

    /// Rotation angle in radians.
    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    #[inline]
    pub fn apply_point(&self, p: Point2<T>) -> Point2<T> {
        let (sin, cos) = self.alpha.sin_cos();
        p.rotate(cos, sin) * self.scale + self.translation
    }
}

pub fn apply_transform<T: Scalar>(tf: &SimilarityTransform<T>, traj: &Trajectory<T>) -> Trajectory<T> {
    let (sin, cos) = tf.alpha.sin_cos();
    let points = traj
        .points
        .iter()
        .map(|&p| p.rotate(cos, sin) * tf.scale + tf.translation)
        .collect();
    Trajectory::from_parts(traj.id.clone(), points)
}

/// Mean squared pointwise distance between two equally long point sequences.
pub fn point_mse<T: Scalar>(a: &[Point2<T>], b: &[Point2<T>]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(T::zero());
    }
    Ok(sq_dist_sum(a, b) / T::from_usize_lossy(a.len()))
}

/// Unchecked sum of squared distances; lengths must already agree.
#[inline]
pub(crate) fn sq_dist_sum<T: Scalar>(a: &[Point2<T>], b: &[Point2<T>]) -> T {
    let mut acc = T::zero();
    for (p, q) in a.iter().zip(b) {
        acc += (*p - *q).norm_sq();
    }
    acc
}

pub fn mse<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<T> {
    point_mse(&a.points, &b.points)
}

pub fn centroid<T: Scalar>(traj: &Trajectory<T>) -> Point2<T> {
    points_centroid(&traj.points)
}

pub(crate) fn points_centroid<T: Scalar>(points: &[Point2<T>]) -> Point2<T> {
    let mut sum = Point2::zero();
    for &p in points {
        sum = sum + p;
    }
    sum * (T::one() / T::from_usize_lossy(points.len()))
}
