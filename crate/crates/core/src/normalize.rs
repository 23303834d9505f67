//! Per-sample pre-normalization: centre on the centroid, divide by the
//! Euclidean length of the endpoint displacement.

use crate::error::{Error, Result};
use crate::geometry::{points_centroid, Dataset, Point2, Trajectory};
use crate::scalar::Scalar;

/// Default minimum endpoint displacement, in scene units.
pub const DEFAULT_EPS_DISP: f64 = 1e-6;

/// A sample moved to its own centroid and scaled to unit endpoint displacement.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedTrajectory<T>(Trajectory<T>);

impl<T: Scalar> NormalizedTrajectory<T> {
    /// Id of the trajectory this was normalized from.
    pub fn source_id(&self) -> &str {
        self.0.id()
    }

    pub fn points(&self) -> &[Point2<T>] {
        self.0.points()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_trajectory(&self) -> &Trajectory<T> {
        &self.0
    }

    pub fn into_trajectory(self) -> Trajectory<T> {
        self.0
    }
}

pub fn normalize<T: Scalar>(traj: &Trajectory<T>, eps_disp: T) -> Result<NormalizedTrajectory<T>> {
    let displacement = (traj.last() - traj.first()).norm();
    if displacement.is_nan() || displacement <= eps_disp {
        return Err(Error::DegenerateTrajectory {
            id: traj.id().to_string(),
            displacement: displacement.to_f64().unwrap_or(f64::NAN),
            eps: eps_disp.to_f64().unwrap_or(f64::NAN),
        });
    }
    let c = points_centroid(traj.points());
    let inv = T::one() / displacement;
    let points = traj.points().iter().map(|&p| (p - c) * inv).collect();
    Ok(NormalizedTrajectory(Trajectory::from_parts(
        traj.id().to_string(),
        points,
    )))
}

#[derive(Clone, Debug)]
pub struct NormalizedBatch<T> {
    pub samples: Vec<NormalizedTrajectory<T>>,
    pub rejected: Vec<String>,
}

/// Normalizes every sample, collecting the ids of degenerate ones.
pub fn normalize_dataset<T: Scalar>(ds: &Dataset<T>, eps_disp: T) -> Result<NormalizedBatch<T>> {
    let mut samples = Vec::with_capacity(ds.len());
    let mut rejected = Vec::new();
    for traj in ds.samples() {
        match normalize(traj, eps_disp) {
            Ok(n) => samples.push(n),
            Err(Error::DegenerateTrajectory { id, .. }) => rejected.push(id),
            Err(e) => return Err(e),
        }
    }
    if samples.is_empty() {
        return Err(Error::EmptyResult(format!(
            "all {} samples are degenerate",
            rejected.len()
        )));
    }
    Ok(NormalizedBatch { samples, rejected })
}
