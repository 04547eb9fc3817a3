use nalgebra::UnitQuaternion;

use crate::environment::PointGrid;
use crate::geometry::{angular_distance, Pose};

/// Metric distance at or below which two configurations count as the same.
pub const DUPLICATE_TOLERANCE: f64 = 1e-9;

/// Accepted configurations, indexed by position for exact radius queries.
#[derive(Debug, Clone)]
pub struct ClosedSet {
    grid: PointGrid,
    orientations: Vec<UnitQuaternion<f64>>,
}

impl ClosedSet {
    /// `d_sim` sets the grid cell size (floored at 1e-3 mm).
    pub fn new(d_sim: f64) -> Self {
        Self {
            grid: PointGrid::new(d_sim.max(1e-3)),
            orientations: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }

    pub fn insert(&mut self, pose: &Pose) {
        self.grid.insert(pose.position, self.orientations.len() as u32);
        self.orientations.push(pose.orientation);
    }

    fn any_within(&self, pose: &Pose, alpha: f64, accept: impl Fn(f64) -> bool, radius: f64) -> bool {
        self.grid.find_within(&pose.position, radius, |q, i| {
            let d = (q - pose.position).norm() + alpha * angular_distance(&self.orientations[i as usize], &pose.orientation);
            accept(d)
        })
    }

    /// Whether some closed configuration lies strictly within `d_sim` under the pose metric.
    pub fn exists_similar(&self, pose: &Pose, d_sim: f64, alpha: f64) -> bool {
        // position distance lower-bounds the metric, so the radius query is exhaustive
        d_sim > 0.0 && self.any_within(pose, alpha, |d| d < d_sim, d_sim)
    }

    pub fn contains_duplicate(&self, pose: &Pose, alpha: f64) -> bool {
        self.any_within(pose, alpha, |d| d <= DUPLICATE_TOLERANCE, DUPLICATE_TOLERANCE)
    }
}

/// Free-function form of [`ClosedSet::exists_similar`].
pub fn exists_similar(pose: &Pose, closed: &ClosedSet, d_sim: f64, alpha: f64) -> bool {
    closed.exists_similar(pose, d_sim, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    #[test]
    fn empty_has_nothing() {
        let c = ClosedSet::new(0.1);
        assert!(!exists_similar(&Pose::identity(), &c, 0.1, 0.05));
        assert!(!c.contains_duplicate(&Pose::identity(), 0.05));
    }

    #[test]
    fn exact_duplicate_found() {
        let mut c = ClosedSet::new(5.5e-5);
        let p = Pose::new(Vec3::new(1.0, 2.0, 3.0), UnitQuaternion::from_euler_angles(0.1, 0.2, 0.3));
        c.insert(&p);
        assert!(exists_similar(&p, &c, 5.5e-5, 0.05));
        assert!(c.contains_duplicate(&p, 0.05));
    }

    #[test]
    fn far_positions_not_similar() {
        let d_sim = 0.01;
        let mut c = ClosedSet::new(d_sim);
        c.insert(&Pose::identity());
        let q = Pose::new(Vec3::new(2.0 * d_sim, 0.0, 0.0), UnitQuaternion::identity());
        assert!(!exists_similar(&q, &c, d_sim, 0.05));
    }

    #[test]
    fn orientation_counts() {
        let d_sim = 0.01;
        let mut c = ClosedSet::new(d_sim);
        c.insert(&Pose::identity());
        let turned = Pose::new(Vec3::zeros(), UnitQuaternion::from_euler_angles(0.0, 0.0, 0.3));
        assert!(!exists_similar(&turned, &c, d_sim, 0.05));
        assert!(exists_similar(&turned, &c, d_sim, 0.01));
    }
}
