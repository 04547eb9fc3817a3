//! Lazily filled per-cell verdicts for fixed-radius collision queries.

use std::fmt;
use std::sync::atomic::{AtomicU8, Ordering};

use super::{Aabb, PointIndex};
use crate::geometry::Vec3;

const MAX_CELLS: usize = 1 << 24;
const UNKNOWN: u8 = 0;
const FREE: u8 = 1;
const BLOCKED: u8 = 2;
const MIXED: u8 = 3;

/// A cell is free when no obstacle lies within `radius + h` of its centre and
/// blocked when one lies within `radius - h`, `h` the half diagonal. Either
/// verdict then holds for every point of the cell; mixed cells fall back to
/// the exact query.
pub(super) struct Occupancy {
    origin: Vec3,
    cell: f64,
    dims: [usize; 3],
    states: Vec<AtomicU8>,
}

impl Occupancy {
    pub(super) fn new(bounds: &Aabb, radius: f64) -> Option<Self> {
        if !(radius > 0.0) {
            return None;
        }
        let origin = Vec3::from(bounds.min);
        let extent = bounds.extent();
        let mut cell = 0.5 * radius;
        let dims = loop {
            let dims = [0, 1, 2].map(|i| ((extent[i] / cell).ceil() as usize).max(1));
            if dims.iter().product::<usize>() <= MAX_CELLS {
                break dims;
            }
            cell *= 1.25;
        };
        let n = dims.iter().product();
        Some(Self {
            origin,
            cell,
            dims,
            states: (0..n).map(|_| AtomicU8::new(UNKNOWN)).collect(),
        })
    }

    /// Whether `p` (inside the bounds) is within `radius` of an obstacle.
    pub(super) fn blocked(&self, index: &PointIndex, p: &Vec3, radius: f64) -> bool {
        let c = [0, 1, 2].map(|i| (((p[i] - self.origin[i]) / self.cell).floor().max(0.0) as usize).min(self.dims[i] - 1));
        let k = (c[2] * self.dims[1] + c[1]) * self.dims[0] + c[0];
        let mut state = self.states[k].load(Ordering::Relaxed);
        if state == UNKNOWN {
            let centre = self.origin + Vec3::new(c[0] as f64 + 0.5, c[1] as f64 + 0.5, c[2] as f64 + 0.5) * self.cell;
            // padded so rounding can never flip a verdict
            let half = 0.5 * self.cell * 3f64.sqrt() + 1e-9;
            state = if !index.any_within(&centre, radius + half) {
                FREE
            } else if half < radius && index.any_within(&centre, radius - half) {
                BLOCKED
            } else {
                MIXED
            };
            self.states[k].store(state, Ordering::Relaxed);
        }
        match state {
            FREE => false,
            BLOCKED => true,
            _ => index.any_within(p, radius),
        }
    }
}

impl fmt::Debug for Occupancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Occupancy")
            .field("cell", &self.cell)
            .field("dims", &self.dims)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::super::Environment;
    use super::*;

    proptest! {
        #[test]
        fn cached_verdicts_match_brute_force(
            pts in prop::collection::vec(prop::array::uniform3(0.0f64..10.0), 1..60),
            queries in prop::collection::vec(prop::array::uniform3(0.0f64..10.0), 1..200),
            radius in 0.05f64..3.0,
        ) {
            let pts: Vec<Vec3> = pts.into_iter().map(Vec3::from).collect();
            let env = Environment::new(pts.clone(), Aabb::new([0.0; 3], [10.0; 3]).unwrap(), radius, 0.0).unwrap();
            // repeat so later passes read cached cells
            for _ in 0..2 {
                for q in &queries {
                    let q = Vec3::from(*q);
                    let hit = pts.iter().any(|o| (o - q).norm_squared() <= radius * radius);
                    prop_assert_eq!(env.point_free(&q), !hit);
                }
            }
        }
    }
}
