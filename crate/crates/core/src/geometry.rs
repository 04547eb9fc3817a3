//! Needle-tip pose algebra and circular-arc kinematics.
//!
//! A [`Pose`] is a tip position (mm) plus an orientation whose local +Z axis
//! is the insertion direction. A motion primitive is applied by first spinning
//! the frame about its local Z axis by `delta_theta`, then following a planar
//! arc of curvature `kappa` in the spun frame's XZ-plane, bending toward +X.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primitives::MotionPrimitive;

pub type Vec3 = Vector3<f64>;

/// Below this swept angle an arc is evaluated with the straight-line formula.
const SMALL_SWEEP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vec3,
    pub orientation: UnitQuaternion<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn new(position: Vec3, orientation: UnitQuaternion<f64>) -> Self {
        Self {
            position,
            orientation: renormalize(orientation),
        }
    }

    pub fn identity() -> Self {
        Self {
            position: Vec3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    /// Builds a pose from a position and a raw `(w, x, y, z)` quaternion,
    /// normalizing it. Fails on a zero or non-finite quaternion.
    pub fn from_wxyz(position: [f64; 3], wxyz: [f64; 4]) -> Result<Self> {
        let q = Quaternion::new(wxyz[0], wxyz[1], wxyz[2], wxyz[3]);
        let norm = q.norm();
        if !norm.is_finite() || norm < 1e-12 || position.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "pose must have a finite position and non-zero quaternion, got {position:?} / {wxyz:?}"
            )));
        }
        // already-unit input is kept bit-exact so serialization round-trips
        let orientation = if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
            UnitQuaternion::new_unchecked(q)
        } else {
            UnitQuaternion::from_quaternion(q)
        };
        Ok(Self {
            position: Vec3::from(position),
            orientation,
        })
    }

    /// Pose at `position` whose heading (+Z) points along `heading`.
    pub fn looking_along(position: Vec3, heading: &Vec3) -> Self {
        let orientation = UnitQuaternion::rotation_between(&Vec3::z(), heading).unwrap_or_else(|| {
            // heading is anti-parallel to +Z
            UnitQuaternion::from_axis_angle(&Vector3::x_axis(), PI)
        });
        Self::new(position, orientation)
    }

    pub fn heading(&self) -> Vec3 {
        self.orientation * Vec3::z()
    }

    pub fn wxyz(&self) -> [f64; 4] {
        let q = self.orientation.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    /// Expresses a world point in this pose's local frame.
    pub fn to_local(&self, point: &Vec3) -> Vec3 {
        self.orientation.inverse_transform_vector(&(point - self.position))
    }

    pub fn to_world(&self, local: &Vec3) -> Vec3 {
        self.position + self.orientation * local
    }
}

fn renormalize(q: UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::new_normalize(q.into_inner())
}

#[derive(Serialize, Deserialize)]
struct PoseRepr {
    position: [f64; 3],
    quaternion: [f64; 4],
}

impl Serialize for Pose {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PoseRepr {
            position: self.position.into(),
            quaternion: self.wxyz(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Pose {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PoseRepr::deserialize(deserializer)?;
        Pose::from_wxyz(repr.position, repr.quaternion).map_err(serde::de::Error::custom)
    }
}

/// A single circular arc: the start pose, the primitive, and the cached end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    start: Pose,
    primitive: MotionPrimitive,
    end: Pose,
}

impl Arc {
    pub fn new(start: Pose, primitive: MotionPrimitive) -> Result<Self> {
        let end = apply_primitive(&start, &primitive)?;
        Ok(Self {
            start,
            primitive,
            end,
        })
    }

    pub fn start(&self) -> &Pose {
        &self.start
    }

    pub fn primitive(&self) -> &MotionPrimitive {
        &self.primitive
    }

    pub fn end(&self) -> &Pose {
        &self.end
    }

    pub fn length(&self) -> f64 {
        self.primitive.delta_ell
    }

    pub fn samples(&self, step: f64) -> Result<Vec<Pose>> {
        interpolate_arc(&self.start, &self.primitive, step)
    }
}

fn check_primitive(m: &MotionPrimitive) -> Result<()> {
    if !(m.kappa.is_finite() && m.delta_ell.is_finite() && m.delta_theta.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite motion primitive {m:?}")));
    }
    if m.delta_ell <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "arc length must be positive, got {}",
            m.delta_ell
        )));
    }
    if m.kappa < 0.0 {
        return Err(Error::InvalidInput(format!(
            "curvature must be non-negative, got {}",
            m.kappa
        )));
    }
    Ok(())
}

/// `pose ⊕ m`: the pose reached after executing one primitive.
pub fn apply_primitive(pose: &Pose, m: &MotionPrimitive) -> Result<Pose> {
    check_primitive(m)?;
    Ok(advance(pose, m.kappa, m.delta_ell, m.delta_theta))
}

/// Arc evaluation without input validation; `s` may be zero.
pub(crate) fn advance(pose: &Pose, kappa: f64, s: f64, delta_theta: f64) -> Pose {
    let frame = spun_frame(pose, delta_theta);
    advance_in_frame(&pose.position, &frame, kappa, s)
}

/// Exact distance from `p` to the arc of curvature `kappa` and length `len`
/// leaving `pose` in its XZ plane.
pub fn distance_to_arc(pose: &Pose, kappa: f64, len: f64, p: &Vec3) -> f64 {
    let q = pose.to_local(p);
    if kappa == 0.0 {
        let s = q.z.clamp(0.0, len);
        return (q - Vec3::new(0.0, 0.0, s)).norm();
    }
    let r = 1.0 / kappa;
    let sweep = kappa * len;
    // arc points sit at angle φ ∈ [0, sweep] around the centre (r, 0, 0)
    let (u, w) = (q.x - r, q.z);
    let phi = w.atan2(-u).rem_euclid(std::f64::consts::TAU);
    if phi <= sweep {
        return (u.hypot(w) - r).hypot(q.y);
    }
    let end = Vec3::new(r - r * sweep.cos(), 0.0, r * sweep.sin());
    q.norm().min((q - end).norm())
}

pub(crate) fn spun_frame(pose: &Pose, delta_theta: f64) -> UnitQuaternion<f64> {
    if delta_theta == 0.0 {
        pose.orientation
    } else {
        pose.orientation * UnitQuaternion::from_axis_angle(&Vector3::z_axis(), delta_theta)
    }
}

pub(crate) fn advance_in_frame(
    origin: &Vec3,
    frame: &UnitQuaternion<f64>,
    kappa: f64,
    s: f64,
) -> Pose {
    let sweep = kappa * s;
    let local = if sweep.abs() < SMALL_SWEEP {
        Vec3::new(0.5 * s * sweep, 0.0, s)
    } else {
        let half = 0.5 * sweep;
        // r(1 - cos η) written as 2 r sin²(η/2) to avoid cancellation
        Vec3::new(2.0 * half.sin().powi(2) / kappa, 0.0, sweep.sin() / kappa)
    };
    let position = origin + frame * local;
    let orientation = if sweep == 0.0 {
        *frame
    } else {
        renormalize(*frame * UnitQuaternion::from_axis_angle(&Vector3::y_axis(), sweep))
    };
    Pose {
        position,
        orientation,
    }
}

/// Samples the arc at arc-length parameters `0, step, 2·step, …` and always
/// ends with the exact endpoint `pose ⊕ m`.
pub fn interpolate_arc(pose: &Pose, m: &MotionPrimitive, step: f64) -> Result<Vec<Pose>> {
    check_primitive(m)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!("sampling step must be positive, got {step}")));
    }
    let frame = spun_frame(pose, m.delta_theta);
    let params = sample_params(m.delta_ell, step);
    Ok(params
        .into_iter()
        .map(|s| advance_in_frame(&pose.position, &frame, m.kappa, s))
        .collect())
}

pub(crate) fn sample_params(length: f64, step: f64) -> Vec<f64> {
    let slack = 1e-9 * step.max(length);
    let mut params = Vec::with_capacity((length / step) as usize + 2);
    let mut i = 0u64;
    loop {
        let s = i as f64 * step;
        if s >= length - slack {
            break;
        }
        params.push(s);
        i += 1;
    }
    params.push(length);
    params
}

/// Geodesic angle between two orientations, in `[0, π]`.
pub fn angular_distance(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
    let qa = a.quaternion().coords;
    let mut qb = b.quaternion().coords;
    if qa.dot(&qb) < 0.0 {
        qb = -qb;
    }
    // ‖a − b‖ = 2 sin(φ/4), ‖a + b‖ = 2 cos(φ/4); symmetric in a and b and
    // accurate for nearby rotations
    4.0 * (qa - qb).norm().atan2((qa + qb).norm())
}

/// Configuration-space metric: position distance plus `alpha` times the
/// geodesic orientation angle.
pub fn distance(a: &Pose, b: &Pose, alpha: f64) -> f64 {
    (a.position - b.position).norm() + alpha * angular_distance(&a.orientation, &b.orientation)
}

/// Depth (mm) of a local-frame point inside the unreachable torus swept by
/// rotating the two max-curvature circles about the tip axis. Negative when
/// the point lies outside.
pub fn unreachable_depth(local: &Vec3, kappa_max: f64) -> f64 {
    let r = 1.0 / kappa_max;
    let d = local.x.hypot(local.y);
    r - (d - r).hypot(local.z)
}

/// Whether the goal may still be reached (within `tau`) from `pose`.
///
/// Rejects goals lying more than `tau` inside the unreachable torus, and
/// goals more than `tau` behind the tip plane, which need a turn beyond 90°.
pub fn goal_reachable(pose: &Pose, goal: &Vec3, kappa_max: f64, tau: f64) -> bool {
    let local = pose.to_local(goal);
    if unreachable_depth(&local, kappa_max) > tau {
        return false;
    }
    local.z >= -tau
}

/// Single arc from the pose to a goal point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointArc {
    pub kappa: f64,
    pub delta_theta: f64,
    pub arc_len: f64,
    /// Heading change along the arc.
    pub sweep: f64,
}

/// The unique planar arc tangent to the tip heading that passes through `goal`.
pub fn curvature_to_point(pose: &Pose, goal: &Vec3) -> Result<PointArc> {
    let local = pose.to_local(goal);
    let lateral = local.x.hypot(local.y);
    let forward = local.z;
    let chord_sq = lateral * lateral + forward * forward;
    if chord_sq == 0.0 {
        return Err(Error::InvalidInput("goal coincides with the tip position".into()));
    }
    if lateral <= 1e-12 * chord_sq.sqrt() {
        if forward < 0.0 {
            return Err(Error::UndefinedDirection);
        }
        return Ok(PointArc {
            kappa: 0.0,
            delta_theta: 0.0,
            arc_len: forward,
            sweep: 0.0,
        });
    }
    let kappa = 2.0 * lateral / chord_sq;
    let delta_theta = local.y.atan2(local.x).rem_euclid(TAU);
    let sweep = 2.0 * lateral.atan2(forward);
    let arc_len = if sweep < SMALL_SWEEP {
        chord_sq.sqrt()
    } else {
        sweep / kappa
    };
    Ok(PointArc {
        kappa,
        delta_theta,
        arc_len,
        sweep,
    })
}

/// A direct connection arc toward the goal and the tip error it leaves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalConnection {
    pub arc: Arc,
    pub targeting_error: f64,
}

/// Connects the pose to the goal with one arc when possible.
///
/// If the exact arc needs curvature above `kappa_max` but the goal is within
/// `tau` of the reachable boundary, the max-curvature arc in the same plane is
/// stopped at its closest point to the goal. Arcs sweeping more than 90° are
/// never returned. Collisions are not checked.
pub fn direct_connect(pose: &Pose, goal: &Vec3, kappa_max: f64, tau: f64) -> Result<Option<GoalConnection>> {
    let exact = curvature_to_point(pose, goal)?;
    if exact.sweep > FRAC_PI_2 {
        return Ok(None);
    }
    if exact.kappa <= kappa_max {
        if exact.arc_len <= 0.0 {
            return Ok(None);
        }
        let primitive = MotionPrimitive::new(exact.kappa, exact.arc_len, exact.delta_theta);
        let arc = Arc::new(*pose, primitive)?;
        let targeting_error = (arc.end().position - goal).norm();
        return Ok(Some(GoalConnection {
            arc,
            targeting_error,
        }));
    }

    // Goal is inside the max-curvature circle of its plane.
    let local = pose.to_local(goal);
    if unreachable_depth(&local, kappa_max) > tau {
        return Ok(None);
    }
    let r = 1.0 / kappa_max;
    let lateral = local.x.hypot(local.y);
    // In-plane coordinates relative to the circle center at (r, 0).
    let du = lateral - r;
    let dv = local.z;
    let sweep = dv.atan2(-du);
    if !(sweep > 0.0) || sweep > FRAC_PI_2 || sweep * r < 1e-9 {
        return Ok(None);
    }
    let primitive = MotionPrimitive::new(kappa_max, sweep * r, exact.delta_theta);
    let arc = Arc::new(*pose, primitive)?;
    let targeting_error = (arc.end().position - goal).norm();
    if targeting_error > tau {
        return Ok(None);
    }
    Ok(Some(GoalConnection {
        arc,
        targeting_error,
    }))
}
