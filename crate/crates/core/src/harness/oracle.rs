//! Independent checks used by tests, the benchmark and the appendix suites.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion};
use serde::Serialize;

use crate::environment::{Environment, ProblemInstance};
use crate::error::{Error, Result};
use crate::geometry::{distance, sample_params, Pose, Vec3};
use crate::planner::{PlanResult, LENGTH_SLACK};

/// Largest integration step [`ode_oracle`] accepts, mm.
pub const ORACLE_MAX_STEP: f64 = 1e-3;

/// Integrates the tip kinematics with fixed-step RK4: the frame is first
/// spun by `delta_theta` about its Z axis, then the tip advances along Z while
/// Z turns toward X at rate `kappa`.
pub fn ode_oracle(pose: &Pose, kappa: f64, delta_ell: f64, delta_theta: f64, step: f64) -> Result<Pose> {
    if !(step > 0.0 && step <= ORACLE_MAX_STEP) {
        return Err(Error::InvalidInput(format!("oracle step must be in (0, {ORACLE_MAX_STEP}], got {step}")));
    }
    ode_integrate(pose, kappa, delta_ell, delta_theta, step)
}

/// [`ode_oracle`] without the step limit, for convergence studies.
pub fn ode_integrate(pose: &Pose, kappa: f64, delta_ell: f64, delta_theta: f64, step: f64) -> Result<Pose> {
    if !(delta_ell >= 0.0 && delta_ell.is_finite() && step > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "bad integration request: kappa={kappa}, delta_ell={delta_ell}, step={step}"
        )));
    }
    let r = pose.orientation.to_rotation_matrix();
    let (x0, y0, z) = (r.matrix().column(0).into_owned(), r.matrix().column(1).into_owned(), r.matrix().column(2).into_owned());
    let (s, c) = delta_theta.sin_cos();
    let x = x0 * c + y0 * s;

    let deriv = |st: &[Vec3; 3]| [st[2], -st[2] * kappa, st[1] * kappa];
    let add = |st: &[Vec3; 3], d: &[Vec3; 3], h: f64| [st[0] + d[0] * h, st[1] + d[1] * h, st[2] + d[2] * h];

    // state: position, X axis, Z axis
    let mut st = [pose.position, x, z];
    // Kahan-compensated accumulation keeps long integrations at rounding level
    let mut carry = [Vec3::zeros(); 3];
    // fewest equal steps no longer than `step`; the slack keeps δℓ/n inputs at n
    let n = (delta_ell / step - 1e-9).ceil().max(1.0) as u64;
    let h = delta_ell / n as f64;
    for _ in 0..n {
        let k1 = deriv(&st);
        let k2 = deriv(&add(&st, &k1, 0.5 * h));
        let k3 = deriv(&add(&st, &k2, 0.5 * h));
        let k4 = deriv(&add(&st, &k3, h));
        for i in 0..3 {
            let inc = (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0) - carry[i];
            let next = st[i] + inc;
            carry[i] = (next - st[i]) - inc;
            st[i] = next;
        }
    }
    let z = st[2].normalize();
    let x = (st[1] - z * st[1].dot(&z)).normalize();
    let y = z.cross(&x);
    let rot = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]));
    Ok(Pose::new(st[0], UnitQuaternion::from_rotation_matrix(&rot)))
}

/// Largest distance from a pose of `b` to its nearest pose of `a`.
pub fn hausdorff_one_way(a: &[Pose], b: &[Pose], alpha: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("Hausdorff distance of an empty sample set".into()));
    }
    Ok(b.iter()
        .map(|y| a.iter().map(|x| distance(x, y, alpha)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max))
}

/// Smallest gap between the needle surface and an obstacle point over the
/// sampled poses; +inf without obstacles.
pub fn clearance(trajectory: &[Pose], env: &Environment) -> f64 {
    trajectory
        .iter()
        .map(|p| env.nearest_obstacle_distance(&p.position) - env.needle_radius())
        .fold(f64::INFINITY, f64::min)
}

/// Tolerances of [`verify_trajectory`].
pub const CURVATURE_TOLERANCE: f64 = 1e-12;
pub const WAYPOINT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(f, "{:<5} {:<22} {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Re-simulates a plan from the start with the ODE oracle and checks the
/// curvature and length bounds, the tip error, agreement with the reported
/// waypoints, and collisions every `collision_step` mm.
pub fn verify_trajectory(plan: &PlanResult, problem: &ProblemInstance, collision_step: f64) -> Result<VerifyReport> {
    if !(collision_step > 0.0) {
        return Err(Error::InvalidInput(format!("collision step must be positive, got {collision_step}")));
    }
    let mut checks = Vec::new();
    let mut push = |name, passed, detail: String| checks.push(Check { name, passed, detail });
    let Some(t) = plan.trajectory.as_ref() else {
        push("trajectory_present", false, format!("status {} carries no trajectory", plan.status));
        return Ok(VerifyReport { checks });
    };
    push("trajectory_present", true, format!("{} primitives", t.primitives.len()));

    let worst_kappa = t.primitives.iter().map(|m| m.kappa).fold(0.0, f64::max);
    let kappa_ok = t.primitives.iter().all(|m| m.kappa >= 0.0 && m.kappa <= problem.kappa_max + CURVATURE_TOLERANCE);
    push("curvature", kappa_ok, format!("max {worst_kappa:e} vs {:e}", problem.kappa_max));

    let length: f64 = t.primitives.iter().map(|m| m.delta_ell).sum();
    let lengths_ok = t.primitives.iter().all(|m| m.delta_ell >= 0.0);
    push(
        "length",
        lengths_ok && length <= problem.ell_max + LENGTH_SLACK,
        format!("{length:.6} mm of {} mm", problem.ell_max),
    );
    push(
        "reported_length",
        (length - t.length).abs() <= LENGTH_SLACK * length.max(1.0),
        format!("sum {length:.9} vs reported {:.9}", t.length),
    );

    // each arc is integrated piecewise up to the same arc parameters the
    // planner's collision check samples
    let env = &problem.env;
    let mut poses = vec![problem.start];
    let mut collision = (!env.point_free(&problem.start.position)).then_some(problem.start.position);
    let mut at = problem.start;
    for m in &t.primitives {
        let mut done = 0.0;
        let mut spin = m.delta_theta;
        for s in sample_params(m.delta_ell, collision_step) {
            if s > done {
                at = ode_oracle(&at, m.kappa, s - done, spin, ORACLE_MAX_STEP)?;
                spin = 0.0;
                done = s;
            }
            if collision.is_none() && !env.point_free(&at.position) {
                collision = Some(at.position);
            }
        }
        if spin != 0.0 {
            at = ode_oracle(&at, m.kappa, 0.0, spin, ORACLE_MAX_STEP)?;
        }
        poses.push(at);
    }
    push(
        "collision_free",
        collision.is_none(),
        match collision {
            Some(p) => format!("tip in collision at ({:.3}, {:.3}, {:.3})", p.x, p.y, p.z),
            None => format!("checked every {collision_step} mm"),
        },
    );

    let error = (at.position - problem.goal).norm();
    push("targeting_error", error <= problem.tau + LENGTH_SLACK, format!("{error:.6} mm vs tau {}", problem.tau));

    let consistent = poses.len() == t.waypoints.len();
    let deviation = poses
        .iter()
        .zip(&t.waypoints)
        .map(|(a, b)| distance(a, b, 1.0))
        .fold(0.0, f64::max);
    push(
        "waypoints",
        consistent && deviation <= WAYPOINT_TOLERANCE,
        if consistent {
            format!("max deviation {deviation:e}")
        } else {
            format!("{} waypoints for {} primitives", t.waypoints.len(), t.primitives.len())
        },
    );
    Ok(VerifyReport { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::distance_to_arc;
    use crate::environment::Aabb;
    use crate::geometry::apply_primitive;
    use crate::planner::{PlanStatus, SearchStats, Trajectory};
    use crate::primitives::MotionPrimitive;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn pose(x: f64, y: f64, z: f64, r: f64, p: f64, w: f64) -> Pose {
        Pose::new(Vec3::new(x, y, z), UnitQuaternion::from_euler_angles(r, p, w))
    }

    #[test]
    fn straight_matches_translation() {
        let start = pose(1.0, -2.0, 3.0, 0.3, -0.2, 1.1);
        let end = ode_oracle(&start, 0.0, 12.5, 0.7, 1e-3).unwrap();
        let expected = start.position + start.heading() * 12.5;
        assert!((end.position - expected).norm() < 1e-12);
    }

    #[test]
    fn quarter_circle() {
        let end = ode_oracle(&Pose::identity(), 0.01, 50.0 * std::f64::consts::PI, 0.0, 1e-3).unwrap();
        assert!((end.position - Vec3::new(100.0, 0.0, 100.0)).norm() < 1e-6);
        assert!((end.heading() - Vec3::x()).norm() < 1e-9);
    }

    #[test]
    fn step_limit() {
        assert!(ode_oracle(&Pose::identity(), 0.0, 1.0, 0.0, 2e-3).is_err());
        assert!(ode_integrate(&Pose::identity(), 0.0, 1.0, 0.0, 2e-3).is_ok());
    }

    #[test]
    fn fourth_order_convergence() {
        let start = pose(0.0, 0.0, 0.0, 0.1, 0.2, 0.3);
        let m = MotionPrimitive::new(0.1, 15.0, 0.4);
        let exact = apply_primitive(&start, &m).unwrap();
        let err = |h: f64| (ode_integrate(&start, m.kappa, m.delta_ell, m.delta_theta, h).unwrap().position - exact.position).norm();
        let (e1, e2) = (err(1.0), err(0.5));
        assert!(e1 / e2 >= 8.0, "{e1:e} {e2:e}");
    }

    #[test]
    fn hausdorff_examples() {
        let line = |x: f64, n: usize| -> Vec<Pose> { (0..n).map(|i| pose(x, 0.0, i as f64, 0.0, 0.0, 0.0)).collect() };
        let a = line(0.0, 11);
        assert_eq!(hausdorff_one_way(&a, &a, 0.05).unwrap(), 0.0);
        assert_eq!(hausdorff_one_way(&a, &a[3..7], 0.05).unwrap(), 0.0);
        assert!(hausdorff_one_way(&a[3..7], &a, 0.05).unwrap() > 0.0);
        assert!((hausdorff_one_way(&a, &line(1.0, 11), 0.05).unwrap() - 1.0).abs() < 1e-15);
        assert!(hausdorff_one_way(&[], &a, 0.05).is_err());
    }

    #[test]
    fn clearance_examples() {
        let bounds = Aabb::new([-50.0; 3], [50.0; 3]).unwrap();
        let empty = Environment::new(vec![], bounds, 1.0, 0.0).unwrap();
        assert_eq!(clearance(&[Pose::identity()], &empty), f64::INFINITY);
        let one = Environment::new(vec![Vec3::new(0.0, 4.0, 0.0)], bounds, 1.0, 0.0).unwrap();
        assert!((clearance(&[Pose::identity()], &one) - 3.0).abs() < 1e-12);
    }

    fn verified_problem() -> ProblemInstance {
        let env = Environment::new(vec![Vec3::new(0.0, 2.0, 25.0)], Aabb::new([-100.0; 3], [100.0; 3]).unwrap(), 1.0, 0.0)
            .unwrap();
        ProblemInstance::new(Arc::new(env), Pose::identity(), Vec3::new(20.0, 0.0, 60.0), 1.0, 100.0, 0.01).unwrap()
    }

    fn plan_of(p: &ProblemInstance, prims: Vec<MotionPrimitive>) -> PlanResult {
        let t = Trajectory::from_primitives(&p.start, prims, &p.goal).unwrap();
        PlanResult {
            status: PlanStatus::Solved,
            trajectory: Some(t),
            cost: None,
            stats: SearchStats::default(),
        }
    }

    #[test]
    fn verifier_accepts_exact_arc() {
        let p = verified_problem();
        let arc = crate::geometry::curvature_to_point(&p.start, &p.goal).unwrap();
        let plan = plan_of(&p, vec![MotionPrimitive::new(arc.kappa, arc.arc_len, arc.delta_theta)]);
        let report = verify_trajectory(&plan, &p, 0.5).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn verifier_rejects_each_violation() {
        let p = verified_problem();
        let failed = |plan: &PlanResult| -> Vec<&'static str> {
            verify_trajectory(plan, &p, 0.5).unwrap().failures().map(|c| c.name).collect()
        };
        let over = plan_of(&p, vec![MotionPrimitive::new(1.01 * p.kappa_max, 30.0, 0.0)]);
        assert!(failed(&over).contains(&"curvature"));

        let mut drifted = plan_of(&p, vec![MotionPrimitive::new(0.0, 30.0, 0.0)]);
        drifted.trajectory.as_mut().unwrap().waypoints[1].position.x += 2e-6;
        assert_eq!(failed(&drifted), vec!["targeting_error", "waypoints"]);

        let through = plan_of(&p, vec![MotionPrimitive::new(0.0, 10.0, 0.0), MotionPrimitive::new(0.01, 30.0, FRAC_PI_2)]);
        assert!(failed(&through).contains(&"collision_free"));

        let long = plan_of(&p, vec![MotionPrimitive::new(0.0, 101.0, 0.0)]);
        assert!(failed(&long).contains(&"length"));

        let none = PlanResult {
            trajectory: None,
            ..over
        };
        assert!(!verify_trajectory(&none, &p, 0.5).unwrap().passed());
    }

    use std::f64::consts::FRAC_PI_2;

    proptest! {
        #[test]
        fn arc_distance_matches_dense_sampling(
            kappa in prop_oneof![Just(0.0), 0.001f64..0.05],
            len in 1.0f64..40.0,
            q in prop::array::uniform3(-40.0f64..40.0),
        ) {
            let p = Vec3::new(q[0], 0.5 * q[1], q[2]);
            let exact = distance_to_arc(&Pose::identity(), kappa, len, &p);
            let m = MotionPrimitive::new(kappa, len, 0.0);
            let dense = crate::geometry::interpolate_arc(&Pose::identity(), &m, 1e-3).unwrap();
            let sampled = dense.iter().map(|x| (x.position - p).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(exact <= sampled + 1e-9);
            prop_assert!(sampled - exact < 1e-3);
        }
    }
}
