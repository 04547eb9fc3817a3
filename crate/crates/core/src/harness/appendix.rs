//! Executable checks of the kinematics oracle, duty cycling, the
//! action-distance inequality and the similar-node radius bound.

use std::f64::consts::TAU;
use std::time::Instant;

use nalgebra::{Quaternion, UnitQuaternion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{ode_integrate, ode_oracle, ORACLE_MAX_STEP};
use crate::error::Result;
use crate::geometry::{angular_distance, apply_primitive, distance, distance_to_arc, interpolate_arc, spun_frame, Pose, Vec3};
use crate::primitives::{action_distance, d_sim_bound, duty_cycle_bound, duty_cycle_chunking, duty_cycle_decompose, MotionPrimitive};

const KAPPA_MAX: f64 = 0.01;
const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Suite-specific worst observed value (an error, margin or order).
    pub worst: f64,
    pub detail: String,
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.cases > 0 && self.failures == 0
    }
}

impl std::fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<5} {:<18} {:>5} cases {:>4} failures  worst {:.3e}  {:.2}s  {}",
            if self.passed() { "ok" } else { "FAIL" },
            self.name,
            self.cases,
            self.failures,
            self.worst,
            self.seconds,
            self.detail
        )
    }
}

pub fn random_pose(rng: &mut impl Rng, extent: f64) -> Pose {
    // Shoemake's uniform rotation
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen::<f64>() * TAU, rng.gen::<f64>() * TAU);
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let q = Quaternion::new(b * u3.cos(), a * u2.sin(), a * u2.cos(), b * u3.sin());
    let p = Vec3::from_fn(|_, _| rng.gen_range(-extent..=extent));
    Pose::new(p, UnitQuaternion::from_quaternion(q))
}

/// Closed-form arcs against RK4 integration at the oracle step.
pub fn kinematics_oracle(n: usize, seed: u64) -> Result<SuiteReport> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_pos, mut worst_ang, mut failures) = (0.0f64, 0.0f64, 0);
    for _ in 0..n {
        let start = random_pose(&mut rng, 50.0);
        let kappa = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..=KAPPA_MAX) };
        let m = MotionPrimitive::new(kappa, rng.gen_range(0.01..=20.0), rng.gen_range(0.0..TAU));
        let closed = apply_primitive(&start, &m)?;
        let ode = ode_oracle(&start, m.kappa, m.delta_ell, m.delta_theta, ORACLE_MAX_STEP)?;
        let dp = (closed.position - ode.position).norm();
        let da = angular_distance(&closed.orientation, &ode.orientation);
        worst_pos = worst_pos.max(dp);
        worst_ang = worst_ang.max(da);
        failures += (dp > 1e-6 || da > 1e-6) as usize;
    }
    Ok(SuiteReport {
        name: "kinematics-oracle",
        cases: n,
        failures,
        worst: worst_pos.max(worst_ang),
        detail: format!("max position error {worst_pos:.2e} mm, max angle error {worst_ang:.2e} rad"),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Endpoint error ratio of RK4 when the step is halved, on random arcs.
pub fn ode_convergence(n: usize, seed: u64) -> Result<SuiteReport> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut failures) = (f64::INFINITY, 0);
    for _ in 0..n {
        let start = random_pose(&mut rng, 10.0);
        let m = MotionPrimitive::new(rng.gen_range(0.02..0.2), rng.gen_range(5.0..20.0), rng.gen_range(0.0..TAU));
        let exact = apply_primitive(&start, &m)?;
        // whole steps of at most 0.05 rad of turning, so the halved run reuses the grid
        let steps = (m.kappa * m.delta_ell / 0.05).ceil().max(4.0);
        let h = m.delta_ell / steps;
        let err = |h: f64| -> Result<f64> {
            Ok((ode_integrate(&start, m.kappa, m.delta_ell, m.delta_theta, h)?.position - exact.position).norm())
        };
        let (e1, e2) = (err(h)?, err(0.5 * h)?);
        let order = (e1 / e2).log2();
        worst = worst.min(order);
        failures += (e1 < 8.0 * e2 || order < 3.9) as usize;
    }
    Ok(SuiteReport {
        name: "ode-convergence",
        cases: n,
        failures,
        worst,
        detail: format!("smallest observed order {worst:.3}"),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Samples of a primitive sequence every `step` mm, including every junction.
fn sequence_samples(start: &Pose, prims: &[MotionPrimitive], step: f64) -> Result<Vec<Pose>> {
    let mut out = vec![*start];
    let mut at = *start;
    for m in prims {
        let s = interpolate_arc(&at, m, step)?;
        out.extend_from_slice(&s[1..]);
        at = *s.last().unwrap();
    }
    Ok(out)
}

/// Duty-cycled approximations against their target arcs: positional one-way
/// deviation below the requested tolerance, each chunk within the analytic
/// bound, endpoint pose error below the tolerance.
pub fn duty_cycling(n: usize, seed: u64) -> Result<SuiteReport> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut failures, mut worst_ratio) = (0, 0.0f64);
    let mut bound_violations = 0;
    for _ in 0..n {
        let kappa = rng.gen_range(0.05 * KAPPA_MAX..0.95 * KAPPA_MAX);
        let length = rng.gen_range(5.0..100.0);
        let eps = rng.gen_range(0.01..1.0);
        let theta = rng.gen_range(0.0..TAU);
        let start = random_pose(&mut rng, 20.0);
        let prims = duty_cycle_decompose(kappa, length, theta, KAPPA_MAX, eps)?;
        let (chunks, sweep) = duty_cycle_chunking(kappa, length, eps)?;

        let shape_ok = prims.iter().all(|m| m.kappa == 0.0 || m.kappa == KAPPA_MAX)
            && prims[0].delta_theta == theta
            && prims[1..].iter().all(|m| m.delta_theta == 0.0)
            && prims.len() == 3 * chunks as usize;

        // target arc in its own frame: the pose after the initial spin
        let spun = Pose::new(start.position, spun_frame(&start, theta));
        let step = (eps / 10.0).min(0.05);
        let mut deviation = 0.0f64;
        let chunk_len = length / chunks as f64;
        let bound = duty_cycle_bound(1.0 / kappa, sweep);
        let mut chunk_start = spun;
        let mut at = start;
        for (k, trio) in prims.chunks(3).enumerate() {
            let samples = sequence_samples(&at, trio, step)?;
            at = *samples.last().unwrap();
            let chunk_dev = samples
                .iter()
                .map(|p| distance_to_arc(&chunk_start, kappa, chunk_len, &p.position))
                .fold(0.0, f64::max);
            if chunk_dev > bound + 1e-9 {
                bound_violations += 1;
            }
            let whole = samples
                .iter()
                .map(|p| distance_to_arc(&spun, kappa, length, &p.position))
                .fold(0.0, f64::max);
            deviation = deviation.max(whole);
            chunk_start = apply_primitive(&spun, &MotionPrimitive::new(kappa, (k + 1) as f64 * chunk_len, 0.0))?;
        }
        let target_end = apply_primitive(&start, &MotionPrimitive::new(kappa, length, theta))?;
        let end_error = distance(&target_end, &at, ALPHA);
        worst_ratio = worst_ratio.max(deviation / eps);
        failures += (!shape_ok || deviation >= eps || end_error >= eps) as usize;
    }
    failures += bound_violations;
    Ok(SuiteReport {
        name: "duty-cycling",
        cases: n,
        failures,
        worst: worst_ratio,
        detail: format!("worst deviation / tolerance {worst_ratio:.3}, chunk bound violations {bound_violations}"),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Upper bound on the action distance of two equal-curvature primitives.
pub fn action_distance_allowance(m1: &MotionPrimitive, m2: &MotionPrimitive, alpha: f64) -> f64 {
    let dtheta = (m1.delta_theta - m2.delta_theta).abs();
    let dell = (m1.delta_ell - m2.delta_ell).abs();
    let wrapped = dtheta.min(TAU - dtheta);
    dtheta * m1.delta_ell.min(m2.delta_ell) + dell + alpha * (wrapped + m1.kappa * dell)
}

/// The action-distance inequality on random equal-curvature pairs.
pub fn action_distance_inequality(n: usize, seed: u64) -> Result<SuiteReport> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut failures, mut worst) = (0, f64::NEG_INFINITY);
    for _ in 0..n {
        let kappa = if rng.gen_bool(0.5) { 0.0 } else { KAPPA_MAX };
        let mut draw = || MotionPrimitive::new(kappa, rng.gen_range(0.1..=20.0), rng.gen_range(0.0..TAU));
        let (m1, m2) = (draw(), draw());
        let rho = action_distance(&m1, &m2, ALPHA);
        let margin = rho - action_distance_allowance(&m1, &m2, ALPHA);
        worst = worst.max(margin);
        failures += (margin > 1e-9) as usize;
    }
    Ok(SuiteReport {
        name: "action-distance",
        cases: n,
        failures,
        worst,
        detail: format!("largest (distance - bound) {worst:.3e} mm"),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Known values of the similar-node radius bound.
pub fn d_sim_bound_checks() -> Result<SuiteReport> {
    let started = Instant::now();
    let mut failures = 0;
    let mut worst = 0.0f64;
    let deep = d_sim_bound(1.0, 100.0, 0.125, 2.0)?;
    failures += (!deep.underflow || deep.horizon != 800 || deep.value != 0.0) as usize;
    let expected_ln = -800.0 * std::f64::consts::LN_2 - std::f64::consts::LN_2;
    worst = worst.max((deep.ln_term - expected_ln).abs() / expected_ln.abs());
    let small = d_sim_bound(1.0, 10.0, 5.0, 1.1)?;
    let exact = 0.1 / (2.0 * (1.1f64 * 1.1 - 1.0));
    worst = worst.max((small.value - exact).abs());
    failures += ((small.value - exact).abs() > 1e-12 || small.horizon != 2) as usize;
    let limit = d_sim_bound(1.0, 10.0, 0.5, 1.0 + 1e-9)?;
    let h = limit.horizon as f64;
    worst = worst.max((limit.value - 1.0 / (2.0 * h)).abs() * 2.0 * h);
    failures += ((limit.value - 1.0 / (2.0 * h)).abs() * 2.0 * h > 1e-6) as usize;
    Ok(SuiteReport {
        name: "d-sim-bound",
        cases: 3,
        failures,
        worst,
        detail: format!("H=800 bound ln {:.2} (underflow), H=2 bound {:.4}", deep.ln_term, small.value),
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Every suite at its default size.
pub fn run_all(seed: u64) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        kinematics_oracle(1000, seed)?,
        ode_convergence(100, seed)?,
        duty_cycling(100, seed)?,
        action_distance_inequality(500, seed)?,
        d_sim_bound_checks()?,
    ])
}
