//! Seeded vessel-like scenarios and test-case sampling.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Aabb, Environment, ProblemInstance, DEFAULT_COLLISION_STEP};
use crate::error::{Error, Result};
use crate::geometry::{apply_primitive, direct_connect, Pose, Vec3};
use crate::primitives::MotionPrimitive;

/// Radial distance between the nested shells that fill a vessel's interior.
const FILL_STEP: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_vessels: usize,
    pub vessel_radius_range: (f64, f64),
    /// Edge length of the cubic workspace `[0, box_size]³`, mm.
    pub box_size: f64,
    pub point_spacing: f64,
    pub segments_per_vessel: usize,
    pub segment_length_range: (f64, f64),
    pub needle_radius: f64,
    /// Fill vessel interiors with nested shells so no free pocket remains inside.
    pub fill_interior: bool,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_vessels: 40,
            vessel_radius_range: (1.5, 4.0),
            box_size: 100.0,
            point_spacing: 0.5,
            segments_per_vessel: 4,
            segment_length_range: (20.0, 45.0),
            needle_radius: 1.0,
            fill_interior: true,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        let (r0, r1) = self.vessel_radius_range;
        let (l0, l1) = self.segment_length_range;
        let ok = r0 > 0.0
            && r1 >= r0
            && l0 > 0.0
            && l1 >= l0
            && self.box_size > 0.0
            && self.point_spacing > 0.0
            && self.needle_radius >= 0.0
            && self.segments_per_vessel > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("synthetic spec must be positive: {self:?}")))
        }
    }
}

pub(super) fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    Vec3::new(s * phi.cos(), s * phi.sin(), z)
}

fn orthonormal_pair(axis: &Vec3) -> (Vec3, Vec3) {
    let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = axis.cross(&helper).normalize();
    let v = axis.cross(&u);
    (u, v)
}

/// Points on the lateral surface of the cylinder from `a` to `b`.
pub fn tube_surface_points(a: &Vec3, b: &Vec3, radius: f64, spacing: f64) -> Vec<Vec3> {
    let axis = b - a;
    let len = axis.norm();
    if len == 0.0 || radius <= 0.0 {
        return Vec::new();
    }
    let dir = axis / len;
    let (u, v) = orthonormal_pair(&dir);
    let n_ring = ((TAU * radius / spacing).ceil() as usize).max(3);
    let n_len = (len / spacing).ceil().max(1.0) as usize;
    let mut out = Vec::with_capacity(n_ring * (n_len + 1));
    for i in 0..=n_len {
        let c = a + axis * (i as f64 / n_len as f64);
        for j in 0..n_ring {
            let phi = TAU * j as f64 / n_ring as f64;
            out.push(c + (u * phi.cos() + v * phi.sin()) * radius);
        }
    }
    out
}

fn sphere_points(center: &Vec3, radius: f64, spacing: f64) -> Vec<Vec3> {
    if radius <= 0.0 {
        return vec![*center];
    }
    let n = ((4.0 * PI * radius * radius / (spacing * spacing)).ceil() as usize).max(4);
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let s = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            center + Vec3::new(s * phi.cos(), s * phi.sin(), z) * radius
        })
        .collect()
}

/// Shell radii `r, r - FILL_STEP, …` down to the axis.
fn shell_radii(radius: f64, fill: bool) -> Vec<f64> {
    if !fill {
        return vec![radius];
    }
    let mut radii = Vec::new();
    let mut r = radius;
    while r > 0.0 {
        radii.push(r);
        r -= FILL_STEP;
    }
    radii.push(0.0);
    radii
}

fn box_shell(size: f64, spacing: f64) -> Vec<Vec3> {
    let n = (size / spacing).ceil() as usize;
    let coord = |i: usize| size * i as f64 / n as f64;
    let mut out = Vec::new();
    for i in 0..=n {
        for j in 0..=n {
            let (a, b) = (coord(i), coord(j));
            for face in [0.0, size] {
                out.push(Vec3::new(face, a, b));
                // skip edges already emitted by the x faces
                if i != 0 && i != n {
                    out.push(Vec3::new(a, face, b));
                }
                if i != 0 && i != n && j != 0 && j != n {
                    out.push(Vec3::new(a, b, face));
                }
            }
        }
    }
    out
}

/// Builds a seeded environment of random piecewise-linear vessels inside a box.
/// The clearance margin is half the point spacing.
pub fn generate_synthetic_scenario(seed: u64, spec: &SyntheticSpec) -> Result<Environment> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = spec.box_size;
    let bounds = Aabb::new([0.0; 3], [size; 3])?;
    let h = spec.point_spacing;
    let mut points = box_shell(size, h);
    for _ in 0..spec.n_vessels {
        let (r0, r1) = spec.vessel_radius_range;
        let radius = if r1 > r0 { rng.gen_range(r0..=r1) } else { r0 };
        let mut at = Vec3::new(rng.gen_range(0.0..size), rng.gen_range(0.0..size), rng.gen_range(0.0..size));
        let mut dir = random_unit(&mut rng);
        for seg in 0..spec.segments_per_vessel {
            let (l0, l1) = spec.segment_length_range;
            let len = if l1 > l0 { rng.gen_range(l0..=l1) } else { l0 };
            let next = at + dir * len;
            for r in shell_radii(radius, spec.fill_interior) {
                if r > 0.0 {
                    points.extend(tube_surface_points(&at, &next, r, h));
                } else {
                    let n = (len / h).ceil().max(1.0) as usize;
                    points.extend((0..=n).map(|i| at + (next - at) * (i as f64 / n as f64)));
                }
                if seg > 0 {
                    points.extend(sphere_points(&at, r, h));
                }
            }
            at = next;
            dir = (dir + random_unit(&mut rng) * 0.8).normalize();
        }
    }
    points.retain(|p| bounds.contains(p));
    Environment::new(points, bounds, spec.needle_radius, 0.5 * h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestCaseSpec {
    pub n_starts: usize,
    pub goals_per_start: usize,
    pub seed: u64,
    pub kappa_max: f64,
    pub ell_max: f64,
    pub tau: f64,
    /// Length of the straight probe that must be free ahead of every start.
    pub probe_length: f64,
    pub min_goal_arc: f64,
    /// Witness paths to goals are no longer than this fraction of `ell_max`.
    pub max_goal_arc_fraction: f64,
    pub collision_step: f64,
}

impl Default for TestCaseSpec {
    fn default() -> Self {
        Self {
            n_starts: 50,
            goals_per_start: 10,
            seed: 0,
            kappa_max: 0.01,
            ell_max: 100.0,
            tau: 1.0,
            probe_length: 20.0,
            min_goal_arc: 20.0,
            max_goal_arc_fraction: 0.8,
            collision_step: DEFAULT_COLLISION_STEP,
        }
    }
}

fn witness_goal(
    env: &Environment,
    start: &Pose,
    spec: &TestCaseSpec,
    max_arc: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Vec3>> {
    let total = rng.gen_range(spec.min_goal_arc..max_arc);
    let n = rng.gen_range(2..=4usize);
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let sum: f64 = weights.iter().sum();
    let mut pose = *start;
    for w in weights {
        let len = total * w / sum;
        let kappa = rng.gen_range(0.0..=spec.kappa_max).min(FRAC_PI_2 / len);
        let m = MotionPrimitive::new(kappa, len, rng.gen_range(0.0..TAU));
        if !env.arc_free(&pose, &m, spec.collision_step)? {
            return Ok(None);
        }
        pose = apply_primitive(&pose, &m)?;
    }
    Ok(Some(pose.position))
}

/// Samples collision-free starts and goals that cannot be joined to the start
/// by a collision-free arc. Every goal is the end of a random collision-free
/// path of two to four curvature-feasible arcs, so each case has a solution.
///
/// Starts whose straight probe ahead is blocked are redrawn. A start that
/// yields too few goals is replaced. Fails once the total number of draws
/// exceeds 1000 times the requested case count, or if nothing was accepted.
pub fn generate_test_cases(env: Arc<Environment>, spec: &TestCaseSpec) -> Result<Vec<ProblemInstance>> {
    let requested = spec.n_starts * spec.goals_per_start;
    let max_arc = spec.max_goal_arc_fraction * spec.ell_max;
    if !(spec.kappa_max > 0.0 && spec.tau > 0.0 && spec.ell_max > 0.0 && spec.min_goal_arc < max_arc) {
        return Err(Error::InvalidInput(format!("invalid test-case spec: {spec:?}")));
    }
    let budget = 1000 * requested.max(1);
    let per_start_budget = 100 * spec.goals_per_start.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let bounds = *env.bounds();
    let mut attempts = 0usize;
    let mut out = Vec::with_capacity(requested);
    let exhausted = |attempts, accepted| Error::Exhausted {
        attempts,
        accepted,
        requested,
    };
    let mut starts_used = 0usize;
    while starts_used < spec.n_starts {
        if attempts >= budget {
            return Err(exhausted(attempts, out.len()));
        }
        attempts += 1;
        let p = Vec3::from_fn(|i, _| rng.gen_range(bounds.min[i]..bounds.max[i]));
        let start = Pose::looking_along(p, &random_unit(&mut rng));
        if !env.point_free(&p) || !env.arc_free(&start, &MotionPrimitive::new(0.0, spec.probe_length, 0.0), spec.collision_step)? {
            continue;
        }
        let mut goals = Vec::new();
        let mut tries = 0;
        while goals.len() < spec.goals_per_start && tries < per_start_budget && attempts < budget {
            tries += 1;
            attempts += 1;
            let Some(goal) = witness_goal(&env, &start, spec, max_arc, &mut rng)? else {
                continue;
            };
            if !env.point_free(&goal) {
                continue;
            }
            let trivial = match direct_connect(&start, &goal, spec.kappa_max, spec.tau)? {
                Some(c) => env.arc_free(&start, c.arc.primitive(), spec.collision_step)?,
                None => false,
            };
            if !trivial {
                goals.push(goal);
            }
        }
        if goals.len() < spec.goals_per_start {
            continue;
        }
        starts_used += 1;
        for goal in goals {
            out.push(ProblemInstance::new(env.clone(), start, goal, spec.tau, spec.ell_max, spec.kappa_max)?);
        }
    }
    if out.is_empty() {
        return Err(exhausted(attempts, 0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(n_vessels: usize) -> SyntheticSpec {
        SyntheticSpec {
            n_vessels,
            box_size: 60.0,
            point_spacing: 1.0,
            ..Default::default()
        }
    }

    #[test]
    fn no_vessels_gives_shell_only() {
        let env = generate_synthetic_scenario(3, &small_spec(0)).unwrap();
        assert!(!env.points().is_empty());
        for p in env.points() {
            let on_face = (0..3).any(|i| p[i] == 0.0 || p[i] == 60.0);
            assert!(on_face, "{p:?}");
        }
        assert!(env.point_free(&Vec3::new(30.0, 30.0, 30.0)));
    }

    #[test]
    fn shell_has_no_duplicates() {
        let pts = box_shell(4.0, 1.0);
        let n = 5usize;
        assert_eq!(pts.len(), n.pow(3) - (n - 2).pow(3));
        let mut keys: Vec<[i64; 3]> = pts.iter().map(|p| [p.x as i64, p.y as i64, p.z as i64]).collect();
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), pts.len());
    }

    #[test]
    fn seeded_generation_is_bit_identical() {
        let a = generate_synthetic_scenario(42, &small_spec(5)).unwrap();
        let b = generate_synthetic_scenario(42, &small_spec(5)).unwrap();
        assert_eq!(a.points(), b.points());
        let c = generate_synthetic_scenario(43, &small_spec(5)).unwrap();
        assert_ne!(a.points(), c.points());
    }

    #[test]
    fn tube_point_count_matches_area() {
        let (radius, len, spacing) = (3.0, 40.0, 0.5);
        let pts = tube_surface_points(&Vec3::zeros(), &Vec3::new(0.0, 0.0, len), radius, spacing);
        let expected = TAU * radius * len / (spacing * spacing);
        let rel = (pts.len() as f64 - expected).abs() / expected;
        assert!(rel < 0.1, "{} vs {expected}", pts.len());
        for p in &pts {
            assert!((p.xy().norm() - radius).abs() < 1e-9);
        }
    }

    #[test]
    fn filled_vessel_leaves_no_free_core() {
        let spec = SyntheticSpec {
            n_vessels: 1,
            vessel_radius_range: (4.0, 4.0),
            segments_per_vessel: 1,
            segment_length_range: (200.0, 200.0),
            ..Default::default()
        };
        // a long vessel crosses the box; its axis must be blocked everywhere
        let env = generate_synthetic_scenario(1, &spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let radius = 4.0;
        let at = Vec3::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
        let dir = random_unit(&mut rng);
        let (u, v) = orthonormal_pair(&dir);
        for i in 0..400 {
            let t = i as f64 * 0.5;
            let phi = i as f64 * 0.7;
            let rr = radius * ((i % 9) as f64 / 9.0);
            let q = at + dir * t + (u * phi.cos() + v * phi.sin()) * rr;
            if env.bounds().contains(&q) {
                assert!(!env.point_free(&q), "free pocket at {q:?}");
            }
        }
    }

    #[test]
    fn empty_environment_exhausts() {
        let env = Arc::new(Environment::new(vec![], Aabb::new([0.0; 3], [200.0; 3]).unwrap(), 1.0, 0.0).unwrap());
        let spec = TestCaseSpec {
            n_starts: 2,
            goals_per_start: 2,
            ..Default::default()
        };
        assert!(matches!(generate_test_cases(env, &spec), Err(Error::Exhausted { .. })));
    }

    #[test]
    fn generated_cases_are_nontrivial() {
        let env = Arc::new(generate_synthetic_scenario(5, &SyntheticSpec::default()).unwrap());
        let spec = TestCaseSpec {
            n_starts: 3,
            goals_per_start: 3,
            seed: 9,
            ..Default::default()
        };
        let cases = generate_test_cases(env.clone(), &spec).unwrap();
        assert_eq!(cases.len(), 9);
        for c in &cases {
            assert!(env.point_free(&c.start.position));
            assert!(env.point_free(&c.goal));
            let probe = MotionPrimitive::new(0.0, spec.probe_length, 0.0);
            assert!(env.arc_free(&c.start, &probe, 0.5).unwrap());
            if let Some(conn) = direct_connect(&c.start, &c.goal, c.kappa_max, c.tau).unwrap() {
                assert!(!env.arc_free(&c.start, conn.arc.primitive(), 0.5).unwrap());
            }
        }
        let again = generate_test_cases(env, &spec).unwrap();
        for (a, b) in cases.iter().zip(&again) {
            assert_eq!((a.start, a.goal), (b.start, b.goal));
        }
    }
}
