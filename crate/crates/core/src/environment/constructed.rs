//! Scenarios with a known answer: corridors around a chosen primitive sequence
//! and starts sealed inside a thick obstacle shell.

use std::collections::HashSet;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::synthetic::random_unit;
use super::{Aabb, Environment, ProblemInstance, DEFAULT_COLLISION_STEP};
use crate::error::{Error, Result};
use crate::geometry::{apply_primitive, direct_connect, distance_to_arc, interpolate_arc, spun_frame, Pose, Vec3};
use crate::primitives::MotionPrimitive;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorridorSpec {
    /// Inclusive range of primitives in the generating sequence.
    pub primitives: (usize, usize),
    /// Free radius around the generating path that any tip position may use.
    pub clearance: f64,
    pub wall_thickness: f64,
    pub point_spacing: f64,
    pub needle_radius: f64,
    pub kappa_max: f64,
    pub ell_max: f64,
    pub tau: f64,
    pub delta_ell_max: f64,
    pub delta_theta_max: f64,
    /// Deepest dyadic level used for the generating lengths and angles.
    pub level: u32,
}

impl Default for CorridorSpec {
    fn default() -> Self {
        Self {
            primitives: (2, 5),
            clearance: 0.75,
            wall_thickness: 1.0,
            point_spacing: 0.5,
            needle_radius: 0.5,
            kappa_max: 0.05,
            ell_max: 100.0,
            tau: 1.0,
            delta_ell_max: 20.0,
            delta_theta_max: FRAC_PI_2,
            level: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Corridor {
    pub problem: ProblemInstance,
    /// The sequence the corridor was built around; it solves `problem` exactly.
    pub primitives: Vec<MotionPrimitive>,
}

/// Distance from `p` to the path traced by `primitives` from `start`.
pub fn distance_to_path(start: &Pose, primitives: &[MotionPrimitive], p: &Vec3) -> Result<f64> {
    let mut at = *start;
    let mut best = f64::INFINITY;
    for m in primitives {
        let spun = Pose::new(at.position, spun_frame(&at, m.delta_theta));
        best = best.min(distance_to_arc(&spun, m.kappa, m.delta_ell, p));
        at = apply_primitive(&at, m)?;
    }
    Ok(best)
}

fn grid_key(p: &Vec3, h: f64) -> [i64; 3] {
    [(p.x / h).round() as i64, (p.y / h).round() as i64, (p.z / h).round() as i64]
}

/// Builds a corridor around a random primitive sequence on the dyadic grid.
///
/// Obstacle points fill the band between `clearance + collision radius` and
/// that plus `wall_thickness` around the path, so every tip position within
/// `clearance` of the path is free and the tube is sealed at both ends.
/// Sequences whose goal a single collision-free arc from the start reaches
/// are redrawn.
pub fn generate_corridor(seed: u64, spec: &CorridorSpec) -> Result<Corridor> {
    let (n0, n1) = spec.primitives;
    let ok = n0 > 0
        && n1 >= n0
        && spec.clearance > 0.0
        && spec.wall_thickness >= 2.0 * spec.point_spacing
        && spec.point_spacing > 0.0
        && spec.needle_radius >= 0.0
        && spec.kappa_max > 0.0
        && spec.ell_max >= spec.delta_ell_max * 0.5f64.powi(spec.level as i32) * n0 as f64
        && spec.delta_ell_max > 0.0
        && spec.delta_theta_max > 0.0;
    if !ok {
        return Err(Error::InvalidInput(format!("invalid corridor spec: {spec:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let primitives = random_sequence(&mut rng, spec);
        let problem = wall_in(&primitives, spec)?;
        let direct = match direct_connect(&problem.start, &problem.goal, spec.kappa_max, spec.tau)? {
            Some(c) => problem.env.arc_free(&problem.start, c.arc.primitive(), DEFAULT_COLLISION_STEP)?,
            None => false,
        };
        if !direct {
            return Ok(Corridor { problem, primitives });
        }
    }
    Err(Error::Exhausted {
        attempts: 1000,
        accepted: 0,
        requested: 1,
    })
}

fn random_sequence(rng: &mut ChaCha8Rng, spec: &CorridorSpec) -> Vec<MotionPrimitive> {
    let (n0, n1) = spec.primitives;
    let steps = 1u64 << spec.level;
    let turns = (std::f64::consts::TAU / spec.delta_theta_max).round() as u64 * steps;
    loop {
        let n = rng.gen_range(n0..=n1);
        let seq: Vec<MotionPrimitive> = (0..n)
            .map(|_| {
                let kappa = if rng.gen_bool(0.5) { spec.kappa_max } else { 0.0 };
                let ell = spec.delta_ell_max * rng.gen_range(1..=steps) as f64 / steps as f64;
                let theta = spec.delta_theta_max * rng.gen_range(0..turns) as f64 / steps as f64;
                MotionPrimitive::new(kappa, ell, theta)
            })
            .collect();
        if seq.iter().map(|m| m.delta_ell).sum::<f64>() <= spec.ell_max {
            return seq;
        }
    }
}

fn wall_in(primitives: &[MotionPrimitive], spec: &CorridorSpec) -> Result<ProblemInstance> {
    let start = Pose::identity();
    let h = spec.point_spacing;
    let inner = spec.clearance + spec.needle_radius;
    let outer = inner + spec.wall_thickness;
    let reach = (outer / h).ceil() as i64 + 1;
    let mut at = start;
    let mut cells = HashSet::new();
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for m in primitives {
        for s in interpolate_arc(&at, m, h)? {
            lo = lo.inf(&s.position);
            hi = hi.sup(&s.position);
            let c = grid_key(&s.position, h);
            for i in -reach..=reach {
                for j in -reach..=reach {
                    for k in -reach..=reach {
                        cells.insert([c[0] + i, c[1] + j, c[2] + k]);
                    }
                }
            }
        }
        at = apply_primitive(&at, m)?;
    }
    let mut keys: Vec<[i64; 3]> = cells.into_iter().collect();
    keys.sort_unstable();
    let mut points = Vec::new();
    for k in keys {
        let p = Vec3::new(k[0] as f64, k[1] as f64, k[2] as f64) * h;
        let d = distance_to_path(&start, primitives, &p)?;
        // the small slack keeps the tube's own boundary free
        if d > inner + 1e-6 && d <= outer {
            points.push(p);
        }
    }
    let pad = Vec3::repeat(outer + h);
    let bounds = Aabb::new((lo - pad).into(), (hi + pad).into())?;
    let env = Environment::new(points, bounds, spec.needle_radius, 0.0)?;
    ProblemInstance::new(Arc::new(env), start, at.position, spec.tau, spec.ell_max, spec.kappa_max)
}

/// A start sealed in a small pocket of a thick spherical shell, with a goal
/// outside it. No motion of any length leaves the pocket.
pub fn generate_enclosure(seed: u64) -> Result<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let needle_radius = 1.0;
    let pocket = needle_radius * rng.gen_range(1.02..1.08);
    let spacing = 0.1;
    let centre = Vec3::new(rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
    let mut points = Vec::new();
    let mut r = pocket;
    while r <= pocket + 2.0 {
        let n = (4.0 * std::f64::consts::PI * r * r / (spacing * spacing)).ceil() as usize;
        points.extend((0..n).map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let phi = i as f64 * 2.399963229728653;
            let s = (1.0 - z * z).sqrt();
            centre + Vec3::new(s * phi.cos(), s * phi.sin(), z) * r
        }));
        r += 2.0 * spacing;
    }
    let start = Pose::looking_along(centre, &random_unit(&mut rng));
    let kappa_max = 0.01;
    let ahead = MotionPrimitive::new(
        rng.gen_range(0.0..kappa_max),
        rng.gen_range(30.0..80.0),
        rng.gen_range(0.0..std::f64::consts::TAU),
    );
    let goal = apply_primitive(&start, &ahead)?.position;
    let env = Environment::new(points, Aabb::new([-120.0; 3], [120.0; 3])?, needle_radius, 0.0)?;
    ProblemInstance::new(Arc::new(env), start, goal, 1.0, 100.0, kappa_max)
}
