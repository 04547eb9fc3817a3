use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{solved, unsolved, Tree, ROOT};
use crate::environment::{PointGrid, ProblemInstance, DEFAULT_COLLISION_STEP};
use crate::error::{Error, Result};
use crate::geometry::{apply_primitive, curvature_to_point, Vec3};
use crate::planner::{goal_hit, GoalHit, PlanResult, PlanStatus, SearchStats};
use crate::primitives::MotionPrimitive;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrtConfig {
    /// Probability of sampling the goal instead of a uniform workspace point.
    pub goal_bias: f64,
    /// Probability of trying a direct goal connection from each new node.
    pub direct_connect_ratio: f64,
    /// Longest tree edge, mm.
    pub max_extend: f64,
    pub rng_seed: u64,
    pub time_budget: Option<f64>,
    /// Deterministic budget on sampling iterations.
    pub max_iterations: Option<u64>,
    pub collision_step: f64,
}

impl Default for RrtConfig {
    fn default() -> Self {
        Self {
            goal_bias: 0.05,
            direct_connect_ratio: 1.0,
            max_extend: 10.0,
            rng_seed: 0,
            time_budget: Some(100.0),
            max_iterations: None,
            collision_step: DEFAULT_COLLISION_STEP,
        }
    }
}

impl RrtConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("goal_bias", self.goal_bias), ("direct_connect_ratio", self.direct_connect_ratio)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if !(self.max_extend > 0.0 && self.max_extend.is_finite()) {
            return Err(Error::Config(format!("max_extend must be positive, got {}", self.max_extend)));
        }
        if !(self.collision_step > 0.0 && self.collision_step.is_finite()) {
            return Err(Error::Config(format!("collision_step must be positive, got {}", self.collision_step)));
        }
        match self.time_budget {
            Some(t) if !(t >= 0.0) => Err(Error::Config(format!("time_budget must be >= 0, got {t}"))),
            None if self.max_iterations.is_none() => {
                Err(Error::Config("RRT needs a time budget or an iteration limit".into()))
            }
            _ => Ok(()),
        }
    }

    fn deadline(&self, from: Instant) -> Option<Instant> {
        self.time_budget.map(|t| from + Duration::from_secs_f64(t.min(1e9)))
    }
}

/// Single-tree RRT sampling tip positions in the workspace bounds. Never
/// certifies infeasibility: an unsolved run is `TimedOut`.
pub fn plan_rrt(problem: &ProblemInstance, cfg: &RrtConfig) -> Result<PlanResult> {
    cfg.validate()?;
    problem.validate()?;
    let started = Instant::now();
    grow(problem, cfg, cfg.rng_seed, &AtomicBool::new(false), started)
}

/// Independent trees on `threads` workers, seeded `rng_seed + i`; the first
/// solution found stops the others.
pub fn plan_rrt_parallel(problem: &ProblemInstance, cfg: &RrtConfig, threads: usize) -> Result<PlanResult> {
    if threads <= 1 {
        return plan_rrt(problem, cfg);
    }
    cfg.validate()?;
    problem.validate()?;
    let started = Instant::now();
    let stop = AtomicBool::new(false);
    let results = Mutex::new(Vec::new());
    thread::scope(|scope| {
        for i in 0..threads {
            let (stop, results) = (&stop, &results);
            scope.spawn(move || {
                let r = grow(problem, cfg, cfg.rng_seed.wrapping_add(i as u64), stop, started);
                if matches!(r, Ok(PlanResult { status: PlanStatus::Solved, .. })) {
                    stop.store(true, Ordering::SeqCst);
                }
                results.lock().unwrap_or_else(|p| p.into_inner()).push(r);
            });
        }
    });
    let results = results.into_inner().unwrap_or_else(|p| p.into_inner());
    let mut total = SearchStats::default();
    let mut winner: Option<PlanResult> = None;
    for r in results {
        let r = r?;
        let s = &r.stats;
        total.nodes_extracted += s.nodes_extracted;
        total.nodes_expanded += s.nodes_expanded;
        total.nodes_inserted += s.nodes_inserted;
        total.nodes_pruned_length += s.nodes_pruned_length;
        total.nodes_pruned_collision += s.nodes_pruned_collision;
        total.direct_connect_attempts += s.direct_connect_attempts;
        total.solutions_found += s.solutions_found;
        let earlier = |w: &PlanResult| {
            r.stats.time_to_first_solution.unwrap_or(f64::INFINITY)
                < w.stats.time_to_first_solution.unwrap_or(f64::INFINITY)
        };
        if r.status == PlanStatus::Solved && winner.as_ref().is_none_or(earlier) {
            winner = Some(r);
        }
    }
    total.wall_time = started.elapsed().as_secs_f64();
    Ok(match winner {
        Some(mut w) => {
            total.time_to_first_solution = w.stats.time_to_first_solution;
            w.stats = total;
            w
        }
        None => unsolved(PlanStatus::TimedOut, total, started),
    })
}

fn grow(problem: &ProblemInstance, cfg: &RrtConfig, seed: u64, stop: &AtomicBool, started: Instant) -> Result<PlanResult> {
    let deadline = cfg.deadline(started);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = *problem.env.bounds();
    let mut stats = SearchStats::default();
    let mut tree = Tree::default();
    let mut index = PointGrid::new(cfg.max_extend / 2.0);

    if !problem.env.point_free(&problem.start.position) {
        return Ok(unsolved(PlanStatus::TimedOut, stats, started));
    }
    let root = tree.push(problem.start, ROOT, None, 0.0);
    index.insert(problem.start.position, root);
    stats.nodes_inserted += 1;
    if problem.targeting_error(&problem.start.position) <= problem.tau {
        return finish(problem, &tree, root, None, stats, started);
    }

    loop {
        if stop.load(Ordering::Relaxed)
            || deadline.is_some_and(|d| Instant::now() >= d)
            || cfg.max_iterations.is_some_and(|m| stats.nodes_extracted >= m)
        {
            return Ok(unsolved(PlanStatus::TimedOut, stats, started));
        }
        stats.nodes_extracted += 1;
        let sample = if rng.gen_bool(cfg.goal_bias) {
            problem.goal
        } else {
            Vec3::from_fn(|i, _| rng.gen_range(bounds.min[i]..=bounds.max[i]))
        };
        let near = nearest(&tree, &index, cfg.max_extend / 2.0, &sample);
        let from = &tree.nodes[near as usize];
        let remaining = problem.ell_max - from.length;
        let Ok(arc) = curvature_to_point(&from.pose, &sample) else {
            continue;
        };
        let (kappa, reach) = if arc.kappa <= problem.kappa_max {
            (arc.kappa, arc.arc_len)
        } else {
            (problem.kappa_max, f64::INFINITY)
        };
        let len = reach.min(cfg.max_extend).min(remaining);
        if !(len > 1e-9) {
            stats.nodes_pruned_length += 1;
            continue;
        }
        let m = MotionPrimitive::new(kappa, len, arc.delta_theta);
        if !problem.env.arc_free(&from.pose, &m, cfg.collision_step)? {
            stats.nodes_pruned_collision += 1;
            continue;
        }
        let pose = apply_primitive(&from.pose, &m)?;
        let length = from.length + len;
        let idx = tree.push(pose, near, Some(m), length);
        index.insert(pose.position, idx);
        stats.nodes_inserted += 1;
        stats.nodes_expanded += 1;

        let connect = rng.gen_bool(cfg.direct_connect_ratio);
        let (hit, attempted) = goal_hit(problem, cfg.collision_step, connect, &pose, length)?;
        stats.direct_connect_attempts += attempted as u64;
        if let Some(hit) = hit {
            let tail = match hit {
                GoalHit::Reached => None,
                GoalHit::Connected(c) => Some(c),
            };
            return finish(problem, &tree, idx, tail.as_ref(), stats, started);
        }
    }
}

/// Exact nearest tree node by tip position: grid queries of doubling radius,
/// or a scan once the query volume outgrows the tree.
fn nearest(tree: &Tree, index: &PointGrid, cell: f64, p: &Vec3) -> u32 {
    let n = tree.nodes.len() as f64;
    let mut r = cell;
    loop {
        if (2.0 * r / cell + 1.0).powi(3) > n {
            return tree
                .nodes
                .iter()
                .enumerate()
                .map(|(i, node)| (i, (node.pose.position - p).norm_squared()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| i as u32)
                .expect("tree holds the root");
        }
        if let Some((i, _)) = index.nearest_within(p, r) {
            return i;
        }
        r *= 2.0;
    }
}

fn finish(
    problem: &ProblemInstance,
    tree: &Tree,
    idx: u32,
    tail: Option<&crate::geometry::GoalConnection>,
    mut stats: SearchStats,
    started: Instant,
) -> Result<PlanResult> {
    let t = tree.trajectory(problem, idx, tail);
    stats.solutions_found = 1;
    let elapsed = started.elapsed().as_secs_f64();
    stats.time_to_first_solution = Some(elapsed);
    stats.wall_time = elapsed;
    Ok(solved(problem, t, stats))
}
