use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::{solved, unsolved, Tree, ROOT};
use crate::environment::ProblemInstance;
use crate::error::Result;
use crate::geometry::apply_primitive;
use crate::harness::cost;
use crate::planner::{
    goal_hit, validate_node, Candidate, ClosedSet, GoalHit, PlanResult, PlanStatus, PlannerConfig, Rejection,
    SearchStats, Trajectory, Variant,
};
use crate::primitives::finest_set;

struct Item {
    length: f64,
    serial: u64,
    parent: u32,
    prim: u32,
}

impl PartialEq for Item {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .length
            .total_cmp(&self.length)
            .then_with(|| other.serial.cmp(&self.serial))
    }
}

/// Best-first search over the cutoff-resolution primitive set only, ordered by
/// accumulated length. Uses reachability pruning, duplicate and similar-node
/// rejection and direct goal connection; `cfg.variant` is ignored.
pub fn plan_single_res(problem: &ProblemInstance, cfg: &PlannerConfig) -> Result<PlanResult> {
    cfg.validate()?;
    problem.validate()?;
    let checks = PlannerConfig {
        variant: Variant::Rcs,
        ..cfg.clone()
    };
    let curvatures: &[f64] = if problem.kappa_max > 0.0 {
        &[0.0, problem.kappa_max]
    } else {
        &[0.0]
    };
    let prims = finest_set(&cfg.cutoff, curvatures);
    let started = Instant::now();
    let deadline = cfg.deadline(started);

    let mut stats = SearchStats {
        nodes_inserted: 1,
        ..Default::default()
    };
    let mut open = BinaryHeap::new();
    open.push(Item {
        length: 0.0,
        serial: 0,
        parent: ROOT,
        prim: 0,
    });
    let mut serial = 1;
    let mut tree = Tree::default();
    let mut closed = ClosedSet::new(cfg.d_sim);
    let mut best: Option<(f64, Trajectory)> = None;
    let mut budget_hit = false;

    while let Some(item) = open.pop() {
        if deadline.is_some_and(|d| Instant::now() >= d)
            || cfg.max_expansions.is_some_and(|m| stats.nodes_extracted >= m)
            || cfg.max_open.is_some_and(|m| open.len() >= m)
        {
            budget_hit = true;
            break;
        }
        stats.nodes_extracted += 1;
        let node = if item.parent == ROOT {
            Candidate {
                pose: problem.start,
                arc: None,
                accumulated_length: 0.0,
            }
        } else {
            let parent = &tree.nodes[item.parent as usize];
            let m = prims[item.prim as usize];
            Candidate {
                pose: apply_primitive(&parent.pose, &m)?,
                arc: Some((parent.pose, m)),
                accumulated_length: item.length,
            }
        };
        match validate_node(&node, problem, &checks, &closed)? {
            Some(Rejection::Length) => stats.nodes_pruned_length += 1,
            Some(Rejection::Reachability) => stats.nodes_pruned_reachability += 1,
            Some(Rejection::Duplicate) => stats.nodes_pruned_duplicate += 1,
            Some(Rejection::Collision) => stats.nodes_pruned_collision += 1,
            None if closed.exists_similar(&node.pose, cfg.d_sim, cfg.alpha) => stats.nodes_pruned_similar += 1,
            None => {
                let idx = tree.push(node.pose, item.parent, node.arc.map(|(_, m)| m), node.accumulated_length);
                closed.insert(&node.pose);
                stats.nodes_expanded += 1;
                let (hit, attempted) = goal_hit(problem, cfg.collision_step, true, &node.pose, node.accumulated_length)?;
                stats.direct_connect_attempts += attempted as u64;
                if let Some(hit) = hit {
                    let tail = match &hit {
                        GoalHit::Reached => None,
                        GoalHit::Connected(c) => Some(c),
                    };
                    let t = tree.trajectory(problem, idx, tail);
                    stats.solutions_found += 1;
                    stats.time_to_first_solution.get_or_insert(started.elapsed().as_secs_f64());
                    let c = cost(&t, problem.ell_max, problem.tau, &problem.goal);
                    if best.as_ref().is_none_or(|(b, _)| c < *b) {
                        best = Some((c, t));
                    }
                    if !cfg.anytime {
                        break;
                    }
                }
                for (i, m) in prims.iter().enumerate() {
                    open.push(Item {
                        length: node.accumulated_length + m.delta_ell,
                        serial,
                        parent: idx,
                        prim: i as u32,
                    });
                    serial += 1;
                    stats.nodes_inserted += 1;
                }
            }
        }
    }

    if let Some((_, t)) = best {
        stats.wall_time = started.elapsed().as_secs_f64();
        return Ok(solved(problem, t, stats));
    }
    let status = if budget_hit {
        PlanStatus::TimedOut
    } else {
        PlanStatus::ExhaustedNoPlan
    };
    Ok(unsolved(status, stats, started))
}
