//! Comparison planners: workspace-sampling RRT and single-resolution search.

mod rrt;
mod single_res;

pub use rrt::{plan_rrt, plan_rrt_parallel, RrtConfig};
pub use single_res::plan_single_res;

use std::time::Instant;

use crate::environment::ProblemInstance;
use crate::geometry::{GoalConnection, Pose};
use crate::harness::cost;
use crate::planner::{PlanResult, PlanStatus, SearchStats, Trajectory};
use crate::primitives::MotionPrimitive;

const ROOT: u32 = u32::MAX;

struct TreeNode {
    pose: Pose,
    parent: u32,
    motion: Option<MotionPrimitive>,
    length: f64,
}

/// Explicit search tree rooted at the start pose.
#[derive(Default)]
struct Tree {
    nodes: Vec<TreeNode>,
}

impl Tree {
    fn push(&mut self, pose: Pose, parent: u32, motion: Option<MotionPrimitive>, length: f64) -> u32 {
        self.nodes.push(TreeNode {
            pose,
            parent,
            motion,
            length,
        });
        (self.nodes.len() - 1) as u32
    }

    fn trajectory(&self, problem: &ProblemInstance, idx: u32, tail: Option<&GoalConnection>) -> Trajectory {
        let mut primitives = Vec::new();
        let mut waypoints = Vec::new();
        let mut at = idx;
        while at != ROOT {
            let n = &self.nodes[at as usize];
            waypoints.push(n.pose);
            if let Some(m) = n.motion {
                primitives.push(m);
            }
            at = n.parent;
        }
        primitives.reverse();
        waypoints.reverse();
        let mut length = self.nodes[idx as usize].length;
        if let Some(conn) = tail {
            primitives.push(*conn.arc.primitive());
            waypoints.push(*conn.arc.end());
            length += conn.arc.length();
        }
        let targeting_error = problem.targeting_error(&waypoints.last().unwrap().position);
        Trajectory {
            primitives,
            waypoints,
            length,
            targeting_error,
        }
    }
}

fn solved(problem: &ProblemInstance, trajectory: Trajectory, stats: SearchStats) -> PlanResult {
    let c = cost(&trajectory, problem.ell_max, problem.tau, &problem.goal);
    PlanResult {
        status: PlanStatus::Solved,
        trajectory: Some(trajectory),
        cost: Some(c),
        stats,
    }
}

fn unsolved(status: PlanStatus, mut stats: SearchStats, started: Instant) -> PlanResult {
    stats.wall_time = started.elapsed().as_secs_f64();
    PlanResult {
        status,
        trajectory: None,
        cost: None,
        stats,
    }
}
