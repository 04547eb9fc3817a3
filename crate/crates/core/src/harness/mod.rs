//! Benchmark runner, verification oracles and reports.

pub mod appendix;
mod bench;
mod oracle;

pub use bench::{
    format_summary, run_benchmark, run_planner, success_curve, summarize, write_csv, BenchOptions, BenchRecord,
    CurvePoint, PlannerKind, PlannerSettings, RecordStatus, SummaryRow,
};
pub use oracle::{
    clearance, hausdorff_one_way, ode_integrate, ode_oracle, verify_trajectory, Check, VerifyReport,
    CURVATURE_TOLERANCE, ORACLE_MAX_STEP, WAYPOINT_TOLERANCE,
};

use crate::geometry::Vec3;
use crate::planner::Trajectory;

/// Path cost: insertion length relative to `ell_max` plus tip error relative to `tau`.
pub fn cost(trajectory: &Trajectory, ell_max: f64, tau: f64, goal: &Vec3) -> f64 {
    trajectory.length / ell_max + (trajectory.end().position - goal).norm() / tau
}
