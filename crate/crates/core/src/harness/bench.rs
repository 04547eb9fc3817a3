use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::{Deserialize, Serialize};

use super::verify_trajectory;
use crate::baselines::{plan_rrt, plan_rrt_parallel, plan_single_res, RrtConfig};
use crate::environment::ProblemInstance;
use crate::error::{Error, Result};
use crate::planner::{plan, PlanResult, PlanStatus, PlannerConfig, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlannerKind {
    Rcs,
    RcsB,
    RcsNr,
    RcsPar,
    Rrt,
    RrtPar,
    SingleRes,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 7] = [
        PlannerKind::Rcs,
        PlannerKind::RcsB,
        PlannerKind::RcsNr,
        PlannerKind::RcsPar,
        PlannerKind::Rrt,
        PlannerKind::RrtPar,
        PlannerKind::SingleRes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlannerKind::Rcs => "rcs",
            PlannerKind::RcsB => "rcs-b",
            PlannerKind::RcsNr => "rcs-nr",
            PlannerKind::RcsPar => "rcs-par",
            PlannerKind::Rrt => "rrt",
            PlannerKind::RrtPar => "rrt-par",
            PlannerKind::SingleRes => "single-res",
        }
    }

    fn variant(self) -> Option<Variant> {
        match self {
            PlannerKind::Rcs => Some(Variant::Rcs),
            PlannerKind::RcsB => Some(Variant::RcsB),
            PlannerKind::RcsNr => Some(Variant::RcsNr),
            PlannerKind::RcsPar => Some(Variant::RcsPar),
            _ => None,
        }
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlannerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown planner '{s}'")))
    }
}

/// Configuration shared by every planner of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerSettings {
    pub search: PlannerConfig,
    pub rrt: RrtConfig,
    /// Worker count for the parallel planners.
    pub threads: usize,
}

impl Default for PlannerSettings {
    fn default() -> Self {
        Self {
            search: PlannerConfig::default(),
            rrt: RrtConfig::default(),
            threads: 1,
        }
    }
}

pub fn run_planner(kind: PlannerKind, problem: &ProblemInstance, settings: &PlannerSettings) -> Result<PlanResult> {
    if let Some(variant) = kind.variant() {
        let cfg = PlannerConfig {
            variant,
            thread_count: if variant == Variant::RcsPar { settings.threads } else { 1 },
            ..settings.search.clone()
        };
        return plan(problem, &cfg);
    }
    match kind {
        PlannerKind::Rrt => plan_rrt(problem, &settings.rrt),
        PlannerKind::RrtPar => plan_rrt_parallel(problem, &settings.rrt, settings.threads),
        _ => plan_single_res(problem, &settings.search),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Solved,
    ExhaustedNoPlan,
    TimedOut,
    Error,
}

impl From<PlanStatus> for RecordStatus {
    fn from(s: PlanStatus) -> Self {
        match s {
            PlanStatus::Solved => RecordStatus::Solved,
            PlanStatus::ExhaustedNoPlan => RecordStatus::ExhaustedNoPlan,
            PlanStatus::TimedOut => RecordStatus::TimedOut,
        }
    }
}

/// One planner run on one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub case_id: usize,
    pub planner: String,
    pub status: RecordStatus,
    pub time_to_first_solution: Option<f64>,
    pub best_cost: Option<f64>,
    pub length: Option<f64>,
    pub targeting_error: Option<f64>,
    pub nodes_expanded: u64,
    pub wall_time: f64,
    /// Verifier verdict for solved runs.
    pub verified: Option<bool>,
    pub error: Option<String>,
}

impl BenchRecord {
    pub fn solved(&self) -> bool {
        self.status == RecordStatus::Solved
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    /// Per-run wall-clock budget, s.
    pub time_budget: f64,
    /// Keep improving after the first solution until the budget runs out.
    pub anytime: bool,
    /// Cases run concurrently.
    pub workers: usize,
    /// Run the trajectory verifier on solved runs.
    pub verify: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            time_budget: 100.0,
            anytime: true,
            workers: 1,
            verify: true,
        }
    }
}

fn record(case_id: usize, kind: PlannerKind, problem: &ProblemInstance, settings: &PlannerSettings, verify: bool) -> BenchRecord {
    let mut rec = BenchRecord {
        case_id,
        planner: kind.name().to_string(),
        status: RecordStatus::Error,
        time_to_first_solution: None,
        best_cost: None,
        length: None,
        targeting_error: None,
        nodes_expanded: 0,
        wall_time: 0.0,
        verified: None,
        error: None,
    };
    let result = run_planner(kind, problem, settings).and_then(|r| {
        let verified = match (verify, r.status) {
            (true, PlanStatus::Solved) => Some(verify_trajectory(&r, problem, settings.search.collision_step)?.passed()),
            _ => None,
        };
        Ok((r, verified))
    });
    match result {
        Ok((r, verified)) => {
            rec.status = r.status.into();
            rec.time_to_first_solution = r.stats.time_to_first_solution;
            rec.best_cost = r.cost;
            rec.length = r.trajectory.as_ref().map(|t| t.length);
            rec.targeting_error = r.trajectory.as_ref().map(|t| t.targeting_error);
            rec.nodes_expanded = r.stats.nodes_expanded;
            rec.wall_time = r.stats.wall_time;
            rec.verified = verified;
        }
        Err(e) => {
            log::warn!("case {case_id} with {kind}: {e}");
            rec.error = Some(e.to_string());
        }
    }
    rec
}

/// Runs every planner on every case; one record per pair, ordered by case
/// then planner. Failures are recorded, never propagated.
pub fn run_benchmark(
    suite: &[ProblemInstance],
    planners: &[PlannerKind],
    settings: &PlannerSettings,
    opts: &BenchOptions,
) -> Vec<BenchRecord> {
    let mut settings = settings.clone();
    settings.search.time_budget = Some(opts.time_budget);
    settings.search.anytime = opts.anytime;
    settings.rrt.time_budget = Some(opts.time_budget);
    let jobs: Vec<(usize, PlannerKind)> = (0..suite.len())
        .flat_map(|c| planners.iter().map(move |&k| (c, k)))
        .collect();
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(jobs.len()));
    thread::scope(|scope| {
        for _ in 0..opts.workers.max(1).min(jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(case, kind)) = jobs.get(i) else { break };
                let rec = record(case, kind, &suite[case], &settings, opts.verify);
                log::info!(
                    "case {case} {kind}: {:?} in {:.3}s",
                    rec.status,
                    rec.time_to_first_solution.unwrap_or(rec.wall_time)
                );
                done.lock().unwrap_or_else(|p| p.into_inner()).push((i, rec));
            });
        }
    });
    let mut done = done.into_inner().unwrap_or_else(|p| p.into_inner());
    done.sort_by_key(|(i, _)| *i);
    done.into_iter().map(|(_, r)| r).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub planner: String,
    pub time: f64,
    pub success_rate: f64,
}

fn planners_in_order(records: &[BenchRecord]) -> Vec<&str> {
    let mut names: Vec<&str> = Vec::new();
    for r in records {
        if !names.contains(&r.planner.as_str()) {
            names.push(&r.planner);
        }
    }
    names
}

/// Fraction of each planner's cases solved within each grid time.
pub fn success_curve(records: &[BenchRecord], time_grid: &[f64]) -> Vec<CurvePoint> {
    let mut out = Vec::new();
    for name in planners_in_order(records) {
        let mine: Vec<&BenchRecord> = records.iter().filter(|r| r.planner == name).collect();
        for &t in time_grid {
            let solved = mine
                .iter()
                .filter(|r| r.solved() && r.time_to_first_solution.is_some_and(|s| s <= t))
                .count();
            out.push(CurvePoint {
                planner: name.to_string(),
                time: t,
                success_rate: solved as f64 / mine.len() as f64,
            });
        }
    }
    out
}

/// Per-planner summary row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub planner: String,
    pub cases: usize,
    pub solved: usize,
    pub success_rate: f64,
    /// Mean of length over the reference planner's length, on cases both solved.
    pub relative_length: Option<f64>,
    pub mean_targeting_error: Option<f64>,
    pub mean_time_to_first_solution: Option<f64>,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = v.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

/// Success rate, relative length and mean tip error per planner. Lengths are
/// compared with the lowest-cost `rcs-par` plan of each case, or `rcs` when no
/// parallel runs are present.
pub fn summarize(records: &[BenchRecord]) -> Vec<SummaryRow> {
    let reference = ["rcs-par", "rcs"]
        .into_iter()
        .find(|n| records.iter().any(|r| r.planner == *n));
    let mut baseline: HashMap<usize, (f64, f64)> = HashMap::new();
    for r in records.iter().filter(|r| Some(r.planner.as_str()) == reference && r.solved()) {
        if let (Some(c), Some(l)) = (r.best_cost, r.length) {
            let e = baseline.entry(r.case_id).or_insert((c, l));
            if c < e.0 {
                *e = (c, l);
            }
        }
    }
    planners_in_order(records)
        .into_iter()
        .map(|name| {
            let mine: Vec<&BenchRecord> = records.iter().filter(|r| r.planner == name).collect();
            let solved: Vec<&&BenchRecord> = mine.iter().filter(|r| r.solved()).collect();
            SummaryRow {
                planner: name.to_string(),
                cases: mine.len(),
                solved: solved.len(),
                success_rate: if mine.is_empty() { 0.0 } else { solved.len() as f64 / mine.len() as f64 },
                relative_length: mean(solved.iter().filter_map(|r| {
                    let (_, base) = baseline.get(&r.case_id)?;
                    (*base > 0.0).then(|| r.length.unwrap_or(0.0) / base)
                })),
                mean_targeting_error: mean(solved.iter().filter_map(|r| r.targeting_error)),
                mean_time_to_first_solution: mean(solved.iter().filter_map(|r| r.time_to_first_solution)),
            }
        })
        .collect()
}

pub fn format_summary(rows: &[SummaryRow]) -> String {
    let opt = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |x| format!("{x:.p$}"));
    let mut s = format!(
        "{:<11} {:>6} {:>6} {:>8} {:>8} {:>10} {:>10}\n",
        "planner", "cases", "solved", "success", "rel.len", "err (mm)", "t1 (s)"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<11} {:>6} {:>6} {:>7.1}% {:>8} {:>10} {:>10}",
            r.planner,
            r.cases,
            r.solved,
            100.0 * r.success_rate,
            opt(r.relative_length, 3),
            opt(r.mean_targeting_error, 4),
            opt(r.mean_time_to_first_solution, 3),
        );
    }
    s
}

/// Writes serializable rows as CSV with a header line.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
