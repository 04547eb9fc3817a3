//! Resolution-complete multi-resolution search.
//!
//! Nodes are kept lazily: OPEN holds (rank, parent, primitive) triples and a
//! child's pose is computed only when it is extracted. Accepted nodes live in
//! an arena and are indexed by position in the closed set.

mod closed;
mod open;
mod parallel;

use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::environment::{ProblemInstance, DEFAULT_COLLISION_STEP};
use crate::error::{Error, Result};
use crate::geometry::{apply_primitive, direct_connect, goal_reachable, GoalConnection, Pose};
use crate::harness::cost;
use crate::primitives::{Hierarchy, LatticePrimitive, MotionPrimitive, PrimitiveId, Resolution};

pub use closed::{exists_similar, ClosedSet, DUPLICATE_TOLERANCE};
pub use parallel::plan_parallel;

use open::OpenList;

/// Default OPEN size limit, about 1.3 GB of entries.
pub const DEFAULT_MAX_OPEN: usize = 40_000_000;

/// Slack on the insertion-length bound, mm.
pub const LENGTH_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Basic search with similar-node rejection.
    RcsB,
    /// Basic search without similar-node rejection.
    RcsNr,
    /// Basic search plus reachability pruning, direct goal connection and
    /// equivalent-node pruning.
    Rcs,
    /// `Rcs` processed by a pool of worker threads.
    RcsPar,
}

impl Variant {
    pub fn similar_rejection(self) -> bool {
        self != Variant::RcsNr
    }

    /// Reachability pruning, direct connection and equivalent-node pruning.
    pub fn optimized(self) -> bool {
        matches!(self, Variant::Rcs | Variant::RcsPar)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::RcsB => "rcs-b",
            Variant::RcsNr => "rcs-nr",
            Variant::Rcs => "rcs",
            Variant::RcsPar => "rcs-par",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rcs-b" => Ok(Variant::RcsB),
            "rcs-nr" => Ok(Variant::RcsNr),
            "rcs" => Ok(Variant::Rcs),
            "rcs-par" => Ok(Variant::RcsPar),
            other => Err(Error::Config(format!("unknown variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    pub delta_ell_max: f64,
    pub delta_theta_max: f64,
    pub cutoff: Resolution,
    pub d_sim: f64,
    pub alpha: f64,
    pub collision_step: f64,
    pub variant: Variant,
    pub thread_count: usize,
    /// Wall-clock budget in seconds; `None` runs until OPEN is empty.
    pub time_budget: Option<f64>,
    pub rng_seed: u64,
    /// Deterministic budget on node extractions.
    pub max_expansions: Option<u64>,
    /// Keep searching after the first solution and return the lowest-cost one.
    pub anytime: bool,
    /// Memory guard: stop (as out of budget) once OPEN holds this many entries.
    pub max_open: Option<usize>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            delta_ell_max: 20.0,
            delta_theta_max: FRAC_PI_2,
            cutoff: Resolution {
                ell: 0.125,
                theta: 0.157,
            },
            d_sim: 5.5e-5,
            alpha: 0.05,
            collision_step: DEFAULT_COLLISION_STEP,
            variant: Variant::Rcs,
            thread_count: 1,
            time_budget: Some(100.0),
            rng_seed: 0,
            max_expansions: None,
            anytime: false,
            max_open: Some(DEFAULT_MAX_OPEN),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("delta_ell_max", self.delta_ell_max)?;
        positive("delta_theta_max", self.delta_theta_max)?;
        positive("cutoff.ell", self.cutoff.ell)?;
        positive("cutoff.theta", self.cutoff.theta)?;
        positive("alpha", self.alpha)?;
        positive("collision_step", self.collision_step)?;
        if !(self.d_sim >= 0.0 && self.d_sim.is_finite()) {
            return Err(Error::Config(format!("d_sim must be finite and >= 0, got {}", self.d_sim)));
        }
        if self.thread_count == 0 {
            return Err(Error::Config("thread_count must be at least 1".into()));
        }
        if let Some(t) = self.time_budget {
            if !(t >= 0.0) {
                return Err(Error::Config(format!("time_budget must be >= 0, got {t}")));
            }
        }
        Ok(())
    }

    pub(crate) fn deadline(&self, from: Instant) -> Option<Instant> {
        self.time_budget
            .map(|t| from + Duration::from_secs_f64(t.min(1e9)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Solved,
    ExhaustedNoPlan,
    TimedOut,
}

impl fmt::Display for PlanStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanStatus::Solved => "solved",
            PlanStatus::ExhaustedNoPlan => "exhausted_no_plan",
            PlanStatus::TimedOut => "timed_out",
        })
    }
}

/// A primitive sequence from the start and the poses it passes through.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub primitives: Vec<MotionPrimitive>,
    /// Start pose followed by the pose after each primitive.
    pub waypoints: Vec<Pose>,
    pub length: f64,
    pub targeting_error: f64,
}

impl Trajectory {
    /// Forward-simulates `primitives` from `start`.
    pub fn from_primitives(start: &Pose, primitives: Vec<MotionPrimitive>, goal: &crate::geometry::Vec3) -> Result<Self> {
        let mut waypoints = Vec::with_capacity(primitives.len() + 1);
        waypoints.push(*start);
        for m in &primitives {
            let next = apply_primitive(waypoints.last().unwrap(), m)?;
            waypoints.push(next);
        }
        let length = primitives.iter().map(|m| m.delta_ell).sum();
        let targeting_error = (waypoints.last().unwrap().position - goal).norm();
        Ok(Self {
            primitives,
            waypoints,
            length,
            targeting_error,
        })
    }

    pub fn end(&self) -> &Pose {
        self.waypoints.last().expect("trajectory has at least the start pose")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_extracted: u64,
    /// Accepted nodes, each expanded with the coarsest primitives.
    pub nodes_expanded: u64,
    pub nodes_inserted: u64,
    pub nodes_pruned_length: u64,
    pub nodes_pruned_reachability: u64,
    pub nodes_pruned_duplicate: u64,
    pub nodes_pruned_collision: u64,
    pub nodes_pruned_similar: u64,
    pub equivalent_skipped: u64,
    pub direct_connect_attempts: u64,
    pub solutions_found: u64,
    pub wall_time: f64,
    pub time_to_first_solution: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub status: PlanStatus,
    pub trajectory: Option<Trajectory>,
    /// Path cost of the returned trajectory.
    pub cost: Option<f64>,
    pub stats: SearchStats,
}

#[derive(Serialize, Deserialize)]
struct PlanFile {
    status: PlanStatus,
    primitives: Vec<MotionPrimitive>,
    waypoints: Vec<Pose>,
    length_mm: Option<f64>,
    targeting_error_mm: Option<f64>,
    cost: Option<f64>,
    stats: SearchStats,
}

impl PlanResult {
    /// Plan output document.
    pub fn to_json(&self) -> Result<String> {
        let t = self.trajectory.as_ref();
        let file = PlanFile {
            status: self.status,
            primitives: t.map(|t| t.primitives.clone()).unwrap_or_default(),
            waypoints: t.map(|t| t.waypoints.clone()).unwrap_or_default(),
            length_mm: t.map(|t| t.length),
            targeting_error_mm: t.map(|t| t.targeting_error),
            cost: self.cost,
            stats: self.stats.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PlanFile = serde_json::from_str(text)?;
        let trajectory = match (file.length_mm, file.targeting_error_mm) {
            (Some(length), Some(targeting_error)) => Some(Trajectory {
                primitives: file.primitives,
                waypoints: file.waypoints,
                length,
                targeting_error,
            }),
            _ => None,
        };
        Ok(Self {
            status: file.status,
            trajectory,
            cost: file.cost,
            stats: file.stats,
        })
    }

    /// Serialized form with timings zeroed, for run-to-run comparison.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut copy = self.clone();
        copy.stats.wall_time = 0.0;
        copy.stats.time_to_first_solution = None;
        copy.to_json().expect("plan results always serialize").into_bytes()
    }
}

/// Why an extracted node was discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    Length,
    Reachability,
    Duplicate,
    Collision,
}

/// An extracted node before validation.
#[derive(Debug, Clone, Copy)]
pub struct Candidate {
    pub pose: Pose,
    /// Parent pose and extending primitive; `None` for the root.
    pub arc: Option<(Pose, MotionPrimitive)>,
    pub accumulated_length: f64,
}

/// Lazy validation of an extracted node, in order: insertion length,
/// goal reachability, duplicates in CLOSED, collision of the extending arc.
/// The reachability and duplicate checks only run for optimized variants.
pub fn validate_node(
    node: &Candidate,
    problem: &ProblemInstance,
    cfg: &PlannerConfig,
    closed: &ClosedSet,
) -> Result<Option<Rejection>> {
    if let Some(r) = validate_cheap(node, problem, cfg, closed) {
        return Ok(Some(r));
    }
    validate_collision(node, problem, cfg)
}

fn validate_cheap(node: &Candidate, problem: &ProblemInstance, cfg: &PlannerConfig, closed: &ClosedSet) -> Option<Rejection> {
    if node.accumulated_length > problem.ell_max + LENGTH_SLACK {
        return Some(Rejection::Length);
    }
    let optimized = cfg.variant.optimized();
    if optimized && !goal_reachable(&node.pose, &problem.goal, problem.kappa_max, problem.tau) {
        return Some(Rejection::Reachability);
    }
    if optimized && closed.contains_duplicate(&node.pose, cfg.alpha) {
        return Some(Rejection::Duplicate);
    }
    None
}

fn validate_collision(node: &Candidate, problem: &ProblemInstance, cfg: &PlannerConfig) -> Result<Option<Rejection>> {
    let free = match &node.arc {
        Some((parent, m)) => problem.env.arc_free(parent, m, cfg.collision_step)?,
        None => problem.env.point_free(&node.pose.position),
    };
    Ok((!free).then_some(Rejection::Collision))
}

/// Observable search events, for instrumentation and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchEvent {
    Extracted { rank: u32 },
    Accepted { rank: u32 },
    Rejected { rank: u32, reason: Rejection },
    Similar { rank: u32 },
}

const ROOT: u32 = u32::MAX;
const SERIAL_BITS: u32 = 40;

/// OPEN entry keyed by `(rank, serial)`; the reversed ordering makes a
/// max-heap pop the lowest key.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Entry {
    key: u64,
    parent: u32,
    prim: LatticePrimitive,
}

impl Entry {
    fn new(rank: u32, serial: u64, parent: u32, prim: LatticePrimitive) -> Self {
        Self {
            key: (rank as u64) << SERIAL_BITS | (serial & ((1 << SERIAL_BITS) - 1)),
            parent,
            prim,
        }
    }

    pub(crate) fn rank(&self) -> u32 {
        (self.key >> SERIAL_BITS) as u32
    }

    pub(crate) fn is_root(&self) -> bool {
        self.parent == ROOT
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.cmp(&self.key)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub(crate) pose: Pose,
    parent: u32,
    motion: Option<MotionPrimitive>,
    pub(crate) rank: u32,
    pub(crate) length: f64,
}

/// Immutable per-run data shared by serial and parallel searches.
pub(crate) struct Search<'a> {
    pub(crate) problem: &'a ProblemInstance,
    pub(crate) cfg: &'a PlannerConfig,
    hierarchy: Hierarchy,
    coarsest: Vec<LatticePrimitive>,
    optimized: bool,
}

impl<'a> Search<'a> {
    pub(crate) fn new(problem: &'a ProblemInstance, cfg: &'a PlannerConfig) -> Result<Self> {
        cfg.validate()?;
        problem.validate()?;
        let hierarchy = Hierarchy::new(problem.kappa_max, cfg.delta_ell_max, cfg.delta_theta_max, cfg.cutoff)?;
        let coarsest = hierarchy.coarsest();
        Ok(Self {
            problem,
            cfg,
            hierarchy,
            coarsest,
            optimized: cfg.variant.optimized(),
        })
    }

    /// Candidate for an OPEN entry, given the state that owns its parent.
    pub(crate) fn candidate(&self, state: &State, entry: &Entry) -> Result<Candidate> {
        if entry.is_root() {
            return Ok(Candidate {
                pose: self.problem.start,
                arc: None,
                accumulated_length: 0.0,
            });
        }
        let parent = &state.nodes[entry.parent as usize];
        let m = self.hierarchy.to_motion(&entry.prim);
        Ok(Candidate {
            pose: apply_primitive(&parent.pose, &m)?,
            arc: Some((parent.pose, m)),
            accumulated_length: parent.length + m.delta_ell,
        })
    }
}

/// How an accepted node reaches the goal.
pub(crate) enum GoalHit {
    Reached,
    Connected(GoalConnection),
}

impl Search<'_> {
    /// Goal test, then (optimized variants) a collision-checked direct connection
    /// whose length still fits the insertion bound. The flag reports whether a
    /// connection was attempted.
    pub(crate) fn goal_hit(&self, pose: &Pose, length: f64) -> Result<(Option<GoalHit>, bool)> {
        goal_hit(self.problem, self.cfg.collision_step, self.optimized, pose, length)
    }
}

pub(crate) fn goal_hit(
    p: &ProblemInstance,
    collision_step: f64,
    connect: bool,
    pose: &Pose,
    length: f64,
) -> Result<(Option<GoalHit>, bool)> {
    if p.targeting_error(&pose.position) <= p.tau {
        return Ok((Some(GoalHit::Reached), false));
    }
    if !connect {
        return Ok((None, false));
    }
    let Ok(Some(conn)) = direct_connect(pose, &p.goal, p.kappa_max, p.tau) else {
        return Ok((None, true));
    };
    if length + conn.arc.length() > p.ell_max + LENGTH_SLACK || !p.env.arc_free(pose, conn.arc.primitive(), collision_step)? {
        return Ok((None, true));
    }
    Ok((Some(GoalHit::Connected(conn)), true))
}

/// Mutable search state: OPEN, the node arena and CLOSED.
pub(crate) struct State {
    pub(crate) open: OpenList,
    pub(crate) nodes: Vec<Node>,
    pub(crate) closed: ClosedSet,
    /// Refined primitives already used to extend each parent.
    explored: FxHashSet<(u32, PrimitiveId)>,
    next_serial: u64,
    pub(crate) stats: SearchStats,
    pub(crate) best: Option<(f64, Trajectory)>,
}

impl State {
    pub(crate) fn new(cfg: &PlannerConfig) -> Self {
        let mut open = OpenList::default();
        open.push(Entry::new(
            0,
            0,
            ROOT,
            LatticePrimitive {
                curvature: 0,
                length: crate::primitives::Dyadic { num: 0, level: 0 },
                angle: crate::primitives::Dyadic { num: 0, level: 0 },
            },
        ));
        Self {
            open,
            nodes: Vec::new(),
            closed: ClosedSet::new(cfg.d_sim),
            explored: FxHashSet::default(),
            next_serial: 1,
            stats: SearchStats {
                nodes_inserted: 1,
                ..Default::default()
            },
            best: None,
        }
    }

    fn push(&mut self, rank: u32, parent: u32, prim: LatticePrimitive) {
        self.open.push(Entry::new(rank, self.next_serial, parent, prim));
        self.next_serial += 1;
        self.stats.nodes_inserted += 1;
    }

    /// Refined siblings of an extracted node, extending its parent.
    pub(crate) fn insert_refined(&mut self, search: &Search, entry: &Entry) -> usize {
        if entry.is_root() {
            return 0;
        }
        let parent = entry.parent;
        let parent_rank = self.nodes[parent as usize].rank;
        let mut inserted = 0;
        for r in search.hierarchy.refine(&entry.prim) {
            if search.hierarchy.below_cutoff(&r) {
                continue;
            }
            if search.optimized && !self.explored.insert((parent, r.id())) {
                self.stats.equivalent_skipped += 1;
                continue;
            }
            self.push(search.hierarchy.rank(parent_rank, &r), parent, r);
            inserted += 1;
        }
        inserted
    }

    /// Adds an accepted node to the tree and CLOSED; returns its index.
    pub(crate) fn accept(&mut self, entry: &Entry, node: &Candidate) -> u32 {
        let idx = self.nodes.len() as u32;
        self.nodes.push(Node {
            pose: node.pose,
            parent: entry.parent,
            motion: node.arc.map(|(_, m)| m),
            rank: entry.rank(),
            length: node.accumulated_length,
        });
        self.closed.insert(&node.pose);
        self.stats.nodes_expanded += 1;
        idx
    }

    pub(crate) fn expand(&mut self, search: &Search, idx: u32) {
        let rank = self.nodes[idx as usize].rank;
        // refinements never reproduce a coarsest primitive, so these need no
        // explored-set entry
        for c in search.coarsest.iter() {
            self.push(search.hierarchy.rank(rank, c), idx, *c);
        }
    }

    /// Walks parent links from `idx` to the root, optionally appending a goal arc.
    pub(crate) fn retrieve_plan(&self, search: &Search, idx: u32, tail: Option<&GoalConnection>) -> Trajectory {
        let mut primitives = Vec::new();
        let mut waypoints = Vec::new();
        let mut at = idx;
        loop {
            let node = &self.nodes[at as usize];
            waypoints.push(node.pose);
            match node.motion {
                Some(m) => primitives.push(m),
                None => break,
            }
            at = node.parent;
        }
        primitives.reverse();
        waypoints.reverse();
        let mut length = self.nodes[idx as usize].length;
        if let Some(conn) = tail {
            primitives.push(*conn.arc.primitive());
            waypoints.push(*conn.arc.end());
            length += conn.arc.length();
        }
        let targeting_error = search.problem.targeting_error(&waypoints.last().unwrap().position);
        Trajectory {
            primitives,
            waypoints,
            length,
            targeting_error,
        }
    }

    /// Records a solution; returns true if it improved the best cost.
    pub(crate) fn offer(&mut self, search: &Search, trajectory: Trajectory, started: Instant) -> bool {
        let p = search.problem;
        let c = cost(&trajectory, p.ell_max, p.tau, &p.goal);
        self.stats.solutions_found += 1;
        if self.stats.time_to_first_solution.is_none() {
            self.stats.time_to_first_solution = Some(started.elapsed().as_secs_f64());
        }
        if self.best.as_ref().is_none_or(|(b, _)| c < *b) {
            self.best = Some((c, trajectory));
            true
        } else {
            false
        }
    }

    pub(crate) fn record_goal(&mut self, search: &Search, idx: u32, hit: &GoalHit, started: Instant) {
        let tail = match hit {
            GoalHit::Reached => None,
            GoalHit::Connected(conn) => Some(conn),
        };
        let t = self.retrieve_plan(search, idx, tail);
        self.offer(search, t, started);
    }

    /// Final result; `budget_hit` marks a run stopped by its time or expansion budget.
    pub(crate) fn finish(self, started: Instant, budget_hit: bool) -> PlanResult {
        let mut stats = self.stats;
        stats.wall_time = started.elapsed().as_secs_f64();
        let open_empty = self.open.is_empty() && !budget_hit;
        match self.best {
            Some((c, t)) => PlanResult {
                status: PlanStatus::Solved,
                trajectory: Some(t),
                cost: Some(c),
                stats,
            },
            None => PlanResult {
                status: if open_empty {
                    PlanStatus::ExhaustedNoPlan
                } else {
                    PlanStatus::TimedOut
                },
                trajectory: None,
                cost: None,
                stats,
            },
        }
    }
}

/// Runs the configured variant. `RcsPar` with more than one thread uses the
/// worker pool; every other configuration runs serially.
pub fn plan(problem: &ProblemInstance, cfg: &PlannerConfig) -> Result<PlanResult> {
    if cfg.variant == Variant::RcsPar && cfg.thread_count > 1 {
        return plan_parallel(problem, cfg);
    }
    plan_observed(problem, cfg, &mut |_| {})
}

/// Serial search reporting every extraction to `observer`.
pub fn plan_observed(
    problem: &ProblemInstance,
    cfg: &PlannerConfig,
    observer: &mut dyn FnMut(SearchEvent),
) -> Result<PlanResult> {
    let search = Search::new(problem, cfg)?;
    let started = Instant::now();
    let deadline = cfg.deadline(started);
    let mut state = State::new(cfg);

    let mut budget_hit = false;
    while let Some(entry) = state.open.pop() {
        if deadline.is_some_and(|d| Instant::now() >= d)
            || cfg.max_expansions.is_some_and(|m| state.stats.nodes_extracted >= m)
            || cfg.max_open.is_some_and(|m| state.open.len() >= m)
        {
            state.open.push(entry);
            budget_hit = true;
            break;
        }
        state.stats.nodes_extracted += 1;
        let rank = entry.rank();
        observer(SearchEvent::Extracted { rank });

        let node = search.candidate(&state, &entry)?;
        match validate_node(&node, problem, cfg, &state.closed)? {
            Some(reason) => {
                state.count_rejection(reason);
                observer(SearchEvent::Rejected { rank, reason });
            }
            None if cfg.variant.similar_rejection() && state.closed.exists_similar(&node.pose, cfg.d_sim, cfg.alpha) => {
                state.stats.nodes_pruned_similar += 1;
                observer(SearchEvent::Similar { rank });
            }
            None => {
                observer(SearchEvent::Accepted { rank });
                let idx = state.accept(&entry, &node);
                let (hit, attempted) = search.goal_hit(&node.pose, node.accumulated_length)?;
                state.stats.direct_connect_attempts += attempted as u64;
                if let Some(hit) = hit {
                    state.record_goal(&search, idx, &hit, started);
                    if !cfg.anytime {
                        return Ok(state.finish(started, false));
                    }
                }
                state.expand(&search, idx);
            }
        }
        state.insert_refined(&search, &entry);
    }
    Ok(state.finish(started, budget_hit))
}

impl State {
    pub(crate) fn count_rejection(&mut self, reason: Rejection) {
        let s = &mut self.stats;
        match reason {
            Rejection::Length => s.nodes_pruned_length += 1,
            Rejection::Reachability => s.nodes_pruned_reachability += 1,
            Rejection::Duplicate => s.nodes_pruned_duplicate += 1,
            Rejection::Collision => s.nodes_pruned_collision += 1,
        }
    }
}

#[cfg(test)]
mod tests;
