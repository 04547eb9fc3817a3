//! Worker-pool search. OPEN, the arena and CLOSED sit behind one mutex;
//! collision and goal-connection checks run outside it.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Condvar, Mutex, MutexGuard};
use std::thread;
use std::time::{Duration, Instant};

use super::{plan_observed, validate_cheap, validate_collision, PlanResult, PlannerConfig, Rejection, Search, State};
use crate::environment::ProblemInstance;
use crate::error::{Error, Result};

struct Shared {
    state: State,
    busy: usize,
    done: bool,
    budget_hit: bool,
    error: Option<Error>,
}

/// Parallel search with `cfg.thread_count` workers. A single thread runs the
/// serial search.
pub fn plan_parallel(problem: &ProblemInstance, cfg: &PlannerConfig) -> Result<PlanResult> {
    if cfg.thread_count <= 1 {
        return plan_observed(problem, cfg, &mut |_| {});
    }
    let search = Search::new(problem, cfg)?;
    let started = Instant::now();
    let deadline = cfg.deadline(started);
    let shared = Mutex::new(Shared {
        state: State::new(cfg),
        busy: 0,
        done: false,
        budget_hit: false,
        error: None,
    });
    let wake = Condvar::new();
    let stop = AtomicBool::new(false);

    thread::scope(|scope| {
        for _ in 0..cfg.thread_count {
            scope.spawn(|| {
                if let Err(e) = worker(&search, &shared, &wake, &stop, started, deadline) {
                    let mut g = lock(&shared);
                    g.error.get_or_insert(e);
                    stop.store(true, Ordering::SeqCst);
                    wake.notify_all();
                }
            });
        }
    });

    let shared = shared.into_inner().unwrap_or_else(|p| p.into_inner());
    if let Some(e) = shared.error {
        return Err(e);
    }
    Ok(shared.state.finish(started, shared.budget_hit))
}

fn lock(m: &Mutex<Shared>) -> MutexGuard<'_, Shared> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

fn worker(
    search: &Search,
    shared: &Mutex<Shared>,
    wake: &Condvar,
    stop: &AtomicBool,
    started: Instant,
    deadline: Option<Instant>,
) -> Result<()> {
    let cfg = search.cfg;
    let problem = search.problem;
    loop {
        let mut g = lock(shared);
        let entry = loop {
            if stop.load(Ordering::SeqCst) || g.done {
                return Ok(());
            }
            let over_budget = deadline.is_some_and(|d| Instant::now() >= d)
                || cfg.max_expansions.is_some_and(|m| g.state.stats.nodes_extracted >= m)
                || cfg.max_open.is_some_and(|m| g.state.open.len() >= m);
            if over_budget {
                g.budget_hit = true;
                stop.store(true, Ordering::SeqCst);
                wake.notify_all();
                return Ok(());
            }
            if let Some(e) = g.state.open.pop() {
                break e;
            }
            if g.busy == 0 {
                g.done = true;
                wake.notify_all();
                return Ok(());
            }
            g = wake
                .wait_timeout(g, Duration::from_millis(10))
                .unwrap_or_else(|p| p.into_inner())
                .0;
        };
        g.busy += 1;
        g.state.stats.nodes_extracted += 1;
        let node = search.candidate(&g.state, &entry)?;
        let early = validate_cheap(&node, problem, cfg, &g.state.closed);
        if g.state.insert_refined(search, &entry) > 0 {
            wake.notify_all();
        }
        drop(g);

        let rejection = match early {
            Some(r) => Some(r),
            None => validate_collision(&node, problem, cfg)?,
        };
        let goal = match rejection {
            None => Some(search.goal_hit(&node.pose, node.accumulated_length)?),
            Some(_) => None,
        };

        let mut g = lock(shared);
        g.busy -= 1;
        let state = &mut g.state;
        let rejection = rejection.or_else(|| {
            // CLOSED may have grown while the arc was checked
            (cfg.variant.optimized() && state.closed.contains_duplicate(&node.pose, cfg.alpha))
                .then_some(Rejection::Duplicate)
        });
        match rejection {
            Some(r) => state.count_rejection(r),
            None if cfg.variant.similar_rejection() && state.closed.exists_similar(&node.pose, cfg.d_sim, cfg.alpha) => {
                state.stats.nodes_pruned_similar += 1;
            }
            None => {
                let idx = state.accept(&entry, &node);
                let (hit, attempted) = goal.expect("goal test ran for valid nodes");
                state.stats.direct_connect_attempts += attempted as u64;
                if let Some(hit) = hit {
                    state.record_goal(search, idx, &hit, started);
                    if !cfg.anytime {
                        stop.store(true, Ordering::SeqCst);
                        g.done = true;
                        wake.notify_all();
                        return Ok(());
                    }
                }
                state.expand(search, idx);
            }
        }
        wake.notify_all();
    }
}
