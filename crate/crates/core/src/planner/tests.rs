use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::sync::Arc;

use super::*;
use crate::environment::{Aabb, Environment};
use crate::geometry::Vec3;
use crate::primitives::Dyadic;

fn open_env() -> Arc<Environment> {
    Arc::new(Environment::new(vec![], Aabb::new([-200.0; 3], [200.0; 3]).unwrap(), 1.0, 0.0).unwrap())
}

fn problem(env: Arc<Environment>, goal: Vec3) -> ProblemInstance {
    ProblemInstance::new(env, Pose::identity(), goal, 1.0, 100.0, 0.01).unwrap()
}

fn cfg(variant: Variant) -> PlannerConfig {
    PlannerConfig {
        variant,
        time_budget: Some(20.0),
        ..Default::default()
    }
}

fn sphere(center: Vec3, radius: f64, spacing: f64) -> Vec<Vec3> {
    let n = (4.0 * PI * radius * radius / (spacing * spacing)).ceil() as usize;
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

fn check_solution(p: &ProblemInstance, c: &PlannerConfig, r: &PlanResult) {
    assert_eq!(r.status, PlanStatus::Solved);
    let t = r.trajectory.as_ref().unwrap();
    assert!(t.targeting_error <= p.tau);
    assert!(t.length <= p.ell_max + LENGTH_SLACK);
    let resim = Trajectory::from_primitives(&p.start, t.primitives.clone(), &p.goal).unwrap();
    assert_eq!(resim.waypoints.len(), t.waypoints.len());
    for (a, b) in resim.waypoints.iter().zip(&t.waypoints) {
        assert!((a.position - b.position).norm() < 1e-9);
    }
    for (w, m) in t.waypoints.iter().zip(&t.primitives) {
        assert!(m.kappa <= p.kappa_max + 1e-12);
        assert!(p.env.arc_free(w, m, c.collision_step).unwrap());
    }
}

#[test]
fn straight_goal_every_variant() {
    let p = problem(open_env(), Vec3::new(0.0, 0.0, 50.0));
    for v in [Variant::RcsB, Variant::RcsNr, Variant::Rcs, Variant::RcsPar] {
        let c = cfg(v);
        let r = plan(&p, &c).unwrap();
        check_solution(&p, &c, &r);
        if v.optimized() {
            let t = r.trajectory.unwrap();
            assert_eq!(t.primitives.len(), 1);
            assert_eq!(t.primitives[0].kappa, 0.0);
            assert!(t.targeting_error < 1e-9);
        }
    }
}

#[test]
fn root_at_goal_gives_empty_plan() {
    let p = problem(open_env(), Vec3::new(0.0, 0.0, 0.5));
    let r = plan(&p, &cfg(Variant::RcsB)).unwrap();
    let t = r.trajectory.unwrap();
    assert!(t.primitives.is_empty());
    assert_eq!(t.length, 0.0);
    assert_eq!(t.waypoints.len(), 1);
}

#[test]
fn two_primitive_path_waypoints() {
    // 40 mm straight ahead is two coarsest straight steps for the basic search
    let p = problem(open_env(), Vec3::new(0.0, 0.0, 40.0));
    let r = plan(&p, &cfg(Variant::RcsB)).unwrap();
    let t = r.trajectory.unwrap();
    assert_eq!(t.primitives.len(), 2);
    assert_eq!(t.waypoints.len(), 3);
    assert_eq!(t.length, t.primitives.iter().map(|m| m.delta_ell).sum::<f64>());
}

#[test]
fn enclosed_goal_is_certified_unsolvable() {
    let goal = Vec3::new(0.0, 0.0, 8.0);
    let env = Arc::new(
        Environment::new(sphere(goal, 4.0, 0.4), Aabb::new([-50.0; 3], [50.0; 3]).unwrap(), 1.0, 0.0).unwrap(),
    );
    let p = ProblemInstance::new(env, Pose::new(Vec3::new(0.0, 0.0, -2.0), Default::default()), goal, 1.0, 10.0, 0.01)
        .unwrap();
    let c = PlannerConfig {
        delta_ell_max: 5.0,
        cutoff: Resolution::new(2.5, FRAC_PI_2).unwrap(),
        time_budget: None,
        ..cfg(Variant::RcsNr)
    };
    let r = plan(&p, &c).unwrap();
    assert_eq!(r.status, PlanStatus::ExhaustedNoPlan);
    // 2 curvatures × 2 lengths × 4 angles per step, at most 10 / 2.5 steps deep
    let bound: u64 = (0..=4).map(|d| 16u64.pow(d)).sum();
    assert!(r.stats.nodes_expanded < bound, "{}", r.stats.nodes_expanded);
    for v in [Variant::RcsB, Variant::Rcs, Variant::RcsPar] {
        let c = PlannerConfig {
            variant: v,
            thread_count: 4,
            ..c.clone()
        };
        assert_eq!(plan(&p, &c).unwrap().status, PlanStatus::ExhaustedNoPlan, "{v}");
    }
}

fn candidate(pose: Pose, len: f64) -> Candidate {
    Candidate {
        pose,
        arc: Some((Pose::identity(), MotionPrimitive::new(0.0, 1.0, 0.0))),
        accumulated_length: len,
    }
}

#[test]
fn validation_reasons() {
    let p = problem(open_env(), Vec3::new(5.0, 0.0, 5.0));
    let c = cfg(Variant::Rcs);
    let closed = ClosedSet::new(c.d_sim);
    let too_long = candidate(Pose::new(Vec3::new(0.0, 0.0, 1.0), Default::default()), p.ell_max + 0.125);
    assert_eq!(validate_node(&too_long, &p, &c, &closed).unwrap(), Some(Rejection::Length));

    // goal at local (5, 0, 5) sits 4.87 mm inside the unreachable torus
    let at_origin = Candidate {
        pose: Pose::identity(),
        arc: None,
        accumulated_length: 0.0,
    };
    assert_eq!(validate_node(&at_origin, &p, &c, &closed).unwrap(), Some(Rejection::Reachability));
    assert_eq!(validate_node(&at_origin, &p, &cfg(Variant::RcsB), &closed).unwrap(), None);

    let ahead = problem(open_env(), Vec3::new(0.0, 0.0, 50.0));
    let mut closed = ClosedSet::new(c.d_sim);
    let pose = Pose::new(Vec3::new(0.0, 0.0, 1.0), Default::default());
    closed.insert(&pose);
    assert_eq!(validate_node(&candidate(pose, 1.0), &ahead, &c, &closed).unwrap(), Some(Rejection::Duplicate));

    let wall: Vec<Vec3> = (-4..=4)
        .flat_map(|i| (-4..=4).map(move |j| Vec3::new(i as f64 * 0.5, j as f64 * 0.5, 0.5)))
        .collect();
    let env = Arc::new(Environment::new(wall, Aabb::new([-50.0; 3], [50.0; 3]).unwrap(), 0.2, 0.0).unwrap());
    let blocked = ProblemInstance::new(env, Pose::new(Vec3::new(0.0, 0.0, -1.0), Default::default()), Vec3::new(0.0, 0.0, 40.0), 1.0, 100.0, 0.01).unwrap();
    let through = Candidate {
        pose: Pose::new(Vec3::new(0.0, 0.0, 1.0), Default::default()),
        arc: Some((blocked.start, MotionPrimitive::new(0.0, 2.0, 0.0))),
        accumulated_length: 2.0,
    };
    assert_eq!(
        validate_node(&through, &blocked, &c, &ClosedSet::new(c.d_sim)).unwrap(),
        Some(Rejection::Collision)
    );
}

fn lp(ln: u32, ll: u8, an: u32, al: u8) -> LatticePrimitive {
    LatticePrimitive {
        curvature: 1,
        length: Dyadic { num: ln, level: ll },
        angle: Dyadic { num: an, level: al },
    }
}

#[test]
fn refined_insertion_counts() {
    let p = problem(open_env(), Vec3::new(0.0, 0.0, 50.0));
    let c = cfg(Variant::Rcs);
    let search = Search::new(&p, &c).unwrap();
    let mut state = State::new(&c);
    let root = state.open.pop().unwrap();
    assert_eq!(state.insert_refined(&search, &root), 0);
    let node = search.candidate(&state, &root).unwrap();
    let idx = state.accept(&root, &node);
    state.expand(&search, idx);

    let coarse = Entry::new(1, 99, idx, lp(1, 0, 0, 0));
    assert_eq!(state.insert_refined(&search, &coarse), 2);
    // the same refinements are now known to the parent
    assert_eq!(state.insert_refined(&search, &coarse), 0);

    let finest = Entry::new(12, 100, idx, lp(1, 7, 1, 3));
    assert_eq!(state.insert_refined(&search, &finest), 0);
}

#[test]
fn equivalent_pruning_skips_second_route() {
    let p = problem(open_env(), Vec3::new(0.0, 0.0, 50.0));
    let c = cfg(Variant::Rcs);
    let search = Search::new(&p, &c).unwrap();
    let mut state = State::new(&c);
    let root = state.open.pop().unwrap();
    let node = search.candidate(&state, &root).unwrap();
    let idx = state.accept(&root, &node);
    // (ℓ level 1, θ level 0) and (ℓ level 0, θ level 1) both refine to (1, 1)
    let a = Entry::new(2, 1, idx, lp(1, 1, 0, 0));
    let b = Entry::new(2, 2, idx, lp(1, 0, 1, 1));
    let first = state.insert_refined(&search, &a);
    let before = state.stats.equivalent_skipped;
    state.insert_refined(&search, &b);
    assert!(first > 0);
    assert!(state.stats.equivalent_skipped > before);
}

#[test]
fn rank_order_and_determinism() {
    let env = Arc::new(
        crate::environment::generate_synthetic_scenario(
            2,
            &crate::environment::SyntheticSpec {
                n_vessels: 30,
                ..Default::default()
            },
        )
        .unwrap(),
    );
    let spec = crate::environment::TestCaseSpec {
        n_starts: 2,
        goals_per_start: 2,
        seed: 4,
        ..Default::default()
    };
    let cases = crate::environment::generate_test_cases(env, &spec).unwrap();
    for p in &cases {
        for v in [Variant::Rcs, Variant::RcsB] {
            let c = PlannerConfig {
                max_expansions: Some(20_000),
                time_budget: None,
                ..cfg(v)
            };
            let mut ranks = Vec::new();
            let a = plan_observed(p, &c, &mut |e| {
                if let SearchEvent::Extracted { rank } = e {
                    ranks.push(rank)
                }
            })
            .unwrap();
            assert!(ranks.windows(2).all(|w| w[0] <= w[1]));
            let b = plan(p, &c).unwrap();
            assert_eq!(a.canonical_bytes(), b.canonical_bytes());
            if a.status == PlanStatus::Solved {
                check_solution(p, &c, &a);
            }
        }
    }
}

#[test]
fn single_thread_parallel_matches_serial() {
    let p = problem(open_env(), Vec3::new(30.0, 10.0, 60.0));
    let serial = plan(&p, &cfg(Variant::Rcs)).unwrap();
    let c = PlannerConfig {
        thread_count: 1,
        ..cfg(Variant::RcsPar)
    };
    let par = plan_parallel(&p, &c).unwrap();
    assert_eq!(serial.canonical_bytes(), par.canonical_bytes());
}

#[test]
fn eight_threads_open_space() {
    let p = problem(open_env(), Vec3::new(-12.0, 16.0, 70.0));
    let c = PlannerConfig {
        thread_count: 8,
        ..cfg(Variant::RcsPar)
    };
    let r = plan(&p, &c).unwrap();
    check_solution(&p, &c, &r);
}

#[test]
fn plan_file_round_trip() {
    let p = problem(open_env(), Vec3::new(0.0, 0.0, 40.0));
    let r = plan(&p, &cfg(Variant::RcsB)).unwrap();
    let back = PlanResult::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(back, r);
    let text = r.to_json().unwrap();
    for key in ["status", "primitives", "waypoints", "length_mm", "targeting_error_mm", "stats"] {
        assert!(text.contains(&format!("\"{key}\"")), "{key}");
    }
}

#[test]
fn anytime_never_worse() {
    let p = problem(open_env(), Vec3::new(10.0, 0.0, 60.0));
    let first = plan(&p, &cfg(Variant::Rcs)).unwrap();
    let c = PlannerConfig {
        anytime: true,
        max_expansions: Some(3000),
        time_budget: None,
        ..cfg(Variant::Rcs)
    };
    let best = plan(&p, &c).unwrap();
    assert!(best.cost.unwrap() <= first.cost.unwrap());
    let _ = TAU;
}

#[test]
fn config_errors() {
    let p = problem(open_env(), Vec3::new(0.0, 0.0, 40.0));
    let bad = PlannerConfig {
        thread_count: 0,
        ..cfg(Variant::Rcs)
    };
    assert!(matches!(plan(&p, &bad), Err(Error::Config(_))));
    let bad = PlannerConfig {
        delta_ell_max: -1.0,
        ..cfg(Variant::Rcs)
    };
    assert!(plan(&p, &bad).is_err());
    assert_eq!("rcs-b".parse::<Variant>().unwrap(), Variant::RcsB);
    assert!("fast".parse::<Variant>().is_err());
}
