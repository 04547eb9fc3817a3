use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use needle_rcs::baselines::RrtConfig;
use needle_rcs::environment::{
    generate_synthetic_scenario, generate_test_cases, load_scenario, save_scenario_linked,
    save_scenario_with_points_file, write_points_file, SyntheticSpec, TestCaseSpec,
};
use needle_rcs::harness::{
    appendix, format_summary, run_benchmark, run_planner, success_curve, summarize, verify_trajectory, write_csv,
    BenchOptions, PlannerKind, PlannerSettings,
};
use needle_rcs::planner::{PlanResult, PlannerConfig};
use needle_rcs::primitives::Resolution;

#[derive(Parser)]
#[command(name = "rcs", version, about = "Resolution-complete search for steerable needles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one scenario.
    Plan(PlanArgs),
    /// Run planners over a directory of scenarios.
    Bench(BenchArgs),
    /// Generate a synthetic vessel scenario.
    Gen(GenArgs),
    /// Sample start/goal test cases in a scenario's environment.
    Cases(CasesArgs),
    /// Check a plan file against its scenario.
    Verify(VerifyArgs),
    /// Run the kinematics, duty-cycling, action-distance and d_sim suites.
    CheckAppendix {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Clone)]
struct SearchArgs {
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 100.0)]
    time_budget: f64,
    #[arg(long, default_value_t = 20.0)]
    delta_ell_max: f64,
    #[arg(long, default_value_t = 0.125)]
    cutoff_ell: f64,
    #[arg(long, default_value_t = 0.157)]
    cutoff_theta: f64,
    #[arg(long, default_value_t = 5.5e-5)]
    d_sim: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    collision_step: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// RRT goal sampling probability.
    #[arg(long, default_value_t = 0.05)]
    goal_bias: f64,
    /// RRT edge length limit, mm.
    #[arg(long, default_value_t = 10.0)]
    max_extend: f64,
}

impl SearchArgs {
    fn settings(&self, anytime: bool) -> Result<PlannerSettings> {
        let search = PlannerConfig {
            delta_ell_max: self.delta_ell_max,
            cutoff: Resolution::new(self.cutoff_ell, self.cutoff_theta)?,
            d_sim: self.d_sim,
            alpha: self.alpha,
            collision_step: self.collision_step,
            thread_count: self.threads,
            time_budget: Some(self.time_budget),
            rng_seed: self.seed,
            anytime,
            ..Default::default()
        };
        search.validate()?;
        let rrt = RrtConfig {
            goal_bias: self.goal_bias,
            max_extend: self.max_extend,
            rng_seed: self.seed,
            time_budget: Some(self.time_budget),
            collision_step: self.collision_step,
            ..Default::default()
        };
        rrt.validate()?;
        Ok(PlannerSettings {
            search,
            rrt,
            threads: self.threads,
        })
    }
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "rcs")]
    planner: PlannerKind,
    #[command(flatten)]
    search: SearchArgs,
    /// Keep improving the plan until the time budget runs out.
    #[arg(long)]
    anytime: bool,
    /// Plan file to write; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of scenario files (*.json).
    #[arg(long)]
    suite: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "rcs,rcs-b,rrt,single-res")]
    planners: Vec<PlannerKind>,
    #[command(flatten)]
    search: SearchArgs,
    /// Stop each run at its first solution instead of using the whole budget.
    #[arg(long)]
    first_solution: bool,
    /// Cases run concurrently.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Record CSV.
    #[arg(long)]
    out: PathBuf,
    /// Success-rate-over-time CSV.
    #[arg(long)]
    curve: Option<PathBuf>,
    /// Per-planner summary CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 40)]
    n_vessels: usize,
    #[arg(long, default_value_t = 100.0)]
    box_size: f64,
    #[arg(long, default_value_t = 0.5)]
    spacing: f64,
    /// Leave vessel interiors hollow.
    #[arg(long)]
    hollow: bool,
    /// Scenario file; obstacle points go to a sibling .xyz file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CasesArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 50)]
    n_starts: usize,
    #[arg(long, default_value_t = 10)]
    goals_per_start: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    collision_step: f64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Plan(a) => plan(a),
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
        Command::Cases(a) => cases(a),
        Command::Verify(a) => verify(a),
        Command::CheckAppendix { seed } => check_appendix(seed),
    }
}

fn plan(a: PlanArgs) -> Result<ExitCode> {
    let problem = load_scenario(&a.scenario)?;
    let settings = a.search.settings(a.anytime)?;
    let result = run_planner(a.planner, &problem, &settings)?;
    let s = &result.stats;
    eprintln!(
        "{}: {} after {:.3}s, {} nodes expanded",
        a.planner, result.status, s.wall_time, s.nodes_expanded
    );
    if let Some(t) = &result.trajectory {
        eprintln!(
            "  {} primitives, length {:.3} mm, tip error {:.4} mm",
            t.primitives.len(),
            t.length,
            t.targeting_error
        );
    }
    let json = result.to_json()?;
    match &a.out {
        Some(path) => fs::write(path, json).with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading suite {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no scenario files in {}", dir.display());
    }
    Ok(files)
}

fn bench(a: BenchArgs) -> Result<ExitCode> {
    let files = scenario_files(&a.suite)?;
    let suite = files
        .iter()
        .map(|f| load_scenario(f).with_context(|| format!("loading {}", f.display())))
        .collect::<Result<Vec<_>>>()?;
    let settings = a.search.settings(!a.first_solution)?;
    let opts = BenchOptions {
        time_budget: a.search.time_budget,
        anytime: !a.first_solution,
        workers: a.workers,
        verify: true,
    };
    let records = run_benchmark(&suite, &a.planners, &settings, &opts);
    write_csv(&a.out, &records)?;
    if let Some(path) = &a.curve {
        let steps = 50;
        let grid: Vec<f64> = (0..=steps).map(|i| a.search.time_budget * i as f64 / steps as f64).collect();
        write_csv(path, &success_curve(&records, &grid))?;
    }
    let rows = summarize(&records);
    if let Some(path) = &a.summary {
        write_csv(path, &rows)?;
    }
    print!("{}", format_summary(&rows));
    let unverified = records.iter().filter(|r| r.verified == Some(false)).count();
    if unverified > 0 {
        eprintln!("{unverified} solved runs failed verification");
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn gen(a: GenArgs) -> Result<ExitCode> {
    let spec = SyntheticSpec {
        n_vessels: a.n_vessels,
        box_size: a.box_size,
        point_spacing: a.spacing,
        fill_interior: !a.hollow,
        ..Default::default()
    };
    let env = Arc::new(generate_synthetic_scenario(a.seed, &spec)?);
    let mut found = None;
    for k in 0..20u64 {
        let spec = TestCaseSpec {
            n_starts: 1,
            goals_per_start: 1,
            seed: a.seed.wrapping_add(k << 32),
            ..Default::default()
        };
        match generate_test_cases(env.clone(), &spec) {
            Ok(mut cases) => {
                found = Some(cases.remove(0));
                break;
            }
            Err(needle_rcs::Error::Exhausted { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    let Some(case) = found else {
        bail!("no non-trivial test case found in this scene");
    };
    let name = a
        .out
        .file_stem()
        .map(|s| format!("{}.xyz", s.to_string_lossy()))
        .unwrap_or_else(|| "obstacles.xyz".into());
    let points = save_scenario_with_points_file(&a.out, &case, &name)?;
    eprintln!("wrote {} with {} obstacle points in {}", a.out.display(), env.points().len(), points.display());
    Ok(ExitCode::SUCCESS)
}

fn cases(a: CasesArgs) -> Result<ExitCode> {
    let base = load_scenario(&a.scenario)?;
    let spec = TestCaseSpec {
        n_starts: a.n_starts,
        goals_per_start: a.goals_per_start,
        seed: a.seed,
        kappa_max: base.kappa_max,
        ell_max: base.ell_max,
        tau: base.tau,
        ..Default::default()
    };
    let cases = generate_test_cases(base.env.clone(), &spec)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let points = "obstacles.xyz";
    write_points_file(a.out.join(points), base.env.points())?;
    for (i, c) in cases.iter().enumerate() {
        save_scenario_linked(a.out.join(format!("case_{i:04}.json")), c, points)?;
    }
    eprintln!("wrote {} cases to {}", cases.len(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let problem = load_scenario(&a.scenario)?;
    let text = fs::read_to_string(&a.plan).with_context(|| format!("reading {}", a.plan.display()))?;
    let plan = PlanResult::from_json(&text)?;
    let report = verify_trajectory(&plan, &problem, a.collision_step)?;
    print!("{report}");
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn check_appendix(seed: u64) -> Result<ExitCode> {
    let reports = appendix::run_all(seed)?;
    for r in &reports {
        println!("{r}");
    }
    Ok(if reports.iter().all(|r| r.passed()) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
