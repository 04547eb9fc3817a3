//! Scenario files: JSON documents with inline obstacles or a side-car point file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Aabb, Environment, ProblemInstance};
use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec3};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    kappa_max: f64,
    ell_max: f64,
    tau: f64,
    needle_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    clearance_margin: Option<f64>,
    start: Pose,
    goal: [f64; 3],
    bounds: Aabb,
    obstacles: Obstacles,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Obstacles {
    Inline(Vec<[f64; 3]>),
    File(String),
}

/// Reads and validates a scenario. A relative obstacle path resolves against
/// the scenario's directory. Without `clearance_margin` the margin defaults
/// to half the estimated point spacing.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text, path.parent().unwrap_or(Path::new(".")), path)
}

/// Parses scenario text; `base` resolves relative obstacle files and `origin` labels errors.
pub fn parse_scenario(text: &str, base: &Path, origin: &Path) -> Result<ProblemInstance> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    let points = match &file.obstacles {
        Obstacles::Inline(list) => list.iter().map(|p| Vec3::from(*p)).collect(),
        Obstacles::File(rel) => load_points_file(base.join(rel))?,
    };
    let bounds = Aabb::new(file.bounds.min, file.bounds.max)?;
    let env = match file.clearance_margin {
        Some(margin) => Environment::new(points, bounds, file.needle_radius, margin)?,
        None => Environment::with_default_margin(points, bounds, file.needle_radius)?,
    };
    ProblemInstance::new(
        Arc::new(env),
        file.start,
        Vec3::from(file.goal),
        file.tau,
        file.ell_max,
        file.kappa_max,
    )
}

/// Reads `x y z` triples, one per line. Blank lines and `#` comments are skipped.
pub fn load_points_file(path: impl AsRef<Path>) -> Result<Vec<Vec3>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}: {message}", n + 1),
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(format!("expected 3 values, found {}", fields.len())));
        }
        let mut xyz = [0.0; 3];
        for (slot, field) in xyz.iter_mut().zip(&fields) {
            *slot = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(format!("'{field}' is not a finite number")))?;
        }
        points.push(Vec3::from(xyz));
    }
    Ok(points)
}

pub fn write_points_file(path: impl AsRef<Path>, points: &[Vec3]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(points.len() * 32);
    for p in points {
        out.push_str(&format!("{} {} {}\n", p.x, p.y, p.z));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn to_file(problem: &ProblemInstance, obstacles: Obstacles) -> ScenarioFile {
    let env = &problem.env;
    ScenarioFile {
        kappa_max: problem.kappa_max,
        ell_max: problem.ell_max,
        tau: problem.tau,
        needle_radius: env.needle_radius(),
        clearance_margin: Some(env.clearance_margin()),
        start: problem.start,
        goal: problem.goal.into(),
        bounds: *env.bounds(),
        obstacles,
    }
}

fn write_json(path: &Path, file: &ScenarioFile) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(&mut f, file)?;
    f.write_all(b"\n").map_err(|e| Error::io(path, e))
}

/// Writes the scenario with obstacles inline.
pub fn save_scenario(path: impl AsRef<Path>, problem: &ProblemInstance) -> Result<()> {
    let inline = problem.env.points().iter().map(|p| [p.x, p.y, p.z]).collect();
    write_json(path.as_ref(), &to_file(problem, Obstacles::Inline(inline)))
}

/// Writes the scenario referring to an existing points file (relative to the scenario).
pub fn save_scenario_linked(path: impl AsRef<Path>, problem: &ProblemInstance, points_rel: &str) -> Result<()> {
    write_json(path.as_ref(), &to_file(problem, Obstacles::File(points_rel.to_string())))
}

/// Writes the scenario and its obstacle cloud to `points_name` next to it.
pub fn save_scenario_with_points_file(
    path: impl AsRef<Path>,
    problem: &ProblemInstance,
    points_name: &str,
) -> Result<PathBuf> {
    let path = path.as_ref();
    let points_path = path.parent().unwrap_or(Path::new(".")).join(points_name);
    write_points_file(&points_path, problem.env.points())?;
    write_json(path, &to_file(problem, Obstacles::File(points_name.to_string())))?;
    Ok(points_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "kappa_max": 0.01,
        "ell_max": 100.0,
        "tau": 1.0,
        "needle_radius": 1.0,
        "start": {"position": [0, 0, 0], "quaternion": [1, 0, 0, 0]},
        "goal": [0, 0, 50],
        "bounds": {"min": [-60, -60, -60], "max": [60, 60, 60]},
        "obstacles": [[10, 10, 10], [20, 0, 5]]
    }"#;

    fn parse(text: &str) -> Result<ProblemInstance> {
        parse_scenario(text, Path::new("."), Path::new("inline.json"))
    }

    #[test]
    fn minimal_file() {
        let p = parse(MINIMAL).unwrap();
        assert_eq!(p.kappa_max, 0.01);
        assert_eq!(p.env.points().len(), 2);
        assert_eq!(p.goal, Vec3::new(0.0, 0.0, 50.0));
    }

    #[test]
    fn zero_tau_rejected() {
        let err = parse(&MINIMAL.replace("\"tau\": 1.0", "\"tau\": 0")).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("tau")), "{err}");
    }

    #[test]
    fn start_in_obstacle_rejected() {
        let text = MINIMAL.replace("[[10, 10, 10]", "[[0, 0, 0.5]");
        assert!(matches!(parse(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn parse_error_reports_line() {
        let text = MINIMAL.replace("\"ell_max\": 100.0", "\"ell_max\": \"long\"");
        let err = parse(&text).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
    }

    #[test]
    fn bad_points_line() {
        let dir = tempfile::tempdir().unwrap();
        let pts = dir.path().join("pts.txt");
        fs::write(&pts, "1 2 3\n4 5\n").unwrap();
        let err = load_points_file(&pts).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn round_trip_inline_and_file() {
        let p = parse(MINIMAL).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.json");
        save_scenario(&a, &p).unwrap();
        let b = dir.path().join("b.json");
        save_scenario_with_points_file(&b, &p, "b_points.txt").unwrap();
        for path in [a, b] {
            let q = load_scenario(&path).unwrap();
            assert_eq!(q.start, p.start);
            assert_eq!(q.goal, p.goal);
            assert_eq!((q.tau, q.ell_max, q.kappa_max), (p.tau, p.ell_max, p.kappa_max));
            assert_eq!(q.env.points(), p.env.points());
            assert_eq!(q.env.bounds(), p.env.bounds());
            assert_eq!(q.env.needle_radius(), p.env.needle_radius());
            assert_eq!(q.env.clearance_margin(), p.env.clearance_margin());
        }
    }
}
