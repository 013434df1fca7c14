//! Built-in reference runs with their known outcomes.

use std::time::Instant;

use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::domination::{DominationCertificate, Verdict};
use crate::flow::{invariant_section, BlockSystem};
use crate::limit::{DiscontinuityProbe, LimitMapValue};
use crate::linalg::{grassmann_distance, Subspace};
use crate::report::{Check, Report, TaskResult, Timings};
use crate::runner::run_tasks;

/// `ρ(1) = diag(4, ½, ½)` on the axis of `a`: 1-dominated at rate log 8, never 2-dominated.
pub fn diagonal_config() -> RunConfig {
    serde_json::from_value(json!({
        "rank": 1,
        "dimension": 3,
        "generators": [[[4.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.5]]],
        "subset": {"type": "axis_family", "words": ["a"]},
        "k": 1,
        "length": 20,
        "seed": 0,
        "tasks": [
            {"task": "certify"},
            {"task": "certify", "k": 2},
            {"task": "flow"}
        ]
    }))
    .expect("built-in configuration")
}

/// `ρ(a) = diag(2, ½)`, `ρ(b)` a quarter turn, on the axis of `a`: the limit map
/// at `a^m b·a^∞` is the other coordinate axis for every m.
pub fn rotation_config() -> RunConfig {
    let mut points = vec!["(a)".to_string()];
    points.extend((1..=5).map(|m| format!("{}b|(a)", "a".repeat(m))));
    serde_json::from_value(json!({
        "rank": 2,
        "dimension": 2,
        "generators": [[[2.0, 0.0], [0.0, 0.5]], [[0.0, 1.0], [-1.0, 0.0]]],
        "subset": {"type": "axis_family", "words": ["a"]},
        "k": 1,
        "length": 12,
        "seed": 0,
        "tasks": [
            {"task": "limit_map", "points": points},
            {"task": "discontinuity", "m_max": 5}
        ]
    }))
    .expect("built-in configuration")
}

fn check(name: &str, expected: impl Into<String>, observed: impl Into<String>, pass: bool) -> Check {
    Check {
        name: name.to_string(),
        expected: expected.into(),
        observed: observed.into(),
        pass,
    }
}

fn parse<T: serde::de::DeserializeOwned>(r: &TaskResult) -> Option<T> {
    r.result.clone().and_then(|v| serde_json::from_value(v).ok())
}

fn diagonal_checks(results: &[TaskResult]) -> Vec<Check> {
    let mut out = Vec::new();
    let log8 = 8f64.ln();
    match parse::<DominationCertificate>(&results[0]) {
        Some(c) => out.push(check(
            "diagonal k=1 certified at rate log 8",
            format!("certified, slope {log8:.12}"),
            format!("{}, slope {:.12}", c.verdict, c.slope),
            c.verdict == Verdict::Certified && (c.slope - log8).abs() <= 1e-9,
        )),
        None => out.push(check("diagonal k=1 certified at rate log 8", "certificate", "error", false)),
    }
    match parse::<DominationCertificate>(&results[1]) {
        Some(c) => {
            let zero = c.margins.iter().flatten().all(|&m| m == 0.0);
            out.push(check(
                "diagonal k=2 refuted with zero margins",
                "refuted, margins 0",
                format!("{}, margins zero: {zero}", c.verdict),
                c.verdict == Verdict::Refuted && zero,
            ))
        }
        None => out.push(check("diagonal k=2 refuted with zero margins", "certificate", "error", false)),
    }
    out
}

fn rotation_checks(results: &[TaskResult]) -> Vec<Check> {
    let mut out = Vec::new();
    let e1 = Subspace::coordinate(2, &[0]);
    let e2 = Subspace::coordinate(2, &[1]);
    match parse::<Vec<LimitMapValue>>(&results[0]) {
        Some(values) => {
            for (i, v) in values.iter().enumerate() {
                let (target, tol, name) = if i == 0 { (&e1, 1e-8, "span{(1,0)}") } else { (&e2, 1e-6, "span{(0,1)}") };
                let d = grassmann_distance(&v.subspace, target).unwrap_or(f64::INFINITY);
                out.push(check(
                    &format!("limit map at {}", v.point),
                    format!("{name} within {tol:e}"),
                    format!("distance {d:.3e}"),
                    d <= tol,
                ));
            }
        }
        None => out.push(check("limit map values", "values", "error", false)),
    }
    match parse::<DiscontinuityProbe>(&results[1]) {
        Some(p) => {
            let exact = p
                .rows
                .iter()
                .all(|r| (r.visual_distance - (-(r.m as f64)).exp()).abs() <= 1e-15 && (r.grassmann_distance - 1.0).abs() <= 1e-6);
            out.push(check(
                "limit map discontinuous at the axis",
                "visual distance e^-m, Grassmann distance 1",
                format!("discontinuous: {}, min distance {:.6}", p.discontinuous, p.min_grassmann),
                p.discontinuous && exact,
            ))
        }
        None => out.push(check("limit map discontinuous at the axis", "probe", "error", false)),
    }
    out
}

fn graph_transform_check() -> Check {
    let mut m = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&[4.0, 0.5, 0.5]));
    m[(0, 1)] = 0.01;
    let expected = -0.005 * 4.0 / 7.0;
    let blocks = m.try_inverse().map(|a| BlockSystem::from_matrix(&a, 1));
    match blocks.map(|b| invariant_section(&[b], 1e-10, 200)) {
        Some(Ok(s)) => {
            let f = s.sections[0][0][0];
            check(
                "perturbed diagonal invariant section",
                format!("f = ({expected:.6}, 0), residual < 1e-10"),
                format!("f = ({f:.6}, {:.1e}), residual {:.1e}", s.sections[0][0][1], s.residual),
                (f - expected).abs() < 1e-10 && s.residual < 1e-10,
            )
        }
        _ => check("perturbed diagonal invariant section", "convergence", "error", false),
    }
}

/// Runs the built-in reference configurations and compares against their known outcomes.
pub fn reproduce_reference() -> Report {
    let start = Instant::now();
    let mut results = Vec::new();
    let mut checks = Vec::new();
    let mut seconds = Vec::new();
    let mut configs = serde_json::Map::new();
    for (name, cfg) in [("diagonal", diagonal_config()), ("rotation", rotation_config())] {
        configs.insert(name.to_string(), serde_json::to_value(&cfg).expect("configs serialize"));
        let (r, s) = run_tasks(&cfg, Some(name)).expect("built-in configurations are valid");
        checks.extend(if name == "diagonal" { diagonal_checks(&r) } else { rotation_checks(&r) });
        results.extend(r);
        seconds.extend(s);
    }
    checks.push(graph_transform_check());
    let timings = Timings {
        total_seconds: start.elapsed().as_secs_f64(),
        task_seconds: seconds,
    };
    Report::new(Value::Object(configs), results, checks, timings)
}
