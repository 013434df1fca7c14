//! Executes the tasks of a configuration and assembles a report.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::config::{RunConfig, TaskSpec};
use crate::domination::{certify, Verdict};
use crate::error::{Error, Result};
use crate::flow::{bg_splitting, flow_consistency, splitting_checks, stability_probe, witness_points};
use crate::limit::{discontinuity_probe, holder_estimate, sdp_check, transversality_table, LimitMapSolver};
use crate::linalg::{Representation, Subspace};
use crate::report::{Report, Status, TaskResult, Timings};
use crate::subset::SubsetP;

/// Per-task seed: the first output of stream `index` of the run seed.
pub fn task_seed(seed: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng.next_u64()
}

fn json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn verdict_status(v: Verdict) -> Status {
    match v {
        Verdict::Certified => Status::Certified,
        Verdict::Refuted => Status::Refuted,
        Verdict::Inconclusive => Status::Inconclusive,
    }
}

fn random_subspace(d: usize, k: usize, seed: u64) -> Result<Subspace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(d, k, |_, _| rng.random_range(-1.0..1.0));
    Subspace::span(&m)
}

struct Context<'a> {
    cfg: &'a RunConfig,
    rho: Representation,
    subset: SubsetP,
}

impl Context<'_> {
    fn upper(&self, k: usize) -> Result<LimitMapSolver<'_>> {
        LimitMapSolver::new(&self.rho, &self.subset, k, &self.cfg.limit_options())
    }

    fn run_task(&self, task: &TaskSpec, seed: u64) -> Result<(Status, Value)> {
        let cfg = self.cfg;
        let check = cfg.tolerances.check;
        match task {
            TaskSpec::Certify { k, length } => {
                let cert = certify(
                    &self.rho,
                    &self.subset,
                    k.unwrap_or(cfg.k),
                    length.unwrap_or(cfg.length),
                    &cfg.certify_options(),
                )?;
                Ok((verdict_status(cert.verdict), json(&cert)))
            }
            TaskSpec::LimitMap { points, k, lower } => {
                let k = k.unwrap_or(cfg.k);
                let solver = if *lower {
                    LimitMapSolver::new(&self.rho, &self.subset.hat(), cfg.dimension - k, &cfg.limit_options())?
                } else {
                    self.upper(k)?
                };
                let values = points.iter().map(|x| solver.xi(x)).collect::<Result<Vec<_>>>()?;
                let ok = values.iter().all(|v| v.cauchy_bound <= check);
                Ok((pass_if(ok), json(&values)))
            }
            TaskSpec::Transversality { pairs } => {
                let pairs = match pairs {
                    Some(p) => p.clone(),
                    None => witness_points(&self.subset, 3.min(cfg.length))?
                        .into_iter()
                        .map(|q| (q.forward, q.backward))
                        .collect(),
                };
                let upper = self.upper(cfg.k)?;
                let lower = upper.dual()?;
                let table = transversality_table(&upper, &lower, &pairs)?;
                Ok((pass_if(table.minimum > check), json(&table)))
            }
            TaskSpec::Sdp {
                forward,
                backward,
                seed_subspace,
            } => {
                let v = match seed_subspace {
                    Some(rows) => Subspace::from_vectors(rows)?,
                    None => random_subspace(cfg.dimension, cfg.k, seed)?,
                };
                let upper = self.upper(v.dim())?;
                let lower = upper.dual()?;
                let r = sdp_check(&upper, &lower, forward, backward, &v, None, cfg.sampling.steps, check)?;
                Ok((pass_if(r.curve.pass), json(&r)))
            }
            TaskSpec::Holder {} => {
                let upper = self.upper(cfg.k)?;
                let fit = holder_estimate(&upper, &cfg.holder_options(), seed)?;
                Ok((pass_if(fit.alpha > 0.0 && fit.r_squared >= cfg.tolerances.fit), json(&fit)))
            }
            TaskSpec::Discontinuity { m_max } => {
                let probe = discontinuity_probe(&self.rho, *m_max, cfg.sampling.kappa, &cfg.limit_options())?;
                Ok((pass_if(probe.discontinuous), json(&probe)))
            }
            TaskSpec::Flow { length } => {
                let f = flow_consistency(
                    &self.rho,
                    &self.subset,
                    cfg.k,
                    length.unwrap_or(cfg.length),
                    &cfg.certify_options(),
                )?;
                Ok((pass_if(f.agree && f.word_verdict == Verdict::Certified), json(&f)))
            }
            TaskSpec::Splitting { points } => {
                let all = witness_points(&self.subset, 8.min(cfg.length))?;
                let want = points.unwrap_or(cfg.sampling.points).min(all.len());
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut idx = sample(&mut rng, all.len(), want).into_vec();
                idx.sort_unstable();
                let upper = self.upper(cfg.k)?;
                let lower = upper.dual()?;
                let mut rows = Vec::with_capacity(want);
                for i in idx {
                    let s = bg_splitting(&self.rho, &all[i], cfg.k, cfg.sampling.n_max, cfg.tolerances.subspace)?;
                    let r = splitting_checks(&self.rho, &s, &upper, &lower, cfg.sampling.n_max, 8, check)?;
                    rows.push(serde_json::json!({ "sample": s, "checks": r }));
                }
                let ok = rows.iter().all(|r| r["checks"]["pass"] == Value::Bool(true));
                Ok((pass_if(ok), Value::Array(rows)))
            }
            TaskSpec::Stability { epsilon, trials } => {
                let trials = trials.unwrap_or(cfg.sampling.trials);
                let t = stability_probe(
                    &self.rho,
                    &self.subset,
                    cfg.k,
                    epsilon.unwrap_or(cfg.sampling.epsilon),
                    trials,
                    cfg.length,
                    seed,
                    &cfg.certify_options(),
                )?;
                Ok((pass_if(t.certified == trials), json(&t)))
            }
        }
    }
}

/// Runs the tasks of `cfg` in order, tagging results with `block` when given.
pub fn run_tasks(cfg: &RunConfig, block: Option<&str>) -> Result<(Vec<TaskResult>, Vec<f64>)> {
    let ctx = Context {
        cfg,
        rho: cfg.representation()?,
        subset: cfg.subset_p()?,
    };
    let mut results = Vec::with_capacity(cfg.tasks.len());
    let mut seconds = Vec::with_capacity(cfg.tasks.len());
    for (index, task) in cfg.tasks.iter().enumerate() {
        let seed = task_seed(cfg.seed, index);
        let start = Instant::now();
        let outcome = ctx.run_task(task, seed);
        seconds.push(start.elapsed().as_secs_f64());
        let (status, result, error) = match outcome {
            Ok((s, v)) => (s, Some(v), None),
            Err(e) => (Status::Error, None, Some(e.to_string())),
        };
        results.push(TaskResult {
            index,
            block: block.map(str::to_string),
            task: task.name().to_string(),
            spec: task.clone(),
            seed,
            status,
            result,
            error,
        });
    }
    Ok((results, seconds))
}

/// Executes a validated configuration.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    cfg.validate()?;
    let start = Instant::now();
    let (results, task_seconds) = run_tasks(cfg, None)?;
    let timings = Timings {
        total_seconds: start.elapsed().as_secs_f64(),
        task_seconds,
    };
    Ok(Report::new(json(cfg), results, Vec::new(), timings))
}

/// Exit status for an error raised before any task ran.
pub fn input_error_code(_: &Error) -> i32 {
    2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(tasks: &str) -> RunConfig {
        let text = format!(
            r#"{{"rank": 1, "dimension": 3,
                "generators": [[[4, 0, 0], [0, 0.5, 0], [0, 0, 0.5]]],
                "subset": {{"type": "axis_family", "words": ["a"]}},
                "k": 1, "seed": 5, "tasks": {tasks}}}"#
        );
        RunConfig::from_json_str(&text, None).unwrap()
    }

    #[test]
    fn certify_exit_codes() {
        let r = run(&z(r#"[{"task": "certify"}]"#)).unwrap();
        assert_eq!(r.exit_code(), 0);
        assert_eq!(r.results[0].status, Status::Certified);
        let slope = r.results[0].result.as_ref().unwrap()["slope"].as_f64().unwrap();
        assert!((slope - 8f64.ln()).abs() < 1e-9);
        let r = run(&z(r#"[{"task": "certify"}, {"task": "certify", "k": 2}]"#)).unwrap();
        assert_eq!(r.results[1].status, Status::Refuted);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn task_errors_are_captured() {
        let r = run(&z(r#"[{"task": "discontinuity", "m_max": 3}, {"task": "certify"}]"#)).unwrap();
        assert_eq!(r.results[0].status, Status::Error);
        assert!(r.results[0].error.as_ref().unwrap().contains("rank"));
        assert_eq!(r.results[1].status, Status::Certified);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn rerun_is_identical() {
        let cfg = z(r#"[{"task": "certify"}, {"task": "limit_map", "points": ["(a)"]}, {"task": "limit_map", "points": ["(A)"], "lower": true},
                      {"task": "sdp", "forward": "(a)", "backward": "(A)"}, {"task": "flow", "length": 10}]"#);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.payload().to_string(), b.payload().to_string());
        assert_eq!(a.exit_code(), 0, "{}", a.render());
        assert_ne!(a.results[0].seed, a.results[1].seed);
    }
}
