//! Run configuration documents (JSON).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domination::CertifyOptions;
use crate::error::{Error, Result};
use crate::limit::{HolderOptions, LimitOptions};
use crate::linalg::Representation;
use crate::subset::{SubsetP, SubsetPSpec};
use crate::word::BoundaryPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Convergence tolerance for limit maps and splittings.
    pub subspace: f64,
    /// Pass threshold on the limit-map and splitting residual checks.
    pub check: f64,
    /// Minimum R² for a Hölder fit to pass.
    pub fit: f64,
    pub lambda_min: f64,
    pub eps_res: f64,
    pub t_refute: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let c = CertifyOptions::default();
        Self {
            subspace: 1e-12,
            check: 1e-6,
            fit: 0.8,
            lambda_min: c.lambda_min,
            eps_res: c.eps_res,
            t_refute: c.t_refute,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    pub max_period: usize,
    pub sample_size: usize,
    pub kappa: f64,
    pub b: usize,
    /// Certificate budget used by limit-map solvers.
    pub limit_budget: usize,
    pub n_max: usize,
    pub points: usize,
    pub steps: usize,
    pub trials: usize,
    pub epsilon: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            max_period: 8,
            sample_size: 200,
            kappa: 1.0,
            b: 0,
            limit_budget: 10,
            n_max: 400,
            points: 50,
            steps: 20,
            trials: 20,
            epsilon: 1e-3,
        }
    }
}

/// One unit of work. Omitted fields fall back to the top-level values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskSpec {
    Certify {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<usize>,
    },
    LimitMap {
        points: Vec<BoundaryPoint>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        /// Evaluate `ξ_{d−k}` instead of `ξ^k`.
        #[serde(default)]
        lower: bool,
    },
    Transversality {
        /// Defaults to witness pairs of the words of length 3 in Γ_P^+.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pairs: Option<Vec<(BoundaryPoint, BoundaryPoint)>>,
    },
    Sdp {
        forward: BoundaryPoint,
        backward: BoundaryPoint,
        /// Rows spanning the seed subspace; random when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed_subspace: Option<Vec<Vec<f64>>>,
    },
    Holder {},
    Discontinuity {
        m_max: usize,
    },
    Flow {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<usize>,
    },
    Splitting {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<usize>,
    },
    Stability {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        epsilon: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trials: Option<usize>,
    },
}

impl TaskSpec {
    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::Certify { .. } => "certify",
            TaskSpec::LimitMap { .. } => "limit_map",
            TaskSpec::Transversality { .. } => "transversality",
            TaskSpec::Sdp { .. } => "sdp",
            TaskSpec::Holder {} => "holder",
            TaskSpec::Discontinuity { .. } => "discontinuity",
            TaskSpec::Flow { .. } => "flow",
            TaskSpec::Splitting { .. } => "splitting",
            TaskSpec::Stability { .. } => "stability",
        }
    }

    /// A task of the named kind with every field defaulted, when that is possible.
    pub fn default_for(name: &str) -> Option<TaskSpec> {
        Some(match name.replace('-', "_").as_str() {
            "certify" => TaskSpec::Certify { k: None, length: None },
            "transversality" => TaskSpec::Transversality { pairs: None },
            "holder" => TaskSpec::Holder {},
            "flow" => TaskSpec::Flow { length: None },
            "splitting" => TaskSpec::Splitting { points: None },
            "stability" => TaskSpec::Stability {
                epsilon: None,
                trials: None,
            },
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub rank: usize,
    pub dimension: usize,
    #[serde(default)]
    pub generators: Vec<Vec<Vec<f64>>>,
    /// JSON array of matrices, relative to the configuration file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators_file: Option<PathBuf>,
    pub subset: SubsetPSpec,
    pub k: usize,
    #[serde(default = "default_length")]
    pub length: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sampling: Sampling,
    pub seed: u64,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

fn default_length() -> usize {
    20
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Validation {
        path: path.into(),
        reason: reason.into(),
    }
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => invalid(path, inner.to_string()),
            _ => Error::Parse {
                input: origin.to_string(),
                reason: inner.to_string(),
            },
        }
    })
}

impl RunConfig {
    /// Parses and validates a document; `base` resolves `generators_file`.
    pub fn from_json_str(text: &str, base: Option<&Path>) -> Result<RunConfig> {
        let mut cfg: RunConfig = from_json(text, "configuration")?;
        if let Some(file) = &cfg.generators_file {
            if !cfg.generators.is_empty() {
                return Err(invalid("generators_file", "given together with generators"));
            }
            let path = base.map_or_else(|| file.clone(), |b| b.join(file));
            let body = std::fs::read_to_string(&path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            cfg.generators = from_json(&body, &path.display().to_string())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(invalid("rank", "must be at least 1"));
        }
        if self.dimension < 2 {
            return Err(invalid("dimension", "must be at least 2"));
        }
        if self.generators.len() != self.rank {
            return Err(invalid(
                "generators",
                format!("expected {} matrices, found {}", self.rank, self.generators.len()),
            ));
        }
        for (i, m) in self.generators.iter().enumerate() {
            if m.len() != self.dimension {
                return Err(invalid(
                    format!("generators[{i}]"),
                    format!("has {} rows, expected {}", m.len(), self.dimension),
                ));
            }
            for (r, row) in m.iter().enumerate() {
                if row.len() != self.dimension {
                    return Err(invalid(
                        format!("generators[{i}][{r}]"),
                        format!("has {} entries, expected {}", row.len(), self.dimension),
                    ));
                }
            }
            Representation::from_rows(std::slice::from_ref(m))
                .map_err(|e| invalid(format!("generators[{i}]"), e.to_string()))?;
        }
        SubsetP::new(self.rank, &self.subset).map_err(|e| invalid("subset", e.to_string()))?;
        if self.k == 0 || self.k >= self.dimension {
            return Err(invalid("k", format!("must lie in 1..{}", self.dimension)));
        }
        if self.length < 2 {
            return Err(invalid("length", "must be at least 2"));
        }
        let t = &self.tolerances;
        for (name, v) in [("subspace", t.subspace), ("check", t.check), ("eps_res", t.eps_res)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("tolerances.{name}"), "must be positive"));
            }
        }
        if !(self.sampling.kappa > 0.0) {
            return Err(invalid("sampling.kappa", "must be positive"));
        }
        if !(self.sampling.epsilon >= 0.0) {
            return Err(invalid("sampling.epsilon", "must be nonnegative"));
        }
        for (i, task) in self.tasks.iter().enumerate() {
            let k = match task {
                TaskSpec::Certify { k, length } => {
                    if length.is_some_and(|l| l < 2) {
                        return Err(invalid(format!("tasks[{i}].length"), "must be at least 2"));
                    }
                    *k
                }
                TaskSpec::LimitMap { k, .. } => *k,
                _ => None,
            };
            if k.is_some_and(|k| k == 0 || k >= self.dimension) {
                return Err(invalid(format!("tasks[{i}].k"), format!("must lie in 1..{}", self.dimension)));
            }
            if let TaskSpec::Sdp {
                seed_subspace: Some(rows),
                ..
            } = task
            {
                if rows.iter().any(|r| r.len() != self.dimension) {
                    return Err(invalid(format!("tasks[{i}].seed_subspace"), "rows must have length d"));
                }
            }
        }
        Ok(())
    }

    pub fn representation(&self) -> Result<Representation> {
        Representation::from_rows(&self.generators)
    }

    pub fn subset_p(&self) -> Result<SubsetP> {
        SubsetP::new(self.rank, &self.subset)
    }

    pub fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            lambda_min: self.tolerances.lambda_min,
            eps_res: self.tolerances.eps_res,
            t_refute: self.tolerances.t_refute,
        }
    }

    pub fn limit_options(&self) -> LimitOptions {
        LimitOptions {
            tol: self.tolerances.subspace,
            n_max: self.sampling.n_max,
            budget: self.sampling.limit_budget,
            certify: self.certify_options(),
        }
    }

    pub fn holder_options(&self) -> HolderOptions {
        HolderOptions {
            max_period: self.sampling.max_period,
            b: self.sampling.b,
            kappa: self.sampling.kappa,
            sample_size: self.sampling.sample_size,
            ..HolderOptions::default()
        }
    }
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    RunConfig::from_json_str(&text, path.parent())
}

#[cfg(test)]
mod tests {
    use super::*;

    const Z: &str = r#"{
        "rank": 1, "dimension": 3,
        "generators": [[[4, 0, 0], [0, 0.5, 0], [0, 0, 0.5]]],
        "subset": {"type": "axis_family", "words": ["a"]},
        "k": 1, "seed": 1
    }"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_json_str(Z, None).unwrap();
        assert_eq!(c.length, 20);
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.sampling, Sampling::default());
        assert!(c.tasks.is_empty());
        let echo = serde_json::to_value(&c).unwrap();
        assert_eq!(echo["sampling"]["max_period"], 8);
    }

    #[test]
    fn dimension_mismatch_names_generator() {
        let bad = Z.replace("[0, 0, 0.5]]", "[0, 0, 0.5, 1]]");
        match RunConfig::from_json_str(&bad, None) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "generators[0][2]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_subset_type_is_validation_error() {
        let bad = Z.replace("axis_family", "everything");
        assert!(matches!(
            RunConfig::from_json_str(&bad, None),
            Err(Error::Validation { path, .. }) if path.starts_with("subset")
        ));
    }

    #[test]
    fn syntax_error_is_parse_error() {
        assert!(matches!(
            RunConfig::from_json_str("{\"rank\": ", None),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn missing_seed_rejected() {
        let bad = Z.replace(", \"seed\": 1", "");
        assert!(matches!(RunConfig::from_json_str(&bad, None), Err(Error::Validation { .. })));
    }

    #[test]
    fn bad_task_k_has_path() {
        let bad = Z.replace("\"seed\": 1", "\"seed\": 1, \"tasks\": [{\"task\": \"certify\"}, {\"task\": \"certify\", \"k\": 3}]");
        match RunConfig::from_json_str(&bad, None) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "tasks[1].k"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn singular_generator_rejected() {
        let bad = Z.replace("[0, 0, 0.5]]", "[0, 0, 0]]");
        assert!(matches!(
            RunConfig::from_json_str(&bad, None),
            Err(Error::Validation { path, .. }) if path == "generators[0]"
        ));
    }
}
