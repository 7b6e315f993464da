//! Coefficient tables and their JSON artifact.
//!
//! The artifact holds only quantities that are a deterministic function of the
//! problem and the run configuration. Wall times, worker counts and the memory
//! mode live in [`RunMetadata`], which is written to a separate side file.

use serde::{Deserialize, Serialize};

use crate::basis::BasisContext;
use crate::dist::SamplingMeasure;
use crate::engine::sq_norm;
use crate::error::{Error, Result};
use crate::mindex::{IndexKind, MultiIndexSet};
use crate::solver::{MemoryMode, RunConfig};

pub const FORMAT_NAME: &str = "qrbsde-coefficients";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    /// Series evaluations inside responses (excludes the exact terminal step).
    pub series_evaluations: u64,
    /// Evaluations whose value was clipped by the a-priori bound.
    pub truncation_hits: u64,
}

impl SolveStats {
    pub fn truncation_rate(&self) -> f64 {
        if self.series_evaluations == 0 {
            0.0
        } else {
            self.truncation_hits as f64 / self.series_evaluations as f64
        }
    }
}

/// Non-reproducible facts about a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub workers: usize,
    pub memory_mode: MemoryMode,
    pub step_seconds: Vec<f64>,
    pub total_seconds: f64,
}

/// Solver output: one coefficient vector per time step `0..N`, aligned with the
/// index-set order.
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    basis: BasisContext,
    horizon: f64,
    steps: usize,
    paths: usize,
    q: f64,
    seed: u64,
    alphas: Vec<Vec<f64>>,
    stats: SolveStats,
    meta: RunMetadata,
}

impl CoefficientTable {
    pub(crate) fn new(
        basis: BasisContext,
        horizon: f64,
        config: &RunConfig,
        alphas: Vec<Vec<f64>>,
        stats: SolveStats,
        meta: RunMetadata,
    ) -> Result<Self> {
        let table = Self {
            basis,
            horizon,
            steps: config.steps,
            paths: config.paths,
            q: config.q,
            seed: config.seed,
            alphas,
            stats,
            meta,
        };
        table.check()?;
        Ok(table)
    }

    fn check(&self) -> Result<()> {
        if self.alphas.len() != self.steps {
            return Err(Error::Artifact(format!(
                "{} coefficient vectors for {} steps",
                self.alphas.len(),
                self.steps
            )));
        }
        for (i, a) in self.alphas.iter().enumerate() {
            if a.len() != self.basis.len() {
                return Err(Error::Artifact(format!("step {i} has {} coefficients", a.len())));
            }
            if let Some(k) = a.iter().position(|v| !v.is_finite()) {
                return Err(Error::Numerical {
                    step: i,
                    index: k,
                    detail: "non-finite coefficient".into(),
                });
            }
        }
        Ok(())
    }

    pub fn basis(&self) -> &BasisContext {
        &self.basis
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn delta(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    pub fn metadata(&self) -> &RunMetadata {
        &self.meta
    }

    pub fn coefficients(&self, i: usize) -> &[f64] {
        &self.alphas[i]
    }

    fn step(&self, i: usize) -> Result<&[f64]> {
        self.alphas
            .get(i)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Contract(format!("step {i} out of range 0..{}", self.steps)))
    }

    /// Damped-scale estimate `sum_k alpha_{i,k} phi_k(x)`.
    pub fn evaluate_damped(&self, i: usize, x: &[f64]) -> Result<f64> {
        self.basis.eval_series(self.step(i)?, x)
    }

    /// Estimate of `y_i(x) = u(t_i, x)`.
    pub fn evaluate(&self, i: usize, x: &[f64]) -> Result<f64> {
        let damped = self.evaluate_damped(i, x)?;
        Ok(if self.q == 0.0 {
            damped
        } else {
            damped * (1.0 + sq_norm(x)).powf(0.5 * self.q)
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let gamma = self.basis.gamma();
        let doc = TableDoc {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            config: ConfigDoc {
                steps: self.steps,
                horizon: self.horizon,
                paths: self.paths,
                q: self.q,
                seed: self.seed,
                measure: self.basis.measure().clone(),
            },
            gamma: GammaDoc {
                dim: gamma.dim(),
                kind: gamma.kind().clone(),
                size: gamma.len(),
            },
            stats: self.stats,
            steps: self
                .alphas
                .iter()
                .enumerate()
                .map(|(i, a)| StepDoc {
                    step: i,
                    coefficients: gamma.iter().map(|k| k.to_vec()).zip(a.iter().copied()).collect(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses an artifact; the multi-index list must match the rebuilt set.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TableDoc = serde_json::from_str(text)?;
        if doc.format != FORMAT_NAME || doc.version != FORMAT_VERSION {
            return Err(Error::Artifact(format!(
                "unsupported artifact {} v{}",
                doc.format, doc.version
            )));
        }
        let gamma = MultiIndexSet::build(doc.gamma.dim, doc.gamma.kind)?;
        if gamma.len() != doc.gamma.size {
            return Err(Error::Artifact("index set size does not match".into()));
        }
        let mut alphas = Vec::with_capacity(doc.steps.len());
        for (i, s) in doc.steps.into_iter().enumerate() {
            if s.step != i || s.coefficients.len() != gamma.len() {
                return Err(Error::Artifact(format!("malformed step entry {i}")));
            }
            let mut a = Vec::with_capacity(gamma.len());
            for (n, (k, v)) in s.coefficients.into_iter().enumerate() {
                if gamma.get(n) != k.as_slice() {
                    return Err(Error::Artifact(format!("step {i}: index {k:?} out of order")));
                }
                a.push(v);
            }
            alphas.push(a);
        }
        let basis = BasisContext::new(doc.config.measure, gamma)?;
        let table = Self {
            basis,
            horizon: doc.config.horizon,
            steps: doc.config.steps,
            paths: doc.config.paths,
            q: doc.config.q,
            seed: doc.config.seed,
            alphas,
            stats: doc.stats,
            meta: RunMetadata::default(),
        };
        table.check()?;
        Ok(table)
    }

    pub fn metadata_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.meta)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    format: String,
    version: u32,
    config: ConfigDoc,
    gamma: GammaDoc,
    stats: SolveStats,
    steps: Vec<StepDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    steps: usize,
    horizon: f64,
    paths: usize,
    q: f64,
    seed: u64,
    measure: SamplingMeasure,
}

#[derive(Serialize, Deserialize)]
struct GammaDoc {
    dim: usize,
    #[serde(flatten)]
    kind: IndexKind,
    size: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDoc {
    step: usize,
    coefficients: Vec<(Vec<u32>, f64)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::ProblemSpec;
    use crate::solver::backward_solve;

    fn small_table() -> CoefficientTable {
        let spec = ProblemSpec::builder(2, 1.0)
            .terminal(|x| (x[0] - x[1]).sin())
            .driver(|_, _, y| -0.2 * y)
            .build()
            .unwrap();
        let cfg = RunConfig::new(
            3,
            500,
            1.5,
            4,
            MultiIndexSet::build(2, IndexKind::Hyperbolic { deg: 4 }).unwrap(),
            SamplingMeasure::new(2.0, 2).unwrap(),
        )
        .with_workers(1);
        backward_solve(&spec, &cfg).unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let t = small_table();
        let text = t.to_json().unwrap();
        let back = CoefficientTable::from_json(&text).unwrap();
        for i in 0..t.steps() {
            assert_eq!(t.coefficients(i), back.coefficients(i));
        }
        assert_eq!(back.to_json().unwrap(), text);
        assert!(text.contains("\"kind\": \"hyperbolic\""));
        assert!(!text.contains("seconds"));
    }

    #[test]
    fn rejects_tampered_artifacts() {
        let t = small_table();
        let text = t.to_json().unwrap();
        let size = t.basis().len();
        let resized = text.replace(&format!("\"size\": {size}"), &format!("\"size\": {}", size + 1));
        assert_ne!(resized, text);
        assert!(CoefficientTable::from_json(&resized).is_err());
        assert!(CoefficientTable::from_json(&text.replace(FORMAT_NAME, "other")).is_err());
        assert!(CoefficientTable::from_json("{}").is_err());
    }

    #[test]
    fn evaluation_scales_by_damping() {
        let t = small_table();
        let x = [0.0, 0.0];
        assert_eq!(t.evaluate(0, &x).unwrap(), t.evaluate_damped(0, &x).unwrap());
        let x = [1.0, 2.0];
        let ratio = t.evaluate(1, &x).unwrap() / t.evaluate_damped(1, &x).unwrap();
        assert!((ratio - 6f64.powf(0.75)).abs() < 1e-12);
        assert!(t.evaluate(3, &x).is_err());
    }
}
