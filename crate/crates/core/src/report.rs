//! Run-report data model: everything a finished (or stopped) optimization
//! emits for downstream tooling. Serialized as JSON by the CLI; the repo
//! ships a schema describing the exact shape.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::metrics::{PrecisionRecallCurve, TimingSummary};
use crate::objective::TraversalStats;
use crate::optimizer::OptimizerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Exaggeration,
    Main,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Exaggeration => "exaggeration",
            Phase::Main => "main",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// A point reached the boundary stop band.
    Boundary,
    /// Ran the full iteration budget.
    MaxIters,
    /// Aborted mid-run; details travel out of band.
    Error,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Boundary => "boundary",
            StopReason::MaxIters => "max-iters",
            StopReason::Error => "error",
        })
    }
}

/// One optimization step as recorded for the report. `seconds` covers the
/// iteration body (tree build, gradient, update); cost sampling happens
/// outside the timed region and only at scheduled iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub phase: Phase,
    pub seconds: f64,
    pub max_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
}

/// Where and how the run executed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvironmentStamp {
    pub threads: usize,
    pub package_version: String,
    pub profile: String,
}

impl EnvironmentStamp {
    pub fn current() -> EnvironmentStamp {
        EnvironmentStamp {
            threads: rayon::current_num_threads(),
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            profile: if cfg!(debug_assertions) { "debug" } else { "release" }.to_string(),
        }
    }
}

/// Gradient-approximation error at one scheduled iteration (only present
/// when an exact baseline was requested).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientErrorRecord {
    pub iteration: usize,
    pub value: f64,
    pub clamped: usize,
}

/// Per-phase and pooled iteration-time statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct TimingReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exaggeration: Option<TimingSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub main: Option<TimingSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pooled: Option<TimingSummary>,
}

/// End-of-run quality numbers. Fields are optional because they depend on
/// what the caller asked for (labels, exact baseline, high-dimensional data).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct FinalMetrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_cost_exact_run: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_cost_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub one_nn_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision_recall: Option<PrecisionRecallCurve>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gradient_errors: Vec<GradientErrorRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_gradient_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: OptimizerConfig,
    pub n_points: usize,
    pub environment: EnvironmentStamp,
    pub stop_reason: StopReason,
    pub iterations: Vec<IterationRecord>,
    pub timings: TimingReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub traversal: Option<TraversalStats>,
    pub final_metrics: FinalMetrics,
}

impl RunReport {
    /// All numeric payloads finite and iteration records contiguous from 0.
    pub fn validate(&self) -> Result<(), String> {
        for (k, rec) in self.iterations.iter().enumerate() {
            if rec.iteration != k {
                return Err(format!("iteration records not contiguous at {k}"));
            }
            if !rec.seconds.is_finite() || !rec.max_norm.is_finite() {
                return Err(format!("non-finite timing/norm at iteration {k}"));
            }
            if let Some(c) = rec.cost {
                if !c.is_finite() {
                    return Err(format!("non-finite cost at iteration {k}"));
                }
            }
        }
        for rec in &self.final_metrics.gradient_errors {
            if !rec.value.is_finite() {
                return Err(format!("non-finite gradient error at iteration {}", rec.iteration));
            }
        }
        Ok(())
    }
}
