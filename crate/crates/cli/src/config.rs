//! Experiment files.

use std::f64::consts::TAU;

use gbv_core::expansion::{Identity, VerifyParams};
use gbv_core::phase_sets::SVariant;
use gbv_core::sequence::SequenceSpec;
use gbv_core::Model;
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    PhaseSets,
    PruferRun,
    Density,
    Convergence,
    Resonance,
    VerifyIdentities,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::PhaseSets => "phase-sets",
            Task::PruferRun => "prufer-run",
            Task::Density => "density",
            Task::Convergence => "convergence",
            Task::Resonance => "resonance",
            Task::VerifyIdentities => "verify-identities",
        }
    }
}

/// One experiment. `coefficients` is the Verblunsky sequence for OPUC and the
/// potential `b_n` for OPRL; `a_minus_one` (OPRL only) holds `a_n - 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    #[serde(default = "zero_spec")]
    pub coefficients: SequenceSpec,
    #[serde(default)]
    pub a_minus_one: Option<SequenceSpec>,
    #[serde(default)]
    pub p: Option<usize>,
    /// Phase set `A`; taken from the decomposition of the coefficients when absent.
    #[serde(default)]
    pub phases: Option<Vec<f64>>,
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub variant: Option<SVariant>,
    #[serde(default)]
    pub prufer: Option<PruferParams>,
    #[serde(default)]
    pub density: Option<DensityParams>,
    #[serde(default)]
    pub convergence: Option<ConvergenceParams>,
    #[serde(default)]
    pub resonance: Option<ResonanceParams>,
    #[serde(default)]
    pub identities: Option<IdentityParams>,
}

fn zero_spec() -> SequenceSpec {
    SequenceSpec::Zero
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PruferParams {
    pub etas: Vec<f64>,
    pub n_max: usize,
    #[serde(default = "one")]
    pub stride: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityParams {
    pub n: usize,
    #[serde(default)]
    pub lo: f64,
    #[serde(default = "tau")]
    pub hi: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Intervals whose mass is reported; endpoints must lie on the grid.
    #[serde(default)]
    pub masses: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceParams {
    pub intervals: Vec<(f64, f64)>,
    #[serde(default = "default_grid")]
    pub grid_points: usize,
    pub checkpoints: Vec<usize>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    /// Exceptional phases to keep away from; the exceptional set is used when absent.
    #[serde(default)]
    pub avoid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceParams {
    /// Candidate phases; the interior of the exceptional set when absent.
    #[serde(default)]
    pub candidates: Option<Vec<f64>>,
    #[serde(default = "default_offsets")]
    pub offsets: Vec<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityParams {
    /// Identities to run; all of them when absent.
    #[serde(default)]
    pub only: Option<Vec<Identity>>,
    #[serde(default)]
    pub ranges: VerifyParams,
}

fn one() -> usize {
    1
}
fn tau() -> f64 {
    TAU
}
fn default_points() -> usize {
    1025
}
fn default_grid() -> usize {
    41
}
fn default_threshold() -> f64 {
    gbv_core::spectral::DEFAULT_OSC_THRESHOLD
}
fn default_offsets() -> Vec<f64> {
    vec![0.5, -0.5]
}

fn schema(msg: impl Into<String>) -> RunError {
    RunError::Schema(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, RunError> {
        if text.trim().is_empty() {
            return Err(schema("empty config"));
        }
        serde_json::from_str(text).map_err(|e| schema(e.to_string()))
    }

    /// Checks everything `task` needs before any file is written.
    pub fn validate(&self, task: Task) -> Result<(), RunError> {
        if let Some(t) = self.task {
            if t != task {
                return Err(schema(format!("config is for task {}, not {}", t.name(), task.name())));
            }
        }
        if self.model == Model::Opuc && self.a_minus_one.is_some() {
            return Err(schema("a_minus_one only applies to oprl"));
        }
        let finite = |xs: &[f64], what: &str| {
            if xs.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(schema(format!("{what} must be finite")))
            }
        };
        if let Some(ph) = &self.phases {
            finite(ph, "phases")?;
        }
        let needs_p = matches!(task, Task::PhaseSets)
            || (matches!(task, Task::Convergence) && self.convergence.as_ref().is_some_and(|c| c.avoid.is_none()))
            || (matches!(task, Task::Resonance) && self.resonance.as_ref().is_some_and(|r| r.candidates.is_none()));
        match self.p {
            Some(0) => return Err(schema("p must be at least 1")),
            None if needs_p => return Err(schema(format!("task {} needs p", task.name()))),
            _ => {}
        }
        match task {
            Task::PhaseSets | Task::VerifyIdentities => {}
            Task::PruferRun => {
                let p = self.prufer.as_ref().ok_or_else(|| schema("missing prufer section"))?;
                finite(&p.etas, "prufer.etas")?;
                if p.etas.is_empty() || p.stride == 0 {
                    return Err(schema("prufer needs at least one eta and a positive stride"));
                }
            }
            Task::Density => {
                let d = self.density.as_ref().ok_or_else(|| schema("missing density section"))?;
                if d.points < 2 || !(d.lo < d.hi) {
                    return Err(schema("density grid needs lo < hi and at least 2 points"));
                }
            }
            Task::Convergence => {
                let c = self.convergence.as_ref().ok_or_else(|| schema("missing convergence section"))?;
                if c.intervals.is_empty() || c.checkpoints.is_empty() {
                    return Err(schema("convergence needs intervals and checkpoints"));
                }
            }
            Task::Resonance => {
                let r = self.resonance.as_ref().ok_or_else(|| schema("missing resonance section"))?;
                finite(&r.offsets, "resonance.offsets")?;
            }
        }
        Ok(())
    }
}
