//! The step contract shared by every optimizer and the outer time-step driver.

use thiserror::Error;

use crate::error::OptimError;
use crate::objective::{Batch, Objective, ParamVector};
use crate::trace::TraceRecord;

/// Which inner search a step ran.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Shrinking the rate until the probe is acceptable.
    ZoomIn,
    /// Growing the rate until the probe stops being acceptable.
    ZoomOut,
    /// Per-dimension search where dimensions took different branches.
    Mixed,
    /// Fixed-rule baseline, no search.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub theta_next: ParamVector,
    /// Committed global rate (mean of per-dimension rates for adaptive steps).
    pub eta_next: f64,
    /// Committed per-dimension rates for adaptive steps.
    pub etas_next: Option<Vec<f64>>,
    pub inner_loops: usize,
    /// Loss at the committed point, when the step evaluated it.
    pub loss_committed: Option<f64>,
    pub branch: Branch,
    /// The search hit a rate bound instead of meeting its exit condition.
    pub rate_capped: bool,
}

pub trait Optimizer {
    fn name(&self) -> &'static str;

    /// Advance one time-step on a fixed mini-batch. `epoch` counts completed passes over the data.
    fn step(
        &mut self,
        obj: &dyn Objective,
        theta: &ParamVector,
        batch: Batch<'_>,
        epoch: usize,
    ) -> Result<StepOutcome, OptimError>;
}

/// Supplies one mini-batch per time-step.
pub trait BatchSource {
    /// Returns the epoch index the batch belongs to, and the batch itself.
    fn next_batch(&mut self) -> (usize, Batch<'_>);
}

/// Every time-step sees the whole objective, as for batch-independent test functions.
#[derive(Debug, Default, Clone, Copy)]
pub struct FullBatches {
    steps: usize,
}

impl BatchSource for FullBatches {
    fn next_batch(&mut self) -> (usize, Batch<'_>) {
        let epoch = self.steps;
        self.steps += 1;
        (epoch, Batch::Full)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunLimits {
    pub max_steps: usize,
    /// Stop once `‖∇f‖₂ / √dim` on the current batch drops below this.
    pub lim_zero: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub theta: ParamVector,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
    /// Steps whose inner search ended on a rate bound.
    pub rate_capped_steps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("optimizer failed at step {step}: {source}")]
pub struct RunError {
    pub step: usize,
    #[source]
    pub source: OptimError,
}

/// Drive `opt` from `theta0` until convergence or `limits.max_steps`.
///
/// After each step the committed point is checked against `lim_zero` using the
/// gradient on that step's batch, and the full-data loss is logged.
pub fn run(
    opt: &mut dyn Optimizer,
    obj: &dyn Objective,
    theta0: ParamVector,
    batches: &mut dyn BatchSource,
    limits: RunLimits,
) -> Result<RunOutcome, RunError> {
    if theta0.dim() != obj.dim() {
        return Err(RunError {
            step: 0,
            source: OptimError::DimensionMismatch { expected: obj.dim(), got: theta0.dim() },
        });
    }
    let mut theta = theta0;
    let mut trace = Vec::with_capacity(limits.max_steps.min(1 << 16));
    let mut capped = Vec::new();
    let mut converged = false;

    for t in 1..=limits.max_steps {
        let (epoch, batch) = batches.next_batch();
        let out = opt
            .step(obj, &theta, batch, epoch)
            .map_err(|source| RunError { step: t, source })?;
        if !out.theta_next.is_finite() {
            return Err(RunError {
                step: t,
                source: OptimError::NonFinite { what: "parameters", eta: out.eta_next },
            });
        }
        theta = out.theta_next;
        if out.rate_capped {
            capped.push(t);
        }
        let g = obj.grad(&theta, batch);
        trace.push(TraceRecord {
            step: t,
            batch_loss: obj.loss(&theta, batch),
            full_loss: obj.loss(&theta, Batch::Full),
            eta: out.eta_next,
            inner_loops: out.inner_loops,
            grad_norm: g.l2_norm(),
        });
        if g.rms() < limits.lim_zero {
            converged = true;
            break;
        }
    }
    Ok(RunOutcome { theta, trace, converged, rate_capped_steps: capped })
}
