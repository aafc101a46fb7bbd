//! Loss-comparison binary forward exploration.
//!
//! Each time-step compares the loss after one gradient step of size `η` with
//! the loss after two consecutive steps of size `η/2` (zoom-in), or two steps
//! of size `η` against one of size `2η` (zoom-out). The rate is divided or
//! multiplied by `base` until the gap `|loss2 − loss1|` crosses the threshold
//! produced by [`eval_criterion_threshold`].
//!
//! Which branch a step runs is carried over from the previous step: a step that
//! ended with an acceptable gap starts the next one in zoom-out.

use serde::{Deserialize, Serialize};

use crate::criterion::{eval_criterion_threshold, Comparison, CriterionState};
use crate::error::{OptimError, Result};
use crate::objective::{finite_grad, finite_loss, Batch, Objective, ParamVector};
use crate::optimizer::{self, BatchSource, Branch, Optimizer, RunError, RunLimits, RunOutcome, StepOutcome};
use crate::rate::{RateState, MAX_EXPONENT};

/// Which trial point and rate a zoom-in exit commits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommitPolicy {
    /// Commit the half-step point `θ⁺` and keep the final reduced rate.
    #[default]
    HalfStep,
    /// Restore the last probed rate and commit the full-step point `θ*`.
    FullStep,
}

/// Starting rate of each zoom-in-only step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResetPolicy {
    PrevEta,
    #[default]
    DoublePrevEta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfeLossConfig {
    pub eta0: f64,
    pub crit: CriterionState,
    pub base: u32,
    pub commit_policy: CommitPolicy,
    pub max_inner: usize,
    pub lim_zero: f64,
    pub max_steps: usize,
    pub zoom_in_only: bool,
    pub reset_policy: ResetPolicy,
    /// Start every step with zoom-in instead of following the carried comparison.
    pub force_zoom_in: bool,
}

impl Default for BfeLossConfig {
    fn default() -> Self {
        Self {
            eta0: 0.001,
            crit: CriterionState::default(),
            base: 2,
            commit_policy: CommitPolicy::HalfStep,
            max_inner: 60,
            lim_zero: 0.001,
            max_steps: 1000,
            zoom_in_only: false,
            reset_policy: ResetPolicy::DoublePrevEta,
            force_zoom_in: false,
        }
    }
}

impl BfeLossConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta0 > 0.0) {
            return Err(OptimError::InvalidConfig(format!("eta0 must be positive, got {}", self.eta0)));
        }
        if self.base < 2 {
            return Err(OptimError::InvalidConfig(format!("base must be >= 2, got {}", self.base)));
        }
        if self.max_inner < 1 {
            return Err(OptimError::InvalidConfig("max_inner must be >= 1".into()));
        }
        if !(self.lim_zero > 0.0) {
            return Err(OptimError::InvalidConfig(format!("lim_zero must be positive, got {}", self.lim_zero)));
        }
        self.crit.validate()
    }
}

/// The two probe losses of one inner iteration and the points they were taken at.
#[derive(Debug, Clone, PartialEq)]
pub struct LossPair {
    pub loss1: f64,
    pub loss2: f64,
    /// `θ⁺`
    pub trial_half: ParamVector,
    /// `θ*`
    pub trial_full: ParamVector,
    /// `θ′`
    pub trial_two_step: ParamVector,
}

impl LossPair {
    pub fn eps_comp(&self) -> f64 {
        (self.loss2 - self.loss1).abs()
    }
}

/// One step of `η` against two steps of `η/2`.
pub fn loss_pair_zoom_in<O: Objective + ?Sized>(
    obj: &O,
    theta: &ParamVector,
    eta: f64,
    batch: Batch<'_>,
) -> Result<LossPair> {
    let g = finite_grad(obj.grad(theta, batch), eta)?;
    let trial_full = theta.descend(&g, eta);
    let trial_half = theta.descend(&g, eta / 2.0);
    let g_half = finite_grad(obj.grad(&trial_half, batch), eta)?;
    let trial_two_step = trial_half.descend(&g_half, eta / 2.0);
    let loss1 = finite_loss(obj.loss(&trial_full, batch), eta)?;
    let loss2 = finite_loss(obj.loss(&trial_two_step, batch), eta)?;
    Ok(LossPair { loss1, loss2, trial_half, trial_full, trial_two_step })
}

/// Two steps of `η` against one step of `2η`.
pub fn loss_pair_zoom_out<O: Objective + ?Sized>(
    obj: &O,
    theta: &ParamVector,
    eta: f64,
    batch: Batch<'_>,
) -> Result<LossPair> {
    let g = finite_grad(obj.grad(theta, batch), eta)?;
    let trial_half = theta.descend(&g, eta);
    let g_half = finite_grad(obj.grad(&trial_half, batch), eta)?;
    let trial_two_step = trial_half.descend(&g_half, eta);
    let trial_full = theta.descend(&g, 2.0 * eta);
    let loss1 = finite_loss(obj.loss(&trial_two_step, batch), eta)?;
    let loss2 = finite_loss(obj.loss(&trial_full, batch), eta)?;
    Ok(LossPair { loss1, loss2, trial_half, trial_full, trial_two_step })
}

/// Result of [`bfe_step`]: the public outcome plus the state the next step needs.
#[derive(Debug, Clone, PartialEq)]
pub struct LossStep {
    pub outcome: StepOutcome,
    /// The comparison of the last evaluated pair.
    pub exit: Comparison,
    /// Committed rate exponent on the `η₀ · base^k` lattice.
    pub exponent: i32,
}

/// One full time-step of the search, starting at `rate` in the given branch.
#[allow(clippy::too_many_arguments)]
pub fn bfe_step<O: Objective + ?Sized>(
    obj: &O,
    theta: &ParamVector,
    rate: &RateState,
    branch: Branch,
    crit: &CriterionState,
    cfg: &BfeLossConfig,
    batch: Batch<'_>,
    epoch: usize,
) -> Result<LossStep> {
    match branch {
        Branch::ZoomOut => zoom_out(obj, theta, rate, crit, cfg, batch, epoch),
        _ => zoom_in(obj, theta, rate, rate.exponent(), cfg.commit_policy, crit, cfg, batch, epoch),
    }
}

/// Zoom-in search that first resets the rate from the previous committed one.
pub fn zoom_in_only_step<O: Objective + ?Sized>(
    obj: &O,
    theta: &ParamVector,
    rate: &RateState,
    crit: &CriterionState,
    cfg: &BfeLossConfig,
    batch: Batch<'_>,
    epoch: usize,
) -> Result<LossStep> {
    let start = match cfg.reset_policy {
        ResetPolicy::PrevEta => rate.exponent(),
        ResetPolicy::DoublePrevEta => (rate.exponent() + 1).min(MAX_EXPONENT),
    };
    zoom_in(obj, theta, rate, start, CommitPolicy::HalfStep, crit, cfg, batch, epoch)
}

#[allow(clippy::too_many_arguments)]
fn zoom_in<O: Objective + ?Sized>(
    obj: &O,
    theta: &ParamVector,
    rate: &RateState,
    start: i32,
    commit: CommitPolicy,
    crit: &CriterionState,
    cfg: &BfeLossConfig,
    batch: Batch<'_>,
    epoch: usize,
) -> Result<LossStep> {
    let mut k = start;
    let mut etas = Vec::new();
    for inner in 1..=cfg.max_inner {
        let eta = rate.rate_at(k);
        etas.push(eta);
        let pair = loss_pair_zoom_in(obj, theta, eta, batch)?;
        let cmp = Comparison {
            eps_comp: pair.eps_comp(),
            eps_val: eval_criterion_threshold(pair.loss1, pair.loss2, crit, epoch),
        };
        let at_floor = k <= -MAX_EXPONENT;
        if !cmp.exceeds() || at_floor {
            let (theta_next, k_next, loss) = match commit {
                CommitPolicy::HalfStep => (pair.trial_half, (k - 1).max(-MAX_EXPONENT), None),
                CommitPolicy::FullStep => (pair.trial_full, k, Some(pair.loss1)),
            };
            return Ok(LossStep {
                outcome: StepOutcome {
                    theta_next,
                    eta_next: rate.rate_at(k_next),
                    etas_next: None,
                    inner_loops: inner,
                    loss_committed: loss,
                    branch: Branch::ZoomIn,
                    rate_capped: cmp.exceeds(),
                },
                exit: cmp,
                exponent: k_next,
            });
        }
        k -= 1;
    }
    Err(OptimError::NonTermination { inner_loops: cfg.max_inner, etas })
}

fn zoom_out<O: Objective + ?Sized>(
    obj: &O,
    theta: &ParamVector,
    rate: &RateState,
    crit: &CriterionState,
    cfg: &BfeLossConfig,
    batch: Batch<'_>,
    epoch: usize,
) -> Result<LossStep> {
    let mut etas = Vec::new();
    for (inner, k) in (1..=cfg.max_inner).zip(rate.exponent()..) {
        let eta = rate.rate_at(k);
        etas.push(eta);
        let pair = loss_pair_zoom_out(obj, theta, eta, batch)?;
        let cmp = Comparison {
            eps_comp: pair.eps_comp(),
            eps_val: eval_criterion_threshold(pair.loss1, pair.loss2, crit, epoch),
        };
        let at_cap = k >= MAX_EXPONENT;
        // The doubling after the failing probe is undone by the single halving at exit.
        if cmp.exceeds() || at_cap {
            return Ok(LossStep {
                outcome: StepOutcome {
                    theta_next: pair.trial_half,
                    eta_next: eta,
                    etas_next: None,
                    inner_loops: inner,
                    loss_committed: None,
                    branch: Branch::ZoomOut,
                    rate_capped: !cmp.exceeds(),
                },
                exit: cmp,
                exponent: k,
            });
        }
    }
    Err(OptimError::NonTermination { inner_loops: cfg.max_inner, etas })
}

/// Stateful loss-comparison optimizer.
#[derive(Debug, Clone)]
pub struct BfeLoss {
    cfg: BfeLossConfig,
    rate: RateState,
    last: Comparison,
}

impl BfeLoss {
    pub fn new(cfg: BfeLossConfig) -> Result<Self> {
        cfg.validate()?;
        let rate = RateState::new(cfg.eta0, cfg.base)?;
        Ok(Self { cfg, rate, last: Comparison::initial() })
    }

    pub fn rate(&self) -> &RateState {
        &self.rate
    }

    pub fn config(&self) -> &BfeLossConfig {
        &self.cfg
    }

    /// Branch the next step will take.
    pub fn next_branch(&self) -> Branch {
        if self.cfg.zoom_in_only || self.cfg.force_zoom_in || self.last.exceeds() {
            Branch::ZoomIn
        } else {
            Branch::ZoomOut
        }
    }
}

impl Optimizer for BfeLoss {
    fn name(&self) -> &'static str {
        if self.cfg.zoom_in_only { "bfe-zoomin" } else { "bfe" }
    }

    fn step(
        &mut self,
        obj: &dyn Objective,
        theta: &ParamVector,
        batch: Batch<'_>,
        epoch: usize,
    ) -> Result<StepOutcome> {
        let step = if self.cfg.zoom_in_only {
            zoom_in_only_step(obj, theta, &self.rate, &self.cfg.crit, &self.cfg, batch, epoch)?
        } else {
            bfe_step(obj, theta, &self.rate, self.next_branch(), &self.cfg.crit, &self.cfg, batch, epoch)?
        };
        self.rate.set_exponent(step.exponent);
        self.last = step.exit;
        debug_assert!(crate::rate::lattice_offset(step.outcome.eta_next, self.cfg.eta0, self.cfg.base) < 1e-9);
        Ok(step.outcome)
    }
}

/// Run the loss-comparison optimizer with its own step and convergence limits.
pub fn run(
    obj: &dyn Objective,
    theta0: ParamVector,
    cfg: &BfeLossConfig,
    batches: &mut dyn BatchSource,
) -> std::result::Result<RunOutcome, RunError> {
    let mut opt = BfeLoss::new(cfg.clone()).map_err(|source| RunError { step: 0, source })?;
    optimizer::run(
        &mut opt,
        obj,
        theta0,
        batches,
        RunLimits { max_steps: cfg.max_steps, lim_zero: cfg.lim_zero },
    )
}
