//! Acceptance thresholds for the loss-comparison search.

use serde::{Deserialize, Serialize};

use crate::error::{OptimError, Result};

/// Lower bound on any threshold so the zoom-in loop terminates at an exact optimum.
pub const THRESHOLD_FLOOR: f64 = 1e-12;

/// How the threshold `ε_v` is derived from the two probe losses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ThresholdPolicy {
    /// `0.5 · (|l1| + |l2|) · ε`
    #[default]
    MeanScaled,
    /// `min(|l1| · ε, |l2| · ε)`
    MinScaled,
    /// A fixed value, independent of the losses.
    Constant { value: f64 },
    /// Mean-scaled, shrunk by `1 / (1 + epoch · decay_rate)`.
    EpochDecay { decay_rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriterionState {
    /// Error-limit ratio `ε`.
    pub eps_ratio: f64,
    pub policy: ThresholdPolicy,
}

impl Default for CriterionState {
    fn default() -> Self {
        Self { eps_ratio: 0.001, policy: ThresholdPolicy::MeanScaled }
    }
}

impl CriterionState {
    pub fn new(eps_ratio: f64, policy: ThresholdPolicy) -> Result<Self> {
        let s = Self { eps_ratio, policy };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_ratio > 0.0) || !self.eps_ratio.is_finite() {
            return Err(OptimError::InvalidConfig(format!(
                "error limit ratio must be positive, got {}",
                self.eps_ratio
            )));
        }
        match self.policy {
            ThresholdPolicy::Constant { value } if !(value > 0.0) => Err(OptimError::InvalidConfig(
                format!("constant threshold must be positive, got {value}"),
            )),
            ThresholdPolicy::EpochDecay { decay_rate } if !(decay_rate >= 0.0) => Err(
                OptimError::InvalidConfig(format!("decay rate must be non-negative, got {decay_rate}")),
            ),
            _ => Ok(()),
        }
    }
}

pub fn eval_criterion_threshold(loss1: f64, loss2: f64, crit: &CriterionState, epoch: usize) -> f64 {
    let eps = crit.eps_ratio;
    let mean_scaled = || 0.5 * (loss1.abs() + loss2.abs()) * eps;
    let v = match crit.policy {
        ThresholdPolicy::MeanScaled => mean_scaled(),
        ThresholdPolicy::MinScaled => (loss1.abs() * eps).min(loss2.abs() * eps),
        ThresholdPolicy::Constant { value } => value,
        ThresholdPolicy::EpochDecay { decay_rate } => {
            mean_scaled() / (1.0 + epoch as f64 * decay_rate)
        }
    };
    v.max(THRESHOLD_FLOOR)
}

/// One evaluated comparison: the measured quantity against its threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub eps_comp: f64,
    pub eps_val: f64,
}

impl Comparison {
    /// The state every run starts from: `ε_c > ε_v`, so the first step zooms in.
    pub fn initial() -> Self {
        Self { eps_comp: f64::INFINITY, eps_val: THRESHOLD_FLOOR }
    }

    pub fn exceeds(&self) -> bool {
        self.eps_comp >= self.eps_val
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_scaled() {
        let c = CriterionState::default();
        let v = eval_criterion_threshold(0.0, 0.03125, &c, 0);
        assert!((v - 1.5625e-5).abs() < 1e-18);
    }

    #[test]
    fn min_scaled() {
        let c = CriterionState::new(0.001, ThresholdPolicy::MinScaled).unwrap();
        assert!((eval_criterion_threshold(2.0, 4.0, &c, 0) - 0.002).abs() < 1e-18);
    }

    #[test]
    fn constant_ignores_losses() {
        let c = CriterionState::new(0.001, ThresholdPolicy::Constant { value: 1.0 }).unwrap();
        assert_eq!(eval_criterion_threshold(123.0, -7.0, &c, 5), 1.0);
    }

    #[test]
    fn epoch_decay_shrinks() {
        let c = CriterionState::new(0.001, ThresholdPolicy::EpochDecay { decay_rate: 0.01 }).unwrap();
        let v0 = eval_criterion_threshold(1.0, 1.0, &c, 0);
        let v100 = eval_criterion_threshold(1.0, 1.0, &c, 100);
        assert!((v0 - 0.001).abs() < 1e-18);
        assert!((v100 - 0.0005).abs() < 1e-18);
    }

    #[test]
    fn floor_applies_at_zero_loss() {
        let c = CriterionState::default();
        assert_eq!(eval_criterion_threshold(0.0, 0.0, &c, 0), THRESHOLD_FLOOR);
    }

    #[test]
    fn rejects_bad_ratio() {
        assert!(CriterionState::new(0.0, ThresholdPolicy::MeanScaled).is_err());
        assert!(CriterionState::new(0.1, ThresholdPolicy::Constant { value: -1.0 }).is_err());
    }

    #[test]
    fn initial_comparison_zooms_in() {
        assert!(Comparison::initial().exceeds());
    }
}
