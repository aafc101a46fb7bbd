use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::baselines::{Adam, AdamState, MomentumState, Nesterov, Sgd};
use crate::bfe_grad::{BfeGrad, BfeGradConfig, ThresholdMode, ZoomOutExit};
use crate::bfe_loss::{BfeLoss, BfeLossConfig, CommitPolicy, ResetPolicy};
use crate::criterion::{CriterionState, ThresholdPolicy};
use crate::optimizer::Optimizer;
use crate::problems::LinRegSpec;

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimizerKind {
    Bfe,
    BfeZoomin,
    BfeGrad,
    Adabfe,
    Sgd,
    Nesterov,
    Adam,
}

impl OptimizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Bfe => "bfe",
            OptimizerKind::BfeZoomin => "bfe-zoomin",
            OptimizerKind::BfeGrad => "bfe-grad",
            OptimizerKind::Adabfe => "adabfe",
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Nesterov => "nesterov",
            OptimizerKind::Adam => "adam",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Linreg,
    Quadratic,
}

/// Threshold policy names as they appear on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyName {
    #[default]
    MeanScaled,
    MinScaled,
    Constant,
    EpochDecay,
}

/// Everything one experiment needs. Unset fields take the library defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Row name in comparison tables.
    pub label: Option<String>,
    pub optimizer: OptimizerKind,
    pub problem: ProblemKind,
    pub batch_size: usize,
    pub seed: u64,
    pub max_steps: usize,

    pub eta0: f64,
    pub epsilon: f64,
    pub epsilon_v_policy: PolicyName,
    pub epsilon_v_constant: f64,
    pub decay_rate: f64,
    pub commit_policy: CommitPolicy,
    pub reset_policy: ResetPolicy,
    pub base: u32,
    pub max_inner: usize,
    pub lim_zero: f64,
    pub force_zoom_in: bool,

    pub angle_threshold_deg: f64,
    pub threshold_mode: ThresholdMode,
    pub relative_ratio: f64,
    pub zoom_out_exit: ZoomOutExit,
    pub pre_halve: bool,

    pub alpha: f64,
    pub beta: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,

    pub w0: f64,
    pub b0: f64,
    pub noise_std: f64,
    pub n_samples: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub normalize: bool,
    pub curvatures: Vec<f64>,

    /// Starting point; zeros for regression, ones for the quadratic when unset.
    pub theta0: Option<Vec<f64>>,
    /// Loss level counted as converged; 1.05 × noise variance for regression when unset.
    pub loss_threshold: Option<f64>,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let data = LinRegSpec::default();
        Self {
            label: None,
            optimizer: OptimizerKind::Bfe,
            problem: ProblemKind::Linreg,
            batch_size: 512,
            seed: 42,
            max_steps: 1000,
            eta0: 0.001,
            epsilon: 0.001,
            epsilon_v_policy: PolicyName::MeanScaled,
            epsilon_v_constant: 1.0,
            decay_rate: 0.01,
            commit_policy: CommitPolicy::HalfStep,
            reset_policy: ResetPolicy::DoublePrevEta,
            base: 2,
            max_inner: 60,
            lim_zero: 0.001,
            force_zoom_in: false,
            angle_threshold_deg: 1.0,
            threshold_mode: ThresholdMode::Absolute,
            relative_ratio: 0.01,
            zoom_out_exit: ZoomOutExit::HalveCommitTrial,
            pre_halve: false,
            alpha: 0.001,
            beta: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            w0: data.w0,
            b0: data.b0,
            noise_std: data.noise_std,
            n_samples: data.n,
            x_min: data.x_min,
            x_max: data.x_max,
            normalize: false,
            curvatures: vec![1.0],
            theta0: None,
            loss_threshold: None,
            output_path: None,
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl RunConfig {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.optimizer.as_str().to_string())
    }

    pub fn linreg_spec(&self) -> LinRegSpec {
        LinRegSpec {
            w0: self.w0,
            b0: self.b0,
            noise_std: self.noise_std,
            n: self.n_samples,
            seed: self.seed,
            x_min: self.x_min,
            x_max: self.x_max,
        }
    }

    pub fn dim(&self) -> usize {
        match self.problem {
            ProblemKind::Linreg => 2,
            ProblemKind::Quadratic => self.curvatures.len(),
        }
    }

    pub fn resolved_theta0(&self) -> Vec<f64> {
        self.theta0.clone().unwrap_or_else(|| match self.problem {
            ProblemKind::Linreg => vec![0.0; 2],
            ProblemKind::Quadratic => vec![1.0; self.curvatures.len()],
        })
    }

    pub fn resolved_loss_threshold(&self) -> f64 {
        self.loss_threshold.unwrap_or(match self.problem {
            ProblemKind::Linreg if self.noise_std > 0.0 => 1.05 * self.noise_std * self.noise_std,
            _ => 1e-6,
        })
    }

    pub fn criterion(&self) -> CriterionState {
        let policy = match self.epsilon_v_policy {
            PolicyName::MeanScaled => ThresholdPolicy::MeanScaled,
            PolicyName::MinScaled => ThresholdPolicy::MinScaled,
            PolicyName::Constant => ThresholdPolicy::Constant { value: self.epsilon_v_constant },
            PolicyName::EpochDecay => ThresholdPolicy::EpochDecay { decay_rate: self.decay_rate },
        };
        CriterionState { eps_ratio: self.epsilon, policy }
    }

    pub fn bfe_loss_config(&self) -> BfeLossConfig {
        BfeLossConfig {
            eta0: self.eta0,
            crit: self.criterion(),
            base: self.base,
            commit_policy: self.commit_policy,
            max_inner: self.max_inner,
            lim_zero: self.lim_zero,
            max_steps: self.max_steps,
            zoom_in_only: self.optimizer == OptimizerKind::BfeZoomin,
            reset_policy: self.reset_policy,
            force_zoom_in: self.force_zoom_in,
        }
    }

    pub fn bfe_grad_config(&self) -> BfeGradConfig {
        BfeGradConfig {
            eta0: self.eta0,
            angle_threshold: self.angle_threshold_deg.to_radians(),
            threshold_mode: self.threshold_mode,
            relative_ratio: self.relative_ratio,
            base: self.base,
            zoom_out_exit: self.zoom_out_exit,
            pre_halve: self.pre_halve,
            adaptive: self.optimizer == OptimizerKind::Adabfe,
            max_inner: self.max_inner,
            lim_zero: self.lim_zero,
            max_steps: self.max_steps,
            force_zoom_in: self.force_zoom_in,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.batch_size < 1 {
            return Err(cfg_err("batch size must be >= 1"));
        }
        if self.max_steps < 1 {
            return Err(cfg_err("max steps must be >= 1"));
        }
        if let Some(t) = &self.theta0 {
            if t.len() != self.dim() {
                return Err(cfg_err(format!("theta0 has {} entries, problem has {}", t.len(), self.dim())));
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(cfg_err("theta0 must be finite"));
            }
        }
        if self.problem == ProblemKind::Linreg && self.n_samples < 1 {
            return Err(cfg_err("n_samples must be >= 1"));
        }
        if self.problem == ProblemKind::Quadratic && self.normalize {
            return Err(cfg_err("normalization applies to the regression problem only"));
        }
        if !(self.alpha >= 0.0) {
            return Err(cfg_err(format!("alpha must be non-negative, got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(cfg_err("adam betas must lie in [0, 1)"));
        }
        if !(self.adam_eps > 0.0) {
            return Err(cfg_err("adam epsilon must be positive"));
        }
        Ok(())
    }

    pub fn build_optimizer(&self) -> Result<Box<dyn Optimizer>, HarnessError> {
        let dim = self.dim();
        let to_cfg = |e: crate::error::OptimError| HarnessError::Config(e.to_string());
        Ok(match self.optimizer {
            OptimizerKind::Bfe | OptimizerKind::BfeZoomin => {
                Box::new(BfeLoss::new(self.bfe_loss_config()).map_err(to_cfg)?)
            }
            OptimizerKind::BfeGrad | OptimizerKind::Adabfe => {
                Box::new(BfeGrad::new(self.bfe_grad_config(), dim).map_err(to_cfg)?)
            }
            OptimizerKind::Sgd => Box::new(Sgd { alpha: self.alpha }),
            OptimizerKind::Nesterov => Box::new(Nesterov {
                state: MomentumState::new(dim, self.alpha, self.beta).map_err(to_cfg)?,
            }),
            OptimizerKind::Adam => {
                let mut state = AdamState::new(dim, self.alpha);
                state.beta1 = self.beta1;
                state.beta2 = self.beta2;
                state.eps_stab = self.adam_eps;
                Box::new(Adam { state })
            }
        })
    }
}
