//! Gradient-angle binary forward exploration and its per-parameter variant.
//!
//! A probe takes a trial step `θ* = θ − η·g` and measures, per dimension, the
//! angle between the gradient slopes before and after the step. The global
//! variant compares the largest angle with a threshold; the adaptive variant
//! keeps one rate and one branch per dimension.

use serde::{Deserialize, Serialize};

use crate::criterion::THRESHOLD_FLOOR;
use crate::error::{OptimError, Result};
use crate::metric::angular_deviation;
use crate::objective::{finite_grad, Batch, Gradient, Objective, ParamVector};
use crate::optimizer::{Branch, Optimizer, StepOutcome};
use crate::rate::{clamp_exponent, RateState, MAX_EXPONENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// The threshold is `angle_threshold` radians.
    #[default]
    Absolute,
    /// The threshold is `relative_ratio · |arctan(g_i)|`, the tilt of the gradient before the step.
    Relative,
}

/// How a zoom-out search commits once the angle exceeds the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZoomOutExit {
    /// Halve once (undoing the last doubling) and commit the last probe's trial point.
    #[default]
    HalveCommitTrial,
    /// Divide the post-loop rate by `base²` and take a fresh step from `θ`.
    QuarterFreshStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfeGradConfig {
    pub eta0: f64,
    /// Radians.
    pub angle_threshold: f64,
    pub threshold_mode: ThresholdMode,
    pub relative_ratio: f64,
    pub base: u32,
    pub zoom_out_exit: ZoomOutExit,
    /// Halve before probing inside zoom-in, with no undo at exit.
    pub pre_halve: bool,
    pub adaptive: bool,
    pub max_inner: usize,
    pub lim_zero: f64,
    pub max_steps: usize,
    pub force_zoom_in: bool,
}

impl Default for BfeGradConfig {
    fn default() -> Self {
        Self {
            eta0: 0.001,
            angle_threshold: 1f64.to_radians(),
            threshold_mode: ThresholdMode::Absolute,
            relative_ratio: 0.01,
            base: 2,
            zoom_out_exit: ZoomOutExit::HalveCommitTrial,
            pre_halve: false,
            adaptive: false,
            max_inner: 60,
            lim_zero: 0.001,
            max_steps: 1000,
            force_zoom_in: false,
        }
    }
}

impl BfeGradConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.angle_threshold > 0.0 && self.angle_threshold < std::f64::consts::FRAC_PI_2) {
            return Err(OptimError::InvalidConfig(format!(
                "angle threshold must lie in (0, pi/2) radians, got {}",
                self.angle_threshold
            )));
        }
        if !(self.eta0 > 0.0) {
            return Err(OptimError::InvalidConfig(format!("eta0 must be positive, got {}", self.eta0)));
        }
        if self.base < 2 {
            return Err(OptimError::InvalidConfig(format!("base must be >= 2, got {}", self.base)));
        }
        if self.max_inner < 1 {
            return Err(OptimError::InvalidConfig("max_inner must be >= 1".into()));
        }
        if !(self.relative_ratio > 0.0) {
            return Err(OptimError::InvalidConfig(format!(
                "relative ratio must be positive, got {}",
                self.relative_ratio
            )));
        }
        if !(self.lim_zero > 0.0) {
            return Err(OptimError::InvalidConfig(format!("lim_zero must be positive, got {}", self.lim_zero)));
        }
        Ok(())
    }

    fn dim_threshold(&self, g: f64) -> f64 {
        match self.threshold_mode {
            ThresholdMode::Absolute => self.angle_threshold,
            ThresholdMode::Relative => (self.relative_ratio * g.atan().abs()).max(THRESHOLD_FLOOR),
        }
    }

    fn global_threshold(&self, g: &[f64]) -> f64 {
        match self.threshold_mode {
            ThresholdMode::Absolute => self.angle_threshold,
            ThresholdMode::Relative => {
                let tilt = g.iter().fold(0.0f64, |m, x| m.max(x.atan().abs()));
                (self.relative_ratio * tilt).max(THRESHOLD_FLOOR)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradProbe {
    pub g: Gradient,
    pub theta_trial: ParamVector,
    pub g_star: Gradient,
    /// Per-dimension angles, radians.
    pub eps_per_dim: Vec<f64>,
    pub eps_max: f64,
}

/// Probe the gradient change over one trial step. `rates` holds either a single
/// global rate or one rate per dimension.
pub fn grad_probe<O: Objective + ?Sized>(
    obj: &O,
    theta: &ParamVector,
    rates: &[f64],
    batch: Batch<'_>,
) -> Result<GradProbe> {
    let dim = theta.dim();
    let eta_hint = rates.first().copied().unwrap_or(f64::NAN);
    let g = finite_grad(obj.grad(theta, batch), eta_hint)?;
    let theta_trial = match rates.len() {
        1 => theta.descend(&g, rates[0]),
        n if n == dim => theta.descend_per_dim(&g, rates),
        n => return Err(OptimError::DimensionMismatch { expected: dim, got: n }),
    };
    let g_star = finite_grad(obj.grad(&theta_trial, batch), eta_hint)?;
    let eps_per_dim: Vec<f64> = g.iter().zip(g_star.iter()).map(|(&a, &b)| angular_deviation(a, b)).collect();
    let eps_max = eps_per_dim.iter().copied().fold(0.0, f64::max);
    Ok(GradProbe { g, theta_trial, g_star, eps_per_dim, eps_max })
}

/// Result of a gradient-angle step plus the branch state for the next step.
#[derive(Debug, Clone, PartialEq)]
pub struct GradStep {
    pub outcome: StepOutcome,
    /// Whether the last comparison exceeded the threshold (next step zooms in).
    pub exit_exceeds: bool,
    pub exponent: i32,
}

/// One time-step of the global-rate search.
pub fn bfe_grad_step<O: Objective + ?Sized>(
    obj: &O,
    theta: &ParamVector,
    rate: &RateState,
    branch: Branch,
    cfg: &BfeGradConfig,
    batch: Batch<'_>,
) -> Result<GradStep> {
    let zoom_in = branch != Branch::ZoomOut;
    let mut k = rate.exponent();
    if zoom_in && cfg.pre_halve {
        k = clamp_exponent(k - 1);
    }
    let mut etas = Vec::new();
    for inner in 1..=cfg.max_inner {
        let eta = rate.rate_at(k);
        etas.push(eta);
        let probe = grad_probe(obj, theta, &[eta], batch)?;
        let exceeds = probe.eps_max >= cfg.global_threshold(&probe.g);
        let done = if zoom_in { !exceeds || k <= -MAX_EXPONENT } else { exceeds || k >= MAX_EXPONENT };
        if done {
            let (theta_next, k_next) = if !zoom_in && cfg.zoom_out_exit == ZoomOutExit::QuarterFreshStep {
                let k_next = clamp_exponent(k - 1);
                (theta.descend(&probe.g, rate.rate_at(k_next)), k_next)
            } else {
                (probe.theta_trial, k)
            };
            return Ok(GradStep {
                outcome: StepOutcome {
                    theta_next,
                    eta_next: rate.rate_at(k_next),
                    etas_next: None,
                    inner_loops: inner,
                    loss_committed: None,
                    branch: if zoom_in { Branch::ZoomIn } else { Branch::ZoomOut },
                    rate_capped: zoom_in == exceeds,
                },
                exit_exceeds: exceeds,
                exponent: k_next,
            });
        }
        k += if zoom_in { -1 } else { 1 };
    }
    Err(OptimError::NonTermination { inner_loops: cfg.max_inner, etas })
}

/// Per-dimension state carried between adaptive steps.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveStep {
    pub outcome: StepOutcome,
    /// Next-step branch per dimension.
    pub branches: Vec<Branch>,
    pub exponents: Vec<i32>,
}

/// One time-step of the per-dimension search.
///
/// All still-searching dimensions probe together with one joint trial point;
/// a dimension that meets its exit condition freezes its trial coordinate and
/// committed rate while the others keep searching.
pub fn adabfe_step<O: Objective + ?Sized>(
    obj: &O,
    theta: &ParamVector,
    rate: &RateState,
    branches: &[Branch],
    cfg: &BfeGradConfig,
    batch: Batch<'_>,
) -> Result<AdaptiveStep> {
    let dim = theta.dim();
    let start = rate
        .dim_exponents()
        .ok_or_else(|| OptimError::InvalidConfig("adaptive step needs per-dimension rates".into()))?;
    if start.len() != dim {
        return Err(OptimError::DimensionMismatch { expected: dim, got: start.len() });
    }
    if branches.len() != dim {
        return Err(OptimError::DimensionMismatch { expected: dim, got: branches.len() });
    }
    let zoom_in: Vec<bool> = branches.iter().map(|b| *b != Branch::ZoomOut).collect();
    let mut k: Vec<i32> = start
        .iter()
        .zip(&zoom_in)
        .map(|(&k, &zi)| if zi && cfg.pre_halve { clamp_exponent(k - 1) } else { k })
        .collect();
    let mut active = vec![true; dim];
    // Rate reproducing each frozen dimension's committed coordinate.
    let mut frozen_rate = vec![0.0; dim];
    let mut next_branch = branches.to_vec();
    let mut capped = false;

    for inner in 1..=cfg.max_inner {
        let rates: Vec<f64> =
            (0..dim).map(|i| if active[i] { rate.rate_at(k[i]) } else { frozen_rate[i] }).collect();
        let probe = grad_probe(obj, theta, &rates, batch)?;
        for i in 0..dim {
            if !active[i] {
                continue;
            }
            let exceeds = probe.eps_per_dim[i] >= cfg.dim_threshold(probe.g[i]);
            if zoom_in[i] {
                if !exceeds || k[i] <= -MAX_EXPONENT {
                    capped |= exceeds;
                    active[i] = false;
                    frozen_rate[i] = rate.rate_at(k[i]);
                    next_branch[i] = if exceeds { Branch::ZoomIn } else { Branch::ZoomOut };
                } else {
                    k[i] -= 1;
                }
            } else if exceeds || k[i] >= MAX_EXPONENT {
                capped |= !exceeds;
                active[i] = false;
                if cfg.zoom_out_exit == ZoomOutExit::QuarterFreshStep {
                    k[i] = clamp_exponent(k[i] - 1);
                }
                frozen_rate[i] = rate.rate_at(k[i]);
                next_branch[i] = if exceeds { Branch::ZoomIn } else { Branch::ZoomOut };
            } else {
                k[i] += 1;
            }
        }
        if active.iter().all(|a| !a) {
            let theta_next = theta.descend_per_dim(&probe.g, &frozen_rate);
            let etas: Vec<f64> = k.iter().map(|&ki| rate.rate_at(ki)).collect();
            let branch = if zoom_in.iter().all(|&z| z) {
                Branch::ZoomIn
            } else if zoom_in.iter().all(|&z| !z) {
                Branch::ZoomOut
            } else {
                Branch::Mixed
            };
            return Ok(AdaptiveStep {
                outcome: StepOutcome {
                    theta_next,
                    eta_next: etas.iter().sum::<f64>() / dim.max(1) as f64,
                    etas_next: Some(etas),
                    inner_loops: inner,
                    loss_committed: None,
                    branch,
                    rate_capped: capped,
                },
                branches: next_branch,
                exponents: k,
            });
        }
    }
    Err(OptimError::StuckDimensions {
        inner_loops: cfg.max_inner,
        dims: (0..dim).filter(|&i| active[i]).collect(),
    })
}

/// Stateful gradient-angle optimizer; per-dimension when `cfg.adaptive` is set.
#[derive(Debug, Clone)]
pub struct BfeGrad {
    cfg: BfeGradConfig,
    rate: RateState,
    last_exceeds: bool,
    branches: Vec<Branch>,
}

impl BfeGrad {
    pub fn new(cfg: BfeGradConfig, dim: usize) -> Result<Self> {
        cfg.validate()?;
        let rate = if cfg.adaptive {
            RateState::per_dim(cfg.eta0, cfg.base, dim)?
        } else {
            RateState::new(cfg.eta0, cfg.base)?
        };
        Ok(Self { cfg, rate, last_exceeds: true, branches: vec![Branch::ZoomIn; dim] })
    }

    pub fn rate(&self) -> &RateState {
        &self.rate
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }
}

impl Optimizer for BfeGrad {
    fn name(&self) -> &'static str {
        if self.cfg.adaptive { "adabfe" } else { "bfe-grad" }
    }

    fn step(&mut self, obj: &dyn Objective, theta: &ParamVector, batch: Batch<'_>, _epoch: usize) -> Result<StepOutcome> {
        if self.cfg.adaptive {
            let branches: Vec<Branch> = if self.cfg.force_zoom_in {
                vec![Branch::ZoomIn; theta.dim()]
            } else {
                self.branches.clone()
            };
            let s = adabfe_step(obj, theta, &self.rate, &branches, &self.cfg, batch)?;
            self.rate.set_dim_exponents(s.exponents);
            self.branches = s.branches;
            Ok(s.outcome)
        } else {
            let branch = if self.cfg.force_zoom_in || self.last_exceeds { Branch::ZoomIn } else { Branch::ZoomOut };
            let s = bfe_grad_step(obj, theta, &self.rate, branch, &self.cfg, batch)?;
            self.rate.set_exponent(s.exponent);
            self.last_exceeds = s.exit_exceeds;
            Ok(s.outcome)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::CountingObjective;
    use crate::problems::QuadraticObjective;
    use proptest::prelude::*;

    fn p(v: &[f64]) -> ParamVector {
        ParamVector::new(v.to_vec())
    }

    /// Angle for the 1-D quadratic `½hθ²` after a step of `eta`: `g* = g(1 − ηh)`.
    fn oracle_angle(h: f64, theta: f64, eta: f64) -> f64 {
        let g = h * theta;
        let gs = g * (1.0 - eta * h);
        ((g.atan()) - (gs.atan())).abs()
    }

    #[test]
    fn probe_one_dimension() {
        let q = QuadraticObjective::new(vec![1.0]).unwrap();
        let pr = grad_probe(&q, &p(&[1.0]), &[1.0], Batch::Full).unwrap();
        assert_eq!(pr.theta_trial[0], 0.0);
        assert!((pr.eps_max - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(pr.eps_max >= 1f64.to_radians());

        let pr = grad_probe(&q, &p(&[1.0]), &[0.01], Batch::Full).unwrap();
        assert!((pr.g_star[0] - 0.99).abs() < 1e-15);
        assert!((pr.eps_max - 0.0050251).abs() < 1e-7);
        assert!(pr.eps_max < 1f64.to_radians());
    }

    #[test]
    fn probe_two_dimensions() {
        let q = QuadraticObjective::new(vec![1.0, 100.0]).unwrap();
        let pr = grad_probe(&q, &p(&[1.0, 1.0]), &[0.001], Batch::Full).unwrap();
        let e1 = (0.001f64 / 1.999).atan();
        let e2 = (10.0f64 / 9001.0).atan();
        assert!((pr.eps_per_dim[0] - e1).abs() < 1e-14);
        assert!((pr.eps_per_dim[1] - e2).abs() < 1e-14);
        assert_eq!(pr.eps_max, pr.eps_per_dim[1]);
    }

    #[test]
    fn probe_rejects_wrong_rate_count() {
        let q = QuadraticObjective::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(grad_probe(&q, &p(&[1.0, 1.0, 1.0]), &[0.1, 0.1], Batch::Full).is_err());
    }

    #[test]
    fn zoom_in_from_unit_rate_matches_oracle() {
        // Brute-force the probe sequence with the closed-form angle.
        let threshold = 1f64.to_radians();
        let mut eta = 1.0;
        let mut probes = 0;
        loop {
            probes += 1;
            if oracle_angle(1.0, 1.0, eta) < threshold {
                break;
            }
            eta /= 2.0;
        }
        assert_eq!(probes, 6);
        assert_eq!(eta, 0.03125);

        let q = QuadraticObjective::new(vec![1.0]).unwrap();
        let rate = RateState::new(1.0, 2).unwrap();
        let s = bfe_grad_step(&q, &p(&[1.0]), &rate, Branch::ZoomIn, &BfeGradConfig::default(), Batch::Full)
            .unwrap();
        assert_eq!(s.outcome.inner_loops, probes);
        assert_eq!(s.outcome.eta_next, eta);
        assert_eq!(s.outcome.theta_next[0], 1.0 - eta);
        assert!(!s.exit_exceeds);
    }

    #[test]
    fn zoom_out_commits_last_tested_rate() {
        let threshold = 1f64.to_radians();
        let mut eta = 0.001;
        let mut probes = 0;
        loop {
            probes += 1;
            if oracle_angle(1.0, 1.0, eta) >= threshold {
                break;
            }
            eta *= 2.0;
        }
        let q = QuadraticObjective::new(vec![1.0]).unwrap();
        let rate = RateState::new(0.001, 2).unwrap();
        let cfg = BfeGradConfig::default();
        let s = bfe_grad_step(&q, &p(&[1.0]), &rate, Branch::ZoomOut, &cfg, Batch::Full).unwrap();
        assert_eq!(s.outcome.inner_loops, probes);
        assert_eq!(s.outcome.eta_next, eta);
        assert_eq!(s.outcome.theta_next[0], 1.0 - eta);
        assert!(s.exit_exceeds);

        let quarter = BfeGradConfig { zoom_out_exit: ZoomOutExit::QuarterFreshStep, ..cfg };
        let s = bfe_grad_step(&q, &p(&[1.0]), &rate, Branch::ZoomOut, &quarter, Batch::Full).unwrap();
        assert_eq!(s.outcome.eta_next, eta / 2.0);
        assert_eq!(s.outcome.theta_next[0], 1.0 - eta / 2.0);
    }

    #[test]
    fn zero_gradient_runs_to_cap() {
        let q = QuadraticObjective::new(vec![1.0]).unwrap();
        let rate = RateState::new(0.001, 2).unwrap();
        let cfg = BfeGradConfig { max_inner: 200, ..Default::default() };
        let s = bfe_grad_step(&q, &p(&[0.0]), &rate, Branch::ZoomOut, &cfg, Batch::Full).unwrap();
        assert!(s.outcome.rate_capped);
        assert_eq!(s.exponent, MAX_EXPONENT);
        assert_eq!(s.outcome.theta_next[0], 0.0);
    }

    #[test]
    fn pre_halve_probes_half_rate_first() {
        let q = QuadraticObjective::new(vec![1.0]).unwrap();
        let rate = RateState::new(0.01, 2).unwrap();
        let cfg = BfeGradConfig { pre_halve: true, ..Default::default() };
        let s = bfe_grad_step(&q, &p(&[1.0]), &rate, Branch::ZoomIn, &cfg, Batch::Full).unwrap();
        assert_eq!(s.outcome.inner_loops, 1);
        assert_eq!(s.outcome.eta_next, 0.005);
        assert_eq!(s.outcome.theta_next[0], 0.995);
    }

    #[test]
    fn relative_threshold_scales_with_tilt() {
        let cfg = BfeGradConfig { threshold_mode: ThresholdMode::Relative, ..Default::default() };
        assert!((cfg.dim_threshold(1.0) - 0.01 * std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert_eq!(cfg.dim_threshold(0.0), THRESHOLD_FLOOR);
        assert_eq!(cfg.global_threshold(&[0.0, 1.0]), cfg.dim_threshold(1.0));
    }

    #[test]
    fn two_gradient_evaluations_per_probe() {
        let q = CountingObjective::new(QuadraticObjective::new(vec![1.0, 100.0]).unwrap());
        grad_probe(&q, &p(&[1.0, 1.0]), &[0.1, 0.2], Batch::Full).unwrap();
        assert_eq!(q.grad_evals(), 2);
        assert_eq!(q.loss_evals(), 0);
        q.reset();
        let rate = RateState::new(1.0, 2).unwrap();
        let s = bfe_grad_step(&q, &p(&[1.0, 1.0]), &rate, Branch::ZoomIn, &BfeGradConfig::default(), Batch::Full)
            .unwrap();
        assert_eq!(q.grad_evals(), 2 * s.outcome.inner_loops);
    }

    #[test]
    fn adaptive_budget_independent_of_dimension() {
        for dim in [1usize, 4, 32] {
            let curv: Vec<f64> = (0..dim).map(|i| 1.0 + i as f64).collect();
            let q = CountingObjective::new(QuadraticObjective::new(curv).unwrap());
            let rate = RateState::per_dim(0.5, 2, dim).unwrap();
            let s = adabfe_step(
                &q,
                &ParamVector::new(vec![1.0; dim]),
                &rate,
                &vec![Branch::ZoomIn; dim],
                &BfeGradConfig { adaptive: true, ..Default::default() },
                Batch::Full,
            )
            .unwrap();
            assert_eq!(q.grad_evals(), 2 * s.outcome.inner_loops);
        }
    }

    #[test]
    fn adaptive_dims_search_independently() {
        let q = QuadraticObjective::new(vec![1.0, 100.0]).unwrap();
        let cfg = BfeGradConfig { adaptive: true, ..Default::default() };
        let mut opt = BfeGrad::new(cfg, 2).unwrap();
        let theta = p(&[1.0, 1.0]);
        // First step: both dimensions already acceptable at 0.001.
        let first = opt.step(&q, &theta, Batch::Full, 0).unwrap();
        assert_eq!(first.inner_loops, 1);
        assert_eq!(first.etas_next.as_deref(), Some(&[0.001, 0.001][..]));
        assert_eq!(opt.branches(), &[Branch::ZoomOut, Branch::ZoomOut]);
        let second = opt.step(&q, &first.theta_next, Batch::Full, 0).unwrap();
        let etas = second.etas_next.unwrap();
        assert!(etas[1] < etas[0], "stiff dimension should settle on a smaller rate: {etas:?}");
    }

    #[test]
    fn equal_curvatures_keep_equal_rates() {
        let q = QuadraticObjective::new(vec![3.0, 3.0, 3.0]).unwrap();
        let mut opt = BfeGrad::new(BfeGradConfig { adaptive: true, eta0: 0.01, ..Default::default() }, 3).unwrap();
        let mut theta = p(&[2.0, 2.0, 2.0]);
        for _ in 0..50 {
            let out = opt.step(&q, &theta, Batch::Full, 0).unwrap();
            let etas = out.etas_next.unwrap();
            assert!(etas.iter().all(|&e| e == etas[0]));
            theta = out.theta_next;
        }
    }

    #[test]
    fn stuck_dimensions_are_named() {
        let q = QuadraticObjective::new(vec![1.0, 1.0]).unwrap();
        let rate = RateState::per_dim(0.001, 2, 2).unwrap();
        let cfg = BfeGradConfig { adaptive: true, max_inner: 10, ..Default::default() };
        let err = adabfe_step(&q, &p(&[0.0, 1.0]), &rate, &[Branch::ZoomOut; 2], &cfg, Batch::Full).unwrap_err();
        assert_eq!(err, OptimError::StuckDimensions { inner_loops: 10, dims: vec![0] });
    }

    proptest! {
        #[test]
        fn zoom_in_angles_shrink(h in 0.1f64..10.0, theta in -10f64..10.0, frac in 0.01f64..0.99) {
            prop_assume!(theta.abs() > 1e-3);
            let q = QuadraticObjective::new(vec![h]).unwrap();
            let mut eta = frac / h;
            let mut prev = f64::INFINITY;
            for _ in 0..10 {
                let pr = grad_probe(&q, &p(&[theta]), &[eta], Batch::Full).unwrap();
                prop_assert!((0.0..=std::f64::consts::FRAC_PI_2).contains(&pr.eps_max));
                prop_assert!(pr.eps_max <= prev);
                prev = pr.eps_max;
                eta /= 2.0;
            }
        }
    }
}
