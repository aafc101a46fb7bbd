//! Fixed-rate reference optimizers: plain SGD, SGD with Nesterov momentum, and Adam.

use crate::error::{OptimError, Result};
use crate::objective::{finite_grad, Batch, Objective, ParamVector};
use crate::optimizer::{Branch, Optimizer, StepOutcome};

pub fn sgd_step<O: Objective + ?Sized>(obj: &O, theta: &ParamVector, alpha: f64, batch: Batch<'_>) -> Result<ParamVector> {
    let g = finite_grad(obj.grad(theta, batch), alpha)?;
    Ok(theta.descend(&g, alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    pub v: Vec<f64>,
    pub beta: f64,
    pub alpha: f64,
}

impl MomentumState {
    pub fn new(dim: usize, alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(OptimError::InvalidConfig(format!("beta must lie in [0, 1), got {beta}")));
        }
        if !(alpha >= 0.0) {
            return Err(OptimError::InvalidConfig(format!("alpha must be non-negative, got {alpha}")));
        }
        Ok(Self { v: vec![0.0; dim], beta, alpha })
    }
}

/// `v ← βv + ∇f(w − αβv)`, then `w ← w − αv`.
pub fn nesterov_step<O: Objective + ?Sized>(
    obj: &O,
    theta: &ParamVector,
    state: &MomentumState,
    batch: Batch<'_>,
) -> Result<(ParamVector, MomentumState)> {
    if state.v.len() != theta.dim() {
        return Err(OptimError::DimensionMismatch { expected: theta.dim(), got: state.v.len() });
    }
    let (alpha, beta) = (state.alpha, state.beta);
    let lookahead = theta.descend(&state.v, alpha * beta);
    let g = finite_grad(obj.grad(&lookahead, batch), alpha)?;
    let v: Vec<f64> = state.v.iter().zip(g.iter()).map(|(v, g)| beta * v + g).collect();
    let next = theta.descend(&v, alpha);
    Ok((next, MomentumState { v, beta, alpha }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub alpha: f64,
    pub eps_stab: f64,
    pub t: u64,
}

impl AdamState {
    pub fn new(dim: usize, alpha: f64) -> Self {
        Self { m: vec![0.0; dim], v: vec![0.0; dim], beta1: 0.9, beta2: 0.999, alpha, eps_stab: 1e-8, t: 0 }
    }
}

pub fn adam_step<O: Objective + ?Sized>(
    obj: &O,
    theta: &ParamVector,
    state: &AdamState,
    batch: Batch<'_>,
) -> Result<(ParamVector, AdamState)> {
    if state.m.len() != theta.dim() || state.v.len() != theta.dim() {
        return Err(OptimError::DimensionMismatch { expected: theta.dim(), got: state.m.len() });
    }
    let g = finite_grad(obj.grad(theta, batch), state.alpha)?;
    let mut s = state.clone();
    s.t += 1;
    let bc1 = 1.0 - s.beta1.powi(s.t as i32);
    let bc2 = 1.0 - s.beta2.powi(s.t as i32);
    let mut next = theta.to_vec();
    for i in 0..next.len() {
        s.m[i] = s.beta1 * s.m[i] + (1.0 - s.beta1) * g[i];
        s.v[i] = s.beta2 * s.v[i] + (1.0 - s.beta2) * g[i] * g[i];
        let m_hat = s.m[i] / bc1;
        let v_hat = s.v[i] / bc2;
        next[i] -= s.alpha * m_hat / (v_hat.sqrt() + s.eps_stab);
    }
    Ok((ParamVector::new(next), s))
}

fn fixed_outcome(theta_next: ParamVector, eta: f64) -> StepOutcome {
    StepOutcome {
        theta_next,
        eta_next: eta,
        etas_next: None,
        inner_loops: 1,
        loss_committed: None,
        branch: Branch::Fixed,
        rate_capped: false,
    }
}

#[derive(Debug, Clone)]
pub struct Sgd {
    pub alpha: f64,
}

impl Optimizer for Sgd {
    fn name(&self) -> &'static str {
        "sgd"
    }

    fn step(&mut self, obj: &dyn Objective, theta: &ParamVector, batch: Batch<'_>, _: usize) -> Result<StepOutcome> {
        Ok(fixed_outcome(sgd_step(obj, theta, self.alpha, batch)?, self.alpha))
    }
}

#[derive(Debug, Clone)]
pub struct Nesterov {
    pub state: MomentumState,
}

impl Optimizer for Nesterov {
    fn name(&self) -> &'static str {
        "nesterov"
    }

    fn step(&mut self, obj: &dyn Objective, theta: &ParamVector, batch: Batch<'_>, _: usize) -> Result<StepOutcome> {
        let (next, state) = nesterov_step(obj, theta, &self.state, batch)?;
        self.state = state;
        Ok(fixed_outcome(next, self.state.alpha))
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    pub state: AdamState,
}

impl Optimizer for Adam {
    fn name(&self) -> &'static str {
        "adam"
    }

    fn step(&mut self, obj: &dyn Objective, theta: &ParamVector, batch: Batch<'_>, _: usize) -> Result<StepOutcome> {
        let (next, state) = adam_step(obj, theta, &self.state, batch)?;
        self.state = state;
        Ok(fixed_outcome(next, self.state.alpha))
    }
}
