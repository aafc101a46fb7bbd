//! Parameter and gradient vectors, mini-batch references, and the objective contract.

use std::cell::Cell;
use std::ops::Deref;

use crate::error::{OptimError, Result};

/// A point in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `self - eta * grad`.
    pub fn descend(&self, grad: &[f64], eta: f64) -> Self {
        debug_assert_eq!(self.0.len(), grad.len());
        Self(self.0.iter().zip(grad).map(|(t, g)| t - eta * g).collect())
    }

    /// `self_i - eta_i * grad_i` with one rate per dimension.
    pub fn descend_per_dim(&self, grad: &[f64], etas: &[f64]) -> Self {
        debug_assert_eq!(self.0.len(), grad.len());
        debug_assert_eq!(self.0.len(), etas.len());
        Self(
            self.0
                .iter()
                .zip(grad)
                .zip(etas)
                .map(|((t, g), e)| t - e * g)
                .collect(),
        )
    }
}

impl Deref for ParamVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Gradient of an objective at some [`ParamVector`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient(Vec<f64>);

impl Gradient {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// `‖g‖₂ / √dim`, the scale used by the convergence test.
    pub fn rms(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.l2_norm() / (self.0.len() as f64).sqrt()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Gradient {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Which samples an evaluation covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Batch<'a> {
    /// The whole dataset.
    Full,
    /// A non-empty subset of sample indices.
    Indices(&'a [usize]),
}

impl<'a> Batch<'a> {
    pub fn indices(idx: &'a [usize]) -> Result<Self> {
        if idx.is_empty() {
            return Err(OptimError::EmptyBatch);
        }
        Ok(Batch::Indices(idx))
    }
}

/// Loss and closed-form gradient on a mini-batch.
///
/// Implementations must be deterministic in `(theta, batch)` and must not keep
/// evaluation state, so one objective can be shared across threads.
pub trait Objective {
    fn dim(&self) -> usize;
    fn loss(&self, theta: &[f64], batch: Batch<'_>) -> f64;
    fn grad(&self, theta: &[f64], batch: Batch<'_>) -> Gradient;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn loss(&self, theta: &[f64], batch: Batch<'_>) -> f64 {
        (**self).loss(theta, batch)
    }
    fn grad(&self, theta: &[f64], batch: Batch<'_>) -> Gradient {
        (**self).grad(theta, batch)
    }
}

/// Wraps an objective and counts loss and gradient evaluations.
#[derive(Debug)]
pub struct CountingObjective<O> {
    inner: O,
    losses: Cell<usize>,
    grads: Cell<usize>,
}

impl<O: Objective> CountingObjective<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, losses: Cell::new(0), grads: Cell::new(0) }
    }

    pub fn loss_evals(&self) -> usize {
        self.losses.get()
    }

    pub fn grad_evals(&self) -> usize {
        self.grads.get()
    }

    pub fn reset(&self) {
        self.losses.set(0);
        self.grads.set(0);
    }
}

impl<O: Objective> Objective for CountingObjective<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn loss(&self, theta: &[f64], batch: Batch<'_>) -> f64 {
        self.losses.set(self.losses.get() + 1);
        self.inner.loss(theta, batch)
    }
    fn grad(&self, theta: &[f64], batch: Batch<'_>) -> Gradient {
        self.grads.set(self.grads.get() + 1);
        self.inner.grad(theta, batch)
    }
}

pub(crate) fn finite_loss(value: f64, eta: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(OptimError::NonFinite { what: "loss", eta })
    }
}

pub(crate) fn finite_grad(g: Gradient, eta: f64) -> Result<Gradient> {
    if g.is_finite() {
        Ok(g)
    } else {
        Err(OptimError::NonFinite { what: "gradient", eta })
    }
}
