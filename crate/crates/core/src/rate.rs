//! Learning rates restricted to the lattice `η₀ · base^k`.
//!
//! Rates are stored as integer exponents, so every rate an optimizer commits is
//! on the lattice by construction. Exponents are clamped to
//! `[-MAX_EXPONENT, MAX_EXPONENT]`.

use crate::error::{OptimError, Result};

pub const MAX_EXPONENT: i32 = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct RateState {
    eta0: f64,
    base: u32,
    exponent: i32,
    per_dim: Option<Vec<i32>>,
}

impl RateState {
    pub fn new(eta0: f64, base: u32) -> Result<Self> {
        if !(eta0 > 0.0) || !eta0.is_finite() {
            return Err(OptimError::InvalidConfig(format!("eta0 must be positive, got {eta0}")));
        }
        if base < 2 {
            return Err(OptimError::InvalidConfig(format!("multiplier base must be >= 2, got {base}")));
        }
        Ok(Self { eta0, base, exponent: 0, per_dim: None })
    }

    /// Same as [`RateState::new`] with one independent rate per dimension, all starting at `eta0`.
    pub fn per_dim(eta0: f64, base: u32, dim: usize) -> Result<Self> {
        let mut s = Self::new(eta0, base)?;
        s.per_dim = Some(vec![0; dim]);
        Ok(s)
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn exponent(&self) -> i32 {
        self.exponent
    }

    pub fn eta(&self) -> f64 {
        self.rate_at(self.exponent)
    }

    pub fn rate_at(&self, k: i32) -> f64 {
        self.eta0 * (self.base as f64).powi(k)
    }

    pub fn set_exponent(&mut self, k: i32) {
        self.exponent = clamp_exponent(k);
    }

    pub fn dim_exponents(&self) -> Option<&[i32]> {
        self.per_dim.as_deref()
    }

    pub fn set_dim_exponents(&mut self, ks: Vec<i32>) {
        self.per_dim = Some(ks.into_iter().map(clamp_exponent).collect());
    }

    pub fn dim_etas(&self) -> Option<Vec<f64>> {
        self.per_dim
            .as_ref()
            .map(|ks| ks.iter().map(|&k| self.rate_at(k)).collect())
    }

    /// The global rate, or the mean of per-dimension rates when present.
    pub fn summary_eta(&self) -> f64 {
        match self.dim_etas() {
            Some(etas) if !etas.is_empty() => etas.iter().sum::<f64>() / etas.len() as f64,
            _ => self.eta(),
        }
    }
}

pub fn clamp_exponent(k: i32) -> i32 {
    k.clamp(-MAX_EXPONENT, MAX_EXPONENT)
}

/// Distance of `log_base(eta / eta0)` from the nearest integer.
pub fn lattice_offset(eta: f64, eta0: f64, base: u32) -> f64 {
    let k = (eta / eta0).ln() / (base as f64).ln();
    (k - k.round()).abs()
}
