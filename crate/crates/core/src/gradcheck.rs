use thiserror::Error;

use crate::objective::{Batch, Objective};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GradCheckError {
    #[error("step size must be positive, got {0}")]
    BadStep(f64),
    #[error("non-finite loss at dimension {dim} (offset {offset:+e})")]
    NonFiniteLoss { dim: usize, offset: f64 },
    #[error("non-finite analytic gradient at dimension {0}")]
    NonFiniteGradient(usize),
}

/// Largest relative disagreement between the analytic gradient and a central
/// difference of the loss, `|a_i - d_i| / max(1, |a_i|)`.
pub fn grad_check<O: Objective + ?Sized>(
    obj: &O,
    theta: &[f64],
    batch: Batch<'_>,
    h: f64,
) -> Result<f64, GradCheckError> {
    if !(h > 0.0) {
        return Err(GradCheckError::BadStep(h));
    }
    let analytic = obj.grad(theta, batch);
    let mut probe = theta.to_vec();
    let mut worst = 0.0f64;
    for (i, &a) in analytic.iter().enumerate() {
        if !a.is_finite() {
            return Err(GradCheckError::NonFiniteGradient(i));
        }
        let orig = probe[i];
        probe[i] = orig + h;
        let up = obj.loss(&probe, batch);
        if !up.is_finite() {
            return Err(GradCheckError::NonFiniteLoss { dim: i, offset: h });
        }
        probe[i] = orig - h;
        let down = obj.loss(&probe, batch);
        if !down.is_finite() {
            return Err(GradCheckError::NonFiniteLoss { dim: i, offset: -h });
        }
        probe[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        worst = worst.max((a - numeric).abs() / a.abs().max(1.0));
    }
    Ok(worst)
}
