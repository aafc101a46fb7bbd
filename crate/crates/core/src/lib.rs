//! Learning-rate search by binary forward exploration.
//!
//! The optimizers in this crate pick a step size every time-step by probing
//! ahead on the current mini-batch and halving or doubling the rate until a
//! forward-consistency test changes outcome:
//!
//! - [`bfe_loss::BfeLoss`] compares one full step with two half steps by loss.
//! - [`bfe_grad::BfeGrad`] compares gradient slopes before and after a trial
//!   step, with a global rate or one rate per parameter.
//!
//! [`baselines`] holds fixed-rate SGD, Nesterov momentum and Adam for
//! comparison, [`problems`] the synthetic regression and quadratic
//! objectives, and [`harness`] a seeded runner that writes CSV traces.
//!
//! ```
//! use bfe::bfe_loss::{BfeLoss, BfeLossConfig};
//! use bfe::optimizer::{run, FullBatches, RunLimits};
//! use bfe::problems::QuadraticObjective;
//! use bfe::ParamVector;
//!
//! let bowl = QuadraticObjective::new(vec![1.0, 10.0]).unwrap();
//! let mut opt = BfeLoss::new(BfeLossConfig::default()).unwrap();
//! let out = run(
//!     &mut opt,
//!     &bowl,
//!     ParamVector::new(vec![1.0, 1.0]),
//!     &mut FullBatches::default(),
//!     RunLimits { max_steps: 5000, lim_zero: 1e-3 },
//! )
//! .unwrap();
//! assert!(out.converged);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bfe_grad;
pub mod bfe_loss;
pub mod criterion;
pub mod error;
pub mod gradcheck;
pub mod harness;
pub mod metric;
pub mod objective;
pub mod optimizer;
pub mod problems;
pub mod rate;
pub mod trace;

pub use error::{OptimError, Result};
pub use metric::angular_deviation;
pub use objective::{Batch, CountingObjective, Gradient, Objective, ParamVector};
pub use optimizer::{Branch, Optimizer, StepOutcome};
