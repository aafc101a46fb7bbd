//! Zoom-in-only search: each step restarts from the previous rate (or one
//! multiplier step above it) and only ever halves.

use bfe::bfe_loss::{BfeLoss, BfeLossConfig, ResetPolicy};
use bfe::problems::QuadraticObjective;
use bfe::{Batch, Optimizer, ParamVector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bowl = QuadraticObjective::new(vec![1.0, 20.0])?;
    for reset_policy in [ResetPolicy::DoublePrevEta, ResetPolicy::PrevEta] {
        let cfg = BfeLossConfig { eta0: 0.5, zoom_in_only: true, reset_policy, ..Default::default() };
        let mut opt = BfeLoss::new(cfg)?;
        let mut theta = ParamVector::new(vec![1.0, 1.0]);
        println!("{reset_policy:?}");
        for t in 0..12 {
            let out = opt.step(&bowl, &theta, Batch::Full, t)?;
            println!("  step {:2}: {} probes, eta {:.4e}, theta ({:+.4}, {:+.4})", t + 1, out.inner_loops, out.eta_next, out.theta_next[0], out.theta_next[1]);
            theta = out.theta_next;
        }
    }
    Ok(())
}
