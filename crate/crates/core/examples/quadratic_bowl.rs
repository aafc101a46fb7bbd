//! Loss-comparison search on an ill-conditioned quadratic under both commit
//! policies.

use bfe::bfe_loss::{BfeLoss, BfeLossConfig, CommitPolicy};
use bfe::optimizer::{run, FullBatches, RunLimits};
use bfe::problems::QuadraticObjective;
use bfe::ParamVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bowl = QuadraticObjective::new(vec![1.0, 10.0, 100.0])?;
    for commit_policy in [CommitPolicy::HalfStep, CommitPolicy::FullStep] {
        let cfg = BfeLossConfig { commit_policy, ..Default::default() };
        let mut opt = BfeLoss::new(cfg)?;
        let out = run(
            &mut opt,
            &bowl,
            ParamVector::new(vec![1.0, 1.0, 1.0]),
            &mut FullBatches::default(),
            RunLimits { max_steps: 3000, lim_zero: 1e-6 },
        )?;
        let last = out.trace.last().unwrap();
        println!(
            "{commit_policy:?}: {} steps, converged={}, loss {:.3e}, final eta {:.3e}",
            out.trace.len(),
            out.converged,
            last.full_loss,
            last.eta
        );
        for r in out.trace.iter().step_by(out.trace.len().div_ceil(8)) {
            println!("  step {:5}  loss {:.3e}  eta {:.3e}  inner {}", r.step, r.full_loss, r.eta, r.inner_loops);
        }
    }
    Ok(())
}
