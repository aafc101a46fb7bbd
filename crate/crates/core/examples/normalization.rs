//! Standardizing the inputs before training, with the same seed and optimizer.

use bfe::harness::{build_problem, run_experiment, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for normalize in [false, true] {
        let cfg = RunConfig { normalize, ..Default::default() };
        let data = build_problem(&cfg)?.data.expect("regression problem has data");
        let res = run_experiment(&cfg)?;
        println!(
            "normalize={normalize:<5} x-scaling {:?}: steps to threshold {:?}, mean inner loops {:.2}, final eta {:.3e}",
            data.norm_params,
            res.summary.steps_to_threshold,
            res.summary.mean_inner_loops,
            res.trace.records.last().map_or(f64::NAN, |r| r.eta),
        );
    }
    Ok(())
}
