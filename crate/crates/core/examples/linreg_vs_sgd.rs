//! Mini-batch linear regression: loss-comparison search against fixed-rate SGD.

use bfe::harness::{run_experiment, OptimizerKind, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bfe = run_experiment(&RunConfig::default())?;
    let sgd = run_experiment(&RunConfig { optimizer: OptimizerKind::Sgd, alpha: 0.001, max_steps: 10_000, ..Default::default() })?;

    for (name, res) in [("bfe", &bfe), ("sgd", &sgd)] {
        println!(
            "{name:>4}: steps to loss <= 1.05 {:?}, final loss {:.4}, theta = ({:.3}, {:.3})",
            res.summary.steps_to_threshold, res.summary.final_loss, res.theta[0], res.theta[1]
        );
    }
    println!("bfe inner loops: mean {:.3}, histogram {:?}", bfe.summary.mean_inner_loops, bfe.summary.inner_loop_histogram);
    if let (Some(a), Some(b)) = (sgd.summary.steps_to_threshold, bfe.summary.steps_to_threshold) {
        println!("sgd needs {:.1}x as many steps", a as f64 / b as f64);
    }
    Ok(())
}
