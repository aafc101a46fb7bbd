//! Rate multipliers other than two: every committed rate stays on the
//! eta0 * base^k lattice.

use bfe::harness::{run_experiment, RunConfig};
use bfe::rate::lattice_offset;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for base in [2, 3, 5, 10] {
        let res = run_experiment(&RunConfig { base, ..Default::default() })?;
        let worst = res.trace.records.iter().map(|r| lattice_offset(r.eta, 0.001, base)).fold(0.0, f64::max);
        println!(
            "base {base:>2}: steps to threshold {:?}, mean inner loops {:.2}, max lattice offset {worst:.1e}",
            res.summary.steps_to_threshold, res.summary.mean_inner_loops
        );
    }
    Ok(())
}
