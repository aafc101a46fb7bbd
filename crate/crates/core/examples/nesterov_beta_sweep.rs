//! Nesterov momentum at several momentum factors, with the BFE run for reference.

use bfe::harness::{compare_runs, OptimizerKind, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut runs: Vec<RunConfig> = [0.0, 0.5, 0.8, 0.9, 0.95]
        .into_iter()
        .map(|beta| RunConfig {
            label: Some(format!("beta{beta}")),
            optimizer: OptimizerKind::Nesterov,
            alpha: 0.001,
            beta,
            max_steps: 8000,
            ..Default::default()
        })
        .collect();
    runs.push(RunConfig { label: Some("bfe".into()), ..Default::default() });

    let table = compare_runs(&runs, 1.05)?;
    for row in &table.rows {
        let steps = row.steps_to_threshold.map_or("never".to_string(), |s| s.to_string());
        println!("{:>9}: {steps:>6} steps, final loss {:.4}", row.label, row.final_loss);
    }
    Ok(())
}
