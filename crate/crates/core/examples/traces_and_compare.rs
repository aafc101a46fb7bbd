//! Writing a trace file, reading it back, and tabulating several runs.

use std::fs::File;
use std::io::BufReader;

use bfe::harness::{compare_runs, run_experiment, summarize, CompareFile, RunConfig};
use bfe::trace::read_trace;

const RUNS: &str = r#"
loss_threshold = 1.05

[[run]]
label = "bfe"
optimizer = "bfe"

[[run]]
label = "bfe-full"
optimizer = "bfe"
commit_policy = "full-step"

[[run]]
label = "adam"
optimizer = "adam"
alpha = 0.05
max_steps = 3000
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("bfe-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("bfe.csv");
    run_experiment(&RunConfig { output_path: Some(path.clone()), ..Default::default() })?;

    let trace = read_trace(BufReader::new(File::open(&path)?))?;
    println!("{}: {} rows, seed {:?}", path.display(), trace.records.len(), trace.meta("seed"));
    println!("{:?}", summarize(&trace.records, 1.05));

    let file: CompareFile = toml::from_str(RUNS)?;
    let table = compare_runs(&file.runs, file.loss_threshold.unwrap_or(1.05))?;
    table.write_csv(std::io::stdout().lock())?;
    Ok(())
}
