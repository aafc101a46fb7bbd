use std::io::BufReader;

use bfe::harness::{build_problem, run_experiment, OptimizerKind, ProblemKind, RunConfig};
use bfe::trace::{read_trace, write_trace};
use bfe::Batch;

#[test]
fn trace_file_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let cfg = RunConfig { max_steps: 80, n_samples: 4000, output_path: Some(path.clone()), ..Default::default() };
    let res = run_experiment(&cfg).unwrap();
    let back = read_trace(BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back, res.trace);

    let mut again = Vec::new();
    write_trace(&mut again, &back).unwrap();
    assert_eq!(again, std::fs::read(&path).unwrap());
}

#[test]
fn recorded_full_loss_is_whole_dataset_loss() {
    let cfg = RunConfig { max_steps: 60, ..Default::default() };
    let res = run_experiment(&cfg).unwrap();
    let problem = build_problem(&cfg).unwrap();
    let last = res.trace.records.last().unwrap();
    assert_eq!(problem.objective.loss(&res.theta, Batch::Full), last.full_loss);
    assert!(res.trace.records.iter().all(|r| r.full_loss.is_finite() && r.eta > 0.0));
}

#[test]
fn every_optimizer_runs_on_the_quadratic() {
    for opt in [
        OptimizerKind::Bfe,
        OptimizerKind::BfeZoomin,
        OptimizerKind::BfeGrad,
        OptimizerKind::Adabfe,
        OptimizerKind::Sgd,
        OptimizerKind::Nesterov,
        OptimizerKind::Adam,
    ] {
        let cfg = RunConfig {
            optimizer: opt,
            problem: ProblemKind::Quadratic,
            curvatures: vec![1.0, 3.0],
            alpha: 0.05,
            max_steps: 300,
            ..Default::default()
        };
        let res = run_experiment(&cfg).unwrap_or_else(|e| panic!("{}: {e}", opt.as_str()));
        let first = res.trace.records.first().unwrap().full_loss;
        assert!(res.summary.final_loss < first, "{} did not reduce the loss", opt.as_str());
        assert_eq!(res.trace.meta("optimizer"), Some(opt.as_str()));
    }
}

#[test]
fn seeds_change_the_data_but_not_the_shape() {
    let a = run_experiment(&RunConfig { max_steps: 10, n_samples: 1000, ..Default::default() }).unwrap();
    let b = run_experiment(&RunConfig { max_steps: 10, n_samples: 1000, seed: 43, ..Default::default() }).unwrap();
    assert_eq!(a.trace.records.len(), b.trace.records.len());
    assert_ne!(a.trace.records, b.trace.records);
}
