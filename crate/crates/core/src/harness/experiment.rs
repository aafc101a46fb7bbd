use std::fs::File;
use std::io::BufWriter;

use crate::objective::{Objective, ParamVector};
use crate::optimizer::{self, BatchSource, FullBatches, RunLimits};
use crate::problems::{gen_linear_data, normalize, BatchSampler, Dataset, LinRegObjective, QuadraticObjective};
use crate::trace::{write_trace, Trace};

use super::config::{ProblemKind, RunConfig};
use super::summary::{summarize, RunSummary};
use super::HarnessError;

pub struct Problem {
    pub objective: Box<dyn Objective>,
    pub batches: Box<dyn BatchSource>,
    pub batches_per_epoch: usize,
    /// The regression dataset, after normalization when requested.
    pub data: Option<Dataset>,
}

pub fn build_problem(cfg: &RunConfig) -> Result<Problem, HarnessError> {
    let to_cfg = |e: crate::error::OptimError| HarnessError::Config(e.to_string());
    match cfg.problem {
        ProblemKind::Linreg => {
            let mut data = gen_linear_data(&cfg.linreg_spec()).map_err(to_cfg)?;
            if cfg.normalize {
                data = normalize(&data).map_err(to_cfg)?;
            }
            let sampler = BatchSampler::new(data.len(), cfg.batch_size, cfg.seed).map_err(to_cfg)?;
            Ok(Problem {
                batches_per_epoch: sampler.batches_per_epoch(),
                objective: Box::new(LinRegObjective::new(data.clone()).map_err(to_cfg)?),
                batches: Box::new(sampler),
                data: Some(data),
            })
        }
        ProblemKind::Quadratic => Ok(Problem {
            objective: Box::new(QuadraticObjective::new(cfg.curvatures.clone()).map_err(to_cfg)?),
            batches: Box::new(FullBatches::default()),
            batches_per_epoch: 1,
            data: None,
        }),
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub trace: Trace,
    pub summary: RunSummary,
    pub theta: ParamVector,
    pub converged: bool,
}

/// Build, run, and summarize one experiment; writes the trace when `output_path` is set.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let mut problem = build_problem(cfg)?;
    let mut opt = cfg.build_optimizer()?;
    let theta0 = ParamVector::new(cfg.resolved_theta0());
    let limits = RunLimits { max_steps: cfg.max_steps, lim_zero: cfg.lim_zero };
    let out = optimizer::run(opt.as_mut(), problem.objective.as_ref(), theta0, problem.batches.as_mut(), limits)
        .map_err(|e| HarnessError::Optimizer { step: e.step, source: e.source })?;

    let threshold = cfg.resolved_loss_threshold();
    let summary = summarize(&out.trace, threshold);

    let mut resolved = cfg.clone();
    resolved.theta0 = Some(cfg.resolved_theta0());
    resolved.loss_threshold = Some(threshold);
    resolved.output_path = None;
    let config_json = serde_json::to_string(&resolved).map_err(|e| HarnessError::Config(e.to_string()))?;
    let capped: Vec<String> = out.rate_capped_steps.iter().map(|s| s.to_string()).collect();
    let loss_form = match cfg.problem {
        ProblemKind::Linreg => "mean squared error, no 1/2 factor",
        ProblemKind::Quadratic => "0.5 * sum(h_i * theta_i^2)",
    };
    let metadata = vec![
        ("library".to_string(), format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))),
        ("optimizer".to_string(), opt.name().to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
        ("loss".to_string(), loss_form.to_string()),
        ("batches_per_epoch".to_string(), problem.batches_per_epoch.to_string()),
        ("converged".to_string(), out.converged.to_string()),
        ("rate_capped_steps".to_string(), capped.join(" ")),
        ("config".to_string(), config_json),
    ];
    let trace = Trace { metadata, records: out.trace };

    if let Some(path) = &cfg.output_path {
        let f = BufWriter::new(File::create(path)?);
        write_trace(f, &trace)?;
    }
    Ok(ExperimentResult { trace, summary, theta: out.theta, converged: out.converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::OptimizerKind;
    use crate::objective::Batch;

    #[test]
    fn sgd_on_quadratic_is_geometric() {
        let cfg = RunConfig {
            optimizer: OptimizerKind::Sgd,
            problem: ProblemKind::Quadratic,
            alpha: 0.1,
            max_steps: 30,
            lim_zero: 1e-300,
            ..Default::default()
        };
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.trace.records.len(), 30);
        for r in &res.trace.records {
            let expected = 0.5 * 0.9f64.powi(2 * r.step as i32);
            assert!((r.full_loss - expected).abs() <= 1e-12 * expected, "step {}", r.step);
        }
    }

    #[test]
    fn full_loss_matches_reevaluation() {
        let cfg = RunConfig { max_steps: 25, n_samples: 2000, ..Default::default() };
        let res = run_experiment(&cfg).unwrap();
        let problem = build_problem(&cfg).unwrap();
        let last = res.trace.records.last().unwrap();
        assert_eq!(problem.objective.loss(&res.theta, Batch::Full), last.full_loss);
    }

    #[test]
    fn metadata_records_resolved_config() {
        let cfg = RunConfig { max_steps: 3, n_samples: 100, ..Default::default() };
        let res = run_experiment(&cfg).unwrap();
        assert_eq!(res.trace.meta("seed"), Some("42"));
        assert_eq!(res.trace.meta("batches_per_epoch"), Some("1"));
        let back: RunConfig = serde_json::from_str(res.trace.meta("config").unwrap()).unwrap();
        assert_eq!(back.theta0, Some(vec![0.0, 0.0]));
        assert_eq!(back.loss_threshold, Some(1.05));
    }

    #[test]
    fn config_errors_map_to_exit_code_two() {
        let cfg = RunConfig { batch_size: 0, ..Default::default() };
        assert_eq!(run_experiment(&cfg).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn divergence_maps_to_exit_code_three() {
        let cfg = RunConfig {
            optimizer: OptimizerKind::Sgd,
            problem: ProblemKind::Quadratic,
            curvatures: vec![1.0],
            alpha: 1e155,
            theta0: Some(vec![1e155]),
            ..Default::default()
        };
        let err = run_experiment(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 3, "{err}");
    }
}
