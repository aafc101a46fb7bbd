use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::experiment::run_experiment;
use super::HarnessError;

/// A comparison file: an optional threshold and a list of `[[run]]` tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareFile {
    pub loss_threshold: Option<f64>,
    #[serde(rename = "run")]
    pub runs: Vec<RunConfig>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub optimizer: String,
    pub steps_to_threshold: Option<usize>,
    pub final_loss: f64,
    pub mean_inner_loops: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub loss_threshold: f64,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    /// `steps(a) / steps(b)`, or `None` when either run never reached the threshold.
    pub fn ratio(&self, a: usize, b: usize) -> Option<f64> {
        let sa = self.rows.get(a)?.steps_to_threshold?;
        let sb = self.rows.get(b)?.steps_to_threshold?;
        Some(sa as f64 / sb as f64)
    }

    /// One row per run; column `steps_over_<label>` holds this run's steps divided by that run's.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec![
            "run".to_string(),
            "optimizer".to_string(),
            "steps_to_threshold".to_string(),
            "final_loss".to_string(),
            "mean_inner_loops".to_string(),
        ];
        header.extend(self.rows.iter().map(|r| format!("steps_over_{}", r.label)));
        wr.write_record(&header)?;
        for (i, r) in self.rows.iter().enumerate() {
            let mut rec = vec![
                r.label.clone(),
                r.optimizer.clone(),
                r.steps_to_threshold.map_or("none".to_string(), |s| s.to_string()),
                format!("{:.16e}", r.final_loss),
                format!("{:.6}", r.mean_inner_loops),
            ];
            rec.extend((0..self.rows.len()).map(|j| self.ratio(i, j).map_or("none".to_string(), |x| format!("{x:.6}"))));
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn same_problem(a: &RunConfig, b: &RunConfig) -> bool {
    a.problem == b.problem && a.seed == b.seed && a.linreg_spec() == b.linreg_spec() && a.curvatures == b.curvatures
}

/// Run every config and tabulate steps-to-threshold. All runs must share the
/// problem and seed; they may differ in optimizer settings and normalization.
pub fn compare_runs(cfgs: &[RunConfig], loss_threshold: f64) -> Result<ComparisonTable, HarnessError> {
    if cfgs.len() < 2 {
        return Err(HarnessError::Config("comparison needs at least two runs".into()));
    }
    if let Some(bad) = cfgs.iter().position(|c| !same_problem(&cfgs[0], c)) {
        return Err(HarnessError::Config(format!("run {bad} does not share the problem and seed of run 0")));
    }
    let mut rows = Vec::with_capacity(cfgs.len());
    for (i, cfg) in cfgs.iter().enumerate() {
        let cfg = RunConfig { loss_threshold: Some(loss_threshold), ..cfg.clone() };
        let res = run_experiment(&cfg)?;
        rows.push(ComparisonRow {
            label: cfg.label.clone().unwrap_or_else(|| format!("{i}-{}", cfg.optimizer.as_str())),
            optimizer: cfg.optimizer.as_str().to_string(),
            steps_to_threshold: res.summary.steps_to_threshold,
            final_loss: res.summary.final_loss,
            mean_inner_loops: res.summary.mean_inner_loops,
        });
    }
    Ok(ComparisonTable { loss_threshold, rows })
}
