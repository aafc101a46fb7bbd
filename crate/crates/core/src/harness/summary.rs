use std::collections::BTreeMap;

use serde::Serialize;

use crate::trace::TraceRecord;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    /// First 1-indexed step whose full-data loss is at or below the threshold.
    pub steps_to_threshold: Option<usize>,
    pub mean_inner_loops: f64,
    /// Inner-loop count → number of steps with that count.
    pub inner_loop_histogram: BTreeMap<usize, usize>,
    pub final_loss: f64,
}

impl RunSummary {
    /// Fraction of steps whose inner-loop count is one of `counts`.
    pub fn histogram_mass(&self, counts: &[usize]) -> f64 {
        let total: usize = self.inner_loop_histogram.values().sum();
        if total == 0 {
            return 0.0;
        }
        let hit: usize = counts.iter().filter_map(|c| self.inner_loop_histogram.get(c)).sum();
        hit as f64 / total as f64
    }
}

/// Summary statistics of a trace. An empty trace gives a zero mean and a NaN final loss.
pub fn summarize(trace: &[TraceRecord], loss_threshold: f64) -> RunSummary {
    let steps_to_threshold = trace.iter().find(|r| r.full_loss <= loss_threshold).map(|r| r.step);
    let mut hist = BTreeMap::new();
    for r in trace {
        *hist.entry(r.inner_loops).or_insert(0) += 1;
    }
    let mean_inner_loops = if trace.is_empty() {
        0.0
    } else {
        trace.iter().map(|r| r.inner_loops as f64).sum::<f64>() / trace.len() as f64
    };
    RunSummary {
        steps_to_threshold,
        mean_inner_loops,
        inner_loop_histogram: hist,
        final_loss: trace.last().map_or(f64::NAN, |r| r.full_loss),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(step: usize, loss: f64, inner: usize) -> TraceRecord {
        TraceRecord { step, batch_loss: loss, full_loss: loss, eta: 0.1, inner_loops: inner, grad_norm: 1.0 }
    }

    #[test]
    fn mean_and_histogram() {
        let t = vec![rec(1, 5.0, 1), rec(2, 3.0, 2), rec(3, 1.0, 3)];
        let s = summarize(&t, 2.0);
        assert_eq!(s.mean_inner_loops, 2.0);
        assert_eq!(s.inner_loop_histogram, BTreeMap::from([(1, 1), (2, 1), (3, 1)]));
        assert_eq!(s.steps_to_threshold, Some(3));
        assert_eq!(s.final_loss, 1.0);
        assert!((s.histogram_mass(&[1, 2]) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn threshold_never_reached() {
        let t = vec![rec(1, 5.0, 1), rec(2, 3.0, 1)];
        assert_eq!(summarize(&t, 0.5).steps_to_threshold, None);
    }

    #[test]
    fn histogram_total_is_trace_length() {
        let t: Vec<_> = (1..=37).map(|i| rec(i, 1.0, 1 + i % 4)).collect();
        let s = summarize(&t, 0.0);
        assert_eq!(s.inner_loop_histogram.values().sum::<usize>(), t.len());
    }
}
