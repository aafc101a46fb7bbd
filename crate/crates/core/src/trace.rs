//! Per-time-step trace records and their CSV file format.
//!
//! A trace file starts with `#`-prefixed `key=value` metadata lines, followed by
//! the header `step,batch_loss,full_loss,eta,inner_loops,grad_norm` and one row
//! per time-step. Reals are written with 17 significant digits so a file read
//! back reproduces the records bit for bit.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TRACE_HEADER: [&str; 6] = ["step", "batch_loss", "full_loss", "eta", "inner_loops", "grad_norm"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub batch_loss: f64,
    /// Loss over the whole dataset at the committed parameters.
    pub full_loss: f64,
    /// Committed rate (mean over dimensions for per-dimension optimizers).
    pub eta: f64,
    pub inner_loops: usize,
    pub grad_norm: f64,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed trace: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub metadata: Vec<(String, String)>,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace<W: Write>(mut w: W, trace: &Trace) -> Result<(), TraceError> {
    for (k, v) in &trace.metadata {
        if k.contains('=') || k.contains('\n') || v.contains('\n') {
            return Err(TraceError::Malformed(format!("metadata entry {k:?} cannot be encoded")));
        }
        writeln!(w, "# {k}={v}")?;
    }
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(TRACE_HEADER)?;
    for r in &trace.records {
        wr.write_record([
            r.step.to_string(),
            real(r.batch_loss),
            real(r.full_loss),
            real(r.eta),
            r.inner_loops.to_string(),
            real(r.grad_norm),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_trace<R: BufRead>(mut r: R) -> Result<Trace, TraceError> {
    let mut metadata = Vec::new();
    let mut line = String::new();
    let header = loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(TraceError::Malformed("missing header".into()));
        }
        let l = line.trim_end_matches(['\n', '\r']);
        if let Some(rest) = l.strip_prefix('#') {
            let rest = rest.strip_prefix(' ').unwrap_or(rest);
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| TraceError::Malformed(format!("metadata line without '=': {l}")))?;
            metadata.push((k.to_string(), v.to_string()));
        } else {
            break l.to_string();
        }
    };
    if header != TRACE_HEADER.join(",") {
        return Err(TraceError::Malformed(format!("unexpected header {header:?}")));
    }
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(r);
    let mut records = Vec::new();
    for row in rd.deserialize() {
        records.push(row?);
    }
    Ok(Trace { metadata, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record() -> impl Strategy<Value = TraceRecord> {
        (1usize..10_000, any::<f64>(), any::<f64>(), 1e-30f64..1e30, 1usize..60, 0f64..1e10).prop_map(
            |(step, batch_loss, full_loss, eta, inner_loops, grad_norm)| TraceRecord {
                step,
                batch_loss: if batch_loss.is_finite() { batch_loss } else { 0.0 },
                full_loss: if full_loss.is_finite() { full_loss } else { 1.0 },
                eta,
                inner_loops,
                grad_norm,
            },
        )
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(records in proptest::collection::vec(record(), 0..40)) {
            let trace = Trace {
                metadata: vec![("optimizer".into(), "bfe".into()), ("config".into(), "{\"a\":1}".into())],
                records,
            };
            let mut buf = Vec::new();
            write_trace(&mut buf, &trace).unwrap();
            prop_assert_eq!(read_trace(&buf[..]).unwrap(), trace);
        }
    }

    #[test]
    fn layout() {
        let trace = Trace {
            metadata: vec![("seed".into(), "42".into())],
            records: vec![TraceRecord {
                step: 1,
                batch_loss: 0.5,
                full_loss: 0.25,
                eta: 0.001,
                inner_loops: 2,
                grad_norm: 3.0,
            }],
        };
        let mut buf = Vec::new();
        write_trace(&mut buf, &trace).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# seed=42");
        assert_eq!(lines[1], "step,batch_loss,full_loss,eta,inner_loops,grad_norm");
        assert_eq!(
            lines[2],
            "1,5.0000000000000000e-1,2.5000000000000000e-1,1.0000000000000000e-3,2,3.0000000000000000e0"
        );
    }

    #[test]
    fn rejects_bad_header() {
        assert!(matches!(read_trace(&b"a,b\n1,2\n"[..]), Err(TraceError::Malformed(_))));
        assert!(matches!(read_trace(&b"# nokey\n"[..]), Err(TraceError::Malformed(_))));
    }
}
