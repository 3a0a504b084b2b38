//! Label files (one integer per site per line) and trace CSVs.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sampler::{ChainTrace, TraceRecord};

pub fn labels_to_text(labels: &[usize]) -> String {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    out
}

pub fn parse_labels(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, l)| {
            l.trim()
                .parse()
                .map_err(|_| Error::parse(idx + 1, format!("invalid label '{}'", l.trim())))
        })
        .collect()
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    std::fs::write(path, labels_to_text(labels))?;
    Ok(())
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    parse_labels(&std::fs::read_to_string(path)?)
}

pub const TRACE_HEADER: &str = "iteration,log_posterior_unnorm,k,seconds";

/// CSV rendering of a trace. With `timing` off the seconds column is
/// written as 0 so that equal seeds give byte-identical files.
pub fn trace_to_csv(trace: &ChainTrace, timing: bool) -> String {
    let mut out = String::with_capacity(trace.records.len() * 32);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for (r, &t) in trace.records.iter().zip(&trace.elapsed) {
        let secs = if timing { t } else { 0.0 };
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.iteration, r.log_posterior, r.n_clusters, secs
        );
    }
    out
}

pub fn write_trace_csv(path: impl AsRef<Path>, trace: &ChainTrace, timing: bool) -> Result<()> {
    std::fs::write(path, trace_to_csv(trace, timing))?;
    Ok(())
}

/// Parses a trace CSV into records and elapsed seconds.
pub fn parse_trace_csv(text: &str) -> Result<(Vec<TraceRecord>, Vec<f64>)> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        _ => return Err(Error::parse(1, format!("expected header '{TRACE_HEADER}'"))),
    }
    let mut records = Vec::new();
    let mut elapsed = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let ln = idx + 1;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::parse(
                ln,
                format!("expected 4 columns, found {}", cols.len()),
            ));
        }
        let bad = |what: &str| Error::parse(ln, format!("invalid {what}"));
        records.push(TraceRecord {
            iteration: cols[0].parse().map_err(|_| bad("iteration"))?,
            log_posterior: cols[1].parse().map_err(|_| bad("log posterior"))?,
            n_clusters: cols[2].parse().map_err(|_| bad("cluster count"))?,
        });
        elapsed.push(cols[3].parse().map_err(|_| bad("seconds"))?);
    }
    Ok((records, elapsed))
}
