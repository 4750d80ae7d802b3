//! Shared helpers for the command implementations.

use odsample::ExchangeTrace;

use crate::error::{CliError, Result};

/// Resolves the run seed: `--seed` wins, then `ODSAMPLE_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("ODSAMPLE_SEED") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("ODSAMPLE_SEED='{text}' is not an integer"))),
        Err(_) => Ok(0),
    }
}

pub const TRACE_HEADER: &str =
    "iteration,status,removed,added,removed_score,added_score,swap_leverage,log_det_after\n";

/// Renders a trace in the fixed `trace.csv` schema.
pub fn render_trace(rows: &[ExchangeTrace]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(TRACE_HEADER);
    for r in rows {
        let added = r.added.map(|a| a.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.iteration,
            r.status,
            r.removed,
            added,
            r.removed_score,
            r.added_score,
            r.swap_leverage,
            r.log_det_after
        ));
    }
    out
}

/// Renders `sample.idx`: ascending indices, one per line.
pub fn render_sample(sample: &[usize]) -> String {
    let mut out = String::with_capacity(8 * sample.len());
    for &i in sample {
        out.push_str(&i.to_string());
        out.push('\n');
    }
    out
}
