//! Result and summary tables.

use std::io::Write;
use std::path::Path;

use formflow::io::mm::format_f64;
use formflow::io::table::{write_file, write_results, ResultRow};

use crate::error::{CliError, CliResult};
use crate::pipeline::DirectionSummary;

pub const SUMMARY_HEADER: &str = "direction,ok,failed,mean_k_m2,std_k_m2,min_k_m2,max_k_m2";

pub fn summary_csv(summary: &[DirectionSummary]) -> String {
    let mut s = format!("{SUMMARY_HEADER}\n");
    for d in summary {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            d.direction,
            d.ok,
            d.failed,
            format_f64(d.mean),
            format_f64(d.std),
            format_f64(d.min),
            format_f64(d.max)
        ));
    }
    s
}

pub fn write_results_file(path: &Path, rows: &[ResultRow]) -> CliResult<()> {
    Ok(write_file(path, |w| write_results(w, rows))?)
}

pub fn write_summary_file(path: &Path, summary: &[DirectionSummary]) -> CliResult<()> {
    let text = summary_csv(summary);
    Ok(write_file(path, |w| {
        w.write_all(text.as_bytes()).expect("write to Vec");
        Ok(())
    })?)
}

/// Writes `text` to stdout, reporting a closed pipe as an output error.
pub fn print(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|source| CliError::Output { path: "stdout".into(), source })
}
