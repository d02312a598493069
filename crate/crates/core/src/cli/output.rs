use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::args::Format;
use super::CliError;
use crate::experiments::ExperimentReport;

pub const REPORT_FILE: &str = "report.json";
pub const FITS_FILE: &str = "fits.json";

/// Write through a temporary file and rename, so readers never see half a file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// File-name safe version of a table or plot name.
fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Per-figure CSVs `plot_<name>.csv` and the fitted-constants sidecar.
pub fn emit_plotdata(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for plot in &report.plots {
        let path = dir.join(format!("plot_{}.csv", file_stem(&plot.name)));
        write_atomic(&path, plot.to_csv().as_bytes())?;
        written.push(path);
    }
    written.push(write_fits(report, dir)?);
    Ok(written)
}

fn write_fits(report: &ExperimentReport, dir: &Path) -> Result<PathBuf, CliError> {
    let path = dir.join(FITS_FILE);
    let text = serde_json::to_string_pretty(&report.fitted_summary()).expect("summary serializes") + "\n";
    write_atomic(&path, text.as_bytes())?;
    Ok(path)
}

/// Write the report in the requested format and return the files written.
pub fn write_report(report: &ExperimentReport, dir: &Path, format: Format) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    let path = dir.join(REPORT_FILE);
    let text = serde_json::to_string_pretty(report).expect("reports serialize") + "\n";
    write_atomic(&path, text.as_bytes())?;
    written.push(path);
    match format {
        Format::Csv => {
            for table in &report.tables {
                let path = dir.join(format!("{}.csv", file_stem(&table.name)));
                write_atomic(&path, table.to_csv().as_bytes())?;
                written.push(path);
            }
            written.extend(emit_plotdata(report, dir)?);
        }
        Format::Json => written.push(write_fits(report, dir)?),
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::Plot;

    #[test]
    fn stems_are_sanitized() {
        assert_eq!(file_stem("a b/c"), "a_b_c");
        assert_eq!(file_stem("gaps_l1"), "gaps_l1");
    }

    #[test]
    fn empty_plot_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let mut report = ExperimentReport::new("tail", serde_json::Value::Null);
        report.plots.push(Plot::new("tail", "epsilon", "p_hat", "edelman_ref"));
        let files = emit_plotdata(&report, dir.path()).unwrap();
        let csv = fs::read_to_string(&files[0]).unwrap();
        assert_eq!(csv.lines().count(), 1);
        assert!(csv.starts_with("epsilon,p_hat,ci_low,ci_high,edelman_ref"));
    }
}
