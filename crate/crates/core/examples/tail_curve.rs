//! A Monte Carlo study through the library API, without the CLI.
//!
//! Prints the least singular value tail table as CSV, then the fit and checks.

use rmtlab::experiments::{tail_curve, TailConfig};
use rmtlab::stats::log_grid;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = TailConfig {
        n: 40,
        trials: 10_000,
        eps_grid: log_grid(1e-2, 1.0, 4),
        ..TailConfig::default()
    };
    let report = tail_curve(cfg)?;
    print!("{}", report.table("tail").unwrap().to_csv());
    if let Some(fit) = report.fit("loglog_slope") {
        println!("\nlog-log slope {:.3} over {} points", fit.slope, fit.points);
    }
    for check in &report.checks {
        println!("{}: {} ({})", check.name, if check.passed { "pass" } else { "fail" }, check.detail);
    }
    Ok(())
}
