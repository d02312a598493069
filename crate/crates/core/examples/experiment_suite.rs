//! Every study at a small size, through the generic `Study` interface.

use rmtlab::experiments::*;

fn summarize(report: &ExperimentReport) {
    let tables: Vec<&str> = report.tables.iter().map(|t| t.name.as_str()).collect();
    let passed = report.checks.iter().filter(|c| c.passed).count();
    println!("{:<10} tables {:?}, checks {passed}/{}", report.experiment, tables, report.checks.len());
}

fn small<C: ExperimentConfig>(trials: usize) -> C {
    let mut c = C::default();
    c.apply(&Overrides {
        trials: Some(trials),
        ..Overrides::default()
    });
    c
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    summarize(&run_config::<HansonWright>(small(2500))?);
    summarize(&run_config::<NegCorr>(small(2500))?);
    summarize(&run_config::<CondInvLwo>(small(2500))?);
    summarize(&run_config::<LcdSurvey>(LcdSurveyConfig::default())?);
    summarize(&run_config::<SmallBallVsLcd>(small(2000))?);
    summarize(&run_config::<FourierChecks>(small(20))?);
    summarize(&run_config::<ThresholdSurvey>(small(1000))?);
    summarize(&run_config::<FlatnessAudit>(small(100))?);
    Ok(())
}
