//! Command-line front end.
//!
//! `run <experiment>` resolves the configuration (flag over file over
//! default), hashes it and works through the study's units, persisting each
//! partial result under `<out>/<run-id>/units/`. The report is always
//! assembled from the persisted partials, so a run that was interrupted and
//! resumed writes the same bytes as one that ran straight through.
//!
//! Exit codes: 0 on success, 1 on usage, configuration or I/O errors, 2 when
//! the report contains a failed invariant check.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use thiserror::Error;

use crate::experiments::*;

mod args;
mod manifest;
mod output;

pub use args::{Cli, Command, ExecOpts, ExperimentKind, Format, RunOpts};
pub use manifest::{config_hash, RunManifest, Status, CONFIG_FILE, MANIFEST_FILE};
pub use output::{emit_plotdata, write_report, FITS_FILE, REPORT_FILE};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{count} invariant check(s) failed")]
    Invariant { count: usize },
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant { .. } => 2,
            _ => 1,
        }
    }
}

/// How a run ended when it did not fail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// All units ran and the report was written.
    Complete { dir: PathBuf },
    /// Stopped early by `--stop-after`; resume from the manifest.
    Partial { dir: PathBuf, done: usize, units: usize },
    /// Resume of a run that had already finished.
    AlreadyDone { dir: PathBuf },
}

/// Parse arguments, run and return the process exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(Outcome::Complete { dir }) => {
            println!("report written to {}", dir.display());
            0
        }
        Ok(Outcome::Partial { dir, done, units }) => {
            println!("stopped after {done} of {units} units; resume with {}", dir.join(MANIFEST_FILE).display());
            0
        }
        Ok(Outcome::AlreadyDone { dir }) => {
            println!("run in {} is already complete", dir.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Run { experiment, opts } => with_threads(&opts.exec, || dispatch_run(experiment, &opts)),
        Command::Resume { manifest, exec } => with_threads(&exec, || resume(&manifest, &exec)),
    }
}

fn with_threads<T>(exec: &ExecOpts, f: impl FnOnce() -> Result<T, CliError> + Send) -> Result<T, CliError>
where
    T: Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = exec.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    pool.install(f)
}

macro_rules! with_study {
    ($kind:expr, $f:ident ( $($arg:expr),* )) => {
        match $kind {
            ExperimentKind::Tail => $f::<TailCurve>($($arg),*),
            ExperimentKind::Gaps => $f::<Repulsion>($($arg),*),
            ExperimentKind::Locallaw => $f::<LocalLaw>($($arg),*),
            ExperimentKind::Moments => $f::<SpectralMoments>($($arg),*),
            ExperimentKind::Hw => $f::<HansonWright>($($arg),*),
            ExperimentKind::Negcorr => $f::<NegCorr>($($arg),*),
            ExperimentKind::Invlwo => $f::<CondInvLwo>($($arg),*),
            ExperimentKind::Lcd => $f::<LcdSurvey>($($arg),*),
            ExperimentKind::Smallball => $f::<SmallBallVsLcd>($($arg),*),
            ExperimentKind::Distid => $f::<Identities>($($arg),*),
            ExperimentKind::Charfn => $f::<FourierChecks>($($arg),*),
            ExperimentKind::Threshold => $f::<ThresholdSurvey>($($arg),*),
            ExperimentKind::Audit => $f::<FlatnessAudit>($($arg),*),
        }
    };
}

fn dispatch_run(kind: ExperimentKind, opts: &RunOpts) -> Result<Outcome, CliError> {
    with_study!(kind, run_study_cli(opts))
}

/// Read a config file: JSON for `.json`, TOML otherwise.
pub fn load_config<C: ExperimentConfig>(path: &Path) -> Result<C, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed = if is_json {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Usage(format!("cannot parse config {}: {e}", path.display())))
}

/// Compact JSON used for hashing.
pub fn canonical_config<C: ExperimentConfig>(config: &C) -> String {
    serde_json::to_string(config).expect("configs serialize")
}

fn resolve_config<S: Study>(opts: &RunOpts) -> Result<S::Config, CliError> {
    let mut config: S::Config = match &opts.config {
        Some(path) => load_config(path)?,
        None => S::Config::default(),
    };
    config.apply(&Overrides {
        seed: opts.seed,
        trials: opts.trials,
        n: opts.n,
    });
    config.validate()?;
    Ok(config)
}

fn run_study_cli<S: Study>(opts: &RunOpts) -> Result<Outcome, CliError> {
    let config = resolve_config::<S>(opts)?;
    let canonical = canonical_config(&config);
    let hash = config_hash(&canonical);
    let run_id = opts.run_id.clone().unwrap_or_else(|| format!("{}-{}", S::NAME, &hash[..12]));
    if run_id.is_empty() || run_id.contains(['/', '\\']) || run_id == "." || run_id == ".." {
        return Err(CliError::Usage(format!("invalid run id {run_id:?}")));
    }
    let dir = opts.out.join(&run_id);
    let study = S::new(config)?;

    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest = if manifest_path.exists() {
        let mut m = RunManifest::load(&manifest_path)?;
        if m.config_hash != hash || m.experiment != S::NAME {
            return Err(CliError::Usage(format!(
                "{} holds a different run; pick another --run-id or --out",
                dir.display()
            )));
        }
        if m.units.len() != study.units() {
            return Err(CliError::Usage(format!("corrupted manifest {}: unit count", manifest_path.display())));
        }
        if m.status == Status::Done && m.format == opts.format {
            return Ok(Outcome::AlreadyDone { dir });
        }
        m.format = opts.format;
        m
    } else {
        fs::create_dir_all(dir.join(manifest::UNITS_DIR)).map_err(|e| CliError::io(&dir, e))?;
        let pretty = serde_json::to_string_pretty(study.config()).expect("configs serialize") + "\n";
        output::write_atomic(&dir.join(CONFIG_FILE), pretty.as_bytes())?;
        let m = RunManifest::new(&run_id, S::NAME, &hash, opts.format, study.units());
        m.save(&dir)?;
        m
    };
    drive(&study, manifest, &dir, opts.format, opts.exec.stop_after)
}

fn resume(manifest_path: &Path, exec: &ExecOpts) -> Result<Outcome, CliError> {
    let manifest = RunManifest::load(manifest_path)?;
    let kind = ExperimentKind::from_name(&manifest.experiment).ok_or_else(|| {
        CliError::Usage(format!(
            "corrupted manifest {}: unknown experiment {:?}",
            manifest_path.display(),
            manifest.experiment
        ))
    })?;
    let dir = manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    with_study!(kind, resume_study(manifest, &dir, exec))
}

fn resume_study<S: Study>(manifest: RunManifest, dir: &Path, exec: &ExecOpts) -> Result<Outcome, CliError> {
    let config: S::Config = load_config(&dir.join(CONFIG_FILE))?;
    let hash = config_hash(&canonical_config(&config));
    if hash != manifest.config_hash {
        return Err(CliError::Usage(format!(
            "config hash mismatch in {}: manifest has {}, config gives {hash}",
            dir.display(),
            manifest.config_hash
        )));
    }
    if manifest.status == Status::Done {
        return Ok(Outcome::AlreadyDone { dir: dir.to_path_buf() });
    }
    let study = S::new(config)?;
    if manifest.units.len() != study.units() {
        return Err(CliError::Usage(format!("corrupted manifest in {}: unit count", dir.display())));
    }
    let format = manifest.format;
    drive(&study, manifest, dir, format, exec.stop_after)
}

fn drive<S: Study>(
    study: &S,
    mut manifest: RunManifest,
    dir: &Path,
    format: Format,
    stop_after: Option<usize>,
) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let units = study.units();
    let mut computed = 0;
    for i in 0..units {
        let path = manifest::unit_path(dir, i);
        if manifest.units[i] == Status::Done && path.exists() {
            continue;
        }
        if stop_after.is_some_and(|s| computed >= s) {
            manifest.save(dir)?;
            return Ok(Outcome::Partial {
                dir: dir.to_path_buf(),
                done: manifest.done_units(),
                units,
            });
        }
        match study.run_unit(i) {
            Ok(partial) => {
                let text = serde_json::to_string(&partial).expect("partials serialize");
                output::write_atomic(&path, text.as_bytes())?;
                manifest.units[i] = Status::Done;
                manifest.save(dir)?;
                computed += 1;
            }
            Err(e) => {
                manifest.units[i] = Status::Failed;
                manifest.status = Status::Failed;
                manifest.save(dir)?;
                return Err(e.into());
            }
        }
    }

    let partials = (0..units)
        .map(|i| {
            let path = manifest::unit_path(dir, i);
            let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("corrupted unit file {}: {e}", path.display())))
        })
        .collect::<Result<Vec<S::Partial>, CliError>>()?;
    let report = study.assemble(partials)?;
    let written = write_report(&report, dir, format)?;

    manifest.outputs = written
        .iter()
        .filter_map(|p| p.strip_prefix(dir).ok())
        .map(|p| p.to_string_lossy().into_owned())
        .collect();
    manifest.status = Status::Done;
    manifest.finished_unix = Some(manifest::now_unix());
    manifest.wall_clock_seconds = Some(started.elapsed().as_secs_f64());
    manifest.save(dir)?;

    for check in &report.checks {
        let kind = match check.kind {
            CheckKind::Invariant => "invariant",
            CheckKind::Expectation => "expectation",
        };
        let mark = if check.passed { "pass" } else { "FAIL" };
        println!("[{mark}] {kind} {}: {}", check.name, check.detail);
    }
    let failed = report.failed_invariants().len();
    if failed > 0 {
        return Err(CliError::Invariant { count: failed });
    }
    Ok(Outcome::Complete { dir: dir.to_path_buf() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn study_name<S: Study>() -> &'static str {
        S::NAME
    }

    #[test]
    fn kinds_match_study_names() {
        use clap::ValueEnum;
        for kind in ExperimentKind::value_variants() {
            assert_eq!(with_study!(*kind, study_name()), kind.name());
            assert_eq!(ExperimentKind::from_name(kind.name()), Some(*kind));
        }
    }

    #[test]
    fn unknown_subcommand_is_usage_error() {
        assert_eq!(main(["rmtlab", "run", "nope"]), 1);
        assert_eq!(main(["rmtlab", "frobnicate"]), 1);
    }

    #[test]
    fn missing_config_names_path() {
        let opts = RunOpts::try_from_args(&["--config", "/nonexistent/x.toml"]);
        let err = resolve_config::<TailCurve>(&opts).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.toml"));
        assert_eq!(err.exit_code(), 1);
    }

    impl RunOpts {
        fn try_from_args(extra: &[&str]) -> Self {
            let mut args = vec!["rmtlab", "run", "tail"];
            args.extend_from_slice(extra);
            match Cli::try_parse_from(args).unwrap().command {
                Command::Run { opts, .. } => opts,
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn configs_round_trip_through_toml_and_json() {
        fn check<C: ExperimentConfig>() {
            let c = C::default();
            let toml_text = toml::to_string(&c).unwrap();
            let back: C = toml::from_str(&toml_text).unwrap();
            assert_eq!(config_hash(&canonical_config(&back)), config_hash(&canonical_config(&c)));
            let back: C = serde_json::from_str(&canonical_config(&c)).unwrap();
            assert_eq!(back, c);
        }
        check::<TailConfig>();
        check::<GapsConfig>();
        check::<LocalLawConfig>();
        check::<MomentsConfig>();
        check::<HwConfig>();
        check::<NegCorrConfig>();
        check::<InvLwoConfig>();
        check::<LcdSurveyConfig>();
        check::<SmallBallConfig>();
        check::<DistIdConfig>();
        check::<CharFnConfig>();
        check::<ThresholdConfig>();
        check::<AuditConfig>();
    }
}
