use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "rmtlab", version, about = "Reproducible Monte Carlo studies of random symmetric matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment and write its report.
    Run {
        experiment: ExperimentKind,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Finish an interrupted run from its manifest.
    Resume {
        manifest: PathBuf,
        #[command(flatten)]
        exec: ExecOpts,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentKind {
    Tail,
    Gaps,
    Locallaw,
    Moments,
    Hw,
    Negcorr,
    Invlwo,
    Lcd,
    Smallball,
    Distid,
    Charfn,
    Threshold,
    Audit,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Tail => "tail",
            Self::Gaps => "gaps",
            Self::Locallaw => "locallaw",
            Self::Moments => "moments",
            Self::Hw => "hw",
            Self::Negcorr => "negcorr",
            Self::Invlwo => "invlwo",
            Self::Lcd => "lcd",
            Self::Smallball => "smallball",
            Self::Distid => "distid",
            Self::Charfn => "charfn",
            Self::Threshold => "threshold",
            Self::Audit => "audit",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(name, false).ok()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    /// Tables and plot data as CSV, plus the JSON report.
    #[default]
    Csv,
    /// The JSON report and the fitted-constants sidecar only.
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct RunOpts {
    /// TOML or JSON configuration; `.json` files are read as JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    /// Output root; the run goes to `<out>/<run-id>`.
    #[arg(long, env = "RMTLAB_OUT", default_value = "runs")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Defaults to the experiment name and a prefix of the config hash.
    #[arg(long)]
    pub run_id: Option<String>,
    #[command(flatten)]
    pub exec: ExecOpts,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ExecOpts {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Stop after computing this many units, leaving the run resumable.
    #[arg(long, hide = true)]
    pub stop_after: Option<usize>,
}
