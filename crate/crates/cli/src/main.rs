//! `stackguide` command line: synthesize or ingest a stack, generate views,
//! train, evaluate against the keypoint baseline, run trajectories.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use stackguide::Error;

#[derive(Debug, Parser)]
#[command(name = "stackguide", version, about = "Target localization from an image stack")]
pub struct Cli {
    /// Global seed; overrides every component seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; 1 gives bitwise-reproducible runs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Recipe {
    /// One base image.
    Weak,
    /// Two dates per appearance: A, A_snow, B, B_snow.
    Strong,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a procedural stack (rasters, world files, stack.toml).
    Synth {
        #[arg(long, value_enum, default_value = "weak")]
        recipe: Recipe,
    },
    /// Load and validate a stack, print per-image statistics.
    Ingest {
        #[arg(long)]
        stack: PathBuf,
    },
    /// Sample train/test views from a stack.
    Generate {
        #[arg(long)]
        stack: PathBuf,
        #[arg(long)]
        train: Option<usize>,
        #[arg(long)]
        test: Option<usize>,
        /// Comma-separated image ids allowed for training views.
        #[arg(long, value_delimiter = ',')]
        train_images: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        test_images: Option<Vec<String>>,
    },
    /// Train the network on a generated dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Override the number of adaptive-stage steps.
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Evaluate the learned model, and the baseline when a stack and reference are given.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        stack: Option<PathBuf>,
        #[arg(long)]
        reference: Option<String>,
        /// Number of heatmap overlays to write.
        #[arg(long)]
        overlays: Option<usize>,
    },
    /// Evaluate only the keypoint baseline.
    Baseline {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        stack: PathBuf,
        #[arg(long)]
        reference: Option<String>,
        /// Register without the camera prior.
        #[arg(long)]
        no_prior: bool,
    },
    /// Simulate trajectories, train on the first ones, judge the rest.
    Trajectory {
        #[arg(long)]
        stack: PathBuf,
        /// Use these weights instead of training on the train trajectories.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
        /// Reference image for judging the baseline as well.
        #[arg(long)]
        reference: Option<String>,
    },
    /// Print the tables of saved JSON reports.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Config(String),
    Input(String),
    Write(String),
}

impl CliError {
    /// 2 input data, 3 configuration, 4 numerical failure, 5 output.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Config(_) => 3,
            CliError::Write(_) => 5,
            CliError::Core(e) => match e {
                Error::UnreadableRaster { .. }
                | Error::MalformedWorldFile(_)
                | Error::UnsupportedBitDepth(_)
                | Error::SingularGeoTransform
                | Error::DimensionMismatch(_)
                | Error::ImageTooSmall { .. }
                | Error::Annotation { .. }
                | Error::Manifest(_)
                | Error::ShapeMismatch(_)
                | Error::TargetOutOfGrid { .. }
                | Error::WeightsFormat(_)
                | Error::EmptyInput(_)
                | Error::EmptyTrajectory
                | Error::EmptyResults
                | Error::Io(_) => 2,
                Error::InvalidConfig(_) | Error::InvalidCount(_) => 3,
                Error::SingularTransform
                | Error::PointAtInfinity(_)
                | Error::RejectionOverflow(_)
                | Error::NonFiniteActivation(_)
                | Error::NonFiniteGradient(_)
                | Error::DivergedLoss { .. }
                | Error::SupportOutOfBounds
                | Error::NotEnoughMatches(_)
                | Error::DegenerateConfiguration
                | Error::RansacFailed => 4,
                Error::WriteFailure { .. } => 5,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(m) => write!(f, "config: {m}"),
            CliError::Input(m) => write!(f, "input: {m}"),
            CliError::Write(m) => write!(f, "write: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
