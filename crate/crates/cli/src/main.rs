use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::FileConfig;

/// Error caused by the invocation rather than by the data; exits with 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser, Debug)]
#[command(name = "viewsynth", version, about = "Depth and ego-motion from view synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// TOML file with defaults keyed by long flag name.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; 1 gives bit-reproducible runs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Progress and timing on stderr.
    #[arg(long, global = true)]
    pub verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Render a synthetic sequence with ground truth.
    Synth(commands::synth::SynthArgs),
    /// Optimize depth, poses and masks for one snippet.
    Fit(commands::fit::FitArgs),
    /// Warp every source frame into the target view.
    Warp(commands::warp::WarpArgs),
    /// Compare analytic and finite-difference gradients.
    Gradcheck(commands::gradcheck::GradcheckArgs),
    /// Depth metrics with median scaling.
    EvalDepth(commands::eval::EvalDepthArgs),
    /// Scale-aligned snippet ATE.
    EvalOdom(commands::eval::EvalOdomArgs),
}

/// Resolved global settings.
pub struct Context {
    pub file: FileConfig,
    pub seed: u64,
    pub verbose: bool,
}

fn setup(global: &GlobalArgs) -> anyhow::Result<Context> {
    let file = match &global.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    if let Some(n) = global.threads.or(file.threads) {
        if n == 0 {
            return Err(UsageError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(Context {
        seed: config::pick(global.seed, file.seed, 0),
        verbose: global.verbose,
        file,
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let ctx = setup(&cli.global)?;
    match cli.command {
        Command::Synth(a) => commands::synth::run(&a, &ctx),
        Command::Fit(a) => commands::fit::run(&a, &ctx),
        Command::Warp(a) => commands::warp::run(&a, &ctx),
        Command::Gradcheck(a) => commands::gradcheck::run(&a, &ctx),
        Command::EvalDepth(a) => commands::eval::run_depth(&a, &ctx),
        Command::EvalOdom(a) => commands::eval::run_odom(&a, &ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
