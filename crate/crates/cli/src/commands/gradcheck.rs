use std::path::PathBuf;

use anyhow::bail;
use clap::Args;
use viewsynth::gradcheck::{run_gradcheck, GradcheckConfig};

use super::write_file;
use crate::config::pick;
use crate::{Context, UsageError};

#[derive(Args, Debug)]
pub struct GradcheckArgs {
    /// Number of accepted random instances.
    #[arg(long, default_value_t = 20)]
    pub instances: usize,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub lambda_s: Option<f64>,
    #[arg(long)]
    pub lambda_e: Option<f64>,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Negative control: corrupt the analytic pose gradient.
    #[arg(long, hide = true)]
    pub inject_gradient_bug: bool,
}

pub fn run(a: &GradcheckArgs, ctx: &Context) -> anyhow::Result<()> {
    let mut cfg = GradcheckConfig {
        instances: a.instances,
        seed: ctx.seed,
        inject_bug: a.inject_gradient_bug,
        ..Default::default()
    };
    cfg.loss.num_levels = pick(a.levels, ctx.file.levels, 2);
    cfg.loss.lambda_s = pick(a.lambda_s, ctx.file.lambda_s, cfg.loss.lambda_s);
    cfg.loss.lambda_e = pick(a.lambda_e, ctx.file.lambda_e, cfg.loss.lambda_e);
    if a.instances == 0 {
        return Err(UsageError("--instances must be at least 1".into()).into());
    }
    let report = run_gradcheck(&cfg)?;
    let text = report.format();
    if let Some(p) = &a.out {
        write_file(p, &text)?;
    }
    print!("{text}");
    if !report.passed() {
        bail!("gradient check failed (tolerance {:e})", report.tolerance);
    }
    Ok(())
}
