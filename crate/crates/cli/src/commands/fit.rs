use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use viewsynth::eval::{depth_metrics, save_trajectory, snippet_ate, Trajectory};
use viewsynth::losses::LossConfig;
use viewsynth::model::{fit_snippet, init_state, save_checkpoint, AdamConfig, Checkpoint, StateConfig};
use viewsynth::synth::{load_sequence, save_image};
use viewsynth::Image;

use super::{create_dir, write_file};
use crate::config::pick;
use crate::{Context, UsageError};

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Sequence directory or manifest.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub levels: Option<usize>,
    #[arg(long)]
    pub lambda_s: Option<f64>,
    #[arg(long)]
    pub lambda_e: Option<f64>,
    /// Plain photometric loss without masks.
    #[arg(long)]
    pub no_explainability: bool,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

pub fn run(a: &FitArgs, ctx: &Context) -> anyhow::Result<()> {
    let f = &ctx.file;
    let loss_defaults = LossConfig::default();
    let adam_defaults = AdamConfig::default();
    let loss = LossConfig {
        lambda_s: pick(a.lambda_s, f.lambda_s, loss_defaults.lambda_s),
        lambda_e: pick(a.lambda_e, f.lambda_e, loss_defaults.lambda_e),
        num_levels: pick(a.levels, f.levels, loss_defaults.num_levels),
        use_explainability: !(a.no_explainability || f.no_explainability.unwrap_or(false)),
        ..loss_defaults
    };
    let adam = AdamConfig {
        lr: pick(a.lr, f.lr, adam_defaults.lr),
        max_iters: pick(a.max_iters, f.max_iters, adam_defaults.max_iters),
        seed: ctx.seed,
        ..adam_defaults
    };
    loss.validate().map_err(|e| UsageError(e.to_string()))?;
    adam.validate().map_err(|e| UsageError(e.to_string()))?;

    let seq = load_sequence(&a.input)?;
    let state = init_state(
        &seq.images,
        seq.target_index,
        &seq.intrinsics,
        &StateConfig {
            num_levels: loss.num_levels,
            ..Default::default()
        },
    )?;
    let started = Instant::now();
    let fit = fit_snippet(state, &loss, &adam)?;
    if ctx.verbose {
        eprintln!("fit: {} iterations in {:.2?}", fit.history.len(), started.elapsed());
    }

    create_dir(&a.out)?;
    let st = &fit.state;
    let (h, w) = (st.depth.height(), st.depth.width());
    let depth = Image::new(h, w, 1, st.depth.depth())?;
    save_image(&depth, a.out.join("depth.wf"))?;
    let trajectory = Trajectory::new(st.trajectory()?);
    save_trajectory(&trajectory, a.out.join("poses.txt"))?;
    if loss.use_explainability {
        for (s, &frame) in st.source_indices().iter().enumerate() {
            let field = &st.masks[0][s];
            let mask = Image::new(field.height(), field.width(), 1, field.mask())?;
            save_image(&mask, a.out.join(format!("mask_{frame:03}.wf")))?;
        }
    }
    let mut history = String::new();
    for e in &fit.history {
        writeln!(history, "{} {:?}", e.iter, e.total)?;
    }
    write_file(&a.out.join("loss_history.txt"), history)?;
    save_checkpoint(&Checkpoint::from_state(st), a.out.join("checkpoint.bin"))?;

    let report = &fit.final_report;
    let mut out = String::new();
    writeln!(out, "iterations {}", fit.history.len())?;
    writeln!(out, "converged {}", fit.converged)?;
    writeln!(out, "initial_loss {:?}", fit.history.first().map_or(f64::NAN, |e| e.total))?;
    writeln!(out, "final_loss {:?}", report.total)?;
    writeln!(out, "final_vs {:?}", report.total_vs())?;
    writeln!(out, "final_vs_level0 {:?}", report.vs[0])?;
    writeln!(out, "mean_mask {:?}", st.mean_mask())?;
    for (s, p) in st.poses.iter().enumerate() {
        let a = p.to_array();
        writeln!(
            out,
            "pose_{:03} {:?} {:?} {:?} {:?} {:?} {:?}",
            st.source_indices()[s],
            a[0],
            a[1],
            a[2],
            a[3],
            a[4],
            a[5]
        )?;
    }
    if let Some(gt) = &seq.gt_depths {
        let m = depth_metrics(&depth, &gt[seq.target_index], None, &Default::default())?;
        writeln!(out, "abs_rel {:?}", m.abs_rel)?;
        writeln!(out, "depth_scale {:?}", m.scale)?;
    }
    if let Some(gt) = &seq.gt_poses {
        let ate = snippet_ate(&trajectory, &Trajectory::new(gt.clone()))?;
        writeln!(out, "ate {:?}", ate.ate)?;
    }
    write_file(&a.out.join("report.txt"), &out)?;
    print!("{out}");
    Ok(())
}
